//! Truncated Taylor series ("jets") of a scalar function.
//!
//! A jet of order `K` anchored at `a` stores `f(a), f'(a), f''(a)/2!, ...,
//! f^(K)(a)/K!`. Storing Taylor-normalized coefficients keeps magnitudes
//! bounded for the orders used in probability generating functions, where
//! raw derivatives overflow long before `K = 64`.

use std::ops::{Add, Mul, Neg, Sub};
use std::rc::Rc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    anchor: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn from_coeffs(anchor: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least the constant term");
        Self { anchor, coeffs }
    }

    pub fn constant(anchor: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Self { anchor, coeffs }
    }

    /// The identity function `h -> anchor + h`.
    pub fn variable(anchor: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = anchor;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Self { anchor, coeffs }
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `k`-th derivative at the anchor (undoes the factorial normalization).
    pub fn derivative(&self, k: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.coeff(k) * fact
    }

    pub fn truncate(&self, order: usize) -> Jet {
        let n = (order + 1).min(self.coeffs.len());
        Jet::from_coeffs(self.anchor, self.coeffs[..n].to_vec())
    }

    pub fn scale(&self, c: f64) -> Jet {
        Jet::from_coeffs(self.anchor, self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn add_scalar(&self, c: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    /// Re-expands in a new variable `z` with `s = offset + slope * z`.
    ///
    /// The jet must be anchored at `offset`; the result is anchored at `z = 0`.
    pub fn compose_affine(&self, slope: f64) -> Jet {
        let mut pow = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let c = a * pow;
                pow *= slope;
                c
            })
            .collect();
        Jet::from_coeffs(0.0, coeffs)
    }

    /// Divides by `(s - anchor)`; the constant term must vanish. Loses one order.
    pub fn shift_down(&self) -> Jet {
        if self.coeffs.len() == 1 {
            return Jet::constant(self.anchor, 0.0, 0);
        }
        Jet::from_coeffs(self.anchor, self.coeffs[1..].to_vec())
    }

    pub fn checked_div(&self, rhs: &Jet) -> Result<Jet> {
        let b0 = rhs.coeffs[0];
        if b0 == 0.0 || !b0.is_finite() {
            return Err(Error::ZeroConstantTermDivision);
        }
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut c = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * c[k - j];
            }
            c[k] = acc / b0;
        }
        Ok(Jet::from_coeffs(self.anchor, c))
    }

    pub fn recip(&self) -> Result<Jet> {
        Jet::constant(self.anchor, 1.0, self.order()).checked_div(self)
    }

    pub fn exp(&self) -> Jet {
        let a = &self.coeffs;
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += j as f64 * a[j] * b[k - j];
            }
            b[k] = acc / k as f64;
        }
        Jet::from_coeffs(self.anchor, b)
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = &self.coeffs;
        if a[0] <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "logarithm of a jet with constant term {}",
                a[0]
            )));
        }
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].ln();
        for k in 1..n {
            let mut acc = a[k];
            for j in 1..k {
                acc -= (j as f64 / k as f64) * b[j] * a[k - j];
            }
            b[k] = acc / a[0];
        }
        Ok(Jet::from_coeffs(self.anchor, b))
    }

    /// `self^p` for a jet with positive constant term.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let a = &self.coeffs;
        if a[0] <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "real power of a jet with constant term {}",
                a[0]
            )));
        }
        let n = a.len();
        let mut b = vec![0.0; n];
        b[0] = a[0].powf(p);
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (p * j as f64 - (k - j) as f64) * a[j] * b[k - j];
            }
            b[k] = acc / (k as f64 * a[0]);
        }
        Ok(Jet::from_coeffs(self.anchor, b))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.powf(0.5)
    }

    /// Evaluates the truncated polynomial at offset `h` from the anchor.
    pub fn eval_offset(&self, h: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * h + c)
    }

    fn zip_with(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(
            self.anchor == rhs.anchor || self.anchor.is_nan() || rhs.anchor.is_nan(),
            "jets anchored at different points"
        );
        let n = self.coeffs.len().min(rhs.coeffs.len());
        Jet::from_coeffs(
            self.anchor,
            (0..n).map(|k| f(self.coeffs[k], rhs.coeffs[k])).collect(),
        )
    }

    fn cauchy(&self, rhs: &Jet) -> Jet {
        let n = self.coeffs.len().min(rhs.coeffs.len());
        let mut c = vec![0.0; n];
        for (i, ai) in self.coeffs.iter().take(n).enumerate() {
            if *ai == 0.0 {
                continue;
            }
            for (j, bj) in rhs.coeffs.iter().take(n - i).enumerate() {
                c[i + j] += ai * bj;
            }
        }
        Jet::from_coeffs(self.anchor, c)
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.cauchy(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Arithmetic expression over jets. Sub-expressions are reference counted so a
/// node may feed several parents.
#[derive(Debug, Clone)]
pub enum JetExpr {
    Leaf(Jet),
    Const(f64),
    Add(Rc<JetExpr>, Rc<JetExpr>),
    Sub(Rc<JetExpr>, Rc<JetExpr>),
    Mul(Rc<JetExpr>, Rc<JetExpr>),
    Div(Rc<JetExpr>, Rc<JetExpr>),
    Exp(Rc<JetExpr>),
    /// Substitute `s = anchor + slope * z`, re-anchoring at `z = 0`.
    Affine { inner: Rc<JetExpr>, slope: f64 },
}

impl JetExpr {
    pub fn leaf(j: Jet) -> Rc<JetExpr> {
        Rc::new(JetExpr::Leaf(j))
    }

    pub fn constant(c: f64) -> Rc<JetExpr> {
        Rc::new(JetExpr::Const(c))
    }
}

/// Evaluates a jet expression with truncated-series arithmetic.
///
/// Constants adopt the order and anchor of the jet they combine with; an
/// expression made only of constants evaluates to an order-0 jet.
pub fn jet_combine(expr: &JetExpr) -> Result<Jet> {
    enum V {
        C(f64),
        J(Jet),
    }
    fn lift(v: V, like: &Jet) -> Jet {
        match v {
            V::C(c) => Jet::constant(like.anchor(), c, like.order()),
            V::J(j) => j,
        }
    }
    fn binary(a: V, b: V, op: &dyn Fn(&Jet, &Jet) -> Result<Jet>) -> Result<V> {
        match (a, b) {
            (V::C(x), V::C(y)) => {
                let r = op(&Jet::constant(0.0, x, 0), &Jet::constant(0.0, y, 0))?;
                Ok(V::C(r.value()))
            }
            (V::J(x), b) => {
                let y = lift(b, &x);
                Ok(V::J(op(&x, &y)?))
            }
            (a, V::J(y)) => {
                let x = lift(a, &y);
                Ok(V::J(op(&x, &y)?))
            }
        }
    }
    fn go(e: &JetExpr) -> Result<V> {
        Ok(match e {
            JetExpr::Leaf(j) => V::J(j.clone()),
            JetExpr::Const(c) => V::C(*c),
            JetExpr::Add(a, b) => binary(go(a)?, go(b)?, &|x, y| Ok(x + y))?,
            JetExpr::Sub(a, b) => binary(go(a)?, go(b)?, &|x, y| Ok(x - y))?,
            JetExpr::Mul(a, b) => binary(go(a)?, go(b)?, &|x, y| Ok(x * y))?,
            JetExpr::Div(a, b) => binary(go(a)?, go(b)?, &|x, y| x.checked_div(y))?,
            JetExpr::Exp(a) => match go(a)? {
                V::C(c) => V::C(c.exp()),
                V::J(j) => V::J(j.exp()),
            },
            JetExpr::Affine { inner, slope } => match go(inner)? {
                V::C(c) => V::C(c),
                V::J(j) => V::J(j.compose_affine(*slope)),
            },
        })
    }
    Ok(match go(expr)? {
        V::C(c) => Jet::constant(0.0, c, 0),
        V::J(j) => j,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn geometric_ratio() {
        // (1 + z) / (1 - z) = 1 + 2z + 2z^2 + ...
        let z = JetExpr::leaf(Jet::variable(0.0, 2));
        let one = JetExpr::constant(1.0);
        let e = JetExpr::Div(
            Rc::new(JetExpr::Add(one.clone(), z.clone())),
            Rc::new(JetExpr::Sub(one, z)),
        );
        let j = jet_combine(&e).unwrap();
        assert_eq!(j.coeffs(), &[1.0, 2.0, 2.0]);
    }

    #[test]
    fn exponential_of_scaled_variable() {
        // e^{-s x} at s = 0, x = 2/3
        let x = 2.0 / 3.0;
        let j = Jet::variable(0.0, 2).scale(-x).exp();
        assert_relative_eq!(j.coeff(0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(j.coeff(1), -2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(j.coeff(2), 2.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn division_by_zero_constant_is_an_error() {
        let z = Jet::variable(0.0, 3);
        assert_eq!(z.recip(), Err(Error::ZeroConstantTermDivision));
        let e = JetExpr::Div(JetExpr::constant(1.0), JetExpr::leaf(z));
        assert!(matches!(jet_combine(&e), Err(Error::ZeroConstantTermDivision)));
    }

    #[test]
    fn power_and_log_agree_with_closed_forms() {
        // (1 + 50 s)^{-0.01} at s = 0.2
        let v = Jet::variable(0.2, 4).scale(50.0).add_scalar(1.0);
        let p = v.powf(-0.01).unwrap();
        let base: f64 = 11.0;
        assert_relative_eq!(p.value(), base.powf(-0.01), max_relative = 1e-14);
        assert_relative_eq!(p.derivative(1), -0.01 * 50.0 * base.powf(-1.01), max_relative = 1e-13);
        assert_relative_eq!(
            p.derivative(2),
            0.01 * 1.01 * 2500.0 * base.powf(-2.01),
            max_relative = 1e-12
        );
        let l = v.ln().unwrap().scale(-0.01).exp();
        for k in 0..=4 {
            assert_relative_eq!(l.coeff(k), p.coeff(k), max_relative = 1e-12);
        }
    }

    #[test]
    fn shift_down_and_affine_compose() {
        let j = Jet::from_coeffs(1.0, vec![0.0, 3.0, 5.0]);
        assert_eq!(j.shift_down().coeffs(), &[3.0, 5.0]);
        let a = Jet::from_coeffs(0.5, vec![1.0, 1.0, 1.0]).compose_affine(-2.0);
        assert_eq!(a.coeffs(), &[1.0, -2.0, 4.0]);
    }

    fn poly_mul(p: &[f64], q: &[f64], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; k + 1];
        for (i, a) in p.iter().enumerate() {
            for (j, b) in q.iter().enumerate() {
                if i + j <= k {
                    out[i + j] += a * b;
                }
            }
        }
        out
    }

    proptest! {
        #[test]
        fn product_matches_polynomial_product(
            p in prop::collection::vec(-4i32..5, 1..8),
            q in prop::collection::vec(-4i32..5, 1..8),
        ) {
            let k = p.len().max(q.len()) - 1;
            let pad = |v: &[i32]| {
                let mut c: Vec<f64> = v.iter().map(|&x| x as f64).collect();
                c.resize(k + 1, 0.0);
                c
            };
            let (pc, qc) = (pad(&p), pad(&q));
            let prod = &Jet::from_coeffs(0.0, pc.clone()) * &Jet::from_coeffs(0.0, qc.clone());
            // integer inputs: exact equality
            let expected = poly_mul(&pc, &qc, k);
            prop_assert_eq!(prod.coeffs(), expected.as_slice());
        }

        #[test]
        fn division_inverts_multiplication(
            p in prop::collection::vec(-3.0f64..3.0, 6),
            q0 in 0.5f64..3.0,
            q in prop::collection::vec(-3.0f64..3.0, 5),
        ) {
            let mut qc = vec![q0];
            qc.extend(q);
            let a = Jet::from_coeffs(0.0, p.clone());
            let b = Jet::from_coeffs(0.0, qc);
            let back = (&a * &b).checked_div(&b).unwrap();
            for k in 0..6 {
                prop_assert!((back.coeff(k) - p[k]).abs() < 1e-8 * (1.0 + p[k].abs()) * 10f64.powi(k as i32));
            }
            let one = a.add_scalar(5.0 - a.value()).checked_div(&a.add_scalar(5.0 - a.value())).unwrap();
            prop_assert!((one.value() - 1.0).abs() < 1e-14);
            for k in 1..6 {
                prop_assert!(one.coeff(k).abs() < 1e-9);
            }
        }
    }
}
