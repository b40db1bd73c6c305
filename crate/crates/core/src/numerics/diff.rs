//! Finite differences with Richardson extrapolation (Ridders' tableau).

use crate::error::{Error, Result};

const TABLEAU: usize = 10;
const SHRINK: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

fn finite_at(x: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

/// Ridders extrapolation of a difference quotient `d(h)` with error series in
/// powers of `h^step_power`. Returns the estimate and its error.
fn ridders<D>(d: D, h0: f64, step_power: i32) -> Result<(f64, f64)>
where
    D: Fn(f64) -> Result<f64>,
{
    let ratio = SHRINK.powi(step_power);
    let mut table = vec![vec![0.0; TABLEAU]; TABLEAU];
    let mut h = h0;
    table[0][0] = d(h)?;
    let mut best = table[0][0];
    let mut err = f64::INFINITY;
    for i in 1..TABLEAU {
        h /= SHRINK;
        table[0][i] = d(h)?;
        let mut fac = ratio;
        for j in 1..=i {
            table[j][i] = (table[j - 1][i] * fac - table[j - 1][i - 1]) / (fac - 1.0);
            fac *= ratio;
            let e = (table[j][i] - table[j - 1][i])
                .abs()
                .max((table[j][i] - table[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = table[j][i];
            }
        }
        if (table[i][i] - table[i - 1][i - 1]).abs() >= 2.0 * err {
            break;
        }
    }
    Ok((best, err))
}

/// Central difference derivative of order 1 or 2 at `x`.
pub fn finite_difference<F>(f: F, x: f64, order: Order) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h0 = 0.1 * x.abs().max(1.0);
    let g = |t: f64| -> Result<f64> { finite_at(t, f(t)?) };
    let (v, _) = match order {
        Order::First => ridders(|h| Ok((g(x + h)? - g(x - h)?) / (2.0 * h)), h0, 2)?,
        Order::Second => {
            let fx = g(x)?;
            ridders(|h| Ok((g(x + h)? - 2.0 * fx + g(x - h)?) / (h * h)), h0, 2)?
        }
    };
    finite_at(x, v)
}

/// One-sided first derivative at `x` from the right, given the exact value
/// `f(x)` (useful where `f` is only defined for arguments above `x`).
pub fn right_derivative<F>(f: F, x: f64, fx: f64, h0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let g = |t: f64| -> Result<f64> { finite_at(t, f(t)?) };
    let (v, _) = ridders(|h| Ok((g(x + h)? - fx) / h), h0, 1)?;
    finite_at(x, v)
}
