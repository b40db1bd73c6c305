//! Golden-section search for a bracketed, unimodal objective.

use serde::Serialize;

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MONOTONE_PROBES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
            return Err(Error::InvalidParameter(format!("bracket [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Set when the objective showed no interior minimum on the bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotone {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub argmin: f64,
    pub value: f64,
    pub monotone: Option<Monotone>,
}

fn finite(x: f64, fx: f64) -> Result<f64> {
    if fx.is_finite() {
        Ok(fx)
    } else {
        Err(Error::NonFinite { at: x })
    }
}

/// Minimizes `f` on `bracket` to `|argmin - x*| <= tol * width`.
///
/// The bracket is probed on a coarse grid first. When the probes are monotone
/// and the refined minimum lands on an endpoint, that endpoint is returned with
/// the direction flag set.
pub fn minimize_unimodal<F>(f: F, bracket: Bracket, tol: f64) -> Result<Minimum>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol}")));
    }
    let (lo, hi) = (bracket.lo, bracket.hi);
    let eval = |x: f64| -> Result<f64> { finite(x, f(x)?) };

    let probes: Vec<(f64, f64)> = (0..MONOTONE_PROBES)
        .map(|k| {
            let x = lo + bracket.width() * k as f64 / (MONOTONE_PROBES - 1) as f64;
            eval(x).map(|v| (x, v))
        })
        .collect::<Result<_>>()?;
    let increasing = probes.windows(2).all(|w| w[1].1 >= w[0].1);
    let decreasing = probes.windows(2).all(|w| w[1].1 <= w[0].1);

    // narrow to the probe cell around the sampled minimum, then refine
    let best = probes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut a = probes[best.saturating_sub(1)].0;
    let mut b = probes[(best + 1).min(MONOTONE_PROBES - 1)].0;
    let target = tol * bracket.width();

    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while (b - a) > target {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2)?;
        }
    }
    let (mut x, mut v) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    for &(px, pv) in [probes[0], probes[MONOTONE_PROBES - 1], probes[best]].iter() {
        if pv < v {
            x = px;
            v = pv;
        }
    }
    let monotone = if increasing && x - lo <= 2.0 * target && probes[1].1 > probes[0].1 {
        (x, v) = probes[0];
        Some(Monotone::Increasing)
    } else if decreasing && hi - x <= 2.0 * target && probes[MONOTONE_PROBES - 2].1 > probes[MONOTONE_PROBES - 1].1 {
        (x, v) = probes[MONOTONE_PROBES - 1];
        Some(Monotone::Decreasing)
    } else {
        None
    };
    Ok(Minimum { argmin: x, value: v, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola() {
        let tol = 1e-8;
        let m = minimize_unimodal(|r| Ok((r - 2.0) * (r - 2.0)), Bracket::new(0.0, 10.0).unwrap(), tol)
            .unwrap();
        assert!((m.argmin - 2.0).abs() <= tol * 10.0, "{m:?}");
        assert_eq!(m.monotone, None);
    }

    #[test]
    fn monotone_increasing_returns_lower_end() {
        let m = minimize_unimodal(|r| Ok(r * r + r), Bracket::new(0.0, 1.0).unwrap(), 1e-8).unwrap();
        assert_eq!(m.argmin, 0.0);
        assert_eq!(m.monotone, Some(Monotone::Increasing));
    }

    #[test]
    fn monotone_decreasing_returns_upper_end() {
        let m = minimize_unimodal(|r| Ok(-r), Bracket::new(1.0, 3.0).unwrap(), 1e-8).unwrap();
        assert_eq!(m.argmin, 3.0);
        assert_eq!(m.monotone, Some(Monotone::Decreasing));
    }

    #[test]
    fn non_finite_objective_is_an_error() {
        let r = minimize_unimodal(|r| Ok(1.0 / (r - 0.5)), Bracket::new(0.0, 1.0).unwrap(), 1e-6);
        // 0.5 is a probe point
        assert!(matches!(r, Err(Error::NonFinite { .. })));
    }

    #[test]
    fn bracket_validation() {
        assert!(Bracket::new(1.0, 1.0).is_err());
        assert!(Bracket::new(-1.0, 1.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn never_worse_than_both_endpoints(c in 0.0f64..10.0, w in 0.1f64..5.0, p in 1.0f64..4.0) {
            let f = |r: f64| Ok((r - c).abs().powf(p) * w);
            let br = Bracket::new(0.0, 10.0).unwrap();
            let m = minimize_unimodal(f, br, 1e-7).unwrap();
            let fl = f(0.0).unwrap();
            let fh = f(10.0).unwrap();
            proptest::prop_assert!(m.value <= fl.max(fh));
            proptest::prop_assert!((m.argmin - c).abs() <= 1e-6 * 10.0 + 1e-12);
        }
    }
}
