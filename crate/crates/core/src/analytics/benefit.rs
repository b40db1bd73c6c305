//! Whether a small resetting rate lowers the mean service time.

use serde::Serialize;

use super::{Combiner, ServiceModel};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BenefitReport {
    pub mean_no_reset: f64,
    /// `d E[T_r] / dr` at `r = 0`.
    pub slope_at_zero: f64,
    pub beneficial: bool,
    /// Multiplicative: `CV_S`. Additive: `σ²(S) - σ²(X)`.
    pub condition_lhs: f64,
    /// Multiplicative: `1`. Additive: `(E[X] + E[S])²`.
    pub condition_rhs: f64,
}

impl ServiceModel {
    /// First-order effect of Poissonian resetting, from the first two moments
    /// of `S` and `X`.
    pub fn benefit_diagnosis(&self) -> Result<BenefitReport> {
        self.validate()?;
        let (s, x) = (&self.slowdown, &self.jobsize);
        let (es, es2) = (s.mean(), s.moment(2));
        let (ex, ex2) = (x.mean(), x.moment(2));
        let (slope, lhs, rhs) = match self.combiner {
            Combiner::Multiplicative => (ex2 * (es * es - 0.5 * es2), s.cv(), 1.0),
            Combiner::Additive => (
                ex * es + es * es + 0.5 * (ex2 - es2),
                s.variance() - x.variance(),
                (ex + es) * (ex + es),
            ),
        };
        Ok(BenefitReport {
            mean_no_reset: self.mean_no_reset(),
            slope_at_zero: slope,
            beneficial: slope < 0.0,
            condition_lhs: lhs,
            condition_rhs: rhs,
        })
    }
}
