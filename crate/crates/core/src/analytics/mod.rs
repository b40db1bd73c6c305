//! Service-time analytics for S&X models under resetting.
//!
//! A job carries a fixed size `X`; every service attempt draws a fresh
//! slowdown `S`. The attempt needs `X * S` (multiplicative) or `X + S`
//! (additive) time and is aborted when the reset timer fires first.

mod benefit;
mod generic;
mod optimal;
mod poisson;
mod sharp;

use serde::{Deserialize, Serialize};

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::numerics::quad;

pub use benefit::BenefitReport;
pub use optimal::{PeriodOptimum, RateOptimum};
pub use poisson::MAX_LT_ORDER;

/// Relative tolerance for integrals over the job size.
pub(crate) const OUTER_REL_TOL: f64 = 1e-10;
/// Tolerance for integrals over a single attempt.
pub(crate) const INNER_REL_TOL: f64 = 1e-10;
/// Upper-tail probability at which the job-size integrals switch to the mapped tail.
pub(crate) const TAIL_PROB: f64 = 1e-10;
/// Completion probabilities below this are treated as zero.
pub(crate) const COMPLETION_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    Multiplicative,
    Additive,
}

impl Combiner {
    /// Service requirement of one attempt.
    pub fn requirement(self, x: f64, s: f64) -> f64 {
        match self {
            Combiner::Multiplicative => x * s,
            Combiner::Additive => x + s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceModel {
    pub combiner: Combiner,
    pub slowdown: DistributionSpec,
    pub jobsize: DistributionSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResetPolicy {
    None,
    Poisson { rate: f64 },
    Sharp { period: f64 },
    Renewal { law: DistributionSpec },
}

impl ResetPolicy {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be finite and > 0, got {v}")))
            }
        };
        match *self {
            ResetPolicy::None => Ok(()),
            ResetPolicy::Poisson { rate } => positive("rate", rate),
            ResetPolicy::Sharp { period } => positive("period", period),
            ResetPolicy::Renewal { law } => law.validate(),
        }
    }
}

impl ServiceModel {
    pub fn multiplicative(slowdown: DistributionSpec, jobsize: DistributionSpec) -> Self {
        Self { combiner: Combiner::Multiplicative, slowdown, jobsize }
    }

    pub fn additive(slowdown: DistributionSpec, jobsize: DistributionSpec) -> Self {
        Self { combiner: Combiner::Additive, slowdown, jobsize }
    }

    pub fn validate(&self) -> Result<()> {
        self.slowdown.validate()?;
        self.jobsize.validate()
    }

    /// `E[S] E[X]` or `E[S] + E[X]`.
    pub fn mean_no_reset(&self) -> f64 {
        let (s, x) = (self.slowdown.mean(), self.jobsize.mean());
        match self.combiner {
            Combiner::Multiplicative => s * x,
            Combiner::Additive => s + x,
        }
    }

    /// Second moment of the service time without resetting.
    pub fn second_moment_no_reset(&self) -> f64 {
        let (s, x) = (&self.slowdown, &self.jobsize);
        match self.combiner {
            Combiner::Multiplicative => s.moment(2) * x.moment(2),
            Combiner::Additive => s.moment(2) + 2.0 * s.mean() * x.mean() + x.moment(2),
        }
    }

    /// Mean service time under `policy`.
    pub fn mean(&self, policy: &ResetPolicy) -> Result<f64> {
        policy.validate()?;
        match *policy {
            ResetPolicy::None => {
                self.validate()?;
                Ok(self.mean_no_reset())
            }
            ResetPolicy::Poisson { rate } => self.mean_poisson(rate),
            ResetPolicy::Sharp { period } => self.mean_sharp(period),
            ResetPolicy::Renewal { law } => self.mean_generic_reset(&law),
        }
    }

    /// `E_X[g(X)]` for a vector-valued `g`. A deterministic job size collapses
    /// the integral to a point evaluation.
    pub(crate) fn expect_over_x(
        &self,
        dim: usize,
        g: &dyn Fn(f64, &mut [f64]) -> Result<()>,
    ) -> Result<Vec<f64>> {
        let x = &self.jobsize;
        if let DistributionSpec::Deterministic { value } = *x {
            let mut out = vec![0.0; dim];
            g(value, &mut out)?;
            return Ok(out);
        }
        let weighted = |t: f64, out: &mut [f64]| -> Result<()> {
            let p = x.pdf(t);
            if p == 0.0 {
                out.iter_mut().for_each(|v| *v = 0.0);
                return Ok(());
            }
            g(t, out)?;
            out.iter_mut().for_each(|v| *v *= p);
            Ok(())
        };
        let cutoff = x.upper_quantile(TAIL_PROB);
        let res = quad::integrate_semi_infinite_vec(&weighted, dim, cutoff, OUTER_REL_TOL)?;
        Ok(res.into_iter().map(|r| r.value).collect())
    }
}
