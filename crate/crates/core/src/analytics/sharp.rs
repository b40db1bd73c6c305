//! Sharp resetting: every attempt is aborted after a fixed period `τ`.

use super::{Combiner, ServiceModel, COMPLETION_FLOOR, INNER_REL_TOL, TAIL_PROB};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::numerics::quad;

/// `E[T 1{T < c}]`.
pub(crate) fn partial_mean(d: &DistributionSpec, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Ok(0.0);
    }
    if let DistributionSpec::Deterministic { value } = *d {
        return Ok(if value < c { value } else { 0.0 });
    }
    if c <= d.upper_quantile(0.5) {
        let head = quad::integrate_from_origin(&|t| t * d.pdf(t), c, INNER_REL_TOL)?;
        Ok(head.value)
    } else {
        // the complement is the small quantity here
        if tail_negligible(d, c) {
            return Ok(d.mean());
        }
        let cutoff = (d.upper_quantile(TAIL_PROB) - c).max(0.5 * c);
        let tail = quad::integrate_semi_infinite(&|u| (c + u) * d.pdf(c + u), cutoff, INNER_REL_TOL)?;
        Ok((d.mean() - tail.value).max(0.0))
    }
}

/// Whether `E[T 1{T > c}] <= sqrt(E[T²] Pr(T > c))` is below double precision
/// relative to `E[T]`.
pub(crate) fn tail_negligible(d: &DistributionSpec, c: f64) -> bool {
    (d.moment(2) * d.survival(c)).sqrt() < 1e-17 * d.mean()
}

impl ServiceModel {
    fn sharp_precheck(&self, tau: f64) -> Result<()> {
        let x_atom = self.jobsize.is_atom();
        match (self.combiner, self.slowdown) {
            (Combiner::Additive, s) => {
                let DistributionSpec::Deterministic { value: x } = self.jobsize else {
                    return Err(Error::NonCompleting(
                        "additive sharp resetting cannot complete jobs larger than the period".into(),
                    ));
                };
                let completes = match s {
                    DistributionSpec::Deterministic { value } => x + value < tau,
                    _ => x < tau,
                };
                if !completes {
                    return Err(Error::NonCompleting(format!(
                        "period {tau} does not exceed the smallest requirement of a job of size {x}"
                    )));
                }
            }
            (Combiner::Multiplicative, DistributionSpec::Deterministic { value }) => {
                if !x_atom && value > 0.0 {
                    return Err(Error::NonCompleting(
                        "deterministic slowdown cannot complete jobs larger than the period".into(),
                    ));
                }
                if let DistributionSpec::Deterministic { value: x } = self.jobsize {
                    if x * value >= tau && x > 0.0 {
                        return Err(Error::NonCompleting(format!(
                            "requirement {} never beats period {tau}",
                            x * value
                        )));
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Mean service time when each attempt is aborted after `tau`.
    ///
    /// Per job of size `x` with completion threshold `c` on the slowdown
    /// (`τ/x` or `τ - x`) and `F = Pr(S < c)`:
    /// `x E[S; S < c] / F + τ (1 - F) / F` (multiplicative) or
    /// `x + E[S; S < c] / F + τ (1 - F) / F` (additive).
    pub fn mean_sharp(&self, tau: f64) -> Result<f64> {
        self.validate()?;
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParameter(format!("period must be finite and > 0, got {tau}")));
        }
        self.sharp_precheck(tau)?;
        let s = self.slowdown;
        let combiner = self.combiner;
        let g = move |x: f64, out: &mut [f64]| -> Result<()> {
            let c = match combiner {
                Combiner::Multiplicative => {
                    if x == 0.0 {
                        out[0] = 0.0;
                        return Ok(());
                    }
                    tau / x
                }
                Combiner::Additive => tau - x,
            };
            let f = s.prob_below(c);
            if f <= COMPLETION_FLOOR {
                return Err(Error::NonCompleting(format!(
                    "completion probability {f:e} per attempt for job size {x}"
                )));
            }
            let miss = if s.is_atom() { 1.0 - f } else { s.survival(c) };
            let pm = partial_mean(&s, c)?;
            let wasted = tau * miss / f;
            out[0] = match combiner {
                Combiner::Multiplicative => x * pm / f + wasted,
                Combiner::Additive => x + pm / f + wasted,
            };
            if !out[0].is_finite() {
                return Err(Error::NonFinite { at: x });
            }
            Ok(())
        };
        Ok(self.expect_over_x(1, &g)?[0])
    }
}
