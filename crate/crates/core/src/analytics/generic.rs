//! Resetting at i.i.d. renewal times `R` drawn afresh for every attempt.
//!
//! For a job of size `x` with attempt requirement `Y`, renewal-reward gives
//! `E[min(Y, R)] / Pr(Y < R)`.

use super::sharp::tail_negligible;
use super::{Combiner, ServiceModel, COMPLETION_FLOOR, INNER_REL_TOL, TAIL_PROB};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::numerics::quad;

/// `E[min(T, c)] = ∫_0^c Pr(T > t) dt`.
pub(crate) fn truncated_mean(d: &DistributionSpec, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Ok(0.0);
    }
    if let DistributionSpec::Deterministic { value } = *d {
        return Ok(value.min(c));
    }
    if c <= d.upper_quantile(0.5) {
        Ok(quad::integrate_from_origin(&|t| d.survival(t), c, INNER_REL_TOL)?.value)
    } else {
        if tail_negligible(d, c) {
            return Ok(d.mean());
        }
        let cutoff = (d.upper_quantile(TAIL_PROB) - c).max(0.5 * c);
        let tail = quad::integrate_semi_infinite(&|u| d.survival(c + u), cutoff, INNER_REL_TOL)?;
        Ok((d.mean() - tail.value).max(0.0))
    }
}

impl ServiceModel {
    /// Returns `(E[min(Y, R)], Pr(Y < R))` for a job of size `x`.
    fn renewal_terms(&self, x: f64, r: &DistributionSpec) -> Result<(f64, f64)> {
        let s = &self.slowdown;
        let combiner = self.combiner;
        // Y = y(u) for slowdown u, with dY/du = jac
        let jac = match combiner {
            Combiner::Multiplicative => x,
            Combiner::Additive => 1.0,
        };
        let offset = match combiner {
            Combiner::Multiplicative => 0.0,
            Combiner::Additive => x,
        };
        let y = |u: f64| combiner.requirement(x, u);
        match (*s, *r) {
            (DistributionSpec::Deterministic { value }, DistributionSpec::Deterministic { value: tau }) => {
                let req = y(value);
                Ok((req.min(tau), if req < tau { 1.0 } else { 0.0 }))
            }
            (_, DistributionSpec::Deterministic { value: tau }) => {
                // threshold on the slowdown below which an attempt completes
                let c = match combiner {
                    Combiner::Multiplicative => tau / x,
                    Combiner::Additive => tau - x,
                };
                let before = offset.min(tau);
                if c <= 0.0 {
                    return Ok((before, 0.0));
                }
                Ok((before + jac * truncated_mean(s, c)?, s.prob_below(c)))
            }
            (DistributionSpec::Deterministic { value }, _) => {
                let req = y(value);
                Ok((truncated_mean(r, req)?, r.survival(req)))
            }
            _ => {
                let f = |u: f64, out: &mut [f64]| -> Result<()> {
                    let alive = r.survival(y(u));
                    out[0] = s.survival(u) * alive;
                    let p = s.pdf(u);
                    out[1] = if p == 0.0 { 0.0 } else { p * alive };
                    Ok(())
                };
                let cutoff = s.upper_quantile(TAIL_PROB);
                let v = quad::integrate_semi_infinite_vec(&f, 2, cutoff, INNER_REL_TOL)?;
                let before = truncated_mean(r, offset)?;
                Ok((before + jac * v[0].value, v[1].value))
            }
        }
    }

    /// Mean service time when each attempt is aborted after an independent
    /// draw of `law`.
    pub fn mean_generic_reset(&self, law: &DistributionSpec) -> Result<f64> {
        self.validate()?;
        law.validate()?;
        let g = |x: f64, out: &mut [f64]| -> Result<()> {
            if self.combiner == Combiner::Multiplicative && x == 0.0 {
                out[0] = 0.0;
                return Ok(());
            }
            let (busy, p) = self.renewal_terms(x, law)?;
            if p <= COMPLETION_FLOOR {
                return Err(Error::NonCompleting(format!(
                    "completion probability {p:e} per attempt for job size {x}"
                )));
            }
            out[0] = busy / p;
            if !out[0].is_finite() {
                return Err(Error::NonFinite { at: x });
            }
            Ok(())
        };
        Ok(self.expect_over_x(1, &g)?[0])
    }
}
