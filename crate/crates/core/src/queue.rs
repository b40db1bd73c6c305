//! Stationary M/G/1 quantities for S&X service with resetting.
//!
//! Queue length counts every job in the system, including the one in service.

use serde::{Deserialize, Serialize};

use crate::analytics::{ResetPolicy, ServiceModel, MAX_LT_ORDER};
use crate::error::{Error, Result};
use crate::numerics::jet::Jet;

/// Negative coefficients down to this size are rounding noise and clipped.
const CLIP_NOISE: f64 = 1e-9;
/// Below this a negative coefficient means the series is not trustworthy.
const CLIP_FAIL: f64 = 1e-6;
/// Target tail mass when the truncation is chosen automatically.
pub const AUTO_TAIL_MASS: f64 = 1e-6;
const AUTO_START: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueueSpec {
    pub arrival_rate: f64,
    pub service: ServiceModel,
    pub policy: ResetPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueueLengthPmf {
    /// `P(L = n)` for `n = 0..=truncation`.
    pub probs: Vec<f64>,
    /// `1 - sum(probs)`, never negative.
    pub tail_mass: f64,
    pub truncation: usize,
}

impl QueueLengthPmf {
    /// `sum n P(L = n)` over the retained terms.
    pub fn truncated_mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }
}

impl QueueSpec {
    pub fn new(arrival_rate: f64, service: ServiceModel, policy: ResetPolicy) -> Self {
        Self { arrival_rate, service, policy }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.arrival_rate.is_finite() && self.arrival_rate > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "arrival rate must be finite and > 0, got {}",
                self.arrival_rate
            )));
        }
        self.service.validate()?;
        self.policy.validate()
    }

    /// Mean service time under the policy.
    pub fn mean_service(&self) -> Result<f64> {
        self.validate()?;
        self.service.mean(&self.policy)
    }

    /// `ρ = λ E[U]`; errors with [`Error::Unstable`] when `ρ >= 1`.
    pub fn utilization(&self) -> Result<f64> {
        let rho = self.arrival_rate * self.mean_service()?;
        if rho >= 1.0 {
            return Err(Error::Unstable { rho });
        }
        Ok(rho)
    }

    /// `(E[U], E[U²])` for the policies with a closed-form transform.
    pub fn service_moments(&self) -> Result<(f64, f64)> {
        self.validate()?;
        match self.policy {
            ResetPolicy::None => Ok((self.service.mean_no_reset(), self.service.second_moment_no_reset())),
            ResetPolicy::Poisson { .. } => {
                let j = self.service.service_lt_along(&self.policy, 0.0, 1.0, 2)?;
                Ok((-j.coeff(1), 2.0 * j.coeff(2)))
            }
            _ => Err(Error::Unsupported(
                "second moment of the service time needs no resetting or Poissonian resetting".into(),
            )),
        }
    }

    /// `ρ + λ² E[U²] / (2 (1 - ρ))`.
    pub fn mean_queue_length(&self) -> Result<f64> {
        let rho = self.utilization()?;
        let (_, m2) = self.service_moments()?;
        let lambda = self.arrival_rate;
        Ok(rho + lambda * lambda * m2 / (2.0 * (1.0 - rho)))
    }

    /// Queue-length pmf up to `n_max`, read off the generating function
    /// `(1 - ρ) (1 - z) U~(λ - λz) / (U~(λ - λz) - z)`.
    pub fn queue_length_pmf(&self, n_max: usize) -> Result<QueueLengthPmf> {
        let rho = self.utilization()?;
        if n_max > MAX_LT_ORDER {
            return Err(Error::InvalidParameter(format!("truncation {n_max} exceeds {MAX_LT_ORDER}")));
        }
        let lambda = self.arrival_rate;
        let a = self.service.service_lt_along(&self.policy, lambda, -lambda, n_max)?;
        // (A(z) - z) / (1 - z) by partial sums; A(1) = 1 cancels the root
        let mut d = a.coeffs().to_vec();
        if n_max >= 1 {
            d[1] -= 1.0;
        }
        for k in 1..d.len() {
            d[k] += d[k - 1];
        }
        let g = a.scale(1.0 - rho).checked_div(&Jet::from_coeffs(0.0, d))?;
        let mut probs = g.into_coeffs();
        for (n, p) in probs.iter_mut().enumerate() {
            if *p < -CLIP_FAIL || !p.is_finite() {
                return Err(Error::SeriesIllConditioned { index: n, value: *p });
            }
            if *p < 0.0 {
                if *p < -CLIP_NOISE {
                    return Err(Error::SeriesIllConditioned { index: n, value: *p });
                }
                *p = 0.0;
            }
            *p = p.min(1.0);
        }
        let tail_mass = (1.0 - probs.iter().sum::<f64>()).max(0.0);
        Ok(QueueLengthPmf { probs, tail_mass, truncation: n_max })
    }

    /// Doubles the truncation until the tail mass drops below
    /// [`AUTO_TAIL_MASS`] or the jet order cap is reached.
    pub fn queue_length_pmf_auto(&self) -> Result<QueueLengthPmf> {
        let mut n = AUTO_START;
        loop {
            let pmf = self.queue_length_pmf(n)?;
            if pmf.tail_mass < AUTO_TAIL_MASS || n == MAX_LT_ORDER {
                return Ok(pmf);
            }
            n = (2 * n).min(MAX_LT_ORDER);
        }
    }

    /// Sojourn-time transform `U~(s) (1 - ρ) s / (s - λ (1 - U~(s)))`.
    pub fn sojourn_lst(&self, s: f64) -> Result<f64> {
        let rho = self.utilization()?;
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidParameter(format!("transform argument must be >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        let u = self.service.service_lt_along(&self.policy, s, 1.0, 0)?.value();
        Ok(u * (1.0 - rho) * s / (s - self.arrival_rate * (1.0 - u)))
    }

    /// Jet of the sojourn-time transform at `s = 0`.
    pub fn sojourn_lst_jet(&self, order: usize) -> Result<Jet> {
        let rho = self.utilization()?;
        // one extra order is lost dividing out the root at s = 0
        let u = self.service.service_lt_along(&self.policy, 0.0, 1.0, order + 1)?;
        let denom = u.add_scalar(-1.0).shift_down().scale(self.arrival_rate).add_scalar(1.0);
        u.truncate(order).scale(1.0 - rho).checked_div(&denom.truncate(order))
    }

    /// `-dW~/ds` at zero.
    pub fn mean_sojourn(&self) -> Result<f64> {
        Ok(-self.sojourn_lst_jet(1)?.coeff(1))
    }
}
