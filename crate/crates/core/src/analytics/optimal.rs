//! Optimal Poissonian rate and sharp period.

use rayon::prelude::*;
use serde::Serialize;

use super::{Combiner, ServiceModel};
use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::numerics::optimize::{minimize_unimodal, Bracket, Monotone};

const GOLDEN_TOL: f64 = 1e-7;
/// Rate scan starts at this multiple of `1 / E[T]` and doubles.
const RATE_SCAN_START: f64 = 1e-3;
const RATE_SCAN_STOP: f64 = 1e9;
/// Period scan covers `E[T] * 2^(k/2)` for `|k| <= PERIOD_SCAN_HALF_STEPS`.
const PERIOD_SCAN_HALF_STEPS: i32 = 40;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateOptimum {
    /// Zero when resetting does not help.
    pub rate: f64,
    pub mean: f64,
    pub mean_no_reset: f64,
    pub monotone: Option<Monotone>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodOptimum {
    /// `None` stands for an infinite period, i.e. never resetting.
    pub period: Option<f64>,
    pub mean: f64,
    pub mean_no_reset: f64,
    pub monotone: Option<Monotone>,
    pub note: Option<String>,
}

impl ServiceModel {
    /// Largest rate for which the Poissonian mean stays finite.
    pub fn rate_ceiling(&self) -> f64 {
        let bound = |d: &DistributionSpec, scale: f64| {
            let b = d.exponential_moment_bound();
            if b.limit.is_infinite() {
                f64::INFINITY
            } else {
                b.limit / scale
            }
        };
        match (self.combiner, self.slowdown) {
            (Combiner::Additive, _) => bound(&self.jobsize, 1.0),
            (Combiner::Multiplicative, DistributionSpec::Deterministic { value }) if value > 0.0 => {
                bound(&self.jobsize, value)
            }
            _ => f64::INFINITY,
        }
    }

    /// Minimizes the Poissonian mean over the rate. Without a hint the bracket
    /// is found by doubling the rate until the mean rises above the no-reset
    /// mean or the regularity ceiling is reached.
    pub fn optimal_poisson_rate(&self, hint: Option<Bracket>) -> Result<RateOptimum> {
        let report = self.benefit_diagnosis()?;
        let m0 = report.mean_no_reset;
        if !report.beneficial {
            return Ok(RateOptimum {
                rate: 0.0,
                mean: m0,
                mean_no_reset: m0,
                monotone: Some(Monotone::Increasing),
                note: Some("resetting does not lower the mean service time at small rates".into()),
            });
        }
        let objective = |r: f64| if r == 0.0 { Ok(m0) } else { self.mean_poisson(r) };
        let bracket = match hint {
            Some(b) => b,
            None => {
                let ceiling = self.rate_ceiling() * (1.0 - 1e-9);
                let mut grid: Vec<(f64, f64)> = Vec::new();
                let mut r = RATE_SCAN_START / m0;
                loop {
                    let v = objective(r)?;
                    grid.push((r, v));
                    if v > m0 || r >= ceiling {
                        break;
                    }
                    if r > RATE_SCAN_STOP / m0 {
                        return Ok(RateOptimum {
                            rate: r,
                            mean: v,
                            mean_no_reset: m0,
                            monotone: Some(Monotone::Decreasing),
                            note: Some("mean keeps decreasing with the rate; reported at the scan limit".into()),
                        });
                    }
                    r = (2.0 * r).min(ceiling);
                }
                let k = grid
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                let lo = if k == 0 { 0.0 } else { grid[k - 1].0 };
                let hi = grid[(k + 1).min(grid.len() - 1)].0;
                Bracket::new(lo, hi)?
            }
        };
        let m = minimize_unimodal(objective, bracket, GOLDEN_TOL)?;
        Ok(RateOptimum { rate: m.argmin, mean: m.value, mean_no_reset: m0, monotone: m.monotone, note: None })
    }

    /// Minimizes the sharp-resetting mean over the period, scanning a
    /// logarithmic grid around `E[T]` before golden-section refinement.
    /// Periods that never complete a job count as infinitely bad.
    pub fn optimal_sharp_period(&self, hint: Option<Bracket>) -> Result<PeriodOptimum> {
        self.validate()?;
        let m0 = self.mean_no_reset();
        let objective = |tau: f64| match self.mean_sharp(tau) {
            Err(Error::NonCompleting(_)) => Ok(f64::MAX),
            other => other,
        };
        let never = |note: &str| PeriodOptimum {
            period: None,
            mean: m0,
            mean_no_reset: m0,
            monotone: Some(Monotone::Decreasing),
            note: Some(note.into()),
        };
        if m0 == 0.0 {
            return Ok(never("service takes no time"));
        }
        let bracket = match hint {
            Some(b) => b,
            None => {
                let grid: Vec<(f64, f64)> = (-PERIOD_SCAN_HALF_STEPS..=PERIOD_SCAN_HALF_STEPS)
                    .into_par_iter()
                    .map(|k| {
                        let tau = m0 * 2f64.powf(0.5 * k as f64);
                        objective(tau).map(|v| (tau, v))
                    })
                    .collect::<Result<_>>()?;
                let k = grid
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                if grid[k].1 >= m0 * (1.0 - 1e-9) {
                    return Ok(never("no finite period lowers the mean service time"));
                }
                let lo = grid[k.saturating_sub(1)].0;
                let hi = grid[(k + 1).min(grid.len() - 1)].0;
                Bracket::new(lo, hi)?
            }
        };
        let m = minimize_unimodal(objective, bracket, GOLDEN_TOL)?;
        if m.value >= m0 {
            return Ok(never("no finite period lowers the mean service time"));
        }
        Ok(PeriodOptimum { period: Some(m.argmin), mean: m.value, mean_no_reset: m0, monotone: m.monotone, note: None })
    }
}
