//! Discrete-event simulation of a single-server FCFS queue with S&X service
//! and per-attempt resetting.
//!
//! Every reset clock restarts with the attempt, so each job's service time is
//! sampled attempt by attempt: draw `S`, draw the reset time `R`, and stop
//! once the requirement beats `R`.

mod stats;

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{ResetPolicy, ServiceModel};
use crate::dist::{DistributionSpec, Sampler};
use crate::error::{Error, Result};
use crate::queue::QueueSpec;
use crate::rng::RngStream;

pub use stats::{pmf_test, Comparison, ComparisonRow, Estimate, PmfTest, Quantity, CONFIDENCE};

/// Attempts after which a job is declared practically non-completing.
pub const ATTEMPT_BUDGET: u64 = 1_000_000_000;
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Arrival {
    Poisson { rate: f64 },
    /// i.i.d. interarrival times.
    Renewal { law: DistributionSpec },
}

impl Arrival {
    pub fn rate(&self) -> f64 {
        match self {
            Arrival::Poisson { rate } => *rate,
            Arrival::Renewal { law } => 1.0 / law.mean(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Arrival::Poisson { rate } if rate.is_finite() && *rate > 0.0 => Ok(()),
            Arrival::Poisson { rate } => {
                Err(Error::InvalidParameter(format!("arrival rate must be finite and > 0, got {rate}")))
            }
            Arrival::Renewal { law } => {
                law.validate()?;
                if law.mean() > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter("interarrival law must have a positive mean".into()))
                }
            }
        }
    }

    fn interarrival(&self) -> DistributionSpec {
        match *self {
            Arrival::Poisson { rate } => DistributionSpec::Exponential { rate },
            Arrival::Renewal { law } => law,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub arrival: Arrival,
    pub service: ServiceModel,
    pub policy: ResetPolicy,
    /// Simulated time per replication.
    pub horizon: f64,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    pub replications: u32,
    pub seed: u64,
}

fn default_warmup() -> f64 {
    DEFAULT_WARMUP_FRACTION
}

impl SimConfig {
    /// Poisson arrivals with the horizon set to about `jobs` arrivals.
    pub fn for_queue(q: &QueueSpec, jobs: f64, replications: u32, seed: u64) -> Self {
        Self {
            arrival: Arrival::Poisson { rate: q.arrival_rate },
            service: q.service,
            policy: q.policy,
            horizon: jobs / q.arrival_rate,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
            replications,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.arrival.validate()?;
        self.service.validate()?;
        self.policy.validate()?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be finite and > 0, got {}", self.horizon)));
        }
        if !(0.0..=0.5).contains(&self.warmup_fraction) {
            return Err(Error::InvalidParameter(format!(
                "warmup fraction must lie in [0, 0.5], got {}",
                self.warmup_fraction
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParameter("at least one replication is required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimStats {
    pub mean_service: Estimate,
    pub mean_queue_length: Estimate,
    pub mean_sojourn: Estimate,
    pub attempts_per_job: Estimate,
    /// Time-averaged `P(L = n)`, pooled over replications.
    pub queue_length_histogram: Vec<f64>,
    /// Jobs that arrived during the measurement window, over all replications.
    pub jobs_measured: u64,
    /// `λ` times the estimated mean service time.
    pub utilization_estimate: f64,
    /// Set when the estimated utilization reaches one.
    pub unstable_suspected: bool,
    #[serde(skip)]
    pub replication_histograms: Vec<Vec<f64>>,
}

impl SimStats {
    pub fn compare(&self, analytic: &[(Quantity, f64)]) -> Comparison {
        let pairs: Vec<_> = analytic
            .iter()
            .map(|&(q, v)| {
                let est = match q {
                    Quantity::MeanService => self.mean_service,
                    Quantity::MeanQueueLength => self.mean_queue_length,
                    Quantity::MeanSojourn => self.mean_sojourn,
                    Quantity::AttemptsPerJob => self.attempts_per_job,
                };
                (q, est, v)
            })
            .collect();
        stats::compare_estimates(&pairs)
    }
}

/// Attempt-by-attempt service with the job size drawn once.
pub struct ServiceSampler {
    model: ServiceModel,
    policy: ResetPolicy,
    slowdown: Sampler,
    jobsize: Sampler,
    reset: Option<Sampler>,
}

impl ServiceSampler {
    pub fn new(model: &ServiceModel, policy: &ResetPolicy) -> Result<Self> {
        model.validate()?;
        policy.validate()?;
        let reset = match *policy {
            ResetPolicy::None => None,
            ResetPolicy::Poisson { rate } => Some(DistributionSpec::Exponential { rate }.sampler()?),
            ResetPolicy::Sharp { period } => Some(DistributionSpec::Deterministic { value: period }.sampler()?),
            ResetPolicy::Renewal { law } => Some(law.sampler()?),
        };
        Ok(Self {
            model: *model,
            policy: *policy,
            slowdown: model.slowdown.sampler()?,
            jobsize: model.jobsize.sampler()?,
            reset,
        })
    }

    /// Largest reset time the policy can produce, if bounded.
    fn max_reset(&self) -> Option<f64> {
        match self.policy {
            ResetPolicy::Sharp { period } => Some(period),
            ResetPolicy::Renewal { law: DistributionSpec::Deterministic { value } } => Some(value),
            _ => None,
        }
    }

    /// Returns `(total service time, attempts)` for one job.
    pub fn sample(&self, rng: &mut RngStream) -> Result<(f64, u64)> {
        let x = self.jobsize.sample(rng);
        let combiner = self.model.combiner;
        if let Some(cap) = self.max_reset() {
            // every attempt needs at least this much, so none can win
            if combiner.requirement(x, self.model.slowdown.support_min()) >= cap {
                return Err(Error::AttemptBudgetExceeded { budget: ATTEMPT_BUDGET });
            }
        }
        let mut total = 0.0;
        let mut attempts = 0u64;
        loop {
            attempts += 1;
            let need = combiner.requirement(x, self.slowdown.sample(rng));
            let reset = match &self.reset {
                Some(r) => r.sample(rng),
                None => f64::INFINITY,
            };
            if need < reset {
                return Ok((total + need, attempts));
            }
            total += reset;
            if attempts >= ATTEMPT_BUDGET {
                return Err(Error::AttemptBudgetExceeded { budget: ATTEMPT_BUDGET });
            }
        }
    }
}

/// One service time: sum of the failed attempts' reset times plus the final
/// requirement, and the number of attempts.
pub fn sample_service_time(model: &ServiceModel, policy: &ResetPolicy, rng: &mut RngStream) -> Result<(f64, u64)> {
    ServiceSampler::new(model, policy)?.sample(rng)
}

/// Mean service time from `replications` independent batches of `jobs` draws.
pub fn estimate_mean_service(
    model: &ServiceModel,
    policy: &ResetPolicy,
    jobs: u64,
    replications: u32,
    seed: u64,
) -> Result<Estimate> {
    if jobs == 0 || replications == 0 {
        return Err(Error::InvalidParameter("jobs and replications must be positive".into()));
    }
    let sampler = ServiceSampler::new(model, policy)?;
    let means: Vec<f64> = (0..replications as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::new(seed, i);
            let mut sum = 0.0;
            for _ in 0..jobs {
                sum += sampler.sample(&mut rng)?.0;
            }
            Ok(sum / jobs as f64)
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_samples(&means))
}

struct Replication {
    mean_service: f64,
    mean_queue_length: f64,
    mean_sojourn: f64,
    attempts_per_job: f64,
    histogram: Vec<f64>,
    jobs: u64,
}

/// Time-weighted occupancy restricted to the measurement window.
struct Occupancy {
    start: f64,
    end: f64,
    last: f64,
    n: usize,
    hist: Vec<f64>,
}

impl Occupancy {
    fn advance(&mut self, to: f64) {
        let lo = self.last.max(self.start);
        let hi = to.min(self.end);
        if hi > lo {
            if self.hist.len() <= self.n {
                self.hist.resize(self.n + 1, 0.0);
            }
            self.hist[self.n] += hi - lo;
        }
        self.last = to;
    }
}

fn replicate(cfg: &SimConfig, sampler: &ServiceSampler, index: u64) -> Result<Replication> {
    let mut rng = RngStream::new(cfg.seed, index);
    let gap = cfg.arrival.interarrival().sampler()?;
    let start = cfg.warmup_fraction * cfg.horizon;
    let mut occ = Occupancy { start, end: cfg.horizon, last: 0.0, n: 0, hist: Vec::new() };
    let mut departures: VecDeque<f64> = VecDeque::new();
    let mut last_departure = 0.0f64;
    let (mut service_sum, mut sojourn_sum, mut attempt_sum, mut jobs) = (0.0, 0.0, 0.0, 0u64);
    let mut t = 0.0;
    loop {
        t += gap.sample(&mut rng);
        let arrival = t.min(cfg.horizon);
        while let Some(&d) = departures.front() {
            if d > arrival {
                break;
            }
            occ.advance(d);
            occ.n -= 1;
            departures.pop_front();
        }
        occ.advance(arrival);
        if t > cfg.horizon {
            break;
        }
        let (u, attempts) = sampler.sample(&mut rng)?;
        let done = t.max(last_departure) + u;
        last_departure = done;
        departures.push_back(done);
        occ.n += 1;
        if t >= start {
            service_sum += u;
            sojourn_sum += done - t;
            attempt_sum += attempts as f64;
            jobs += 1;
        }
    }
    let window = cfg.horizon - start;
    let histogram: Vec<f64> = occ.hist.iter().map(|h| h / window).collect();
    let mean_queue_length = histogram.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let per_job = |s: f64| if jobs == 0 { 0.0 } else { s / jobs as f64 };
    Ok(Replication {
        mean_service: per_job(service_sum),
        mean_queue_length,
        mean_sojourn: per_job(sojourn_sum),
        attempts_per_job: per_job(attempt_sum),
        histogram,
        jobs,
    })
}

/// Runs the replications in parallel and aggregates them in index order, so
/// the result only depends on the configuration.
pub fn simulate(cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let sampler = ServiceSampler::new(&cfg.service, &cfg.policy)?;
    let reps: Vec<Replication> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|i| replicate(cfg, &sampler, i))
        .collect::<Result<_>>()?;
    let pick = |f: fn(&Replication) -> f64| Estimate::from_samples(&reps.iter().map(f).collect::<Vec<_>>());
    let len = reps.iter().map(|r| r.histogram.len()).max().unwrap_or(0);
    let mut pooled = vec![0.0; len];
    for r in &reps {
        for (acc, h) in pooled.iter_mut().zip(&r.histogram) {
            *acc += h / reps.len() as f64;
        }
    }
    let mean_service = pick(|r| r.mean_service);
    let utilization_estimate = cfg.arrival.rate() * mean_service.mean;
    Ok(SimStats {
        mean_service,
        mean_queue_length: pick(|r| r.mean_queue_length),
        mean_sojourn: pick(|r| r.mean_sojourn),
        attempts_per_job: pick(|r| r.attempts_per_job),
        queue_length_histogram: pooled,
        jobs_measured: reps.iter().map(|r| r.jobs).sum(),
        utilization_estimate,
        unstable_suspected: utilization_estimate >= 1.0,
        replication_histograms: reps.into_iter().map(|r| r.histogram).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionSpec::{Deterministic as Det, Exponential as Exp, Gamma, InverseGaussian as Ig};

    fn mm1() -> QueueSpec {
        QueueSpec::new(0.5, ServiceModel::multiplicative(Exp { rate: 1.0 }, Det { value: 1.0 }), ResetPolicy::None)
    }

    #[test]
    fn no_reset_takes_one_attempt() {
        let m = ServiceModel::additive(Gamma { shape: 2.0, scale: 1.0 }, Det { value: 1.5 });
        let mut rng = RngStream::new(1, 0);
        for _ in 0..100 {
            let (t, a) = sample_service_time(&m, &ResetPolicy::None, &mut rng).unwrap();
            assert_eq!(a, 1);
            assert!(t > 1.5);
        }
    }

    #[test]
    fn hopeless_sharp_reset_is_reported() {
        let m = ServiceModel::additive(Exp { rate: 1.0 }, Det { value: 1.0 });
        let mut rng = RngStream::new(1, 0);
        assert!(matches!(
            sample_service_time(&m, &ResetPolicy::Sharp { period: 0.5 }, &mut rng),
            Err(Error::AttemptBudgetExceeded { .. })
        ));
    }

    #[test]
    fn memoryless_service_mean_is_unchanged() {
        let m = ServiceModel::multiplicative(Exp { rate: 2.0 }, Det { value: 3.0 });
        let s = ServiceSampler::new(&m, &ResetPolicy::Poisson { rate: 0.7 }).unwrap();
        let mut rng = RngStream::new(5, 0);
        let n = 1_000_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let t = s.sample(&mut rng).unwrap().0;
            sum += t;
            sq += t * t;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.5).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn attempts_follow_success_probability() {
        // sharp period with deterministic job: success probability Pr(S < τ/x)
        let s = Ig { mean: 1.5, shape: 0.75 };
        let m = ServiceModel::multiplicative(s, Det { value: 2.0 / 3.0 });
        let tau = 1.2;
        let expect = 1.0 / s.prob_below(tau / (2.0 / 3.0));
        let cfg = SimConfig {
            arrival: Arrival::Poisson { rate: 0.3 },
            service: m,
            policy: ResetPolicy::Sharp { period: tau },
            horizon: 20_000.0,
            warmup_fraction: 0.1,
            replications: 10,
            seed: 3,
        };
        let st = simulate(&cfg).unwrap();
        let h = st.attempts_per_job.half_width.unwrap();
        assert!((st.attempts_per_job.mean - expect).abs() < 1.5 * h + 1e-3 * expect, "{st:?} {expect}");
    }

    #[test]
    fn service_estimate_covers_poisson_mean() {
        let m = ServiceModel::additive(Gamma { shape: 0.3, scale: 1.0 / 0.6 }, Det { value: 2.0 / 3.0 });
        let policy = ResetPolicy::Poisson { rate: 0.5 };
        let e = estimate_mean_service(&m, &policy, 20_000, 20, 8).unwrap();
        let exact = m.mean(&policy).unwrap();
        assert!((e.mean - exact).abs() < 1.5 * e.half_width.unwrap(), "{e:?} vs {exact}");
    }

    #[test]
    fn runs_are_reproducible() {
        let cfg = SimConfig::for_queue(&mm1(), 5_000.0, 4, 99);
        let a = simulate(&cfg).unwrap();
        let b = simulate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = simulate(&SimConfig { seed: 100, ..cfg }).unwrap();
        assert_ne!(a.mean_queue_length, c.mean_queue_length);
    }

    #[test]
    fn histogram_is_normalized() {
        let st = simulate(&SimConfig::for_queue(&mm1(), 20_000.0, 3, 7)).unwrap();
        for h in &st.replication_histograms {
            assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!((st.queue_length_histogram.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(st.attempts_per_job.mean, 1.0);
    }

    #[test]
    fn mm1_matches_theory() {
        let q = mm1();
        let st = simulate(&SimConfig::for_queue(&q, 100_000.0, 20, 2024)).unwrap();
        let cmp = st.compare(&[
            (Quantity::MeanQueueLength, 1.0),
            (Quantity::MeanSojourn, 2.0),
            (Quantity::MeanService, 1.0),
        ]);
        assert!(cmp.all_pass, "{cmp:?}");
        let pmf = q.queue_length_pmf(200).unwrap();
        let t = pmf_test(&st.replication_histograms, &pmf.probs, 0.02).unwrap();
        assert!(t.passes(0.001), "{t:?}");
    }

    #[test]
    fn overload_is_flagged() {
        let mut q = mm1();
        q.arrival_rate = 1.5;
        let st = simulate(&SimConfig::for_queue(&q, 2_000.0, 2, 1)).unwrap();
        assert!(st.unstable_suspected);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SimConfig::for_queue(&mm1(), 100.0, 1, 0);
        assert!(simulate(&SimConfig { replications: 0, ..base }).is_err());
        assert!(simulate(&SimConfig { warmup_fraction: 0.7, ..base }).is_err());
        assert!(simulate(&SimConfig { horizon: -1.0, ..base }).is_err());
    }
}
