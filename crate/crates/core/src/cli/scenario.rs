//! Scenario files. All times are in seconds.

use serde::{Deserialize, Serialize};

use crate::analytics::{ResetPolicy, ServiceModel};
use crate::error::{Error, Result};
use crate::queue::QueueSpec;
use crate::sim::{Arrival, SimConfig, DEFAULT_WARMUP_FRACTION};

pub const DEFAULT_SEED: u64 = 2024;
pub const DEFAULT_REPLICATIONS: u32 = 20;
/// Expected arrivals per replication when no horizon is given.
pub const DEFAULT_JOBS: f64 = 1e5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ServiceModel,
    #[serde(default = "no_reset")]
    pub policy: ResetPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<Arrival>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
}

fn no_reset() -> ResetPolicy {
    ResetPolicy::None
}

/// Optional simulation settings; missing fields take the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warmup_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("scenario: {e}")))?;
        s.model.validate()?;
        s.policy.validate()?;
        if let Some(a) = &s.arrival {
            a.validate()?;
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    fn arrival(&self) -> Result<Arrival> {
        self.arrival
            .ok_or_else(|| Error::InvalidParameter("scenario has no `arrival` section".into()))
    }

    /// Queue with Poisson arrivals, as the analytic queue results need.
    pub fn queue(&self) -> Result<QueueSpec> {
        match self.arrival()? {
            Arrival::Poisson { rate } => Ok(QueueSpec::new(rate, self.model, self.policy)),
            Arrival::Renewal { .. } => Err(Error::Unsupported(
                "analytic queue results need Poisson arrivals; use `simulate` for renewal arrivals".into(),
            )),
        }
    }

    /// Simulation settings with `seed` taking precedence over the file.
    pub fn sim_config(&self, seed: Option<u64>) -> Result<SimConfig> {
        let arrival = self.arrival()?;
        let sec = self.sim.unwrap_or_default();
        Ok(SimConfig {
            arrival,
            service: self.model,
            policy: self.policy,
            horizon: sec.horizon.unwrap_or(DEFAULT_JOBS / arrival.rate()),
            warmup_fraction: sec.warmup_fraction.unwrap_or(DEFAULT_WARMUP_FRACTION),
            replications: sec.replications.unwrap_or(DEFAULT_REPLICATIONS),
            seed: seed.or(sec.seed).unwrap_or(DEFAULT_SEED),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG: &str = r#"{
        "model": {"combiner": "additive",
                  "slowdown": {"kind": "gamma", "shape": 0.01, "scale": 50.0},
                  "jobsize": {"kind": "deterministic", "value": 0.6666666666666666}},
        "policy": {"kind": "poisson", "rate": 0.2424},
        "arrival": {"kind": "poisson", "rate": 0.5},
        "sim": {"replications": 4}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let s = Scenario::from_json(FIG).unwrap();
        assert_eq!(s.policy, ResetPolicy::Poisson { rate: 0.2424 });
        let again = Scenario::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
        let cfg = s.sim_config(None).unwrap();
        assert_eq!(cfg.replications, 4);
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.horizon, 2e5);
        assert_eq!(s.sim_config(Some(9)).unwrap().seed, 9);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        let extra = FIG.replace("\"sim\"", "\"simulation\"");
        assert!(Scenario::from_json(&extra).is_err());
        let bad = FIG.replace("0.01", "-0.01");
        assert!(matches!(Scenario::from_json(&bad), Err(Error::InvalidParameter(_))));
        let typo = FIG.replace("\"shape\": 0.01", "\"shap\": 0.01");
        assert!(Scenario::from_json(&typo).is_err());
    }

    #[test]
    fn policy_defaults_to_none() {
        let s = Scenario::from_json(
            r#"{"model":{"combiner":"multiplicative","slowdown":{"kind":"exponential","rate":1.0},
                "jobsize":{"kind":"deterministic","value":1.0}}}"#,
        )
        .unwrap();
        assert_eq!(s.policy, ResetPolicy::None);
        assert!(s.queue().is_err());
    }
}
