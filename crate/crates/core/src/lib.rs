pub mod analytics;
pub mod cli;
pub mod dist;
pub mod error;
pub mod numerics;
pub mod parallel;
pub mod queue;
pub mod rng;
pub mod sim;

pub use dist::DistributionSpec;
pub use error::{Error, Result};
pub use numerics::jet::Jet;
pub use rng::RngStream;
pub use analytics::{BenefitReport, Combiner, ResetPolicy, ServiceModel};
pub use queue::{QueueLengthPmf, QueueSpec};
pub use sim::{simulate, SimConfig, SimStats};
