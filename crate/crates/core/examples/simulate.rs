// Event-driven simulation of the queue, checked against the analytic means.

use resetq::sim::{self, Quantity};
use resetq::{DistributionSpec, QueueSpec, ResetPolicy, Result, ServiceModel, SimConfig};

pub fn run_example() -> Result<()> {
    let m = ServiceModel::multiplicative(
        DistributionSpec::InverseGaussian { mean: 1.5, shape: 0.75 },
        DistributionSpec::Deterministic { value: 2.0 / 3.0 },
    );
    let q = QueueSpec::new(0.75, m, ResetPolicy::Poisson { rate: 1.372 });

    let cfg = SimConfig::for_queue(&q, 2e4, 10, 11);
    let stats = sim::simulate(&cfg)?;
    let cmp = stats.compare(&[
        (Quantity::MeanService, q.mean_service()?),
        (Quantity::MeanQueueLength, q.mean_queue_length()?),
        (Quantity::MeanSojourn, q.mean_sojourn()?),
    ]);
    println!("{} jobs measured over {} replications", stats.jobs_measured, cfg.replications);
    for row in &cmp.rows {
        println!(
            "{:<16} sim {:.4} +- {:.4}  analytic {:.4}  covered {}",
            format!("{:?}", row.quantity),
            row.simulated,
            row.half_width.unwrap_or(f64::NAN),
            row.analytic,
            row.pass
        );
    }
    println!("attempts per job: {:.3}", stats.attempts_per_job.mean);

    // single service times can be drawn directly
    let mut rng = resetq::RngStream::new(11, 99);
    let (t, attempts) = sim::sample_service_time(&m, &ResetPolicy::Sharp { period: 1.5 }, &mut rng)?;
    println!("one job under sharp resetting: {t:.4} after {attempts} attempts");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
