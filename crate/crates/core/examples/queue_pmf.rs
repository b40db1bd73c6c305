// Stationary queue length with and without resetting.

use resetq::{DistributionSpec, QueueSpec, ResetPolicy, Result, ServiceModel};

pub fn run_example() -> Result<()> {
    let m = ServiceModel::additive(
        DistributionSpec::Gamma { shape: 0.01, scale: 50.0 },
        DistributionSpec::Deterministic { value: 2.0 / 3.0 },
    );
    let rate = m.optimal_poisson_rate(None)?.rate;
    let plain = QueueSpec::new(0.5, m, ResetPolicy::None);
    let reset = QueueSpec::new(0.5, m, ResetPolicy::Poisson { rate });

    for (name, q) in [("no reset", &plain), ("optimal reset", &reset)] {
        println!(
            "{name:>14}: rho {:.4}, E[L] {:.6}, E[W] {:.6}",
            q.utilization()?,
            q.mean_queue_length()?,
            q.mean_sojourn()?
        );
    }

    let a = plain.queue_length_pmf_auto()?;
    let b = reset.queue_length_pmf_auto()?;
    println!("\n{:>4} {:>12} {:>12}", "n", "no reset", "reset");
    for n in 0..=10 {
        println!("{:>4} {:>12.6} {:>12.6}", n, a.probs[n], b.probs[n]);
    }
    println!(
        "tail mass beyond the table: {:.2e} (n <= {}) and {:.2e} (n <= {})",
        a.tail_mass, a.truncation, b.tail_mass, b.truncation
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
