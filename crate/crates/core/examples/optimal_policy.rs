// Optimal Poissonian rate and sharp period for two noisy servers.

use resetq::{DistributionSpec, Result, ServiceModel};

fn report(name: &str, m: &ServiceModel) -> Result<()> {
    let p = m.optimal_poisson_rate(None)?;
    let s = m.optimal_sharp_period(None)?;
    println!("{name}");
    println!("  no resetting      E[T] = {:.6}", p.mean_no_reset);
    println!("  poisson rate {:>9.6}  E[T] = {:.6}", p.rate, p.mean);
    match s.period {
        Some(tau) => println!("  sharp period {:>9.6}  E[T] = {:.6}", tau, s.mean),
        None => println!("  sharp: never reset"),
    }
    Ok(())
}

pub fn run_example() -> Result<()> {
    let x = DistributionSpec::Deterministic { value: 2.0 / 3.0 };
    report(
        "additive, S gamma(0.01, 50), X = 2/3",
        &ServiceModel::additive(DistributionSpec::Gamma { shape: 0.01, scale: 50.0 }, x),
    )?;
    report(
        "multiplicative, S inverse gaussian(3/2, 3/4), X = 2/3",
        &ServiceModel::multiplicative(DistributionSpec::InverseGaussian { mean: 1.5, shape: 0.75 }, x),
    )?;
    // memoryless slowdown: every rate gives the same mean
    let flat = ServiceModel::multiplicative(DistributionSpec::Exponential { rate: 1.0 }, x);
    let p = flat.optimal_poisson_rate(None)?;
    println!("multiplicative, S exponential: rate {} ({})", p.rate, p.note.as_deref().unwrap_or("-"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
