// Mean service time as a function of the resetting rate and period.

use resetq::{DistributionSpec, ResetPolicy, Result, ServiceModel};

pub fn run_example() -> Result<()> {
    let m = ServiceModel::additive(
        DistributionSpec::Gamma { shape: 0.01, scale: 50.0 },
        DistributionSpec::Deterministic { value: 2.0 / 3.0 },
    );
    println!("no resetting: E[T] = {:.6}", m.mean_no_reset());

    println!("\n{:>10} {:>12}", "rate", "poisson");
    for k in -3..=2 {
        let r = 10f64.powf(k as f64 / 2.0);
        println!("{:>10.4} {:>12.6}", r, m.mean_poisson(r)?);
    }

    // sharp resetting with a period shorter than X never completes
    println!("\n{:>10} {:>12}", "period", "sharp");
    for tau in [0.5, 0.7, 1.0, 2.0, 4.0, 8.0, 32.0] {
        match m.mean_sharp(tau) {
            Ok(v) => println!("{:>10.3} {:>12.6}", tau, v),
            Err(e) => println!("{:>10.3} {:>12}", tau, e),
        }
    }

    // any reset-time law works; gamma timers sit between poisson and sharp
    println!("\nrenewal timers with mean 2:");
    for shape in [1.0, 4.0, 64.0] {
        let law = DistributionSpec::Gamma { shape, scale: 2.0 / shape };
        let v = m.mean(&ResetPolicy::Renewal { law })?;
        println!("  gamma shape {:>4}: {:.6}", shape, v);
    }
    println!("  poisson rate 1/2: {:.6}", m.mean_poisson(0.5)?);
    println!("  sharp period 2:   {:.6}", m.mean_sharp(2.0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
