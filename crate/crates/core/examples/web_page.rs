// Page downloads with lognormal server noise, times in milliseconds.
// How often should a stalled download be refreshed?

use resetq::{DistributionSpec, Result, ServiceModel};

pub fn run_example() -> Result<()> {
    let size = 575.184;
    let m = ServiceModel::multiplicative(
        DistributionSpec::LogNormal { mu: 5.97 - f64::ln(size), sigma: 0.99 },
        DistributionSpec::Deterministic { value: size },
    );
    let d = m.benefit_diagnosis()?;
    println!("mean download {:.2} ms, slowdown cv {:.3}, refreshing helps: {}", d.mean_no_reset, d.condition_lhs, d.beneficial);

    let p = m.optimal_poisson_rate(None)?;
    let s = m.optimal_sharp_period(None)?;
    println!("random refresh: rate {:.3} /s, mean {:.2} ms", p.rate * 1e3, p.mean);
    if let Some(tau) = s.period {
        println!("timed refresh:  every {:.0} ms ({:.3} /s), mean {:.2} ms", tau, 1e3 / tau, s.mean);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
