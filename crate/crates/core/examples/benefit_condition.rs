// When does a small resetting rate help? The sign of the slope of the mean
// service time at `r = 0` depends only on the first two moments of S and X.

use resetq::{DistributionSpec, Result, ServiceModel};

pub fn run_example() -> Result<()> {
    let x = DistributionSpec::Deterministic { value: 2.0 / 3.0 };

    // multiplicative: resetting helps when the slowdown has CV above one
    println!("multiplicative, S inverse gaussian with mean 3/2, X = 2/3");
    println!("{:>8} {:>8} {:>12} {:>11}", "shape", "cv_S", "slope", "beneficial");
    for shape in [1.0, 1.4, 1.5, 1.6, 2.0] {
        let m = ServiceModel::multiplicative(DistributionSpec::InverseGaussian { mean: 1.5, shape }, x);
        let d = m.benefit_diagnosis()?;
        println!("{:>8.2} {:>8.4} {:>12.6} {:>11}", shape, d.condition_lhs, d.slope_at_zero, d.beneficial);
    }

    // additive: compare the variance gap with the squared total mean
    println!("\nadditive, S gamma with mean 1/2, X = 2/3 (threshold shape 9/49 = {:.5})", 9.0 / 49.0);
    println!("{:>8} {:>12} {:>12} {:>12} {:>11}", "shape", "var gap", "mean^2", "slope", "beneficial");
    for shape in [0.1, 0.17, 9.0 / 49.0, 0.2, 0.5] {
        let s = DistributionSpec::Gamma { shape, scale: 1.0 / (2.0 * shape) };
        let d = ServiceModel::additive(s, x).benefit_diagnosis()?;
        println!(
            "{:>8.4} {:>12.5} {:>12.5} {:>12.6} {:>11}",
            shape, d.condition_lhs, d.condition_rhs, d.slope_at_zero, d.beneficial
        );
    }

    // a noisy job size can cancel out a noisy server
    println!("\nadditive, S gamma(0.01, 50), X gamma with mean 2/3");
    for shape in [0.017, 16.0 / 851.0, 0.021] {
        let x = DistributionSpec::Gamma { shape, scale: 2.0 / (3.0 * shape) };
        let s = DistributionSpec::Gamma { shape: 0.01, scale: 50.0 };
        let d = ServiceModel::additive(s, x).benefit_diagnosis()?;
        println!("  X shape {:.6}: slope {:+.5}, beneficial {}", shape, d.slope_at_zero, d.beneficial);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
