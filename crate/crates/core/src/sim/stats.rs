//! Replication statistics: confidence intervals, comparisons and the pmf test.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::error::{Error, Result};

/// Confidence level of every reported interval.
pub const CONFIDENCE: f64 = 0.95;

/// Point estimate with a Student-t half-width across replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean; `None` with a single replication.
    pub std_error: Option<f64>,
    pub half_width: Option<f64>,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        if n < 2 {
            return Self { mean, std_error: None, half_width: None };
        }
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.5 + 0.5 * CONFIDENCE);
        Self { mean, std_error: Some(se), half_width: Some(t * se) }
    }

    pub fn covers(&self, value: f64) -> bool {
        match self.half_width {
            Some(h) => (self.mean - value).abs() <= h,
            None => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    MeanService,
    MeanQueueLength,
    MeanSojourn,
    AttemptsPerJob,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub quantity: Quantity,
    pub analytic: f64,
    pub simulated: f64,
    pub half_width: Option<f64>,
    pub z_score: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub all_pass: bool,
}

pub(crate) fn compare_estimates(pairs: &[(Quantity, Estimate, f64)]) -> Comparison {
    let rows: Vec<ComparisonRow> = pairs
        .iter()
        .map(|&(quantity, est, analytic)| {
            let z_score = est.std_error.filter(|&se| se > 0.0).map(|se| (est.mean - analytic) / se);
            let pass = est.covers(analytic) || (est.std_error == Some(0.0) && est.mean == analytic);
            ComparisonRow { quantity, analytic, simulated: est.mean, half_width: est.half_width, z_score, pass }
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.pass);
    Comparison { rows, all_pass }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PmfTest {
    /// Upper edge (inclusive) of each bin but the last, which is open.
    pub bin_edges: Vec<usize>,
    pub hotelling_t2: f64,
    pub df1: f64,
    pub df2: f64,
    pub p_value: f64,
}

impl PmfTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Groups `0..` into bins with analytic mass at least `min_mass`, the last bin
/// open-ended, leaving at most `max_bins` bins.
fn bin_edges(pmf: &[f64], min_mass: f64, max_bins: usize) -> Vec<usize> {
    let mut edges = Vec::new();
    let mut acc = 0.0;
    let total: f64 = pmf.iter().sum();
    let mut used = 0.0;
    for (n, p) in pmf.iter().enumerate() {
        acc += p;
        if acc >= min_mass && total - used - acc >= min_mass && edges.len() + 2 <= max_bins {
            edges.push(n);
            used += acc;
            acc = 0.0;
        }
    }
    edges
}

fn binned(hist: &[f64], edges: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; edges.len() + 1];
    for (n, p) in hist.iter().enumerate() {
        let b = edges.iter().position(|&e| n <= e).unwrap_or(edges.len());
        out[b] += p;
    }
    out
}

/// Solves `A x = b` for symmetric positive-definite `A` by Cholesky.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 0.0 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    Some(x)
}

/// Hotelling T² test that the mean of the per-replication histograms equals
/// `pmf`. Replications are independent, so the binned histograms are i.i.d.
/// vectors; one bin is dropped because each histogram sums to one.
pub fn pmf_test(replications: &[Vec<f64>], pmf: &[f64], min_bin_mass: f64) -> Result<PmfTest> {
    let r = replications.len();
    if r < 3 {
        return Err(Error::InvalidParameter("pmf test needs at least 3 replications".into()));
    }
    let edges = bin_edges(pmf, min_bin_mass, r - 1);
    let p = edges.len();
    if p == 0 {
        return Err(Error::InvalidParameter("analytic pmf too concentrated for binning".into()));
    }
    let expected = binned(pmf, &edges);
    let rows: Vec<Vec<f64>> = replications.iter().map(|h| binned(h, &edges)[..p].to_vec()).collect();
    let mean: Vec<f64> = (0..p).map(|i| rows.iter().map(|v| v[i]).sum::<f64>() / r as f64).collect();
    let mut cov = vec![vec![0.0; p]; p];
    for v in &rows {
        for i in 0..p {
            for j in 0..p {
                cov[i][j] += (v[i] - mean[i]) * (v[j] - mean[j]) / (r - 1) as f64;
            }
        }
    }
    let diff: Vec<f64> = (0..p).map(|i| mean[i] - expected[i]).collect();
    let w = cholesky_solve(&cov, &diff)
        .ok_or_else(|| Error::InvalidParameter("singular histogram covariance".into()))?;
    let t2 = r as f64 * diff.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
    let (df1, df2) = (p as f64, (r - p) as f64);
    let f = t2 * df2 / (df1 * (r - 1) as f64);
    let p_value = FisherSnedecor::new(df1, df2).expect("positive degrees of freedom").sf(f);
    Ok(PmfTest { bin_edges: edges, hotelling_t2: t2, df1, df2, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;

    #[test]
    fn student_t_interval() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(e.mean, 2.0);
        // t_{0.975, 2} = 4.302652729911275
        let h = e.half_width.unwrap();
        assert!((h - 4.302652729911275 * (1.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert!(e.covers(2.0) && !e.covers(10.0));
        assert!(Estimate::from_samples(&[5.0]).half_width.is_none());
    }

    #[test]
    fn comparison_flags_mismatch() {
        let e = Estimate::from_samples(&[0.9, 1.0, 1.1, 1.0]);
        let se = e.std_error.unwrap();
        let ok = compare_estimates(&[(Quantity::MeanService, e, 1.0)]);
        assert!(ok.all_pass);
        assert_eq!(ok.rows[0].z_score, Some(0.0));
        let bad = compare_estimates(&[(Quantity::MeanService, e, 1.0 + 10.0 * se)]);
        assert!(!bad.all_pass);
        assert!((bad.rows[0].z_score.unwrap() + 10.0).abs() < 1e-9);
    }

    #[test]
    fn cholesky_matches_direct_solution() {
        let a = vec![vec![4.0, 2.0], vec![2.0, 3.0]];
        let x = cholesky_solve(&a, &[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-12);
        assert!(cholesky_solve(&[vec![0.0]], &[1.0]).is_none());
    }

    #[test]
    fn bins_respect_minimum_mass() {
        let pmf: Vec<f64> = (0..40).map(|n| 0.5f64.powi(n + 1)).collect();
        let edges = bin_edges(&pmf, 0.05, 10);
        let b = binned(&pmf, &edges);
        assert!(b.iter().all(|&m| m >= 0.05 - 1e-12), "{b:?}");
        assert!(b.len() <= 10);
    }

    #[test]
    fn hotelling_accepts_truth_and_rejects_shift() {
        // multinomial frequencies drawn from the pmf itself
        let pmf = [0.4, 0.3, 0.2, 0.1];
        let mut rng = RngStream::new(11, 0);
        let reps: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let mut h = vec![0.0; 4];
                for _ in 0..2000 {
                    let u = rng.open01();
                    let k = if u < 0.4 { 0 } else if u < 0.7 { 1 } else if u < 0.9 { 2 } else { 3 };
                    h[k] += 1.0 / 2000.0;
                }
                h
            })
            .collect();
        let good = pmf_test(&reps, &pmf, 0.05).unwrap();
        assert!(good.passes(0.001), "{good:?}");
        let bad = pmf_test(&reps, &[0.45, 0.25, 0.2, 0.1], 0.05).unwrap();
        assert!(!bad.passes(0.001), "{bad:?}");
    }
}
