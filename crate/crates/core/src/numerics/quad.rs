//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges.
//!
//! All routines are vector valued underneath: an integrand writes `dim`
//! components into a buffer, and every component must meet the tolerance.
//! This lets jet-valued integrands share one set of abscissae.
//!
//! Integrable endpoint singularities at the origin (`t^{a-1}` with `a > 0`
//! small) are handled by splitting `(0, b]` into dyadic pieces
//! `[b/2^{j+1}, b/2^j]` and extrapolating the partial sums with Wynn's
//! epsilon algorithm. The tail `[c, inf)` is mapped onto `(0, 1]`.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

const DEFAULT_MAX_EVALUATIONS: usize = 400_000;
const MAX_DYADIC_PIECES: usize = 400;
/// All-zero pieces after which `(0, b]` is declared empty (`b * 2^-120`).
const ZERO_PIECES: usize = 120;
/// Dyadic points probed to find where `(0, b]` carries its mass.
const PEAK_PROBES: usize = 64;
const EPSILON_WINDOW: usize = 15;
/// Absolute error always accepted; values this small sit in the subnormal
/// range where relative accuracy is unattainable.
const UNDERFLOW_ABS: f64 = 1e-290;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

/// Vector-valued integrand: writes `dim` components for abscissa `t`.
pub type VecIntegrand<'a> = dyn Fn(f64, &mut [f64]) -> Result<()> + 'a;

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if !(1e-12..=1e-3).contains(&rel_tol) {
        return Err(Error::InvalidParameter(format!(
            "rel_tol {rel_tol} outside [1e-12, 1e-3]"
        )));
    }
    Ok(())
}

struct Piece {
    a: f64,
    b: f64,
    val: Vec<f64>,
    err: Vec<f64>,
    absval: Vec<f64>,
}

struct Budget {
    used: usize,
    max: usize,
}

impl Budget {
    fn take(&mut self, n: usize) -> Result<()> {
        self.used += n;
        if self.used > self.max {
            Err(Error::NonConvergent { evaluations: self.used })
        } else {
            Ok(())
        }
    }
}

fn eval_checked(f: &VecIntegrand, t: f64, out: &mut [f64]) -> Result<()> {
    f(t, out)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { at: t });
    }
    Ok(())
}

fn gk21(f: &VecIntegrand, a: f64, b: f64, dim: usize, budget: &mut Budget) -> Result<Piece> {
    budget.take(21)?;
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fc = vec![0.0; dim];
    eval_checked(f, center, &mut fc)?;

    let mut res_k: Vec<f64> = fc.iter().map(|v| v * WGK[10]).collect();
    let mut res_g = vec![0.0; dim];
    let mut res_abs: Vec<f64> = fc.iter().map(|v| (v * WGK[10]).abs()).collect();
    let mut f1 = vec![vec![0.0; dim]; 10];
    let mut f2 = vec![vec![0.0; dim]; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        eval_checked(f, center - dx, &mut f1[j])?;
        eval_checked(f, center + dx, &mut f2[j])?;
        for i in 0..dim {
            let s = f1[j][i] + f2[j][i];
            res_k[i] += WGK[j] * s;
            res_abs[i] += WGK[j] * (f1[j][i].abs() + f2[j][i].abs());
            if j % 2 == 1 {
                res_g[i] += WG[j / 2] * s;
            }
        }
    }

    let mut val = vec![0.0; dim];
    let mut err = vec![0.0; dim];
    let mut absval = vec![0.0; dim];
    for i in 0..dim {
        let mean = 0.5 * res_k[i];
        let mut res_asc = WGK[10] * (fc[i] - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((f1[j][i] - mean).abs() + (f2[j][i] - mean).abs());
        }
        let scale = half.abs();
        val[i] = res_k[i] * half;
        absval[i] = res_abs[i] * scale;
        err[i] = rescale_error(
            ((res_k[i] - res_g[i]) * half).abs(),
            absval[i],
            res_asc * scale,
        );
    }
    Ok(Piece { a, b, val, err, absval })
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut e = err;
    if res_asc != 0.0 && e != 0.0 {
        let scale = (200.0 * e / res_asc).powf(1.5);
        e = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        e = e.max(50.0 * f64::EPSILON * res_abs);
    }
    e
}

struct Tolerance<'a> {
    rel: f64,
    abs: &'a [f64],
}

impl Tolerance<'_> {
    fn allowed(&self, i: usize, val: f64, absval: f64) -> f64 {
        (self.rel * val.abs())
            .max(self.abs[i])
            .max(100.0 * f64::EPSILON * absval)
            .max(UNDERFLOW_ABS)
    }
}

/// Globally adaptive GK21 on `[a, b]`. Returns per-component value, error and
/// integral of the absolute value.
fn adaptive(
    f: &VecIntegrand,
    a: f64,
    b: f64,
    dim: usize,
    tol: &Tolerance,
    budget: &mut Budget,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let mut pieces = vec![gk21(f, a, b, dim, budget)?];
    loop {
        let mut val = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        let mut absval = vec![0.0; dim];
        for p in &pieces {
            for i in 0..dim {
                val[i] += p.val[i];
                err[i] += p.err[i];
                absval[i] += p.absval[i];
            }
        }
        let allowed: Vec<f64> = (0..dim).map(|i| tol.allowed(i, val[i], absval[i])).collect();
        if (0..dim).all(|i| err[i] <= allowed[i]) {
            return Ok((val, err, absval));
        }

        // bisect the piece contributing most to the worst-scaled component
        let worst = (0..dim)
            .max_by(|&i, &j| {
                let ri = err[i] / allowed[i].max(f64::MIN_POSITIVE);
                let rj = err[j] / allowed[j].max(f64::MIN_POSITIVE);
                ri.total_cmp(&rj)
            })
            .unwrap_or(0);
        let (idx, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err[worst].total_cmp(&y.1.err[worst]))
            .expect("at least one piece");
        let p = pieces.swap_remove(idx);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            return Err(Error::NonConvergent { evaluations: budget.used });
        }
        pieces.push(gk21(f, p.a, mid, dim, budget)?);
        pieces.push(gk21(f, mid, p.b, dim, budget)?);
    }
}

/// Highest even-order Wynn epsilon estimate for the tail of `seq`.
fn wynn_epsilon(seq: &[f64]) -> Option<f64> {
    let n = seq.len();
    if n < 3 {
        return None;
    }
    let s = &seq[n.saturating_sub(EPSILON_WINDOW)..];
    let m = s.len();
    // prev = column k-1, cur = column k; column k has m-k entries
    let mut prev_prev: Vec<f64> = vec![0.0; m + 1];
    let mut prev: Vec<f64> = s.to_vec();
    let mut best = *s.last()?;
    for k in 1..m {
        let mut cur = Vec::with_capacity(m - k);
        for j in 0..(m - k) {
            let d = prev[j + 1] - prev[j];
            if d == 0.0 || !d.is_finite() {
                // exact convergence along this column
                return Some(if k % 2 == 1 { prev[j + 1] } else { best });
            }
            cur.push(prev_prev[j + 1] + 1.0 / d);
        }
        if k % 2 == 0 {
            if let Some(&last) = cur.last() {
                if last.is_finite() {
                    best = last;
                }
            }
        }
        prev_prev = prev;
        prev = cur;
    }
    Some(best)
}

/// `(0, b]` by dyadic splitting toward the origin plus epsilon extrapolation.
fn from_origin(
    f: &VecIntegrand,
    b: f64,
    dim: usize,
    rel_tol: f64,
    abs_tol: &[f64],
    budget: &mut Budget,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut partial: Vec<Vec<f64>> = vec![Vec::new(); dim];
    let mut sums = vec![0.0f64; dim];
    let mut gk_err = vec![0.0; dim];
    let mut last_term = vec![0.0; dim];
    let mut extrap: Vec<Vec<f64>> = vec![Vec::new(); dim];
    let mut done = vec![false; dim];
    let mut result = vec![0.0; dim];
    let mut result_err = vec![0.0; dim];

    // Locate where the pieces peak so the stopping rules only look at the
    // decaying side; a piece over [t/2, t] contributes roughly t f(t) / 2.
    let mut peak = 0;
    let mut peak_val = 0.0f64;
    let mut probe = vec![0.0; dim];
    for k in 0..PEAK_PROBES {
        let t = b * 0.5f64.powi(k as i32) * 0.75;
        budget.take(1)?;
        f(t, &mut probe)?;
        let v = probe.iter().fold(0.0f64, |m, p| m.max((t * p).abs()));
        if !v.is_finite() {
            return Err(Error::NonFinite { at: t });
        }
        if v > peak_val {
            peak_val = v;
            peak = k;
        }
    }

    let mut hi = b;
    for piece in 0..MAX_DYADIC_PIECES {
        let lo = 0.5 * hi;
        if lo <= f64::MIN_POSITIVE {
            break;
        }
        // each piece to the target relative accuracy, or to a small share of
        // the running total once that dominates
        let piece_abs: Vec<f64> = (0..dim)
            .map(|i| (0.01 * rel_tol * sums[i].abs()).max(abs_tol[i] * 0.01))
            .collect();
        let tol = Tolerance { rel: rel_tol * 0.5, abs: &piece_abs };
        let (val, err, _) = adaptive(f, lo, hi, dim, &tol, budget)?;
        for i in 0..dim {
            sums[i] += val[i];
            gk_err[i] += err[i];
            partial[i].push(sums[i]);
        }
        hi = lo;

        if piece <= peak {
            continue;
        }
        for i in 0..dim {
            if done[i] {
                continue;
            }
            let term = val[i];
            let prev = last_term[i];
            last_term[i] = term;
            if sums[i] == 0.0 {
                // nothing found yet; an integrand that vanishes all the way
                // down is taken as zero
                if piece >= ZERO_PIECES {
                    done[i] = true;
                }
                continue;
            }
            let allowed = (rel_tol * sums[i].abs()).max(abs_tol[i]).max(UNDERFLOW_ABS);
            // fast geometric decay: remainder bounded by the last term
            if piece >= 3 && prev != 0.0 {
                let ratio = (term / prev).abs();
                if ratio < 0.75 {
                    let remainder = term.abs() * ratio / (1.0 - ratio);
                    if remainder <= 0.1 * allowed {
                        done[i] = true;
                        result[i] = sums[i];
                        result_err[i] = remainder + gk_err[i];
                        continue;
                    }
                }
            }
            if term == 0.0 && prev == 0.0 && piece >= 3 {
                done[i] = true;
                result[i] = sums[i];
                result_err[i] = gk_err[i];
                continue;
            }
            if piece >= peak + 4 {
                if let Some(e) = wynn_epsilon(&partial[i][peak + 1..]) {
                    extrap[i].push(e);
                    let ex = &extrap[i];
                    if ex.len() >= 3 {
                        let k = ex.len();
                        let spread = (ex[k - 1] - ex[k - 2]).abs() + (ex[k - 1] - ex[k - 3]).abs();
                        let allowed = (rel_tol * ex[k - 1].abs()).max(abs_tol[i]).max(UNDERFLOW_ABS);
                        if spread <= allowed {
                            done[i] = true;
                            result[i] = ex[k - 1];
                            result_err[i] = spread + gk_err[i];
                        }
                    }
                }
            }
        }
        if done.iter().all(|&d| d) {
            return Ok((result, result_err));
        }
    }
    Err(Error::NonConvergent { evaluations: budget.used })
}

/// `[c, inf)` via `t = c + (1 - u) / u`.
fn tail(
    f: &VecIntegrand,
    c: f64,
    dim: usize,
    rel_tol: f64,
    abs_tol: &[f64],
    budget: &mut Budget,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mapped = |u: f64, out: &mut [f64]| -> Result<()> {
        let t = c + (1.0 - u) / u;
        if !t.is_finite() {
            out.iter_mut().for_each(|v| *v = 0.0);
            return Ok(());
        }
        f(t, out)?;
        let jac = 1.0 / (u * u);
        for v in out.iter_mut() {
            *v *= jac;
        }
        Ok(())
    };
    let tol = Tolerance { rel: rel_tol, abs: abs_tol };
    let (val, err, _) = adaptive(&mapped, 0.0, 1.0, dim, &tol, budget)?;
    Ok((val, err))
}

fn pack(val: Vec<f64>, err: Vec<f64>, evaluations: usize) -> Vec<QuadratureResult> {
    val.into_iter()
        .zip(err)
        .map(|(value, abs_error_estimate)| QuadratureResult {
            value,
            abs_error_estimate,
            evaluations,
        })
        .collect()
}

/// Adaptive GK21 on a finite interval, vector valued.
pub fn integrate_vec(
    f: &VecIntegrand,
    dim: usize,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<Vec<QuadratureResult>> {
    check_rel_tol(rel_tol)?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter("finite limits required".into()));
    }
    if a == b {
        return Ok(pack(vec![0.0; dim], vec![0.0; dim], 0));
    }
    let mut budget = Budget { used: 0, max: DEFAULT_MAX_EVALUATIONS };
    let abs = vec![0.0; dim];
    let tol = Tolerance { rel: rel_tol, abs: &abs };
    let (val, err, _) = adaptive(f, a, b, dim, &tol, &mut budget)?;
    Ok(pack(val, err, budget.used))
}

/// `(0, b]`, tolerating an integrable singularity at the origin.
pub fn integrate_from_origin_vec(
    f: &VecIntegrand,
    dim: usize,
    b: f64,
    rel_tol: f64,
) -> Result<Vec<QuadratureResult>> {
    check_rel_tol(rel_tol)?;
    if !(b.is_finite() && b >= 0.0) {
        return Err(Error::InvalidParameter(format!("upper limit {b}")));
    }
    if b == 0.0 {
        return Ok(pack(vec![0.0; dim], vec![0.0; dim], 0));
    }
    let mut budget = Budget { used: 0, max: DEFAULT_MAX_EVALUATIONS };
    let abs = vec![0.0; dim];
    let (val, err) = from_origin(f, b, dim, rel_tol, &abs, &mut budget)?;
    Ok(pack(val, err, budget.used))
}

/// `(0, inf)`: dyadic head on `(0, tail_cutoff]` plus the mapped tail.
pub fn integrate_semi_infinite_vec(
    f: &VecIntegrand,
    dim: usize,
    tail_cutoff: f64,
    rel_tol: f64,
) -> Result<Vec<QuadratureResult>> {
    check_rel_tol(rel_tol)?;
    if !(tail_cutoff.is_finite() && tail_cutoff > 0.0) {
        return Err(Error::InvalidParameter(format!("tail cutoff {tail_cutoff}")));
    }
    let mut budget = Budget { used: 0, max: DEFAULT_MAX_EVALUATIONS };
    let zero = vec![0.0; dim];
    let (head, head_err) = from_origin(f, tail_cutoff, dim, rel_tol * 0.5, &zero, &mut budget)?;
    let tail_abs: Vec<f64> = head.iter().map(|h| 0.25 * rel_tol * h.abs()).collect();
    let (tl, tail_err) = tail(f, tail_cutoff, dim, rel_tol * 0.5, &tail_abs, &mut budget)?;
    let val: Vec<f64> = head.iter().zip(&tl).map(|(h, t)| h + t).collect();
    let err: Vec<f64> = head_err.iter().zip(&tail_err).map(|(h, t)| h + t).collect();
    Ok(pack(val, err, budget.used))
}

fn scalar<'a>(f: &'a dyn Fn(f64) -> f64) -> impl Fn(f64, &mut [f64]) -> Result<()> + 'a {
    move |t, out| {
        out[0] = f(t);
        Ok(())
    }
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<QuadratureResult> {
    Ok(integrate_vec(&scalar(f), 1, a, b, rel_tol)?[0])
}

pub fn integrate_from_origin(f: &dyn Fn(f64) -> f64, b: f64, rel_tol: f64) -> Result<QuadratureResult> {
    Ok(integrate_from_origin_vec(&scalar(f), 1, b, rel_tol)?[0])
}

/// `∫_0^∞ f(t) dt` with adaptive GK on `(0, tail_cutoff]` and a monitored
/// remainder beyond the cutoff.
pub fn integrate_semi_infinite(
    f: &dyn Fn(f64) -> f64,
    tail_cutoff: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    Ok(integrate_semi_infinite_vec(&scalar(f), 1, tail_cutoff, rel_tol)?[0])
}
