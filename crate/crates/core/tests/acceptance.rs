//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use resetq::analytics::MAX_LT_ORDER;
use resetq::numerics::diff::right_derivative;
use resetq::sim::{self, pmf_test, Quantity, SimConfig};
use resetq::DistributionSpec::{self, Deterministic as Det, Exponential as Exp, Gamma, InverseGaussian as Ig, LogNormal};
use resetq::{Combiner, Error, QueueSpec, ResetPolicy, RngStream, ServiceModel};

// Four 95% intervals are checked together, so up to one seed in five
// misses at least one of them. Override with ACCEPTANCE_SEED.
const SIM_SEED: u64 = 2025;

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Self { ok: true, notes: Vec::new() }
    }

    fn expect(&mut self, cond: bool, what: impl Into<String>) {
        let what = what.into();
        if cond {
            self.notes.push(what);
        } else {
            self.ok = false;
            self.notes.push(format!("FAILED {what}"));
        }
    }

    fn within(&mut self, name: &str, got: f64, want: f64, rel: f64) {
        let err = ((got - want) / want).abs();
        self.expect(err <= rel, format!("{name} {got:.6} vs {want} (rel err {err:.2e}, tol {rel:.0e})"));
    }
}

fn run(id: u32, budget: Duration, body: impl FnOnce(&mut Check)) -> bool {
    let t = Instant::now();
    let mut c = Check::new();
    body(&mut c);
    let took = t.elapsed();
    c.expect(took <= budget, format!("took {:.2} s of {} s", took.as_secs_f64(), budget.as_secs()));
    println!("criterion {id}: {} | {}", if c.ok { "PASS" } else { "FAIL" }, c.notes.join("; "));
    c.ok
}

fn sim_seed() -> u64 {
    std::env::var("ACCEPTANCE_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(SIM_SEED)
}

fn det23() -> DistributionSpec {
    Det { value: 2.0 / 3.0 }
}

fn additive_gamma() -> ServiceModel {
    ServiceModel::additive(Gamma { shape: 0.01, scale: 50.0 }, det23())
}

fn multiplicative_ig() -> ServiceModel {
    ServiceModel::multiplicative(Ig { mean: 1.5, shape: 0.75 }, det23())
}

fn criterion_1(c: &mut Check) {
    let beneficial = |m: ServiceModel| m.benefit_diagnosis().map(|r| r.beneficial).unwrap_or(false);
    let t = Instant::now();
    let ig = |b: f64| ServiceModel::multiplicative(Ig { mean: 1.5, shape: b }, det23());
    c.expect(beneficial(ig(1.4)) && !beneficial(ig(1.6)), "multiplicative IG flips between shape 1.4 and 1.6");
    let ga = |a: f64| ServiceModel::additive(Gamma { shape: a, scale: 1.0 / (2.0 * a) }, det23());
    c.expect(beneficial(ga(0.17)) && !beneficial(ga(0.20)), "additive gamma slowdown flips between 0.17 and 0.20");
    let gx = |b: f64| ServiceModel::additive(Gamma { shape: 0.01, scale: 50.0 }, Gamma { shape: b, scale: 2.0 / (3.0 * b) });
    c.expect(!beneficial(gx(0.017)) && beneficial(gx(0.021)), "additive gamma job size flips between 0.017 and 0.021");
    c.expect(t.elapsed() < Duration::from_secs(1), "each diagnosis under 1 s");
}

fn queue_reproduction(c: &mut Check, m: ServiceModel, lambda: f64, r_star: f64, l_none: f64, l_reset: f64) {
    let opt = match m.optimal_poisson_rate(None) {
        Ok(o) => o,
        Err(e) => return c.expect(false, format!("optimizer error {e}")),
    };
    c.within("r*", opt.rate, r_star, 1e-2);
    let none = QueueSpec::new(lambda, m, ResetPolicy::None).mean_queue_length();
    let reset = QueueSpec::new(lambda, m, ResetPolicy::Poisson { rate: opt.rate }).mean_queue_length();
    match (none, reset) {
        (Ok(a), Ok(b)) => {
            c.within("E[L] without reset", a, l_none, 2e-2);
            c.within("E[L] at r*", b, l_reset, 2e-2);
        }
        other => c.expect(false, format!("queue error {other:?}")),
    }
}

fn criterion_4(c: &mut Check) {
    let x: f64 = 575.184;
    let m = ServiceModel::multiplicative(LogNormal { mu: 5.97 - x.ln(), sigma: 0.99 }, Det { value: x });
    let (p, s) = match (m.optimal_poisson_rate(None), m.optimal_sharp_period(None)) {
        (Ok(p), Ok(s)) => (p, s),
        other => return c.expect(false, format!("optimizer error {other:?}")),
    };
    c.expect(p.rate > 0.0, format!("Poisson optimum exists, mean {:.2} below {:.2}", p.mean, p.mean_no_reset));
    let Some(tau) = s.period else {
        return c.expect(false, "sharp optimum missing");
    };
    c.expect(true, format!("sharp optimum exists, mean {:.2}", s.mean));
    // times are milliseconds, so rates per second carry a factor 1000
    let rate_per_s = p.rate * 1000.0;
    let inv_tau_per_s = 1000.0 / tau;
    let near_one = |v: f64| (0.5..=2.0).contains(&v);
    c.expect(near_one(rate_per_s), format!("r* = {rate_per_s:.3} per s"));
    c.expect(near_one(inv_tau_per_s), format!("1/tau* = {inv_tau_per_s:.3} per s"));
    c.expect(s.mean <= p.mean, "sharp mean <= Poisson mean");
}

fn uniform(rng: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.open01()
}

fn random_law(rng: &mut RngStream) -> DistributionSpec {
    match (rng.open01() * 4.0) as u32 {
        0 => Exp { rate: uniform(rng, 0.3, 3.0) },
        1 => Gamma { shape: uniform(rng, 0.2, 4.0), scale: uniform(rng, 0.2, 2.0) },
        2 => Ig { mean: uniform(rng, 0.3, 2.0), shape: uniform(rng, 0.3, 4.0) },
        _ => Det { value: uniform(rng, 0.1, 2.0) },
    }
}

/// Random model whose slope at zero is clearly away from zero, so a relative
/// comparison is meaningful.
fn random_model(rng: &mut RngStream, combiner: Combiner) -> ServiceModel {
    loop {
        let m = ServiceModel { combiner, slowdown: random_law(rng), jobsize: random_law(rng) };
        let slope = m.benefit_diagnosis().expect("valid model").slope_at_zero;
        if slope.abs() >= 0.05 * m.mean_no_reset().powi(2) {
            return m;
        }
    }
}

fn criterion_5(c: &mut Check) {
    let mut rng = RngStream::new(5, 0);
    let mut worst: f64 = 0.0;
    for combiner in [Combiner::Multiplicative, Combiner::Additive] {
        for _ in 0..10 {
            let m = random_model(&mut rng, combiner);
            let rep = m.benefit_diagnosis().expect("valid model");
            let h = (0.05 / rep.mean_no_reset).min(0.2 * m.rate_ceiling());
            match right_derivative(|r| m.mean_poisson(r), 0.0, rep.mean_no_reset, h) {
                Ok(d) => {
                    let rel = ((d - rep.slope_at_zero) / rep.slope_at_zero).abs();
                    worst = worst.max(rel);
                    if rel > 1e-3 {
                        c.expect(false, format!("{m:?}: {d} vs {}", rep.slope_at_zero));
                    }
                }
                Err(e) => c.expect(false, format!("{m:?}: {e}")),
            }
        }
    }
    c.expect(worst <= 1e-3, format!("20 models, worst relative slope error {worst:.2e} (tol 1e-3)"));
}

fn criterion_6(c: &mut Check) {
    // memoryless slowdown: mean is the same for every rate
    let m = ServiceModel::multiplicative(Exp { rate: 1.3 }, Gamma { shape: 2.0, scale: 0.5 });
    let base = m.mean_no_reset();
    let spread = [0.01, 0.3, 1.0, 5.0, 40.0]
        .iter()
        .map(|&r| m.mean_poisson(r).map(|v| ((v - base) / base).abs()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    c.expect(spread <= 1e-7, format!("memoryless neutrality, max rel deviation {spread:.1e}"));

    let mm1 = QueueSpec::new(0.5, ServiceModel::multiplicative(Exp { rate: 1.0 }, Det { value: 1.0 }), ResetPolicy::None);
    let geo = mm1
        .queue_length_pmf(80)
        .map(|p| p.probs.iter().enumerate().map(|(n, q)| (q - 0.5f64.powi(n as i32 + 1)).abs()).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY);
    c.expect(geo <= 1e-9, format!("M/M/1 geometric pmf, max abs error {geo:.1e}"));

    let md1 = QueueSpec::new(0.5, ServiceModel::multiplicative(Det { value: 1.0 }, Det { value: 1.0 }), ResetPolicy::None);
    match md1.mean_queue_length() {
        Ok(v) => c.within("M/D/1 E[L]", v, 0.75, 1e-8),
        Err(e) => c.expect(false, format!("M/D/1 {e}")),
    }

    let battery = [
        additive_gamma(),
        multiplicative_ig(),
        ServiceModel::multiplicative(Gamma { shape: 0.5, scale: 2.0 }, Exp { rate: 1.5 }),
        ServiceModel::multiplicative(LogNormal { mu: -0.3, sigma: 1.1 }, Gamma { shape: 2.0, scale: 0.4 }),
        ServiceModel::additive(Ig { mean: 1.0, shape: 0.2 }, Det { value: 0.5 }),
    ];
    let mut worst: f64 = 0.0;
    for m in &battery {
        let r = 0.6 / m.mean_no_reset();
        let tau = 1.8 * m.mean_no_reset();
        let pairs = [
            (m.mean_generic_reset(&Exp { rate: r }), m.mean_poisson(r)),
            (m.mean_generic_reset(&Det { value: tau }), m.mean_sharp(tau)),
        ];
        for (a, b) in pairs {
            match (a, b) {
                (Ok(a), Ok(b)) => worst = worst.max(((a - b) / b).abs()),
                (Err(Error::NonCompleting(_)), Err(Error::NonCompleting(_))) => {}
                other => c.expect(false, format!("{m:?}: {other:?}")),
            }
        }
    }
    c.expect(worst <= 1e-6, format!("generic reset specializations, worst rel error {worst:.1e}"));

    let mut rng = RngStream::new(6, 0);
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    while checked < 20 {
        let combiner = if rng.open01() < 0.5 { Combiner::Multiplicative } else { Combiner::Additive };
        let m = ServiceModel { combiner, slowdown: random_law(&mut rng), jobsize: random_law(&mut rng) };
        let policy = if rng.open01() < 0.5 {
            ResetPolicy::None
        } else {
            ResetPolicy::Poisson { rate: uniform(&mut rng, 0.1, 1.0) / m.mean_no_reset() }
        };
        let Ok(mean) = m.mean(&policy) else { continue };
        let q = QueueSpec::new(uniform(&mut rng, 0.1, 0.9) / mean, m, policy);
        match (q.mean_queue_length(), q.mean_sojourn()) {
            // infinite second service moment: no finite mean queue length to check
            (Err(Error::DivergentTransform { .. }), Err(Error::DivergentTransform { .. })) => continue,
            (Ok(l), Ok(w)) => {
                worst = worst.max(((q.arrival_rate * w - l) / l).abs());
                checked += 1;
            }
            other => {
                c.expect(false, format!("{q:?}: {other:?}"));
                checked += 1;
            }
        }
    }
    c.expect(worst <= 1e-6, format!("Little's law on 20 random queues, worst rel error {worst:.1e}"));
}

fn simulated_queue(c: &mut Check, name: &str, m: ServiceModel, lambda: f64) {
    let rate = match m.optimal_poisson_rate(None) {
        Ok(o) => o.rate,
        Err(e) => return c.expect(false, format!("{name}: {e}")),
    };
    let q = QueueSpec::new(lambda, m, ResetPolicy::Poisson { rate });
    let (Ok(el), Ok(eu), Ok(pmf)) = (q.mean_queue_length(), q.mean_service(), q.queue_length_pmf(MAX_LT_ORDER.min(400)))
    else {
        return c.expect(false, format!("{name}: analytic queue failed"));
    };
    let cfg = SimConfig::for_queue(&q, 1e5, 20, sim_seed());
    let st = match sim::simulate(&cfg) {
        Ok(s) => s,
        Err(e) => return c.expect(false, format!("{name}: {e}")),
    };
    for row in st.compare(&[(Quantity::MeanQueueLength, el), (Quantity::MeanService, eu)]).rows {
        c.expect(
            row.pass,
            format!(
                "{name} {:?}: sim {:.5} +- {:.5} vs {:.5} (z {:.2})",
                row.quantity,
                row.simulated,
                row.half_width.unwrap_or(f64::NAN),
                row.analytic,
                row.z_score.unwrap_or(f64::NAN)
            ),
        );
    }
    match pmf_test(&st.replication_histograms, &pmf.probs, 0.02) {
        Ok(t) => c.expect(t.passes(0.001), format!("{name} pmf test p = {:.3} over {} bins", t.p_value, t.bin_edges.len() + 1)),
        Err(e) => c.expect(false, format!("{name} pmf test {e}")),
    }
}

fn criterion_8(c: &mut Check) {
    let heavy = ServiceModel::additive(Exp { rate: 1.0 }, LogNormal { mu: 0.0, sigma: 1.0 });
    c.expect(
        matches!(heavy.mean_poisson(0.5), Err(Error::DivergentTransform { .. })),
        "lognormal job size, additive Poisson: DivergentTransform",
    );
    let add = ServiceModel::additive(Exp { rate: 1.0 }, Det { value: 2.0 });
    c.expect(
        matches!(add.mean_sharp(2.0), Err(Error::NonCompleting(_)))
            && matches!(add.mean_sharp(1.5), Err(Error::NonCompleting(_))),
        "additive sharp with period <= job size: NonCompleting",
    );
    let q = QueueSpec::new(1.0, additive_gamma(), ResetPolicy::None);
    c.expect(matches!(q.utilization(), Err(Error::Unstable { .. })), "rho >= 1: Unstable");

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("unstable.json");
    let text = r#"{"model":{"combiner":"additive","slowdown":{"kind":"gamma","shape":0.01,"scale":50.0},
        "jobsize":{"kind":"deterministic","value":0.6666666666666666}},"arrival":{"kind":"poisson","rate":1.0}}"#;
    std::fs::write(&path, text).expect("write scenario");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = resetq::cli::run(
        ["resetq", "queue-pmf", "--scenario", path.to_str().expect("utf-8 path")],
        &mut out,
        &mut err,
    );
    let stderr = String::from_utf8_lossy(&err);
    c.expect(code == 3 && stderr.starts_with("Unstable"), format!("CLI exit code {code}, stderr `{}`", stderr.trim()));
}

fn main() {
    let results = [
        run(1, Duration::from_secs(3), criterion_1),
        run(2, Duration::from_secs(60), |c| queue_reproduction(c, additive_gamma(), 0.5, 0.2424, 8.49, 0.739)),
        run(3, Duration::from_secs(60), |c| queue_reproduction(c, multiplicative_ig(), 0.75, 1.372, 4.12, 1.76)),
        run(4, Duration::from_secs(120), criterion_4),
        run(5, Duration::from_secs(60), criterion_5),
        run(6, Duration::from_secs(300), criterion_6),
        run(7, Duration::from_secs(600), |c| {
            simulated_queue(c, "additive gamma", additive_gamma(), 0.5);
            simulated_queue(c, "multiplicative IG", multiplicative_ig(), 0.75);
        }),
        run(8, Duration::from_secs(60), criterion_8),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
