//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. All Monte Carlo runs use the fixed seed below.

use std::path::Path;
use std::process::Command as Process;
use std::time::Instant;

use cellfade::analytics::Analytics;
use cellfade::capacity::CapacityFunction;
use cellfade::channel::{FadingModel, NetworkModel, PathLossModel};
use cellfade::intensity::{IntensityFunction, Mode};
use cellfade::simulator::{
    batched_variance_standard_error, ks_critical_value, ks_statistic_censored, summarize,
    SimulationConfig, SimulationOutput, Simulator,
};
use cellfade_cli::{run, Command, RunOptions, ScenarioConfig};

const SEED: u64 = 2013;
const REPS: usize = 10_000;
const LAMBDA_B: f64 = 1e-5;
const K: f64 = 1e-2;
const GAMMA: f64 = 2.8;
const R0: f64 = 20.0;
/// Expected numbers of covering BSs at the test thresholds.
const LEVELS: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 4.0];

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn exponent(gamma: f64) -> PathLossModel {
    PathLossModel::exponent(K, gamma).unwrap()
}

fn modified() -> PathLossModel {
    PathLossModel::modified_exponent(K, GAMMA, R0).unwrap()
}

fn rayleigh() -> FadingModel {
    FadingModel::rayleigh(1.0).unwrap()
}

fn lognormal() -> FadingModel {
    FadingModel::log_normal(4.0).unwrap()
}

fn network(fading: FadingModel, path_loss: PathLossModel, load: f64) -> NetworkModel {
    NetworkModel::new(LAMBDA_B, load * LAMBDA_B, fading, path_loss, 1e6).unwrap()
}

fn thresholds(a: &Analytics, levels: &[f64]) -> Vec<f64> {
    levels
        .iter()
        .map(|x| a.intensity().inverse(x / LAMBDA_B).unwrap())
        .collect()
}

fn simulate(net: NetworkModel, thresholds: Vec<f64>, fs: Vec<CapacityFunction>) -> SimulationOutput {
    let cfg = SimulationConfig {
        replications: REPS,
        master_seed: SEED,
        thresholds,
        capacity_functions: fs,
        ..SimulationConfig::new(net)
    };
    Simulator::new(cfg).unwrap().run().unwrap()
}

/// Bit rate with 3 bins: 4, 2 and 1 between the levels `λ_B B = 0.5, 1, 2, 4`.
fn three_bin(a: &Analytics) -> CapacityFunction {
    let t = thresholds(a, &[0.5, 1.0, 2.0, 4.0]);
    CapacityFunction::piecewise_constant(t, vec![4.0, 2.0, 1.0]).unwrap()
}

fn model_name(net: &NetworkModel) -> String {
    let pl = match net.path_loss {
        PathLossModel::Exponent { .. } => "exponent".to_string(),
        PathLossModel::ModifiedExponent { r0, .. } => format!("modified(r0={r0})"),
    };
    let fading = match net.fading {
        FadingModel::Rayleigh { .. } => "rayleigh",
        FadingModel::LogNormal { .. } => "lognormal",
        FadingModel::Constant { .. } => "constant",
        FadingModel::RayleighLogNormal { .. } => "rayleigh-lognormal",
    };
    format!("{pl}/{fading}")
}

fn outage_vs_simulation() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for pl in [exponent(GAMMA), modified()] {
        for fading in [rayleigh(), lognormal(), FadingModel::constant(1.0).unwrap()] {
            let net = network(fading, pl, 1.0);
            let a = Analytics::new(&net).unwrap();
            let ts = thresholds(&a, &LEVELS);
            let out = simulate(net, ts.clone(), vec![]);
            for &t in &ts {
                let p = a.outage_probability(t).unwrap();
                let q = summarize(&out.outage_indicators(t).unwrap()).unwrap().sample_mean;
                let z = (q - p) / (p * (1.0 - p) / REPS as f64).sqrt();
                worst = worst.max(z.abs());
                if z.abs() > 3.0 {
                    failures.push(format!("{} T={t:.4e}: z={z:+.2}", model_name(&net)));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!("30 checks, max |z| = {worst:.2}, {secs:.1} s");
    if !failures.is_empty() {
        Err(format!("{detail}; {}", failures.join(", ")))
    } else if secs > 120.0 {
        Err(format!("{detail}; over the 120 s budget"))
    } else {
        Ok(detail)
    }
}

fn low_outage_closeness() -> Verdict {
    let mut max_gap: f64 = 0.0;
    for fading in [lognormal(), rayleigh()] {
        let exp = Analytics::new(&network(fading, exponent(GAMMA), 1.0)).unwrap();
        let m = Analytics::new(&network(fading, modified(), 1.0)).unwrap();
        let lo = exp.intensity().inverse(1e-2 / LAMBDA_B).unwrap();
        let hi = exp.intensity().inverse(10.0 / LAMBDA_B).unwrap();
        for i in 0..60 {
            let t = lo * (hi / lo).powf(i as f64 / 59.0);
            let pe = exp.outage_probability(t).unwrap();
            let pm = m.outage_probability(t).unwrap();
            // The two forms are evaluated differently; allow rounding only.
            if pm < pe * (1.0 - 1e-12) {
                return Err(format!("modified below exponent at T = {t:.4e}: {pm} < {pe}"));
            }
            if pm < 1e-2 {
                let gap = (pm - pe) / pm;
                max_gap = max_gap.max(gap);
                if gap >= 0.05 {
                    return Err(format!("relative gap {gap:.3} at T = {t:.4e}"));
                }
            }
        }
    }
    Ok(format!("modified ≥ exponent on 120 points, max relative gap {max_gap:.2e} where outage < 1e-2"))
}

fn mean_cell_load() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for load in [1.0, 5.0, 20.0] {
        let out = simulate(network(lognormal(), exponent(GAMMA), load), vec![], vec![]);
        let s = summarize(&out.n_o()).unwrap();
        let half = s.ci95_halfwidth;
        let inside = (s.sample_mean - load).abs() <= half;
        ok &= inside;
        parts.push(format!("{load}: {:.4} ± {half:.4}{}", s.sample_mean, if inside { "" } else { " (miss)" }));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn variance_sandwich() -> Verdict {
    let net = network(lognormal(), exponent(GAMMA), 5.0);
    let a = Analytics::new(&net).unwrap();
    let t = thresholds(&a, &[1.0])[0];
    let fs = vec![
        CapacityFunction::one(),
        CapacityFunction::outage_indicator(t).unwrap(),
        CapacityFunction::coverage_indicator(t).unwrap(),
        three_bin(&a),
    ];
    let out = simulate(net, vec![t], fs.clone());
    let mut parts = Vec::new();
    let mut ok = true;
    for (i, (f, label)) in fs.iter().zip(["f0", "f1", "f2", "f3"]).enumerate() {
        let samples = out.capacity(i);
        let var = summarize(&samples).unwrap().sample_variance;
        let slack = 3.0 * batched_variance_standard_error(&samples, 20).unwrap();
        let b = a.variance_bounds(f).unwrap();
        let lower_ok = var >= b.lower - slack;
        let upper_ok = if i >= 2 { b.upper.is_finite() && var <= b.upper + slack } else { true };
        ok &= lower_ok && upper_ok;
        parts.push(format!(
            "{label}: {:.3} ≤ {var:.3} ≤ {:.3}{}",
            b.lower,
            b.upper,
            if lower_ok && upper_ok { "" } else { " (miss)" }
        ));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn order_statistics() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    // At R0 = 20 m a BS lies inside the clamp radius only about 1% of the
    // time, so a 150 m clamp is checked as well.
    let wide = PathLossModel::modified_exponent(K, GAMMA, 150.0).unwrap();
    for pl in [exponent(GAMMA), modified(), wide] {
        let net = network(rayleigh(), pl, 1.0);
        let a = Analytics::new(&net).unwrap();
        let out = simulate(net, vec![], vec![]);
        let n = out.records.len();
        let crit = ks_critical_value(n, 0.001);
        for m in 0..3 {
            let d = ks_statistic_censored(&out.xi_observed(m), n, out.windows.beta_max, |t| {
                1.0 - a.xi_m_ccdf(m as u32, t).unwrap()
            });
            ok &= d < crit;
            parts.push(format!("{} ξ{m}: D = {d:.4}", model_name(&net)));
        }
        parts.push(format!("critical {crit:.4}"));
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cross_route_identity() -> Verdict {
    let mut worst: f64 = 0.0;
    for gamma in [2.2, 2.8, 4.0] {
        for fading in [rayleigh(), lognormal(), FadingModel::constant(1.0).unwrap()] {
            let a = Analytics::new(&network(fading, exponent(gamma), 5.0)).unwrap();
            let t = thresholds(&a, &[1.0])[0];
            let grid: Vec<f64> = (0..=200).map(|i| 5.0 * t * i as f64 / 200.0).collect();
            let values = grid.iter().map(|x| (-x / t).exp()).collect();
            let fs = [
                CapacityFunction::coverage_indicator(t).unwrap(),
                three_bin(&a),
                CapacityFunction::tabulated(grid, values).unwrap(),
            ];
            for f in &fs {
                let g = a.user_capacity_mean_general(f).unwrap();
                let l = a.user_capacity_mean_laplace(f).unwrap();
                let rel = (g - l).abs() / g.abs().max(l.abs());
                worst = worst.max(rel);
            }
        }
    }
    let detail = format!("27 comparisons, max relative difference {worst:.2e}");
    if worst <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn closed_form_vs_quadrature() -> Verdict {
    let mut worst_value: f64 = 0.0;
    let mut worst_derivative: f64 = 0.0;
    for pl in [exponent(GAMMA), modified()] {
        for fading in [lognormal(), rayleigh()] {
            let b = IntensityFunction::from_channel(fading, pl).unwrap();
            if b.mode() != Mode::ClosedForm {
                return Err(format!("{fading:?} × {pl:?} has no closed form"));
            }
            for i in 0..=50 {
                let beta = 1e5 * 10f64.powf(5.0 * i as f64 / 50.0);
                let v = b.value(beta).unwrap();
                let q = b.value_by_quadrature(beta).unwrap();
                worst_value = worst_value.max((v - q).abs() / v);
                let h = 1e-5 * beta;
                let fd = (b.value(beta + h).unwrap() - b.value(beta - h).unwrap()) / (2.0 * h);
                let d = b.derivative(beta).unwrap();
                worst_derivative = worst_derivative.max((d - fd).abs() / d);
            }
        }
    }
    let detail = format!(
        "4 pairs × 51 levels over [1e5, 1e10]: value {worst_value:.2e}, derivative {worst_derivative:.2e}"
    );
    if worst_value <= 1e-6 && worst_derivative <= 1e-5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn chebyshev_tail() -> Verdict {
    let net = network(rayleigh(), exponent(GAMMA), 5.0);
    let a = Analytics::new(&net).unwrap();
    let f3 = three_bin(&a);
    let out = simulate(net, vec![], vec![f3.clone()]);
    let samples = out.capacity(0);
    let m = a.cell_capacity_mean(&f3).unwrap();
    let u = a.variance_bounds(&f3).unwrap().upper;
    let n = samples.len() as f64;
    let mut max_ratio: f64 = 0.0;
    for k in 1..=10 {
        let t = 0.5 * k as f64 * u.sqrt();
        let p = samples.iter().filter(|&&x| x > m + t).count() as f64 / n;
        let bound = a.chebyshev_tail_bound(&f3, t).unwrap();
        let limit = bound + 3.0 * (bound * (1.0 - bound) / n).sqrt();
        max_ratio = max_ratio.max(p / bound);
        if p > limit {
            return Err(format!("t = {t:.3}: empirical {p:.4} > {limit:.4}"));
        }
    }
    Ok(format!("10 deviations, largest empirical/bound ratio {max_ratio:.3}"))
}

fn fixture() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/lognormal.toml");
    path.to_str().unwrap().to_string()
}

fn determinism() -> Verdict {
    let compare = |threads: &str| {
        let out = Process::new(env!("CARGO_BIN_EXE_cellfade"))
            .args(["compare", "--config", &fixture(), "--seed", &SEED.to_string(), "--threads", threads])
            .output()
            .expect("binary runs");
        if !matches!(out.status.code(), Some(0) | Some(4)) {
            return Err(format!("compare exited with {:?}", out.status.code()));
        }
        Ok(out.stdout)
    };
    let a = compare("8")?;
    let b = compare("8")?;
    let c = compare("1")?;
    if a.is_empty() {
        return Err("empty output".into());
    }
    match (a == b, a == c) {
        (true, true) => Ok(format!("{} bytes identical across reruns and 1/8 threads", a.len())),
        (false, _) => Err("reruns differ".into()),
        (_, false) => Err("1 and 8 threads differ".into()),
    }
}

fn z_scores(config: &ScenarioConfig) -> Vec<(String, f64)> {
    let opts = RunOptions {
        seed: Some(SEED),
        replications: Some(REPS),
        ..Default::default()
    };
    let out = run(Command::Compare, config, &opts).unwrap();
    let text = String::from_utf8(out.csv).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[0].to_string(), cols[4].parse().unwrap())
        })
        .collect()
}

fn edge_effects() -> Verdict {
    let config = ScenarioConfig::load(Path::new(&fixture())).unwrap();
    let auto = Simulator::new(config.simulation(Some(SEED), Some(REPS), None).unwrap())
        .unwrap()
        .windows()
        .bs_radius;
    let mut doubled = config.clone();
    doubled.simulation.bs_window_radius = Some(2.0 * auto);
    let base = z_scores(&config);
    let wide = z_scores(&doubled);
    let mut worst: f64 = 0.0;
    for ((name, z0), (_, z1)) in base.iter().zip(&wide) {
        let d = (z1 - z0).abs();
        worst = worst.max(d);
        if d >= 1.0 {
            return Err(format!("{name}: z {z0:+.3} → {z1:+.3}"));
        }
    }
    Ok(format!("R_w {auto:.0} → {:.0}: {} z-scores, max change {worst:.3}", 2.0 * auto, base.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("outage formula vs simulation", outage_vs_simulation),
        ("modified vs exponent outage", low_outage_closeness),
        ("mean cell load", mean_cell_load),
        ("variance sandwich", variance_sandwich),
        ("order statistics KS", order_statistics),
        ("Laplace vs general route", cross_route_identity),
        ("closed form vs quadrature", closed_form_vs_quadrature),
        ("Chebyshev tail", chebyshev_tail),
        ("determinism", determinism),
        ("edge-effect robustness", edge_effects),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
