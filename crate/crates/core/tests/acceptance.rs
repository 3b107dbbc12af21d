//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use trendcast::bounds::{
    normal_cdf, sweep, BoundInputs, ExposureExponent, LocalModel, PDeltaSource, RhoSearch,
    SweepRow, Theorem,
};
use trendcast::estimation::{edge_observation_counts, fit_adoption_params, observations, FitOptions};
use trendcast::graphmodel::{
    degree_ratio_prob_bound, degree_ratio_prob_empirical, generate_scale_free, DegreeDistribution,
    Network,
};
use trendcast::rng::derive_seed;
use trendcast::simulator::{
    exact_small, monte_carlo, random_seed_set, run, AdoptionTiming, BetaModel, SimConfig,
};
use trendcast::trendmodel::{
    adoption_factor, influence_factor, synthetic_params, AdoptionParams, LocalAdoptionCurve,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cli(args: &[&str]) -> i32 {
    let mut full = vec!["trendcast"];
    full.extend_from_slice(args);
    trendcast::cli::run(full)
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

// The analytic degree-ratio bound should dominate the sampled frequency.
fn degree_ratio_dominance() -> Outcome {
    let start = Instant::now();
    let n = 20_000;
    let samples = 1_000_000;
    let mut misses = Vec::new();
    let mut checked = 0;
    let mut table = Vec::new();
    for (gi, &gamma) in [2.1, 2.5, 3.0].iter().enumerate() {
        let dist = DegreeDistribution::power_law(gamma, 1, Some(n - 1)).unwrap();
        let net = generate_scale_free(n, &dist, 100 + gi as u64).unwrap();
        for &delta in &[2.0, 4.0, 8.0] {
            let bound = degree_ratio_prob_bound(&dist, delta).unwrap();
            let est = degree_ratio_prob_empirical(&net, delta, samples, 7).unwrap();
            table.push(format!("g={gamma} D={delta}: p={:.4} b={:.4}", est.p_hat, bound));
            if bound <= 1.0 {
                checked += 1;
                if est.p_hat > bound + 3.0 * est.std_err {
                    misses.push(format!("g={gamma} D={delta}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let in_time = elapsed <= Duration::from_secs(60);
    outcome(
        misses.is_empty() && in_time && checked > 0,
        format!(
            "{} of {checked} cells exceed bound + 3 SE [{}], {} (limit 60s); {}",
            misses.len(),
            misses.join(", "),
            secs(elapsed),
            table.join("; ")
        ),
    )
}

/// Phi by its power series `1/2 + phi(x) sum x^(2k+1) / (2k+1)!!`. For
/// positive x every term is positive, so there is no cancellation; the
/// lower tail uses the continued fraction of the Mills ratio.
fn phi_oracle(x: f64) -> f64 {
    let density = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if x < -3.0 {
        // Laplace continued fraction for the upper tail at |x|
        let z = -x;
        let mut frac = 0.0;
        for k in (1..=200).rev() {
            frac = k as f64 / (z + frac);
        }
        return density / (z + frac);
    }
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    while term.abs() > 1e-300 && term.abs() > sum.abs() * 1e-18 {
        k += 1.0;
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
    }
    0.5 + density * sum
}

fn normal_cdf_accuracy() -> Outcome {
    let points = 1000;
    let mut worst = 0.0f64;
    let mut worst_sym = 0.0f64;
    for i in 0..points {
        let x = -8.0 + 16.0 * i as f64 / (points - 1) as f64;
        worst = worst.max((normal_cdf(x) - phi_oracle(x)).abs());
        worst_sym = worst_sym.max((normal_cdf(x) + normal_cdf(-x) - 1.0).abs());
    }
    outcome(
        worst <= 1e-7 && worst_sym <= 2e-7,
        format!("max |Phi - oracle| = {worst:.2e} (limit 1e-7), max symmetry error = {worst_sym:.2e} (limit 2e-7)"),
    )
}

fn scenario_network(n: usize, gamma: f64, seed: u64) -> (Network, DegreeDistribution, AdoptionParams) {
    let dist = DegreeDistribution::power_law(gamma, 1, Some(n - 1)).unwrap();
    let mut net = generate_scale_free(n, &dist, seed).unwrap();
    let params = synthetic_params(&mut net, 0.5, 0.3, 2.0, seed + 1).unwrap();
    (net, dist, params)
}

fn check_sweep(rows: &[SweepRow]) -> Vec<String> {
    let mut problems = Vec::new();
    for r in rows {
        if !(0.0..=1.0).contains(&r.bound) {
            problems.push(format!("bound {} outside [0,1] at dt={} eps={}", r.bound, r.delta_t, r.epsilon));
        }
        if r.valid && !(r.rho > 0.0 && r.rho < r.delta_t as f64 * r.sigma_minus) {
            problems.push(format!("valid row with rho {} not in (0, dt sigma) at dt={}", r.rho, r.delta_t));
        }
    }
    for pair in rows.windows(2) {
        if pair[0].delta_t == pair[1].delta_t && pair[1].bound > pair[0].bound {
            problems.push(format!(
                "bound rises from eps {} to {} at dt={}",
                pair[0].epsilon, pair[1].epsilon, pair[0].delta_t
            ));
        }
    }
    problems
}

fn bound_sanity() -> Outcome {
    let (net, dist, params) = scenario_network(5000, 2.5, 11);
    let eps: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
    let horizons = [1, 2, 3, 5, 7, 10, 14, 21, 28, 42];
    let template = BoundInputs {
        n: net.n(),
        seed_fraction: 0.05,
        epsilon: 0.1,
        delta_t: 1,
        beta: 2.0,
        p_delta: PDeltaSource::Analytic(dist),
        local: LocalModel::Curve(Arc::new(LocalAdoptionCurve::new(&net, &params).unwrap())),
        rho: RhoSearch::default(),
        exponent: ExposureExponent::AsPrinted,
    };
    let factors = BoundInputs {
        local: LocalModel::Factors {
            xi_g: adoption_factor(&params),
            xi_n: influence_factor(&net),
        },
        ..template.clone()
    };
    let start = Instant::now();
    let one = sweep(&template, &eps, &horizons, Theorem::One).unwrap();
    let two = sweep(&factors, &eps, &horizons, Theorem::Two).unwrap();
    let elapsed = start.elapsed();
    let mut problems = check_sweep(&one);
    problems.extend(check_sweep(&two));
    let cells = one.len();
    let valid = one.iter().chain(&two).filter(|r| r.valid).count();
    outcome(
        problems.is_empty() && cells == 200 && two.len() == 200 && elapsed <= Duration::from_secs(10),
        format!(
            "{cells} cells per theorem, {valid}/400 valid, {} problems{}, {} (limit 10s)",
            problems.len(),
            problems.first().map(|p| format!(" (first: {p})")).unwrap_or_default(),
            secs(elapsed)
        ),
    )
}

fn simulator_vs_exact() -> Outcome {
    let star = Network::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
    let path = Network::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    let runs = 100_000;
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut misses = Vec::new();
    let mut cells = 0;
    for (name, mut net) in [("star", star), ("path", path)] {
        net.fill_weights(0.4).unwrap();
        let n = net.n();
        let params = AdoptionParams::uniform(n, 0.3, 1.0).unwrap();
        let grid: Vec<f64> = (1..=n).map(|k| k as f64 / n as f64).collect();
        for horizon in [1, 2] {
            let exact = exact_small(&net, &[0], &params, 1.0, horizon).unwrap();
            let config = SimConfig {
                horizon,
                beta_model: BetaModel::Deterministic(1.0),
                runs,
                master_seed: 2024 + horizon as u64,
                epsilon_grid: grid.clone(),
                adoption: AdoptionTiming::AtHorizon,
            };
            let curve = monte_carlo(&net, &[0], &params, &config).unwrap();
            for point in &curve.points {
                cells += 1;
                let p = exact.p_trend(point.epsilon);
                let se = (p * (1.0 - p) / runs as f64).sqrt();
                let gap = (point.p_hat - p).abs();
                if se > 0.0 {
                    worst = worst.max(gap / se);
                }
                if gap > 3.0 * se {
                    misses.push(format!("{name} dt={horizon} eps={:.3}: {} vs {p:.5}", point.epsilon, point.p_hat));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        misses.is_empty() && elapsed <= Duration::from_secs(30),
        format!(
            "{cells} cells, largest deviation {worst:.2} SE, {} outside 3 SE{}, {} (limit 30s)",
            misses.len(),
            misses.first().map(|m| format!(" (first: {m})")).unwrap_or_default(),
            secs(elapsed)
        ),
    )
}

const PIPELINE_FILES: [&str; 3] = ["sweep.csv", "empirical.csv", "compare.csv"];

fn pipeline(dir: &Path, n: &str, runs: &str) -> i32 {
    cli(&[
        "pipeline", "--n", n, "--gamma", "2.5", "--seed-fraction", "0.05", "--beta", "2",
        "--runs", runs, "--seed", "42", "--out", dir.to_str().unwrap(),
    ])
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["serial", "parallel", "repeat"].iter().map(|d| tmp.path().join(d)).collect();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let codes = [
        one.install(|| pipeline(&dirs[0], "2000", "2000")),
        four.install(|| pipeline(&dirs[1], "2000", "2000")),
        pipeline(&dirs[2], "2000", "2000"),
    ];
    if codes.iter().any(|&c| c != 0) {
        return outcome(false, format!("pipeline exit codes {codes:?}"));
    }
    let mut differing = Vec::new();
    for file in PIPELINE_FILES {
        let reference = std::fs::read(dirs[0].join(file)).unwrap();
        for dir in &dirs[1..] {
            if std::fs::read(dir.join(file)).unwrap() != reference {
                differing.push(format!("{}/{file}", dir.file_name().unwrap().to_string_lossy()));
            }
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "3 pipeline runs (1 thread, 4 threads, global pool): {} differing files {differing:?}",
            differing.len()
        ),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn estimation_round_trip() -> Outcome {
    let start = Instant::now();
    let min_obs = 10;
    let mut mae_s = Vec::new();
    let mut mae_w = Vec::new();
    let mut all_converged = true;
    for master in [1u64, 2, 3] {
        let n = 500;
        let dist = DegreeDistribution::power_law(2.5, 2, Some(n - 1)).unwrap();
        let mut truth = generate_scale_free(n, &dist, derive_seed(master, 1)).unwrap();
        let params = synthetic_params(&mut truth, 0.5, 0.3, 3.0, derive_seed(master, 2)).unwrap();
        let config = SimConfig {
            horizon: 10,
            beta_model: BetaModel::Poisson(3.0),
            runs: 1,
            master_seed: derive_seed(master, 3),
            epsilon_grid: vec![],
            adoption: AdoptionTiming::AtHorizon,
        };
        let logs: Vec<_> = (0..50u64)
            .map(|i| {
                let seeds = random_seed_set(n, 0.05, derive_seed(master, 100 + i)).unwrap();
                run(&truth, &seeds, &params, &config, i).unwrap().event_log()
            })
            .collect();
        let fit = fit_adoption_params(&truth.unweighted(), &logs, &FitOptions::default()).unwrap();
        all_converged &= fit.converged;

        let obs: Vec<_> = logs.iter().flat_map(observations).collect();
        let mut node_obs: BTreeMap<usize, usize> = BTreeMap::new();
        for o in &obs {
            *node_obs.entry(o.node).or_default() += 1;
        }
        let s_err: Vec<f64> = node_obs
            .iter()
            .filter(|(_, &c)| c >= min_obs)
            .map(|(v, _)| (fit.s.get(v).copied().unwrap_or(0.0) - params.s[*v]).abs())
            .collect();
        let edge_obs = edge_observation_counts(&obs);
        let w_err: Vec<f64> = fit
            .w
            .iter()
            .filter(|e| edge_obs.get(&(e.u, e.v)).is_some_and(|&c| c >= min_obs))
            .map(|e| (e.w_uv - truth.weight(e.u, e.v)).abs())
            .collect();
        if s_err.is_empty() || w_err.is_empty() {
            return outcome(false, format!("seed {master}: no parameters with {min_obs}+ observations"));
        }
        mae_s.push(s_err.iter().sum::<f64>() / s_err.len() as f64);
        mae_w.push(w_err.iter().sum::<f64>() / w_err.len() as f64);
    }
    let elapsed = start.elapsed();
    let (ms, mw) = (median(mae_s.clone()), median(mae_w.clone()));
    outcome(
        ms <= 0.1 && mw <= 0.1 && all_converged && elapsed <= Duration::from_secs(300),
        format!(
            "median MAE s = {ms:.3} {mae_s:.3?}, w = {mw:.3} {mae_w:.3?} (limit 0.1), converged = {all_converged}, {} (limit 300s)",
            secs(elapsed)
        ),
    )
}

fn read_sweep(path: &Path) -> Vec<SweepRow> {
    trendcast::bounds::read_sweep_csv(std::fs::File::open(path).unwrap()).unwrap()
}

fn figure_shape() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for theorem in ["1", "2"] {
        let dir = tmp.path().join(format!("theorem{theorem}"));
        let code = cli(&[
            "bound", "--n", "5000", "--gamma", "2.5", "--seed-fraction", "0.05", "--beta", "2",
            "--dt-list", "14:42:7", "--eps-grid", "0.05:1:0.05", "--theorem", theorem,
            "--out", dir.to_str().unwrap(),
        ]);
        if code != 0 {
            return outcome(false, format!("bound --theorem {theorem} exited with {code}"));
        }
        let rows = read_sweep(&dir.join("sweep.csv"));
        let mut horizons: Vec<u32> = rows.iter().map(|r| r.delta_t).collect();
        horizons.dedup();
        let problems = check_sweep(&rows);
        pass &= horizons.len() == 5 && problems.is_empty();
        let ordering = trendcast::bounds::horizon_ordering(&rows);
        let ordered = ordering.iter().filter(|o| o.nondecreasing_in_delta_t).count();
        notes.push(format!(
            "theorem {theorem}: {} horizons, {} shape problems, bound non-decreasing in dt at {ordered}/{} eps (reported only)",
            horizons.len(),
            problems.len(),
            ordering.len()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

fn compare_harness() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // planted: eps 0.2 and 0.4 have a bound above the upper interval end
    write(
        &dir.join("sweep.csv"),
        "delta_t,epsilon,bound,rho,sigma_minus,p_tilde,valid\n\
         7,0.1,0.30,1,0.5,0.1,true\n\
         7,0.2,0.25,1,0.5,0.1,true\n\
         7,0.3,0.05,1,0.5,0.1,true\n\
         7,0.4,0.04,1,0.5,0.1,true\n\
         7,0.5,0.0,0,0.5,0,false\n",
    );
    write(
        &dir.join("empirical.csv"),
        "epsilon,p_hat,ci_low,ci_high,runs\n\
         0.1,0.5,0.45,0.55,1000\n\
         0.2,0.1,0.08,0.12,1000\n\
         0.3,0.1,0.08,0.12,1000\n\
         0.4,0.0,0.0,0.0038,1000\n\
         0.5,0.0,0.0,0.0038,1000\n",
    );
    let out = dir.join("planted");
    let code = cli(&[
        "compare",
        "--sweep", dir.join("sweep.csv").to_str().unwrap(),
        "--empirical", dir.join("empirical.csv").to_str().unwrap(),
        "--out", out.to_str().unwrap(),
    ]);
    if code != 0 {
        return outcome(false, format!("compare exited with {code}"));
    }
    let flagged = flagged_eps(&out.join("compare.csv"));
    let planted_ok = flagged == ["0.2", "0.4"];

    let end = dir.join("end-to-end");
    let start = Instant::now();
    let code = cli(&[
        "pipeline", "--n", "5000", "--gamma", "2.5", "--seed-fraction", "0.05", "--beta", "2",
        "--runs", "10000", "--seed", "1", "--out", end.to_str().unwrap(),
    ]);
    let elapsed = start.elapsed();
    if code != 0 {
        return outcome(false, format!("planted flags {flagged:?}; pipeline exited with {code}"));
    }
    let text = std::fs::read_to_string(end.join("compare.csv")).unwrap();
    let rows = text.lines().count() - 1;
    let violations = flagged_eps(&end.join("compare.csv")).len();
    outcome(
        planted_ok && rows == 10 && elapsed <= Duration::from_secs(600),
        format!(
            "planted flags {flagged:?} (expected [0.2, 0.4]); end-to-end {rows} rows, {violations} violations, {} (limit 600s)",
            secs(elapsed)
        ),
    )
}

fn flagged_eps(path: &Path) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records()
        .map(Result::unwrap)
        .filter(|r| &r[4] == "true")
        .map(|r| r[0].to_string())
        .collect()
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("degree-ratio bound dominance", degree_ratio_dominance),
        ("normal CDF accuracy", normal_cdf_accuracy),
        ("bound sanity sweep", bound_sanity),
        ("simulator vs exact enumeration", simulator_vs_exact),
        ("pipeline determinism", determinism),
        ("estimation round trip", estimation_round_trip),
        ("figure shape", figure_shape),
        ("bound vs empirical harness", compare_harness),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!result.pass);
        println!("criterion {} ({name}): {verdict}: {}", i + 1, result.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
