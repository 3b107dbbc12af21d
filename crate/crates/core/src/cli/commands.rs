use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use super::*;
use crate::bounds::{
    horizon_ordering, read_sweep_csv, render_sweep_svg, sweep, write_sweep_csv, BoundInputs, ExposureExponent,
    LocalModel, PDeltaSource, RhoGrid, RhoMode, RhoSearch, SweepRow, Theorem,
};
use crate::estimation::{empirical_sigma_minus, factors_from_fit, fit_adoption_params, read_event_log, FitOptions, FitResult};
use crate::graphmodel::{
    degree_ratio_prob_empirical, fit_gamma_mle, generate_scale_free, read_edge_list, write_degree_csv, write_edge_list,
    DegreeDistribution, Network,
};
use crate::io::{parse_f64_list, read_node_list, write_atomic, write_node_list};
use crate::rng::derive_seed;
use crate::simulator::{
    compare, exact_small, monte_carlo, random_seed_set, read_empirical_csv, run as run_cascade, write_compare_csv,
    write_empirical_csv, AdoptionTiming, BetaModel, EmpiricalCurve, SimConfig,
};
use crate::trendmodel::{adoption_factor, influence_factor, synthetic_params, AdoptionParams, LocalAdoptionCurve};

const STAGE_GENERATE: u64 = 1;
const STAGE_PARAMS: u64 = 2;
const STAGE_SEEDS: u64 = 3;
const STAGE_SIMULATE: u64 = 4;
const STAGE_P_DELTA: u64 = 5;
const DEFAULT_BETA: f64 = 2.0;

pub(super) fn dispatch(command: &Command, argv: &[String]) -> Result<i32> {
    let mut manifest = Manifest::new(argv);
    let code = match command {
        Command::Generate(a) => generate(a, &mut manifest)?,
        Command::Bound(a) => bound(a, &mut manifest)?,
        Command::Simulate(a) => simulate(a, &mut manifest)?,
        Command::Estimate(a) => estimate(a, &mut manifest)?,
        Command::Compare(a) => compare_cmd(a, &mut manifest)?,
        Command::Pipeline(a) => pipeline(a, &mut manifest)?,
    };
    Ok(code)
}

#[derive(Debug, Serialize)]
struct Manifest {
    command: String,
    argv: Vec<String>,
    version: &'static str,
    master_seed: u64,
    stage_seeds: BTreeMap<&'static str, u64>,
    outputs: Vec<String>,
    notes: BTreeMap<String, serde_json::Value>,
    wall_clock_seconds: f64,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Manifest {
    fn new(argv: &[String]) -> Self {
        Self {
            command: argv.get(1).cloned().unwrap_or_default(),
            argv: argv.to_vec(),
            version: env!("CARGO_PKG_VERSION"),
            master_seed: 0,
            stage_seeds: BTreeMap::new(),
            outputs: Vec::new(),
            notes: BTreeMap::new(),
            wall_clock_seconds: 0.0,
            started: Some(Instant::now()),
        }
    }

    fn stage(&mut self, name: &'static str, master: u64, stage: u64) -> u64 {
        self.master_seed = master;
        let s = derive_seed(master, stage);
        self.stage_seeds.insert(name, s);
        s
    }

    fn note(&mut self, key: &str, value: impl Serialize) {
        if let Ok(v) = serde_json::to_value(value) {
            self.notes.insert(key.to_string(), v);
        }
    }

    fn write(&mut self, dir: &Path, master: u64) -> Result<()> {
        self.master_seed = master;
        self.wall_clock_seconds = self.started.map_or(0.0, |t| t.elapsed().as_secs_f64());
        let text = serde_json::to_string_pretty(self)?;
        write_atomic(&dir.join("run-manifest.json"), |buf| {
            buf.extend_from_slice(text.as_bytes());
            buf.push(b'\n');
            Ok(())
        })
    }
}

fn out_dir(out: &OutArgs) -> Result<PathBuf> {
    fs::create_dir_all(&out.out)?;
    Ok(out.out.clone())
}

fn emit<F>(dir: &Path, name: &str, manifest: &mut Manifest, fill: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    write_atomic(&dir.join(name), fill)?;
    manifest.outputs.push(name.to_string());
    Ok(())
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| input(format!("cannot open {}: {e}", path.display())))
}

fn load_fit(path: &Path) -> Result<FitResult> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    FitResult::from_json(&text)
}

/// Network from file or generator, and the generating distribution if any.
fn obtain_network(
    args: &NetworkArgs,
    n_hint: Option<usize>,
    master: u64,
    manifest: &mut Manifest,
) -> Result<(Network, Option<DegreeDistribution>)> {
    if let Some(path) = &args.network {
        let n = match (args.nodes, n_hint) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        return Ok((read_edge_list(open(path)?, n, false)?, None));
    }
    let n = args.n.ok_or_else(|| input("give --network or --n and --gamma"))?;
    let gamma = args.gamma.ok_or_else(|| input("--gamma is required when generating"))?;
    let dist = DegreeDistribution::power_law(gamma, args.dmin, args.dmax)?;
    let seed = manifest.stage("generate", master, STAGE_GENERATE);
    Ok((generate_scale_free(n, &dist, seed)?, Some(dist)))
}

/// Adoption parameters from file or synthetic draws; weights go onto `net`.
fn obtain_params(args: &ParamsArgs, net: &mut Network, master: u64, manifest: &mut Manifest) -> Result<AdoptionParams> {
    if let Some(path) = &args.params {
        let fit = load_fit(path)?;
        let (weighted, mut params) = fit.apply(net)?;
        *net = weighted;
        params.beta = args.beta.unwrap_or(fit.beta_hat);
        return Ok(params);
    }
    let seed = manifest.stage("params", master, STAGE_PARAMS);
    synthetic_params(net, args.s_max, args.w_max, args.beta.unwrap_or(DEFAULT_BETA), seed)
}

fn params_hint(args: &ParamsArgs) -> Result<Option<usize>> {
    match &args.params {
        Some(p) => Ok(load_fit(p)?.s.keys().next_back().map(|v| v + 1)),
        None => Ok(None),
    }
}

fn obtain_seeds(args: &SeedArgs, n: usize, master: u64, manifest: &mut Manifest) -> Result<Vec<usize>> {
    if let Some(path) = &args.seeds {
        let seeds = read_node_list(std::io::BufReader::new(open(path)?))?;
        if seeds.is_empty() {
            return Err(input("seed file lists no nodes"));
        }
        if let Some(v) = seeds.iter().find(|&&v| v >= n) {
            return Err(input(format!("seed {v} outside 0..{n}")));
        }
        return Ok(seeds);
    }
    let seed = manifest.stage("seeds", master, STAGE_SEEDS);
    random_seed_set(n, args.seed_fraction, seed)
}

fn epsilon_grid(text: &str) -> Result<Vec<f64>> {
    let grid = parse_f64_list(text)?;
    if let Some(e) = grid.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return Err(input(format!("epsilon {e} outside (0, 1]")));
    }
    Ok(grid)
}

fn horizon_list(text: &str) -> Result<Vec<u32>> {
    parse_f64_list(text)?
        .into_iter()
        .map(|x| {
            if x >= 1.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                Err(input(format!("horizon {x} is not a positive integer")))
            }
        })
        .collect()
}

fn rho_grid(text: &str) -> Result<RhoGrid> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    match kind {
        "integer" if arg.is_empty() => Ok(RhoGrid::Integer),
        "relative" => {
            let divisions = if arg.is_empty() { 1000 } else { arg.parse().map_err(|_| input(format!("bad rho grid `{text}`")))? };
            Ok(RhoGrid::Relative { divisions })
        }
        "step" => Ok(RhoGrid::Step(arg.parse().map_err(|_| input(format!("bad rho grid `{text}`")))?)),
        _ => Err(input(format!("rho grid must be relative:K, integer or step:H, got `{text}`"))),
    }
}

fn p_delta_source(
    settings: &BoundSettings,
    net_args: &NetworkArgs,
    net: &Network,
    dist: Option<DegreeDistribution>,
    master: u64,
    manifest: &mut Manifest,
) -> Result<PDeltaSource> {
    match settings.p_delta {
        PDeltaArg::Analytic => {
            if let Some(d) = dist {
                return Ok(PDeltaSource::Analytic(d));
            }
            let gamma = match net_args.gamma {
                Some(g) => g,
                None => {
                    // continuous MLE with the half-integer shift for integer degrees
                    let tail: Vec<f64> = net
                        .degrees()
                        .into_iter()
                        .filter(|&d| d >= net_args.dmin)
                        .map(|d| d as f64)
                        .collect();
                    let g = fit_gamma_mle(&tail, net_args.dmin as f64 - 0.5)?;
                    manifest.note("gamma_fitted", g);
                    g
                }
            };
            Ok(PDeltaSource::Analytic(DegreeDistribution::power_law(gamma, net_args.dmin, None)?))
        }
        PDeltaArg::Empirical => {
            let seed = manifest.stage("p_delta", master, STAGE_P_DELTA);
            let table = crate::bounds::delta_grid(settings.delta_max)?
                .into_iter()
                .map(|d| Ok((d, degree_ratio_prob_empirical(net, d, settings.p_delta_samples, seed)?.p_hat)))
                .collect::<Result<Vec<_>>>()?;
            Ok(PDeltaSource::Table(table))
        }
    }
}

fn local_model(settings: &BoundSettings, net: &Network, params: &AdoptionParams) -> Result<(Theorem, LocalModel)> {
    if settings.theorem == 1 {
        let local = match settings.p_local {
            Some(p) => LocalModel::Constant(p),
            None => LocalModel::Curve(Arc::new(LocalAdoptionCurve::new(net, params)?)),
        };
        Ok((Theorem::One, local))
    } else {
        let xi_g = settings.xi_g.unwrap_or_else(|| adoption_factor(params));
        let xi_n = settings.xi_n.unwrap_or_else(|| influence_factor(net));
        Ok((Theorem::Two, LocalModel::Factors { xi_g, xi_n }))
    }
}

struct SweepPlan {
    template: BoundInputs,
    theorem: Theorem,
    eps: Vec<f64>,
    horizons: Vec<u32>,
}

#[allow(clippy::too_many_arguments)]
fn plan_sweep(
    settings: &BoundSettings,
    net_args: &NetworkArgs,
    net: &Network,
    dist: Option<DegreeDistribution>,
    params: &AdoptionParams,
    seed_fraction: f64,
    master: u64,
    manifest: &mut Manifest,
) -> Result<SweepPlan> {
    let eps = epsilon_grid(&settings.eps_grid)?;
    let horizons = horizon_list(&settings.dt_list)?;
    let p_delta = p_delta_source(settings, net_args, net, dist, master, manifest)?;
    let (theorem, local) = local_model(settings, net, params)?;
    if let LocalModel::Factors { xi_g, xi_n } = local {
        manifest.note("xi_g", xi_g);
        manifest.note("xi_n", xi_n);
    }
    manifest.note("beta", params.beta);
    manifest.note("seed_fraction", seed_fraction);
    let template = BoundInputs {
        n: net.n(),
        seed_fraction,
        epsilon: eps[0],
        delta_t: horizons[0],
        beta: params.beta,
        p_delta,
        local,
        rho: RhoSearch {
            mode: match settings.rho_mode {
                RhoModeArg::Tightest => RhoMode::Tightest,
                RhoModeArg::PaperLiteral => RhoMode::PaperLiteral,
            },
            grid: rho_grid(&settings.rho_grid)?,
            delta_grid_max: settings.delta_max,
        },
        exponent: match settings.exposure {
            ExposureArg::Printed => ExposureExponent::AsPrinted,
            ExposureArg::Conservative => ExposureExponent::Conservative,
        },
    };
    Ok(SweepPlan {
        template,
        theorem,
        eps,
        horizons,
    })
}

/// Writes sweep.csv, horizon_ordering.csv and optionally sweep.svg; returns
/// the number of cells without a valid rho.
fn emit_sweep(dir: &Path, rows: &[SweepRow], svg: bool, manifest: &mut Manifest) -> Result<usize> {
    emit(dir, "sweep.csv", manifest, |b| write_sweep_csv(rows, b))?;
    let ordering = horizon_ordering(rows);
    emit(dir, "horizon_ordering.csv", manifest, |b| {
        let mut w = csv::Writer::from_writer(b);
        for o in &ordering {
            w.serialize(o)?;
        }
        w.flush()?;
        Ok(())
    })?;
    if svg {
        let text = render_sweep_svg(rows);
        emit(dir, "sweep.svg", manifest, |b| {
            b.extend_from_slice(text.as_bytes());
            Ok(())
        })?;
    }
    let improving = ordering.iter().filter(|o| o.nondecreasing_in_delta_t).count();
    manifest.note("horizon_ordering_nondecreasing", format!("{improving}/{}", ordering.len()));
    let invalid = rows.iter().filter(|r| !r.valid).count();
    manifest.note("invalid_cells", invalid);
    if invalid > 0 {
        eprintln!("warning: {invalid} of {} cells have no valid rho (reported as bound 0)", rows.len());
    }
    Ok(invalid)
}

fn numeric_exit(invalid: usize, strict: bool) -> i32 {
    if invalid > 0 && strict {
        EXIT_NUMERIC
    } else {
        EXIT_OK
    }
}

fn generate(a: &GenerateArgs, manifest: &mut Manifest) -> Result<i32> {
    if a.net.network.is_some() {
        return Err(input("generate does not take --network"));
    }
    let dir = out_dir(&a.out)?;
    let (net, _) = obtain_network(&a.net, None, a.out.seed, manifest)?;
    emit(&dir, "network.csv", manifest, |b| write_edge_list(&net, b))?;
    emit(&dir, "degrees.csv", manifest, |b| write_degree_csv(&net, b))?;
    manifest.note("nodes", net.n());
    manifest.note("edges", net.edge_count());
    manifest.write(&dir, a.out.seed)?;
    Ok(EXIT_OK)
}

fn bound(a: &BoundArgs, manifest: &mut Manifest) -> Result<i32> {
    let dir = out_dir(&a.out)?;
    let master = a.out.seed;
    let (mut net, dist) = obtain_network(&a.net, params_hint(&a.params)?, master, manifest)?;
    let params = obtain_params(&a.params, &mut net, master, manifest)?;
    let plan = plan_sweep(&a.bound, &a.net, &net, dist, &params, a.seed_fraction, master, manifest)?;
    let rows = sweep(&plan.template, &plan.eps, &plan.horizons, plan.theorem)?;
    let invalid = emit_sweep(&dir, &rows, a.svg, manifest)?;
    manifest.write(&dir, master)?;
    Ok(numeric_exit(invalid, a.out.strict))
}

fn beta_model(settings: &SimSettings, beta: f64) -> BetaModel {
    match settings.beta_model {
        BetaModelArg::Poisson => BetaModel::Poisson(beta),
        BetaModelArg::Deterministic => BetaModel::Deterministic(beta),
    }
}

fn sim_config(settings: &SimSettings, beta: f64, horizon: u32, eps: Vec<f64>, master: u64, manifest: &mut Manifest) -> SimConfig {
    SimConfig {
        horizon,
        beta_model: beta_model(settings, beta),
        runs: settings.runs,
        master_seed: manifest.stage("simulate", master, STAGE_SIMULATE),
        epsilon_grid: eps,
        adoption: if settings.per_step_adoption {
            AdoptionTiming::PerStep
        } else {
            AdoptionTiming::AtHorizon
        },
    }
}

#[derive(Serialize)]
struct ExactRow {
    epsilon: f64,
    exact: f64,
    p_hat: f64,
    std_err: f64,
    within_3se: bool,
}

fn simulate(a: &SimulateArgs, manifest: &mut Manifest) -> Result<i32> {
    let dir = out_dir(&a.out)?;
    let master = a.out.seed;
    let (mut net, _) = obtain_network(&a.net, params_hint(&a.params)?, master, manifest)?;
    let params = obtain_params(&a.params, &mut net, master, manifest)?;
    let seeds = obtain_seeds(&a.seeds, net.n(), master, manifest)?;
    let eps = epsilon_grid(&a.eps_grid)?;
    let config = sim_config(&a.sim, params.beta, a.horizon, eps, master, manifest);
    let curve = monte_carlo(&net, &seeds, &params, &config)?;
    emit(&dir, "seeds.txt", manifest, |b| write_node_list(&seeds, b))?;
    emit(&dir, "empirical.csv", manifest, |b| write_empirical_csv(&curve, b))?;

    if a.exact {
        if a.sim.beta_model != BetaModelArg::Deterministic {
            return Err(input("--exact needs --beta-model deterministic"));
        }
        let exact = exact_small(&net, &seeds, &params, params.beta, a.horizon)?;
        let rows: Vec<ExactRow> = curve
            .points
            .iter()
            .map(|p| {
                let e = exact.p_trend(p.epsilon);
                let std_err = (e * (1.0 - e) / p.runs as f64).sqrt();
                ExactRow {
                    epsilon: p.epsilon,
                    exact: e,
                    p_hat: p.p_hat,
                    std_err,
                    within_3se: (p.p_hat - e).abs() <= 3.0 * std_err + 1e-12,
                }
            })
            .collect();
        let agree = rows.iter().filter(|r| r.within_3se).count();
        manifest.note("exact_within_3se", format!("{agree}/{}", rows.len()));
        emit(&dir, "exact.csv", manifest, |b| {
            let mut w = csv::Writer::from_writer(b);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
            Ok(())
        })?;
    }

    if a.log_cascades > 0 {
        let sub = dir.join("cascades");
        fs::create_dir_all(&sub)?;
        for i in 0..a.log_cascades.min(config.runs) {
            let log = run_cascade(&net, &seeds, &params, &config, i)?.event_log();
            write_atomic(&sub.join(format!("cascade-{i}.csv")), |b| crate::estimation::write_event_log(&log, b))?;
        }
        manifest.outputs.push("cascades/".to_string());
    }
    manifest.write(&dir, master)?;
    Ok(EXIT_OK)
}

fn estimate(a: &EstimateArgs, manifest: &mut Manifest) -> Result<i32> {
    let dir = out_dir(&a.out)?;
    let net = read_edge_list(open(&a.network)?, a.nodes, false)?.unweighted();
    let logs = a
        .events
        .iter()
        .map(|p| read_event_log(open(p)?).map_err(|e| input(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>>>()?;
    let opts = FitOptions {
        reg: a.reg,
        tol: a.tol,
        max_iter: a.max_iter,
        ..FitOptions::default()
    };
    let fit = fit_adoption_params(&net, &logs, &opts)?;
    let text = fit.to_json()?;
    emit(&dir, "params.json", manifest, |b| {
        b.extend_from_slice(text.as_bytes());
        b.push(b'\n');
        Ok(())
    })?;
    let horizon = a
        .horizon
        .unwrap_or_else(|| logs.iter().flat_map(|l| l.events.iter().map(|e| e.time)).max().unwrap_or(1).max(1));
    let sigma_hat = empirical_sigma_minus(&logs, &net, horizon)?;
    let (xi_g, xi_n) = factors_from_fit(&net, &fit)?;
    manifest.note("beta_hat", fit.beta_hat);
    manifest.note("sigma_minus_empirical", sigma_hat);
    manifest.note("xi_g", xi_g);
    manifest.note("xi_n", xi_n);
    manifest.note("converged", fit.converged);
    manifest.note("iterations", fit.iterations);
    eprintln!(
        "beta_hat {:.6}  sigma_minus (empirical) {sigma_hat:.6}  xi_G {xi_g:.6}  xi_N {xi_n:.6}  converged {}",
        fit.beta_hat, fit.converged
    );
    manifest.write(&dir, a.out.seed)?;
    Ok(EXIT_OK)
}

fn rows_for_horizon(rows: Vec<SweepRow>, delta_t: Option<u32>) -> Result<Vec<SweepRow>> {
    let chosen = match delta_t {
        Some(dt) => dt,
        None => {
            let first = rows.first().ok_or_else(|| input("sweep has no rows"))?.delta_t;
            if rows.iter().any(|r| r.delta_t != first) {
                return Err(input("sweep has several horizons; pass --delta-t"));
            }
            first
        }
    };
    let picked: Vec<SweepRow> = rows.into_iter().filter(|r| r.delta_t == chosen).collect();
    if picked.is_empty() {
        return Err(input(format!("sweep has no rows for delta_t = {chosen}")));
    }
    Ok(picked)
}

fn report(dir: &Path, rows: &[SweepRow], curve: &EmpiricalCurve, manifest: &mut Manifest) -> Result<()> {
    let report = compare(rows, curve)?;
    emit(dir, "compare.csv", manifest, |b| write_compare_csv(&report, b))?;
    manifest.note("violations", report.violations);
    manifest.note("violation_fraction", report.violation_fraction);
    eprintln!(
        "{} of {} targets violate (bound above the 95% upper limit)",
        report.violations,
        report.rows.len()
    );
    Ok(())
}

fn compare_cmd(a: &CompareArgs, manifest: &mut Manifest) -> Result<i32> {
    let dir = out_dir(&a.out)?;
    let rows = rows_for_horizon(read_sweep_csv(open(&a.sweep)?)?, a.delta_t)?;
    let curve = read_empirical_csv(open(&a.empirical)?)?;
    report(&dir, &rows, &curve, manifest)?;
    manifest.write(&dir, a.out.seed)?;
    Ok(EXIT_OK)
}

fn pipeline(a: &PipelineArgs, manifest: &mut Manifest) -> Result<i32> {
    let dir = out_dir(&a.out)?;
    let master = a.out.seed;
    let (mut net, dist) = obtain_network(&a.net, params_hint(&a.params)?, master, manifest)?;
    let params = obtain_params(&a.params, &mut net, master, manifest)?;
    let seeds = obtain_seeds(&a.seeds, net.n(), master, manifest)?;
    emit(&dir, "network.csv", manifest, |b| write_edge_list(&net, b))?;
    let param_text = FitResult::from_params(&net, &params).to_json()?;
    emit(&dir, "params.json", manifest, |b| {
        b.extend_from_slice(param_text.as_bytes());
        b.push(b'\n');
        Ok(())
    })?;
    emit(&dir, "seeds.txt", manifest, |b| write_node_list(&seeds, b))?;

    let seed_fraction = seeds.len() as f64 / net.n() as f64;
    let plan = plan_sweep(&a.bound, &a.net, &net, dist, &params, seed_fraction, master, manifest)?;
    let rows = sweep(&plan.template, &plan.eps, &plan.horizons, plan.theorem)?;
    let invalid = emit_sweep(&dir, &rows, a.svg, manifest)?;

    let horizon = a.horizon.unwrap_or(plan.horizons.iter().copied().min().unwrap_or(1));
    let config = sim_config(&a.sim, params.beta, horizon, plan.eps.clone(), master, manifest);
    let curve = monte_carlo(&net, &seeds, &params, &config)?;
    emit(&dir, "empirical.csv", manifest, |b| write_empirical_csv(&curve, b))?;

    let at_horizon = if plan.horizons.contains(&horizon) {
        rows.iter().filter(|r| r.delta_t == horizon).cloned().collect()
    } else {
        sweep(&plan.template, &plan.eps, &[horizon], plan.theorem)?
    };
    report(&dir, &at_horizon, &curve, manifest)?;
    manifest.note("simulated_horizon", horizon);
    manifest.write(&dir, master)?;
    Ok(numeric_exit(invalid, a.out.strict))
}
