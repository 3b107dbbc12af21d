use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{estimate_beta, EventKind, EventLog};
use crate::error::{input, invalid, Result};
use crate::graphmodel::Network;
use crate::trendmodel::{adoption_factor, influence_factor, AdoptionParams};

/// One exposed non-seed user in one cascade.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub node: usize,
    /// Distinct exposing friends.
    pub exposers: Vec<usize>,
    pub adopted: bool,
}

/// Observations of a cascade log. Adopters at time 0 are seeds and carry no
/// information; an adopter without exposures yields an empty exposing set.
pub fn observations(log: &EventLog) -> Vec<Observation> {
    let seeds: BTreeSet<usize> = log
        .events
        .iter()
        .filter(|e| e.time == 0 && e.kind == EventKind::Adoption)
        .map(|e| e.subject)
        .collect();
    let mut by_node: BTreeMap<usize, (BTreeSet<usize>, bool)> = BTreeMap::new();
    for e in log.events.iter().filter(|e| !seeds.contains(&e.subject)) {
        let entry = by_node.entry(e.subject).or_default();
        match (e.kind, e.source) {
            (EventKind::Exposure, Some(src)) => {
                entry.0.insert(src);
            }
            _ => entry.1 = true,
        }
    }
    by_node
        .into_iter()
        .map(|(node, (ex, adopted))| Observation {
            node,
            exposers: ex.into_iter().collect(),
            adopted,
        })
        .collect()
}

/// How many observations involve each directed edge `(v, u)`, `u` exposing `v`.
pub fn edge_observation_counts(obs: &[Observation]) -> BTreeMap<(usize, usize), usize> {
    let mut counts = BTreeMap::new();
    for o in obs {
        for &u in &o.exposers {
            *counts.entry((o.node, u)).or_default() += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub reg: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub s_max: f64,
    pub w_max: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            reg: 1e-3,
            tol: 1e-6,
            max_iter: 10_000,
            s_max: 10.0,
            w_max: 10.0,
        }
    }
}

/// Directed weight `w(u, v)`: influence of `v` on `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub u: usize,
    pub v: usize,
    pub w_uv: f64,
}

/// Fitted adoption parameters. Also the on-disk format of parameter sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub s: BTreeMap<usize, f64>,
    pub w: Vec<WeightEntry>,
    pub beta_hat: f64,
    pub log_likelihood: Option<f64>,
    pub converged: bool,
    #[serde(default)]
    pub iterations: usize,
}

impl FitResult {
    /// Wraps known parameters, e.g. synthetic ground truth.
    pub fn from_params(net: &Network, params: &AdoptionParams) -> Self {
        let s = params.s.iter().copied().enumerate().collect();
        let mut w = Vec::new();
        for u in 0..net.n() {
            for (&v, &w_uv) in net.neighbors(u).iter().zip(net.out_weights(u)) {
                w.push(WeightEntry { u, v, w_uv });
            }
        }
        Self {
            s,
            w,
            beta_hat: params.beta,
            log_likelihood: None,
            converged: true,
            iterations: 0,
        }
    }

    /// Node parameters and a copy of `net` carrying the fitted weights.
    /// Nodes and edges absent from the fit get zero.
    pub fn apply(&self, net: &Network) -> Result<(Network, AdoptionParams)> {
        let mut s = vec![0.0; net.n()];
        for (&v, &val) in &self.s {
            if v >= net.n() {
                return Err(input(format!("fit names node {v} outside 0..{}", net.n())));
            }
            s[v] = val;
        }
        let mut weighted = net.unweighted();
        for e in &self.w {
            if !net.has_edge(e.u, e.v) {
                return Err(input(format!("fit names edge ({},{}) absent from network", e.u, e.v)));
            }
            weighted.set_weight(e.u, e.v, e.w_uv)?;
        }
        Ok((weighted, AdoptionParams::new(s, self.beta_hat)?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let fit: Self = serde_json::from_str(text)?;
        let bad = fit.s.values().chain(fit.w.iter().map(|e| &e.w_uv)).any(|x| !(*x >= 0.0) || !x.is_finite());
        if bad || !(fit.beta_hat >= 0.0) {
            return Err(input("parameters must be finite and >= 0"));
        }
        Ok(fit)
    }
}

/// `(xi_G, xi_N)` of the fitted parameters.
pub fn factors_from_fit(net: &Network, fit: &FitResult) -> Result<(f64, f64)> {
    let (weighted, params) = fit.apply(net)?;
    Ok((adoption_factor(&params), influence_factor(&weighted)))
}

/// Maximum-likelihood fit over cascade logs, with `beta_hat` from
/// [`estimate_beta`].
pub fn fit_adoption_params(net: &Network, logs: &[EventLog], opts: &FitOptions) -> Result<FitResult> {
    let beta_hat = estimate_beta(logs)?;
    let mut obs = Vec::new();
    for log in logs {
        log.validate(net)?;
        obs.extend(observations(log));
    }
    let mut fit = fit_observations(net, &obs, opts)?;
    fit.beta_hat = beta_hat;
    Ok(fit)
}

/// The observations of one node. They involve only `s_v` and the weights
/// `w(v, .)`, so the objective is a sum of independent blocks.
struct Block {
    node: usize,
    exposers: Vec<usize>,
    // local parameter indices (0 is s_v) and adopt flag per observation
    terms: Vec<(Vec<usize>, bool)>,
    upper: Vec<f64>,
}

struct BlockFit {
    theta: Vec<f64>,
    objective: f64,
    converged: bool,
    iterations: usize,
}

impl Block {
    fn objective(&self, theta: &[f64], reg: f64) -> f64 {
        let mut total = 0.0;
        for (idx, adopted) in &self.terms {
            let z: f64 = idx.iter().map(|&i| theta[i]).sum();
            total += if *adopted { (-(-z).exp_m1()).ln() } else { -z };
        }
        total - reg * theta.iter().map(|t| t * t).sum::<f64>()
    }

    /// `objective(to) - objective(from)`, accurate even when both values
    /// agree to every printed digit.
    fn increase(&self, from: &[f64], to: &[f64], reg: f64) -> f64 {
        let mut total = 0.0;
        for (idx, adopted) in &self.terms {
            let dz: f64 = idx.iter().map(|&i| to[i] - from[i]).sum();
            if *adopted {
                let z: f64 = idx.iter().map(|&i| from[i]).sum();
                let z_to: f64 = idx.iter().map(|&i| to[i]).sum();
                if z_to <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                // ln((1 - e^-z') / (1 - e^-z)) = ln1p(-e^-z expm1(-dz) / (1 - e^-z))
                total += (-(-z).exp() * (-dz).exp_m1() / -(-z).exp_m1()).ln_1p();
            } else {
                total -= dz;
            }
        }
        total - reg * from.iter().zip(to).map(|(a, b)| (b - a) * (b + a)).sum::<f64>()
    }

    fn gradient(&self, theta: &[f64], reg: f64) -> Vec<f64> {
        let mut g: Vec<f64> = theta.iter().map(|t| -2.0 * reg * t).collect();
        for (idx, adopted) in &self.terms {
            let dz = if *adopted {
                let z: f64 = idx.iter().map(|&i| theta[i]).sum();
                1.0 / z.exp_m1()
            } else {
                -1.0
            };
            for &i in idx {
                g[i] += dz;
            }
        }
        g
    }

    fn project(&self, x: &mut [f64]) {
        for (xi, &hi) in x.iter_mut().zip(&self.upper) {
            *xi = xi.clamp(0.0, hi);
        }
    }

    /// Norm of the projected gradient step, zero exactly at the optimum.
    fn stationarity(&self, theta: &[f64], g: &[f64]) -> f64 {
        theta
            .iter()
            .zip(g)
            .zip(&self.upper)
            .map(|((t, gi), hi)| ((t + gi).clamp(0.0, *hi) - t).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    fn solve(&self, opts: &FitOptions, tol: f64) -> BlockFit {
        let reg = opts.reg;
        let mut theta = vec![0.1; self.upper.len()];
        self.project(&mut theta);
        let mut f = self.objective(&theta, reg);
        let mut g = self.gradient(&theta, reg);
        let mut step = 1.0 / g.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
        let mut iterations = 0;
        loop {
            let pg = self.stationarity(&theta, &g);
            if pg < tol {
                return BlockFit { theta, objective: f, converged: true, iterations };
            }
            if iterations >= opts.max_iter {
                return BlockFit { theta, objective: f, converged: false, iterations };
            }
            iterations += 1;
            let mut accepted = None;
            let mut alpha = step;
            for _ in 0..80 {
                let mut cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t + alpha * gi).collect();
                self.project(&mut cand);
                let gain: f64 = cand.iter().zip(&theta).zip(&g).map(|((c, t), gi)| gi * (c - t)).sum();
                let rise = self.increase(&theta, &cand, reg);
                if rise.is_finite() && rise >= 1e-4 * gain {
                    accepted = Some((cand, rise));
                    break;
                }
                alpha *= 0.5;
            }
            let Some((next, rise)) = accepted else {
                // no representable ascent step remains
                return BlockFit { theta, objective: f, converged: false, iterations };
            };
            let gnext = self.gradient(&next, reg);
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..theta.len() {
                let d = next[i] - theta[i];
                ss += d * d;
                sy -= d * (gnext[i] - g[i]);
            }
            step = if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { alpha * 2.0 };
            theta = next;
            f += rise;
            g = gnext;
        }
    }
}

/// Maximizes `sum_adopt ln(1 - e^-z) - sum_other z - reg * |theta|^2` with
/// `z = s_v + sum of w(v, u)` over exposing friends, by projected gradient
/// ascent on the box `[0, s_max] x [0, w_max]` with Barzilai-Borwein steps
/// and Armijo backtracking. Edges that never carry an exposure stay at 0.
///
/// Each node's block is solved to `tol / sqrt(blocks)` so that the full
/// projected gradient ends below `tol`.
pub fn fit_observations(net: &Network, obs: &[Observation], opts: &FitOptions) -> Result<FitResult> {
    if !(opts.reg >= 0.0) || !(opts.tol > 0.0) || !(opts.s_max > 0.0) || !(opts.w_max > 0.0) {
        return Err(invalid("reg must be >= 0; tol, s_max and w_max must be > 0"));
    }
    let mut grouped: BTreeMap<usize, Vec<&Observation>> = BTreeMap::new();
    for o in obs {
        if o.node >= net.n() {
            return Err(input(format!("node {} not in network", o.node)));
        }
        if let Some(u) = o.exposers.iter().find(|&&u| !net.has_edge(o.node, u)) {
            return Err(input(format!("no edge between {} and {u}", o.node)));
        }
        grouped.entry(o.node).or_default().push(o);
    }
    let blocks: Vec<Block> = grouped
        .into_iter()
        .map(|(node, list)| {
            let exposers: Vec<usize> = list
                .iter()
                .flat_map(|o| o.exposers.iter().copied())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let terms = list
                .iter()
                .map(|o| {
                    let mut idx = vec![0];
                    idx.extend(o.exposers.iter().map(|u| 1 + exposers.binary_search(u).unwrap_or(0)));
                    (idx, o.adopted)
                })
                .collect();
            let mut upper = vec![opts.s_max];
            upper.resize(1 + exposers.len(), opts.w_max);
            Block {
                node,
                exposers,
                terms,
                upper,
            }
        })
        .collect();
    let tol = opts.tol / (blocks.len().max(1) as f64).sqrt();
    let fits: Vec<BlockFit> = blocks.par_iter().map(|b| b.solve(opts, tol)).collect();

    let mut s: BTreeMap<usize, f64> = (0..net.n()).map(|v| (v, 0.0)).collect();
    let mut w = Vec::new();
    let mut objective = 0.0;
    for (b, fit) in blocks.iter().zip(&fits) {
        s.insert(b.node, fit.theta[0]);
        w.extend(b.exposers.iter().zip(&fit.theta[1..]).map(|(&v, &w_uv)| WeightEntry { u: b.node, v, w_uv }));
        objective += fit.objective;
    }
    Ok(FitResult {
        s,
        w,
        beta_hat: 0.0,
        log_likelihood: Some(objective),
        converged: fits.iter().all(|f| f.converged),
        iterations: fits.iter().map(|f| f.iterations).max().unwrap_or(0),
    })
}
