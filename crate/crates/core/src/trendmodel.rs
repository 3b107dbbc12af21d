//! Trend state, the local adoption model `1 - exp(-(s_v + p_a(v)))`, and
//! the network-level adoption and influence factors.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, invalid, Error, Result};
use crate::graphmodel::Network;
use crate::rng::rng_from_seed;

/// Advocates of the trend at time step `t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrendState {
    pub advocates: BTreeSet<usize>,
    pub t: u32,
}

impl TrendState {
    pub fn new(net: &Network, advocates: impl IntoIterator<Item = usize>, t: u32) -> Result<Self> {
        let advocates: BTreeSet<usize> = advocates.into_iter().collect();
        if let Some(&v) = advocates.iter().find(|&&v| v >= net.n()) {
            return Err(input(format!("advocate {v} outside 0..{}", net.n())));
        }
        Ok(Self { advocates, t })
    }

    /// `|V_a(t)| / n`.
    pub fn fraction(&self, n: usize) -> f64 {
        self.advocates.len() as f64 / n as f64
    }
}

/// Per-node susceptibility `s_v` and the diffusion factor `beta`. Social
/// weights `w(v, u)` live on the [`Network`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdoptionParams {
    pub s: Vec<f64>,
    pub beta: f64,
}

impl AdoptionParams {
    pub fn new(s: Vec<f64>, beta: f64) -> Result<Self> {
        if let Some((v, x)) = s.iter().enumerate().find(|(_, x)| !(**x >= 0.0) || !x.is_finite()) {
            return Err(invalid(format!("s[{v}] must be finite and >= 0, got {x}")));
        }
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
        }
        Ok(Self { s, beta })
    }

    pub fn uniform(n: usize, s: f64, beta: f64) -> Result<Self> {
        Self::new(vec![s; n], beta)
    }

    fn check_len(&self, net: &Network) -> Result<()> {
        if self.s.len() != net.n() {
            return Err(invalid(format!(
                "params cover {} nodes, network has {}",
                self.s.len(),
                net.n()
            )));
        }
        Ok(())
    }
}

/// Who exposed whom, and how often.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExposureRecord {
    /// `N_{v,a}`: distinct neighbors that exposed `v`.
    pub exposing_friends: BTreeMap<usize, BTreeSet<usize>>,
    /// `X_v`: total exposure events received by `v`.
    pub exposure_count: BTreeMap<usize, u64>,
}

impl ExposureRecord {
    pub fn record(&mut self, target: usize, source: usize) {
        self.exposing_friends.entry(target).or_default().insert(source);
        *self.exposure_count.entry(target).or_default() += 1;
    }

    pub fn is_exposed(&self, v: usize) -> bool {
        self.exposure_count.contains_key(&v)
    }

    pub fn exposed(&self) -> impl Iterator<Item = usize> + '_ {
        self.exposure_count.keys().copied()
    }
}

/// `p_a(v)`: sum of `w(v, u)` over the exposing friends `u`.
pub fn network_potential<'a, I>(net: &Network, v: usize, exposing: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a usize>,
{
    let mut total = 0.0;
    for &u in exposing {
        let i = net.position(v, u)?;
        total += net.out_weights(v)[i];
    }
    Ok(total)
}

/// `1 - exp(-(s_v + p))`.
pub fn local_adopt_prob(s_v: f64, potential: f64) -> Result<f64> {
    if !(s_v >= 0.0) || !(potential >= 0.0) {
        return Err(invalid(format!(
            "susceptibility and potential must be >= 0, got ({s_v}, {potential})"
        )));
    }
    Ok(-(-(s_v + potential)).exp_m1())
}

/// Per-node summary that makes [`expected_local_adopt`] cheap to evaluate
/// for many multiplicities `rho`.
#[derive(Debug, Clone)]
pub struct LocalAdoptionCurve {
    s: Vec<f64>,
    mean_weight: Vec<f64>,
}

impl LocalAdoptionCurve {
    pub fn new(net: &Network, params: &AdoptionParams) -> Result<Self> {
        params.check_len(net)?;
        let mean_weight = (0..net.n())
            .map(|v| {
                let d = net.degree(v);
                if d == 0 {
                    0.0
                } else {
                    net.out_weights(v).iter().sum::<f64>() / d as f64
                }
            })
            .collect();
        Ok(Self {
            s: params.s.clone(),
            mean_weight,
        })
    }

    /// `(1/n) * sum_v [1 - exp(-(s_v + (rho/|N_v|) * sum_u w(v,u)))]`.
    pub fn eval(&self, rho: f64) -> f64 {
        let n = self.s.len();
        if n == 0 {
            return 0.0;
        }
        let total: f64 = self
            .s
            .iter()
            .zip(&self.mean_weight)
            .map(|(&s, &mw)| -(-(s + rho * mw)).exp_m1())
            .sum();
        total / n as f64
    }
}

/// Expected local adoption probability with every node exposed by a uniform
/// multiplicity `rho` spread over its neighborhood. Isolated nodes contribute
/// `1 - exp(-s_v)`.
pub fn expected_local_adopt(net: &Network, params: &AdoptionParams, rho: f64) -> Result<f64> {
    if !(rho >= 0.0) {
        return Err(invalid(format!("rho must be >= 0, got {rho}")));
    }
    Ok(LocalAdoptionCurve::new(net, params)?.eval(rho))
}

/// `xi_G = exp(-(1/n) * sum_v s_v)`.
pub fn adoption_factor(params: &AdoptionParams) -> f64 {
    let n = params.s.len();
    if n == 0 {
        return 1.0;
    }
    (-params.s.iter().sum::<f64>() / n as f64).exp()
}

/// `xi_N = exp(-(1/n) * sum_{(v,u) in E} (w(u,v)/|N_v| + w(v,u)/|N_u|))`.
pub fn influence_factor(net: &Network) -> f64 {
    let n = net.n();
    if n == 0 {
        return 1.0;
    }
    let total: f64 = net
        .edges()
        .map(|(v, u)| net.weight(u, v) / net.degree(v) as f64 + net.weight(v, u) / net.degree(u) as f64)
        .sum();
    (-total / n as f64).exp()
}

/// Draws `s_v ~ U[0, s_max]` and every directed `w(v, u) ~ U[0, w_max]`.
pub fn synthetic_params(
    net: &mut Network,
    s_max: f64,
    w_max: f64,
    beta: f64,
    seed: u64,
) -> Result<AdoptionParams> {
    if !(s_max >= 0.0) || !(w_max >= 0.0) {
        return Err(invalid("s_max and w_max must be >= 0"));
    }
    let mut rng = rng_from_seed(seed);
    let s: Vec<f64> = (0..net.n()).map(|_| rng.random::<f64>() * s_max).collect();
    for v in 0..net.n() {
        let targets: Vec<usize> = net.neighbors(v).to_vec();
        for u in targets {
            net.set_weight(v, u, rng.random::<f64>() * w_max)?;
        }
    }
    AdoptionParams::new(s, beta)
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRow {
    node: usize,
    s: f64,
}

/// Reads `node,s` rows; nodes not listed get `s = 0`.
pub fn read_node_params<R: Read>(reader: R, n: usize, beta: f64) -> Result<AdoptionParams> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    crate::io::check_header(rdr.headers()?, &["node", "s"])?;
    let mut s = vec![0.0; n];
    for row in rdr.deserialize() {
        let row: NodeRow = row?;
        if row.node >= n {
            return Err(input(format!("node {} outside 0..{n}", row.node)));
        }
        s[row.node] = row.s;
    }
    AdoptionParams::new(s, beta)
}

pub fn write_node_params<W: Write>(params: &AdoptionParams, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (node, &s) in params.s.iter().enumerate() {
        wtr.serialize(NodeRow { node, s })?;
    }
    wtr.flush().map_err(Error::from)
}
