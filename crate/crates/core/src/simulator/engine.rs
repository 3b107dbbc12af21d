use std::collections::BTreeSet;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{AdoptionTiming, BetaModel, SimConfig};
use crate::error::{input, Result};
use crate::estimation::{Event, EventKind, EventLog};
use crate::graphmodel::Network;
use crate::rng::stream_rng;
use crate::trendmodel::{local_adopt_prob, AdoptionParams, ExposureRecord};

/// One exposure: at `step`, an agent spawned by `source` reached `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExposureEvent {
    pub step: u32,
    pub target: usize,
    pub source: usize,
}

/// Mutable state of one cascade.
#[derive(Debug, Clone)]
pub struct AgentState {
    /// Seeds and every node exposed so far.
    pub reached: Vec<bool>,
    /// Nodes that spawn agents at the next step.
    pub frontier: Vec<usize>,
    pub events: Vec<ExposureEvent>,
    pub agent_count_trace: Vec<u64>,
    pub t: u32,
    seeds: Vec<usize>,
}

impl AgentState {
    /// Initial state with `seeds` as the first spawning generation.
    pub fn new(net: &Network, seeds: &[usize]) -> Result<Self> {
        let seeds = normalize_seeds(net, seeds)?;
        let mut reached = vec![false; net.n()];
        for &s in &seeds {
            reached[s] = true;
        }
        Ok(Self {
            reached,
            frontier: seeds.clone(),
            events: Vec::new(),
            agent_count_trace: Vec::new(),
            t: 0,
            seeds,
        })
    }

    pub fn seeds(&self) -> &[usize] {
        &self.seeds
    }

    pub fn exposure_record(&self) -> ExposureRecord {
        let mut rec = ExposureRecord::default();
        for e in &self.events {
            rec.record(e.target, e.source);
        }
        rec
    }
}

fn normalize_seeds(net: &Network, seeds: &[usize]) -> Result<Vec<usize>> {
    if seeds.is_empty() {
        return Err(input("seed set must be non-empty"));
    }
    if let Some(&v) = seeds.iter().find(|&&v| v >= net.n()) {
        return Err(input(format!("seed {v} outside 0..{}", net.n())));
    }
    let mut s = seeds.to_vec();
    s.sort_unstable();
    s.dedup();
    Ok(s)
}

fn spawn_count<R: Rng>(model: BetaModel, rng: &mut R) -> u64 {
    match model {
        BetaModel::Deterministic(b) => b.round() as u64,
        BetaModel::Poisson(b) if b > 0.0 => Poisson::new(b).map_or(0, |p| p.sample(rng) as u64),
        BetaModel::Poisson(_) => 0,
    }
}

/// Advances one step: the current frontier spawns agents, each agent hops to
/// a uniform neighbor, and first-time exposed nodes form the next frontier.
pub fn step<R: Rng>(state: &mut AgentState, net: &Network, beta_model: BetaModel, rng: &mut R) {
    state.t += 1;
    let spawners = std::mem::take(&mut state.frontier);
    let mut agents = 0u64;
    for v in spawners {
        let k = spawn_count(beta_model, rng);
        agents += k;
        let nbrs = net.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        for _ in 0..k {
            let u = nbrs[rng.random_range(0..nbrs.len())];
            state.events.push(ExposureEvent {
                step: state.t,
                target: u,
                source: v,
            });
            if !state.reached[u] {
                state.reached[u] = true;
                state.frontier.push(u);
            }
        }
    }
    state.agent_count_trace.push(agents);
}

/// Adoption draw at the horizon: seeds always advocate; every other exposed
/// node adopts with its local probability over distinct exposing friends.
/// Nodes are visited in ascending order.
pub fn adopt<R: Rng>(
    exposure: &ExposureRecord,
    net: &Network,
    params: &AdoptionParams,
    seeds: &[usize],
    rng: &mut R,
) -> Result<BTreeSet<usize>> {
    let mut adopters: BTreeSet<usize> = seeds.iter().copied().collect();
    for (&v, friends) in &exposure.exposing_friends {
        // only seeds are present before their own turn
        if adopters.contains(&v) {
            continue;
        }
        let p = adoption_probability(net, params, v, friends.iter().copied())?;
        if rng.random::<f64>() < p {
            adopters.insert(v);
        }
    }
    Ok(adopters)
}

fn adoption_probability(
    net: &Network,
    params: &AdoptionParams,
    v: usize,
    friends: impl Iterator<Item = usize>,
) -> Result<f64> {
    let mut potential = 0.0;
    for u in friends {
        potential += net.out_weights(v)[net.position(v, u)?];
    }
    local_adopt_prob(params.s[v], potential)
}

/// Result of one simulated cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub exposure: ExposureRecord,
    pub adopters: BTreeSet<usize>,
    pub agent_count_trace: Vec<u64>,
    pub events: Vec<ExposureEvent>,
    pub seeds: Vec<usize>,
    pub horizon: u32,
}

impl RunOutcome {
    /// Event log of this cascade: seeds adopt at time 0, exposures carry
    /// their step, and other adopters adopt at the horizon.
    pub fn event_log(&self) -> EventLog {
        let mut events: Vec<Event> = self
            .seeds
            .iter()
            .map(|&v| Event {
                time: 0,
                kind: EventKind::Adoption,
                subject: v,
                source: None,
            })
            .collect();
        events.extend(self.events.iter().map(|e| Event {
            time: e.step,
            kind: EventKind::Exposure,
            subject: e.target,
            source: Some(e.source),
        }));
        events.extend(
            self.adopters
                .iter()
                .filter(|v| self.seeds.binary_search(v).is_err())
                .map(|&v| Event {
                    time: self.horizon,
                    kind: EventKind::Adoption,
                    subject: v,
                    source: None,
                }),
        );
        EventLog { events }
    }
}

/// Runs one cascade for `config.horizon` steps followed by adoption, using
/// the random stream of `run_index`.
pub fn run(
    net: &Network,
    seeds: &[usize],
    params: &AdoptionParams,
    config: &SimConfig,
    run_index: u64,
) -> Result<RunOutcome> {
    config.validate()?;
    check_params(net, params)?;
    let mut rng = stream_rng(config.master_seed, run_index);
    let mut state = AgentState::new(net, seeds)?;
    let adopters = cascade(&mut state, net, params, config, &mut rng)?;
    Ok(RunOutcome {
        exposure: state.exposure_record(),
        adopters,
        agent_count_trace: state.agent_count_trace,
        events: state.events,
        seeds: state.seeds,
        horizon: config.horizon,
    })
}

pub(crate) fn check_params(net: &Network, params: &AdoptionParams) -> Result<()> {
    if params.s.len() != net.n() {
        return Err(input(format!(
            "params cover {} nodes, network has {}",
            params.s.len(),
            net.n()
        )));
    }
    Ok(())
}

pub(crate) fn cascade<R: Rng>(
    state: &mut AgentState,
    net: &Network,
    params: &AdoptionParams,
    config: &SimConfig,
    rng: &mut R,
) -> Result<BTreeSet<usize>> {
    match config.adoption {
        AdoptionTiming::AtHorizon => {
            for _ in 0..config.horizon {
                step(state, net, config.beta_model, rng);
            }
            adopt(&state.exposure_record(), net, params, &state.seeds, rng)
        }
        AdoptionTiming::PerStep => {
            let mut adopters: BTreeSet<usize> = state.seeds.iter().copied().collect();
            let mut exposure = ExposureRecord::default();
            for _ in 0..config.horizon {
                let from = state.events.len();
                step(state, net, config.beta_model, rng);
                let mut touched = BTreeSet::new();
                for e in &state.events[from..] {
                    exposure.record(e.target, e.source);
                    touched.insert(e.target);
                }
                for v in touched {
                    if adopters.contains(&v) {
                        continue;
                    }
                    let p = adoption_probability(net, params, v, exposure.exposing_friends[&v].iter().copied())?;
                    if rng.random::<f64>() < p {
                        adopters.insert(v);
                    }
                }
            }
            Ok(adopters)
        }
    }
}
