//! Calibration of the diffusion factor, susceptibilities and social weights
//! from cascade event logs.

mod fit;
mod log;

pub use fit::{
    edge_observation_counts, factors_from_fit, fit_adoption_params, fit_observations, observations,
    FitOptions, FitResult, Observation, WeightEntry,
};
pub use log::{read_event_log, write_event_log, Event, EventKind, EventLog};

use std::collections::BTreeSet;

use crate::error::{input, Result};
use crate::graphmodel::Network;

/// Mean number of distinct friends an involved user exposes: distinct
/// `(source, target)` exposure pairs over distinct users appearing in the
/// logs (seeds and exposed users). Each log is one cascade.
pub fn estimate_beta(logs: &[EventLog]) -> Result<f64> {
    let mut pairs = 0usize;
    let mut users = 0usize;
    for log in logs {
        let mut p = BTreeSet::new();
        let mut u = BTreeSet::new();
        for e in &log.events {
            u.insert(e.subject);
            if let (EventKind::Exposure, Some(src)) = (e.kind, e.source) {
                p.insert((src, e.subject));
                u.insert(src);
            }
        }
        pairs += p.len();
        users += u.len();
    }
    if users == 0 {
        return Err(input("event log is empty"));
    }
    Ok(pairs as f64 / users as f64)
}

/// Per-step fraction of not-yet-reached users that become exposed, averaged
/// over steps `1..=horizon` with a non-empty susceptible pool and over logs.
/// Seeds (adopters at time 0) count as reached from the start.
pub fn empirical_sigma_minus(logs: &[EventLog], net: &Network, horizon: u32) -> Result<f64> {
    let n = net.n();
    let mut total = 0.0;
    let mut steps = 0usize;
    for log in logs {
        log.validate(net)?;
        let mut reached = vec![false; n];
        let mut pool = n;
        for e in &log.events {
            if e.time == 0 && e.kind == EventKind::Adoption && !reached[e.subject] {
                reached[e.subject] = true;
                pool -= 1;
            }
        }
        for t in 1..=horizon {
            if pool == 0 {
                continue;
            }
            let fresh: BTreeSet<usize> = log
                .events
                .iter()
                .filter(|e| e.time == t && e.kind == EventKind::Exposure && !reached[e.subject])
                .map(|e| e.subject)
                .collect();
            total += fresh.len() as f64 / pool as f64;
            steps += 1;
            for v in fresh {
                reached[v] = true;
                pool -= 1;
            }
        }
    }
    Ok(if steps == 0 { 0.0 } else { total / steps as f64 })
}
