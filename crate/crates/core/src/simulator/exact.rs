use std::collections::BTreeMap;

use super::engine::check_params;
use super::meets_target;
use crate::error::{invalid, Error, Result};
use crate::graphmodel::Network;
use crate::trendmodel::{local_adopt_prob, AdoptionParams};

/// Largest number of walk branches `exact_small` will expand.
pub const EXACT_PATH_LIMIT: u64 = 10_000;
const MAX_NODES: usize = 8;
const MAX_HORIZON: u32 = 3;

/// Exact distribution of the final advocate count.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    /// `count[k]` is the probability that exactly `k` nodes advocate.
    pub count: Vec<f64>,
    pub n: usize,
}

impl ExactDistribution {
    /// `P(|adopters| >= epsilon * n)`.
    pub fn p_trend(&self, epsilon: f64) -> f64 {
        self.count
            .iter()
            .enumerate()
            .filter(|(k, _)| meets_target(*k, self.n, epsilon))
            .map(|(_, p)| p)
            .sum::<f64>()
            .min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Walk {
    reached: u16,
    frontier: u16,
    // bit target * 8 + source marks a directed exposure
    pairs: u64,
}

/// Exact `P_Trend` for tiny instances with `round(beta)` agents per
/// spawning node: every agent walk outcome and every adoption subset is
/// enumerated with its probability.
pub fn exact_small(
    net: &Network,
    seeds: &[usize],
    params: &AdoptionParams,
    beta: f64,
    horizon: u32,
) -> Result<ExactDistribution> {
    let n = net.n();
    if n > MAX_NODES || horizon > MAX_HORIZON {
        return Err(Error::SizeLimit(format!(
            "exact enumeration needs n <= {MAX_NODES} and horizon <= {MAX_HORIZON}, got n = {n}, horizon = {horizon}"
        )));
    }
    if horizon < 1 {
        return Err(invalid("horizon must be >= 1"));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    check_params(net, params)?;
    if seeds.is_empty() || seeds.iter().any(|&s| s >= n) {
        return Err(crate::error::input("seeds must be non-empty node ids"));
    }
    let k = beta.round() as u32;
    let seed_mask = seeds.iter().fold(0u16, |m, &s| m | 1 << s);

    let mut dist = BTreeMap::from([(
        Walk {
            reached: seed_mask,
            frontier: seed_mask,
            pairs: 0,
        },
        1.0,
    )]);
    let mut expanded = 0u64;
    for _ in 0..horizon {
        let mut next = BTreeMap::new();
        for (walk, p) in dist {
            let mut branches = vec![(
                Walk {
                    frontier: 0,
                    ..walk
                },
                p,
            )];
            for v in (0..n).filter(|v| walk.frontier & 1 << v != 0) {
                let nbrs = net.neighbors(v);
                if nbrs.is_empty() {
                    continue;
                }
                let q = 1.0 / nbrs.len() as f64;
                for _ in 0..k {
                    let mut grown = Vec::with_capacity(branches.len() * nbrs.len());
                    for (w, pw) in &branches {
                        for &u in nbrs {
                            let mut w = *w;
                            w.pairs |= 1 << (u * 8 + v);
                            if w.reached & 1 << u == 0 {
                                w.reached |= 1 << u;
                                w.frontier |= 1 << u;
                            }
                            grown.push((w, pw * q));
                        }
                    }
                    expanded += grown.len() as u64;
                    if expanded > EXACT_PATH_LIMIT {
                        return Err(Error::SizeLimit(format!(
                            "more than {EXACT_PATH_LIMIT} walk outcomes to enumerate"
                        )));
                    }
                    branches = merge(grown);
                }
            }
            for (w, pw) in branches {
                *next.entry(w).or_insert(0.0) += pw;
            }
        }
        dist = next;
    }

    let mut count = vec![0.0; n + 1];
    let base = seed_mask.count_ones() as usize;
    for (walk, p) in dist {
        let mut probs = Vec::new();
        for v in (0..n).filter(|&v| walk.reached & 1 << v != 0 && seed_mask & 1 << v == 0) {
            let mut potential = 0.0;
            for u in (0..n).filter(|&u| walk.pairs & 1 << (v * 8 + u) != 0) {
                potential += net.weight(v, u);
            }
            probs.push(local_adopt_prob(params.s[v], potential)?);
        }
        // distribution of the number of adopters among `probs`
        let mut extra = vec![1.0];
        for q in probs {
            let mut nxt = vec![0.0; extra.len() + 1];
            for (j, e) in extra.iter().enumerate() {
                nxt[j] += e * (1.0 - q);
                nxt[j + 1] += e * q;
            }
            extra = nxt;
        }
        for (j, e) in extra.iter().enumerate() {
            count[base + j] += p * e;
        }
    }
    Ok(ExactDistribution { count, n })
}

fn merge(items: Vec<(Walk, f64)>) -> Vec<(Walk, f64)> {
    let mut m: BTreeMap<Walk, f64> = BTreeMap::new();
    for (w, p) in items {
        *m.entry(w).or_insert(0.0) += p;
    }
    m.into_iter().collect()
}
