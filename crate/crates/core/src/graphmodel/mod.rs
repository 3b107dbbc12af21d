//! Scale-free network model: degree distributions, the immutable
//! [`Network`] with directed social weights, the configuration-model
//! generator and degree-ratio statistics.

mod generate;
mod io;
mod ratio;

pub use generate::{generate_scale_free, GeneratorConfig};
pub use io::{read_edge_list, write_degree_csv, write_edge_list};
pub use ratio::{
    degree_ratio_prob_bound, degree_ratio_prob_empirical, degree_ratio_prob_exhaustive,
    fit_gamma_mle, RatioEstimate,
};

use crate::error::{invalid, Error, Result};

/// `(gamma - 1) * d_min^(gamma - 1)`: the constant that normalizes the
/// continuous density `c * d^-gamma` on `[d_min, inf)`.
pub fn normalization_constant(gamma: f64, d_min: f64) -> Result<f64> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(invalid(format!("gamma must be > 1, got {gamma}")));
    }
    if !(d_min >= 1.0) || !d_min.is_finite() {
        return Err(invalid(format!("d_min must be >= 1, got {d_min}")));
    }
    Ok((gamma - 1.0) * d_min.powf(gamma - 1.0))
}

/// Power-law degree distribution `P(d) ~ c * d^-gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeDistribution {
    pub gamma: f64,
    pub c: f64,
    pub d_min: usize,
    pub d_max: Option<usize>,
}

impl DegreeDistribution {
    /// Distribution with `c` chosen to normalize the untruncated density.
    pub fn power_law(gamma: f64, d_min: usize, d_max: Option<usize>) -> Result<Self> {
        let c = normalization_constant(gamma, d_min as f64)?;
        Self::with_constant(gamma, c, d_min, d_max)
    }

    /// Distribution with an explicit normalization constant.
    pub fn with_constant(gamma: f64, c: f64, d_min: usize, d_max: Option<usize>) -> Result<Self> {
        if !(gamma > 1.0) || !gamma.is_finite() {
            return Err(invalid(format!("gamma must be > 1, got {gamma}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid(format!("c must be > 0, got {c}")));
        }
        if d_min < 1 {
            return Err(invalid("d_min must be >= 1"));
        }
        if let Some(max) = d_max {
            if max < d_min {
                return Err(invalid(format!("d_max ({max}) must be >= d_min ({d_min})")));
            }
        }
        Ok(Self {
            gamma,
            c,
            d_min,
            d_max,
        })
    }
}

/// Undirected simple graph on nodes `0..n` with directed social weights
/// `w(v, u)` stored per adjacency entry. Immutable once built except for
/// weight assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    neighbors: Vec<Vec<usize>>,
    // weights[v][i] is w(v, neighbors[v][i])
    weights: Vec<Vec<f64>>,
    edge_count: usize,
}

impl Network {
    /// Builds a network from undirected edges. Self-loops, duplicates and
    /// out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut neighbors = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u},{v}) outside 0..{n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at node {u}")));
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
            edge_count += 1;
        }
        for (v, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(invalid(format!("duplicate edge ({v},{})", w[0])));
            }
        }
        let weights = neighbors.iter().map(|l| vec![0.0; l.len()]).collect();
        Ok(Self {
            neighbors,
            weights,
            edge_count,
        })
    }

    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighborhood `N_v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Weights `w(v, u)` aligned with [`Network::neighbors`].
    pub fn out_weights(&self, v: usize) -> &[f64] {
        &self.weights[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbors.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, v: usize, u: usize) -> bool {
        v < self.n() && self.neighbors[v].binary_search(&u).is_ok()
    }

    /// Undirected edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// `w(v, u)`; zero when unset. Panics only on out-of-range `v`.
    pub fn weight(&self, v: usize, u: usize) -> f64 {
        match self.neighbors[v].binary_search(&u) {
            Ok(i) => self.weights[v][i],
            Err(_) => 0.0,
        }
    }

    /// Sets the directed weight `w(v, u)`. The edge must exist.
    pub fn set_weight(&mut self, v: usize, u: usize, w: f64) -> Result<()> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(invalid(format!("weight w({v},{u}) must be finite and >= 0, got {w}")));
        }
        let i = self.position(v, u)?;
        self.weights[v][i] = w;
        Ok(())
    }

    /// Index of `u` within `neighbors(v)`.
    pub fn position(&self, v: usize, u: usize) -> Result<usize> {
        if v >= self.n() {
            return Err(invalid(format!("node {v} outside 0..{}", self.n())));
        }
        self.neighbors[v]
            .binary_search(&u)
            .map_err(|_| Error::ContractViolation(format!("no edge between {v} and {u}")))
    }

    /// Sets every directed weight to `w`.
    pub fn fill_weights(&mut self, w: f64) -> Result<()> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(invalid(format!("weight must be finite and >= 0, got {w}")));
        }
        for list in &mut self.weights {
            list.iter_mut().for_each(|x| *x = w);
        }
        Ok(())
    }

    /// Copy of the topology with all weights reset to zero.
    pub fn unweighted(&self) -> Self {
        let mut out = self.clone();
        for list in &mut out.weights {
            list.iter_mut().for_each(|x| *x = 0.0);
        }
        out
    }
}
