use rand::Rng;
use rayon::prelude::*;

use super::{DegreeDistribution, Network};
use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;

/// Number of independent sampling streams used by
/// [`degree_ratio_prob_empirical`]; fixed so output never depends on the
/// thread count.
const SAMPLING_STREAMS: u64 = 64;

/// Monte Carlo estimate of a probability with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub samples: u64,
}

/// Continuous power-law MLE `1 + m / sum(ln(d_i / d_min))` over the `m`
/// values `>= d_min`. For rounded integer degrees pass a half-integer
/// threshold such as `k - 0.5`.
pub fn fit_gamma_mle(degrees: &[f64], d_min: f64) -> Result<f64> {
    if !(d_min > 0.0) {
        return Err(invalid(format!("d_min must be > 0, got {d_min}")));
    }
    let tail: Vec<f64> = degrees.iter().copied().filter(|&d| d >= d_min).collect();
    let log_sum: f64 = tail.iter().map(|&d| (d / d_min).ln()).sum();
    if tail.is_empty() || log_sum <= 0.0 {
        return Err(Error::Divergence(format!(
            "log-sum is zero over {} degrees >= {d_min}",
            tail.len()
        )));
    }
    Ok(1.0 + tail.len() as f64 / log_sum)
}

/// Upper bound `c^2 * delta^(1 - gamma) / (2 gamma^2 - 3 gamma + 1)` on the
/// probability that one node's degree exceeds `delta` times another's.
/// Values above one are returned unclamped.
pub fn degree_ratio_prob_bound(dist: &DegreeDistribution, delta: f64) -> Result<f64> {
    if !(delta >= 1.0) {
        return Err(invalid(format!("delta must be >= 1, got {delta}")));
    }
    let g = dist.gamma;
    let denom = 2.0 * g * g - 3.0 * g + 1.0;
    if !(g > 1.0) || denom <= 0.0 {
        return Err(invalid(format!("gamma must be > 1, got {g}")));
    }
    Ok(dist.c * dist.c * delta.powf(1.0 - g) / denom)
}

/// Estimates `Prob[deg(u) > delta * deg(v)]` over uniformly drawn ordered
/// pairs of distinct nodes.
pub fn degree_ratio_prob_empirical(
    net: &Network,
    delta: f64,
    samples: u64,
    seed: u64,
) -> Result<RatioEstimate> {
    check_ratio_args(net, delta)?;
    if samples == 0 {
        return Err(invalid("samples must be >= 1"));
    }
    let degrees = net.degrees();
    let n = degrees.len();
    let hits: u64 = (0..SAMPLING_STREAMS)
        .into_par_iter()
        .map(|stream| {
            let quota = samples / SAMPLING_STREAMS + u64::from(stream < samples % SAMPLING_STREAMS);
            let mut rng = stream_rng(seed, stream);
            let mut hits = 0u64;
            for _ in 0..quota {
                let u = rng.random_range(0..n);
                let mut v = rng.random_range(0..n - 1);
                if v >= u {
                    v += 1;
                }
                if degrees[u] as f64 > delta * degrees[v] as f64 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p_hat = hits as f64 / samples as f64;
    Ok(RatioEstimate {
        p_hat,
        std_err: (p_hat * (1.0 - p_hat) / samples as f64).sqrt(),
        samples,
    })
}

/// Exact fraction of ordered pairs of distinct nodes with
/// `deg(u) > delta * deg(v)`.
pub fn degree_ratio_prob_exhaustive(net: &Network, delta: f64) -> Result<f64> {
    check_ratio_args(net, delta)?;
    let mut sorted = net.degrees();
    sorted.sort_unstable();
    let n = sorted.len();
    // for each v, count u with deg(u) > delta * deg(v); u == v never counts
    // since delta >= 1
    let count: usize = sorted
        .iter()
        .map(|&dv| {
            let threshold = delta * dv as f64;
            n - sorted.partition_point(|&du| du as f64 <= threshold)
        })
        .sum();
    Ok(count as f64 / (n * (n - 1)) as f64)
}

fn check_ratio_args(net: &Network, delta: f64) -> Result<()> {
    if !(delta >= 1.0) {
        return Err(invalid(format!("delta must be >= 1, got {delta}")));
    }
    if net.n() < 2 {
        return Err(invalid("need at least two nodes"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn star(leaves: usize) -> Network {
        Network::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    fn ring(n: usize) -> Network {
        Network::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn mle_diverges_on_constant_degrees() {
        assert!(matches!(
            fit_gamma_mle(&[1.0, 1.0, 1.0], 1.0),
            Err(Error::Divergence(_))
        ));
    }

    #[test]
    fn mle_two_point_example() {
        let g = fit_gamma_mle(&[1.0, std::f64::consts::E], 1.0).unwrap();
        assert!((g - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mle_recovers_sampled_exponent() {
        let mut rng = crate::rng::rng_from_seed(5);
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let u: f64 = rng.random();
                (1.0 - u).powf(-1.0 / 2.0)
            })
            .collect();
        let g = fit_gamma_mle(&samples, 1.0).unwrap();
        assert!((2.95..=3.05).contains(&g), "{g}");
    }

    #[test]
    fn bound_closed_form_values() {
        let d = DegreeDistribution::with_constant(2.0, 1.0, 1, None).unwrap();
        assert!((degree_ratio_prob_bound(&d, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let d = DegreeDistribution::with_constant(3.0, 2.0, 1, None).unwrap();
        assert!((degree_ratio_prob_bound(&d, 2.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(degree_ratio_prob_bound(&d, 0.5).is_err());
    }

    #[test]
    fn bound_decreasing_in_delta() {
        for gamma in [1.1, 2.0, 2.5, 4.0] {
            let d = DegreeDistribution::power_law(gamma, 1, None).unwrap();
            assert!(
                degree_ratio_prob_bound(&d, 8.0).unwrap() < degree_ratio_prob_bound(&d, 2.0).unwrap()
            );
        }
    }

    #[test]
    fn regular_graph_has_zero_ratio_probability() {
        let net = ring(10);
        assert_eq!(degree_ratio_prob_exhaustive(&net, 1.01).unwrap(), 0.0);
        let est = degree_ratio_prob_empirical(&net, 1.01, 1000, 1).unwrap();
        assert_eq!(est.p_hat, 0.0);
        assert_eq!(est.std_err, 0.0);
    }

    #[test]
    fn star_exhaustive_pairs() {
        // K_{1,4}: 20 ordered pairs, only the 4 (center, leaf) pairs satisfy 4 > 2*1
        let net = star(4);
        assert!((degree_ratio_prob_exhaustive(&net, 2.0).unwrap() - 0.2).abs() < 1e-15);
        let est = degree_ratio_prob_empirical(&net, 2.0, 200_000, 11).unwrap();
        assert!((est.p_hat - 0.2).abs() < 4.0 * est.std_err, "{est:?}");
    }

    #[test]
    fn delta_below_one_rejected() {
        let net = star(3);
        assert!(degree_ratio_prob_empirical(&net, 0.5, 10, 1).is_err());
        assert!(degree_ratio_prob_exhaustive(&net, 0.5).is_err());
        assert!(degree_ratio_prob_empirical(&net, 2.0, 0, 1).is_err());
    }

    #[test]
    fn empirical_is_seed_deterministic() {
        let net = star(7);
        let a = degree_ratio_prob_empirical(&net, 2.0, 10_001, 3).unwrap();
        let b = degree_ratio_prob_empirical(&net, 2.0, 10_001, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples, 10_001);
    }
}
