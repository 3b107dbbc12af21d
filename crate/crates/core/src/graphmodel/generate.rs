use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use super::{DegreeDistribution, Network};
use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;

/// Knobs of the configuration-model generator.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorConfig {
    /// Resampling attempts when the degree-sum parity cannot be repaired.
    pub max_retries: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self { max_retries: 100 }
    }
}

/// Samples a scale-free network with the default [`GeneratorConfig`].
///
/// Degrees are drawn independently by inverse-CDF sampling of the power law
/// truncated to `[d_min, d_max]` (`d_max` defaults to `n - 1`) and rounded.
/// Stubs are paired uniformly at random; self-loops and repeated pairs are
/// dropped, so realized degrees can fall below the sampled ones.
pub fn generate_scale_free(n: usize, dist: &DegreeDistribution, seed: u64) -> Result<Network> {
    generate_scale_free_with(n, dist, seed, &GeneratorConfig::default())
}

pub fn generate_scale_free_with(
    n: usize,
    dist: &DegreeDistribution,
    seed: u64,
    config: &GeneratorConfig,
) -> Result<Network> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let mut rng = rng_from_seed(seed);
    let cap = dist.d_max.unwrap_or(n - 1).min(n - 1);

    let mut degrees = None;
    for _ in 0..=config.max_retries {
        let mut seq = sample_degrees(n, dist, cap, &mut rng);
        if repair_parity(&mut seq, cap, &mut rng) {
            degrees = Some(seq);
            break;
        }
    }
    let degrees = degrees.ok_or_else(|| {
        invalid(format!(
            "no graphical degree sequence after {} attempts (n={n}, d_min={}, cap={cap})",
            config.max_retries + 1,
            dist.d_min
        ))
    })?;

    let mut stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(v, &d)| std::iter::repeat_n(v, d))
        .collect();
    stubs.shuffle(&mut rng);

    let mut pairs: Vec<(usize, usize)> = stubs
        .chunks_exact(2)
        .filter(|p| p[0] != p[1])
        .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    Network::from_edges(n, pairs)
}

fn sample_degrees<R: Rng>(n: usize, dist: &DegreeDistribution, cap: usize, rng: &mut R) -> Vec<usize> {
    if cap < dist.d_min {
        // too few nodes to host the minimum degree
        return vec![cap; n];
    }
    let exponent = 1.0 - dist.gamma;
    let lo = (dist.d_min as f64).powf(exponent);
    let hi = (cap as f64).powf(exponent);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let x = (lo - u * (lo - hi)).powf(1.0 / exponent);
            (x.round() as usize).clamp(dist.d_min, cap)
        })
        .collect()
}

/// Makes the degree sum even by bumping one random node below the cap.
/// Returns false when every node already sits at the cap.
fn repair_parity<R: Rng>(seq: &mut [usize], cap: usize, rng: &mut R) -> bool {
    let total: usize = seq.iter().sum();
    if total.is_multiple_of(2) {
        return true;
    }
    let candidates: Vec<usize> = (0..seq.len()).filter(|&v| seq[v] < cap).collect();
    match candidates.choose(rng) {
        Some(&v) => {
            seq[v] += 1;
            true
        }
        None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphmodel::fit_gamma_mle;

    #[test]
    fn single_node_has_no_edges() {
        let dist = DegreeDistribution::power_law(2.5, 1, None).unwrap();
        let net = generate_scale_free(1, &dist, 3).unwrap();
        assert_eq!(net.n(), 1);
        assert_eq!(net.edge_count(), 0);
    }

    #[test]
    fn zero_nodes_rejected() {
        let dist = DegreeDistribution::power_law(2.5, 1, None).unwrap();
        assert!(generate_scale_free(0, &dist, 3).is_err());
    }

    #[test]
    fn deterministic_for_seed() {
        let dist = DegreeDistribution::power_law(2.2, 1, None).unwrap();
        let a = generate_scale_free(2000, &dist, 42).unwrap();
        let b = generate_scale_free(2000, &dist, 42).unwrap();
        let c = generate_scale_free(2000, &dist, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.edges().collect::<Vec<_>>(), c.edges().collect::<Vec<_>>());
    }

    #[test]
    fn infeasible_parity_errors_after_retries() {
        // every node forced to odd degree 1 with an odd node count
        let dist = DegreeDistribution::power_law(2.5, 1, Some(1)).unwrap();
        let err = generate_scale_free(5, &dist, 1).unwrap_err();
        assert!(err.to_string().contains("attempts"), "{err}");
        assert!(generate_scale_free(6, &dist, 1).is_ok());
    }

    #[test]
    fn degrees_respect_bounds() {
        let dist = DegreeDistribution::power_law(2.1, 2, Some(30)).unwrap();
        let net = generate_scale_free(3000, &dist, 9).unwrap();
        assert!(net.degrees().iter().all(|&d| d <= 30));
    }

    #[test]
    fn recovers_exponent() {
        // rounded integer degrees: fit the tail above 5 with the
        // half-integer threshold 4.5
        let dist = DegreeDistribution::power_law(2.5, 1, None).unwrap();
        let net = generate_scale_free(10_000, &dist, 2024).unwrap();
        let degrees: Vec<f64> = net.degrees().iter().map(|&d| d as f64).collect();
        let gamma_hat = fit_gamma_mle(&degrees, 4.5).unwrap();
        assert!((2.35..=2.65).contains(&gamma_hat), "gamma_hat = {gamma_hat}");
    }

    #[test]
    fn recovers_exponent_median_over_seeds() {
        for gamma in [2.1, 2.5, 3.0] {
            let dist = DegreeDistribution::power_law(gamma, 1, None).unwrap();
            let mut fits: Vec<f64> = (0..5u64)
                .map(|seed| {
                    let net = generate_scale_free(10_000, &dist, seed).unwrap();
                    let d: Vec<f64> = net.degrees().iter().map(|&d| d as f64).collect();
                    fit_gamma_mle(&d, 4.5).unwrap()
                })
                .collect();
            fits.sort_by(f64::total_cmp);
            let median = fits[2];
            assert!((median - gamma).abs() <= 0.15, "gamma {gamma}: median fit {median}");
        }
    }
}
