use super::{ExposureExponent, PDeltaSource};
use crate::error::{invalid, Result};

/// Ratio between consecutive points of the geometric Δ grid.
const DELTA_GRID_RATIO_LOG2: f64 = 1.0 / 8.0;

/// Geometric grid `1, 2^(1/8), 2^(2/8), ...` up to and including `max`.
pub fn delta_grid(max: f64) -> Result<Vec<f64>> {
    if !(max >= 1.0) || !max.is_finite() {
        return Err(invalid(format!("delta_grid_max must be >= 1, got {max}")));
    }
    let mut grid = Vec::new();
    let mut k = 0u32;
    loop {
        let d = (k as f64 * DELTA_GRID_RATIO_LOG2).exp2();
        if d > max * (1.0 + 1e-12) {
            break;
        }
        grid.push(d.min(max));
        k += 1;
    }
    if *grid.last().unwrap() < max {
        grid.push(max);
    }
    Ok(grid)
}

/// `ln(beta^delta_t * seed_fraction)`; `-inf` when `beta == 0`.
pub(crate) fn ln_agent_density(beta: f64, delta_t: u32, seed_fraction: f64) -> f64 {
    if beta == 0.0 {
        f64::NEG_INFINITY
    } else {
        delta_t as f64 * beta.ln() + seed_fraction.ln()
    }
}

/// Low temporal resistance:
/// `max over delta in [1, delta_grid_max] of 1 - exp(-delta * beta^delta_t * f) * (1 - P_delta)`.
///
/// Returns `(sigma, delta_star)`. Evaluated in log space so large
/// `beta^delta_t` saturates at 1 instead of overflowing.
pub fn sigma_minus(
    beta: f64,
    delta_t: u32,
    seed_fraction: f64,
    p_delta: &PDeltaSource,
    delta_grid_max: f64,
    exponent: ExposureExponent,
) -> Result<(f64, f64)> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(invalid(format!("beta must be finite and >= 0, got {beta}")));
    }
    if delta_t < 1 {
        return Err(invalid("delta_t must be >= 1"));
    }
    if !(seed_fraction > 0.0 && seed_fraction <= 1.0) {
        return Err(invalid(format!("seed fraction must lie in (0, 1], got {seed_fraction}")));
    }
    let ln_x = ln_agent_density(beta, delta_t, seed_fraction);
    let mut best = (f64::NEG_INFINITY, 1.0);
    for delta in delta_grid(delta_grid_max)? {
        let p = p_delta.eval(delta)?;
        let ln_scale = match exponent {
            ExposureExponent::AsPrinted => delta.ln(),
            ExposureExponent::Conservative => -delta.ln(),
        };
        // exposure term exp(-delta * x), x = beta^delta_t * f
        let decay = -(ln_x + ln_scale).exp();
        let ln_miss = decay + (-p).ln_1p();
        let sigma = (-ln_miss.exp_m1()).clamp(0.0, 1.0);
        if sigma > best.0 {
            best = (sigma, delta);
        }
    }
    Ok(best)
}
