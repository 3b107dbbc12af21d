use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF, `0.5 * erfc(-x / sqrt(2))`. Saturates to 0 or 1
/// for `|x|` beyond about 38.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - normal_cdf(x)` without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}
