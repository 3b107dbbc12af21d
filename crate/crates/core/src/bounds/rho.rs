use super::normal::normal_sf;
use super::{RhoGrid, RhoMode, RhoSearch};
use crate::error::{invalid, Error, Result};

/// `exp(-(T/2 - rho + rho^2 / (2T)))` with `T = delta_t * sigma`: the
/// per-node probability term of the lower-tail Chernoff step. Requires
/// `0 <= rho < T`.
pub fn p_tilde_minus(rho: f64, delta_t: u32, sigma: f64) -> Result<f64> {
    let budget = delta_t as f64 * sigma;
    if !(sigma > 0.0) {
        return Err(invalid(format!("sigma must be > 0, got {sigma}")));
    }
    if !(rho >= 0.0) {
        return Err(invalid(format!("rho must be >= 0, got {rho}")));
    }
    if rho >= budget {
        return Err(Error::Validity(format!(
            "rho = {rho} must be below delta_t * sigma = {budget}"
        )));
    }
    Ok((-(budget / 2.0 - rho + rho * rho / (2.0 * budget))).exp())
}

/// Normal-approximation tail `1 - Phi(sqrt(n) (eps - p) / sqrt(p (1 - p)))`.
/// At `p_tilde` of exactly 0 or 1 the limit is returned: 1 when
/// `eps <= p_tilde`, else 0.
pub fn rho_trend_lower(n: usize, epsilon: f64, p_tilde: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(0.0..=1.0).contains(&p_tilde) {
        return Err(invalid(format!("p_tilde must lie in [0, 1], got {p_tilde}")));
    }
    Ok(tail_unchecked(n, epsilon, p_tilde))
}

pub(crate) fn tail_unchecked(n: usize, epsilon: f64, p_tilde: f64) -> f64 {
    if p_tilde <= 0.0 || p_tilde >= 1.0 {
        return if epsilon <= p_tilde { 1.0 } else { 0.0 };
    }
    let z = (n as f64).sqrt() * (epsilon - p_tilde) / (p_tilde * (1.0 - p_tilde)).sqrt();
    normal_sf(z)
}

/// Candidate values of rho in `(0, delta_t * sigma)`, ascending.
pub fn rho_grid(delta_t: u32, sigma: f64, search: &RhoSearch) -> Result<Vec<f64>> {
    let budget = delta_t as f64 * sigma;
    if !(budget > 0.0) {
        return Err(Error::NoValidRho(format!(
            "delta_t * sigma = {budget} leaves no room for rho"
        )));
    }
    let grid: Vec<f64> = match search.grid {
        RhoGrid::Relative { divisions } => {
            let h = budget / divisions as f64;
            (1..divisions).map(|k| k as f64 * h).collect()
        }
        RhoGrid::Step(h) => {
            if !(h > 0.0) {
                return Err(invalid(format!("rho step must be > 0, got {h}")));
            }
            (1..).map(|k| k as f64 * h).take_while(|&r| r < budget).collect()
        }
        RhoGrid::Integer => (1..).map(|k| k as f64).take_while(|&r| r < budget).collect(),
    };
    if grid.is_empty() {
        return Err(Error::NoValidRho(format!(
            "no grid point below delta_t * sigma = {budget}"
        )));
    }
    Ok(grid)
}

/// Index of the best value per `mode`; ties go to the earliest index.
pub(crate) fn select(values: &[f64], mode: RhoMode) -> usize {
    let key = |x: f64| if x.is_nan() { f64::NEG_INFINITY } else { x };
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let better = match mode {
            RhoMode::Tightest => key(v) > key(values[best]),
            RhoMode::PaperLiteral => key(v) < key(values[best]),
        };
        if better {
            best = i;
        }
    }
    best
}

/// Grid search of `objective` over rho in `(0, delta_t * sigma)`. `Tightest`
/// returns the maximizer, `PaperLiteral` the minimizer.
pub fn optimize_rho<F>(objective: F, delta_t: u32, sigma: f64, search: &RhoSearch) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(sigma > 0.0) {
        return Err(Error::NoValidRho(format!("sigma must be > 0, got {sigma}")));
    }
    let grid = rho_grid(delta_t, sigma, search)?;
    let values: Vec<f64> = grid.iter().map(|&r| objective(r)).collect();
    Ok(grid[select(&values, search.mode)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::normal::normal_cdf;
    use proptest::prelude::*;

    #[test]
    fn p_tilde_examples() {
        // T = 2, rho = 1
        let p = p_tilde_minus(1.0, 2, 1.0).unwrap();
        assert!((p - (-0.25f64).exp()).abs() < 1e-15);
        assert!((p - 0.77880).abs() < 1e-5);
        let p0 = p_tilde_minus(0.0, 10, 0.4).unwrap();
        assert!((p0 - (-2.0f64).exp()).abs() < 1e-15);
        let near = p_tilde_minus(4.0 - 1e-9, 10, 0.4).unwrap();
        assert!((near - 1.0).abs() < 1e-9);
        assert!(matches!(p_tilde_minus(4.0, 10, 0.4), Err(Error::Validity(_))));
        assert!(p_tilde_minus(-1.0, 10, 0.4).is_err());
        assert!(p_tilde_minus(0.0, 10, 0.0).is_err());
    }

    #[test]
    fn tail_examples() {
        assert!((rho_trend_lower(100, 0.3, 0.3).unwrap() - 0.5).abs() < 1e-15);
        let v = rho_trend_lower(100, 0.3, 0.2).unwrap();
        assert!((v - (1.0 - normal_cdf(2.5))).abs() < 1e-12);
        assert!((v - 0.00621).abs() < 1e-5);
        assert!(rho_trend_lower(1_000_000, 0.1, 0.2).unwrap() > 1.0 - 1e-12);
        assert_eq!(rho_trend_lower(10, 0.1, 1.0).unwrap(), 1.0);
        assert_eq!(rho_trend_lower(10, 0.1, 0.0).unwrap(), 0.0);
        assert!(rho_trend_lower(0, 0.1, 0.5).is_err());
        assert!(rho_trend_lower(10, 0.0, 0.5).is_err());
    }

    #[test]
    fn grids() {
        let s = RhoSearch::default();
        let g = rho_grid(10, 0.5, &s).unwrap();
        assert_eq!(g.len(), 999);
        assert!(g.iter().all(|&r| r > 0.0 && r < 5.0));
        let int = RhoSearch { grid: RhoGrid::Integer, ..s };
        assert_eq!(rho_grid(10, 0.5, &int).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(rho_grid(10, 0.45, &int).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(rho_grid(2, 0.5, &int), Err(Error::NoValidRho(_))));
        assert!(rho_grid(2, 0.0, &s).is_err());
        let step = RhoSearch { grid: RhoGrid::Step(0.3), ..s };
        assert_eq!(rho_grid(1, 1.0, &step).unwrap().len(), 3);
    }

    #[test]
    fn optimizer_tie_break_and_modes() {
        let s = RhoSearch::default();
        let smallest = rho_grid(4, 0.5, &s).unwrap()[0];
        assert_eq!(optimize_rho(|_| 1.0, 4, 0.5, &s).unwrap(), smallest);
        let largest = *rho_grid(4, 0.5, &s).unwrap().last().unwrap();
        assert_eq!(optimize_rho(|r| r, 4, 0.5, &s).unwrap(), largest);
        assert!(largest < 2.0);
        let lit = RhoSearch { mode: RhoMode::PaperLiteral, ..s };
        assert_eq!(optimize_rho(|r| r, 4, 0.5, &lit).unwrap(), smallest);
        assert!(optimize_rho(|r| r, 4, 0.0, &s).is_err());
    }

    #[test]
    fn optimizer_matches_exhaustive_scan_of_tail() {
        // rho-independent first factor: the optimum is the rho maximizing the
        // tail term alone
        let (n, eps, dt, sigma) = (500usize, 0.6, 6u32, 0.8);
        let s = RhoSearch {
            grid: RhoGrid::Step(0.01),
            ..RhoSearch::default()
        };
        let objective = |r: f64| {
            let p = p_tilde_minus(r, dt, sigma).unwrap();
            0.3f64.ln() * eps * n as f64 + rho_trend_lower(n, eps, p).unwrap().ln()
        };
        let chosen = optimize_rho(objective, dt, sigma, &s).unwrap();
        let mut best = (f64::NEG_INFINITY, 0.0);
        let mut k = 1;
        while (k as f64) * 0.01 < dt as f64 * sigma {
            let r = k as f64 * 0.01;
            let p = p_tilde_minus(r, dt, sigma).unwrap();
            let v = rho_trend_lower(n, eps, p).unwrap();
            if v > best.0 {
                best = (v, r);
            }
            k += 1;
        }
        // the tail saturates near the budget, so compare values rather than
        // the argument
        let p = p_tilde_minus(chosen, dt, sigma).unwrap();
        assert!((rho_trend_lower(n, eps, p).unwrap() - best.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn p_tilde_strictly_increasing(dt in 1u32..60, sigma in 0.01f64..1.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let budget = dt as f64 * sigma;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let p1 = p_tilde_minus(lo * budget, dt, sigma).unwrap();
            let p2 = p_tilde_minus(hi * budget * (1.0 - 1e-12), dt, sigma).unwrap();
            prop_assert!(p2 > p1);
            prop_assert!(p1 > 0.0 && p2 <= 1.0);
        }
    }
}
