//! Analytic lower bounds on the probability that a trend seeded in a
//! fraction of the network reaches penetration `epsilon` within `delta_t`
//! steps.
//!
//! Both bounds have the shape `first_factor(rho) * tail(rho)` where `tail`
//! is the normal approximation of the number of nodes exposed by at least
//! `rho` friends, with per-node probability [`p_tilde_minus`] derived from
//! the low temporal resistance [`sigma_minus`]. The free multiplicity `rho`
//! is chosen on a grid inside `(0, delta_t * sigma)` by [`optimize_rho`].
//!
//! * [`theorem1_bound`]: `first_factor = P_Local^(epsilon n)` for a generic
//!   local adoption probability.
//! * [`theorem2_bound`]: `first_factor = exp(-epsilon n xi_G xi_N^rho)` for
//!   the exponential adoption model.
//!
//! Everything is computed in log space and the final value is clamped to
//! `[0, 1]`.

mod normal;
mod rho;
mod sigma;
mod svg;
mod sweep;

use std::sync::Arc;

pub use normal::{normal_cdf, normal_sf};
pub use rho::{optimize_rho, p_tilde_minus, rho_grid, rho_trend_lower};
pub use sigma::{delta_grid, sigma_minus};
pub use svg::render_sweep_svg;
pub use sweep::{horizon_ordering, read_sweep_csv, sweep, write_sweep_csv, HorizonOrdering, SweepRow};

use crate::error::{invalid, Error, Result};
use crate::graphmodel::{degree_ratio_prob_bound, DegreeDistribution};
use crate::trendmodel::LocalAdoptionCurve;

/// Which optimum over rho is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoMode {
    /// Largest lower bound over valid rho.
    #[default]
    Tightest,
    /// The argmin as literally defined for `rho_opt`.
    PaperLiteral,
}

/// Candidate set for rho.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoGrid {
    /// `k * (delta_t sigma) / divisions` for `k = 1 .. divisions - 1`.
    Relative { divisions: u32 },
    /// `k * step` below `delta_t sigma`.
    Step(f64),
    /// Positive integers below `delta_t sigma`.
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSearch {
    pub mode: RhoMode,
    pub grid: RhoGrid,
    /// Upper end of the Δ search inside `sigma_minus`.
    pub delta_grid_max: f64,
}

impl Default for RhoSearch {
    fn default() -> Self {
        Self {
            mode: RhoMode::Tightest,
            grid: RhoGrid::Relative { divisions: 1000 },
            delta_grid_max: 64.0,
        }
    }
}

/// Form of the exposure exponent inside `sigma_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExposureExponent {
    /// `exp(-delta * beta^delta_t * f)`.
    #[default]
    AsPrinted,
    /// `exp(-beta^delta_t * f / delta)`, the reading consistent with
    /// `deg(u) <= delta * deg(v)`.
    Conservative,
}

/// Where `P_Δ` comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PDeltaSource {
    /// Closed-form degree-ratio bound of the power law.
    Analytic(DegreeDistribution),
    /// Fixed value for every Δ.
    Constant(f64),
    /// Measured `(delta, p)` points, ascending in delta. A query uses the
    /// largest tabulated delta not above it (1 if none), which never
    /// underestimates a decreasing `P_Δ`.
    Table(Vec<(f64, f64)>),
}

impl PDeltaSource {
    /// `P_Δ` clamped to `[0, 1]`.
    pub fn eval(&self, delta: f64) -> Result<f64> {
        let p = match self {
            PDeltaSource::Analytic(dist) => degree_ratio_prob_bound(dist, delta)?,
            PDeltaSource::Constant(p) => *p,
            PDeltaSource::Table(points) => points
                .iter()
                .take_while(|(d, _)| *d <= delta)
                .last()
                .map_or(1.0, |&(_, p)| p),
        };
        Ok(p.clamp(0.0, 1.0))
    }
}

/// Local adoption input of the bound.
#[derive(Debug, Clone)]
pub enum LocalModel {
    /// A fixed `P_Local` in `[0, 1)`.
    Constant(f64),
    /// `P_Local(rho)` from per-node susceptibilities and weights.
    Curve(Arc<LocalAdoptionCurve>),
    /// Adoption and influence factors `(xi_G, xi_N)`.
    Factors { xi_g: f64, xi_n: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    /// Generic local adoption probability.
    One,
    /// Exponential adoption model through `xi_G`, `xi_N`.
    Two,
}

#[derive(Debug, Clone)]
pub struct BoundInputs {
    pub n: usize,
    pub seed_fraction: f64,
    pub epsilon: f64,
    pub delta_t: u32,
    pub beta: f64,
    pub p_delta: PDeltaSource,
    pub local: LocalModel,
    pub rho: RhoSearch,
    pub exponent: ExposureExponent,
}

impl BoundInputs {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        if !(self.seed_fraction > 0.0 && self.seed_fraction <= 1.0) {
            return Err(invalid(format!(
                "seed fraction must lie in (0, 1], got {}",
                self.seed_fraction
            )));
        }
        check_epsilon(self.epsilon)?;
        if self.delta_t < 1 {
            return Err(invalid("delta_t must be >= 1"));
        }
        match self.local {
            LocalModel::Constant(p) if !(0.0..1.0).contains(&p) => {
                Err(invalid(format!("P_Local must lie in [0, 1), got {p}")))
            }
            LocalModel::Factors { xi_g, xi_n }
                if !(xi_g > 0.0 && xi_g <= 1.0 && xi_n > 0.0 && xi_n <= 1.0) =>
            {
                Err(invalid(format!("xi_G and xi_N must lie in (0, 1], got ({xi_g}, {xi_n})")))
            }
            _ => Ok(()),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Lower bound on the trend probability, in `[0, 1]`.
    pub value: f64,
    /// Natural log of the unclamped bound; finite even when `value`
    /// underflows.
    pub log_value: f64,
    pub sigma_minus: f64,
    pub p_tilde: f64,
    pub rho: f64,
    pub delta_star: f64,
    /// Whether a rho with `rho < delta_t * sigma` existed.
    pub valid: bool,
    pub diagnostics: Vec<String>,
}

/// `epsilon n ln(P_Local)`: the log of the first factor of the generic
/// bound. Finite for any positive `P_Local`.
pub fn ln_local_power(p_local: f64, epsilon_n: f64) -> f64 {
    if p_local <= 0.0 {
        f64::NEG_INFINITY
    } else {
        epsilon_n * p_local.ln()
    }
}

type RhoTable = (Vec<f64>, Vec<f64>, Vec<f64>);

/// State shared by every epsilon at one horizon: sigma, the rho grid and
/// the per-rho first-factor exponents.
pub(crate) struct HorizonContext {
    n: usize,
    sigma: f64,
    delta_star: f64,
    mode: RhoMode,
    // Ok((grid, per-unit first-factor log, p_tilde)) or the reason no rho exists
    grid: std::result::Result<RhoTable, String>,
    notes: Vec<String>,
}

impl HorizonContext {
    pub(crate) fn new(inputs: &BoundInputs, theorem: Theorem) -> Result<Self> {
        inputs.validate()?;
        match (theorem, &inputs.local) {
            (Theorem::One, LocalModel::Factors { .. }) => {
                return Err(invalid("the generic bound needs P_Local, not (xi_G, xi_N)"))
            }
            (Theorem::Two, LocalModel::Constant(_) | LocalModel::Curve(_)) => {
                return Err(invalid("the exponential-model bound needs (xi_G, xi_N)"))
            }
            _ => {}
        }
        let (sigma, delta_star) = sigma_minus(
            inputs.beta,
            inputs.delta_t,
            inputs.seed_fraction,
            &inputs.p_delta,
            inputs.rho.delta_grid_max,
            inputs.exponent,
        )?;
        let mut notes = vec![format!(
            "delta search capped at {} (selected {delta_star:.4})",
            inputs.rho.delta_grid_max
        )];
        if inputs.exponent == ExposureExponent::Conservative {
            notes.push("conservative exposure exponent exp(-x/delta)".into());
        }
        let grid = match rho_grid(inputs.delta_t, sigma, &inputs.rho) {
            Ok(grid) => {
                let unit: Vec<f64> = grid
                    .iter()
                    .map(|&r| match &inputs.local {
                        LocalModel::Constant(p) => ln_local_power(*p, 1.0),
                        LocalModel::Curve(curve) => ln_local_power(curve.eval(r), 1.0),
                        LocalModel::Factors { xi_g, xi_n } => -xi_g * xi_n.powf(r),
                    })
                    .collect();
                let p_tilde = grid
                    .iter()
                    .map(|&r| p_tilde_minus(r, inputs.delta_t, sigma))
                    .collect::<Result<Vec<_>>>()?;
                Ok((grid, unit, p_tilde))
            }
            Err(Error::NoValidRho(msg)) => Err(msg),
            Err(e) => return Err(e),
        };
        Ok(Self {
            n: inputs.n,
            sigma,
            delta_star,
            mode: inputs.rho.mode,
            grid,
            notes,
        })
    }

    pub(crate) fn evaluate(&self, epsilon: f64) -> Result<BoundResult> {
        check_epsilon(epsilon)?;
        let mut diagnostics = self.notes.clone();
        let (grid, unit, p_tilde) = match &self.grid {
            Ok(g) => g,
            Err(msg) => {
                diagnostics.push(format!("invalid: {msg}"));
                return Ok(BoundResult {
                    value: 0.0,
                    log_value: f64::NEG_INFINITY,
                    sigma_minus: self.sigma,
                    p_tilde: 0.0,
                    rho: 0.0,
                    delta_star: self.delta_star,
                    valid: false,
                    diagnostics,
                });
            }
        };
        let eps_n = epsilon * self.n as f64;
        let objective: Vec<f64> = unit
            .iter()
            .zip(p_tilde)
            .map(|(&u, &p)| ln_product(eps_n * u, rho::tail_unchecked(self.n, epsilon, p)))
            .collect();
        let best = rho::select(&objective, self.mode);
        let log_value = objective[best];
        let raw = log_value.exp();
        let value = raw.clamp(0.0, 1.0);
        if value != raw {
            diagnostics.push(format!("value clamped from {raw}"));
        }
        let p = p_tilde[best];
        if p <= 0.0 || p >= 1.0 {
            diagnostics.push(format!("p_tilde = {p} at its limit; tail taken as a step"));
        }
        Ok(BoundResult {
            value,
            log_value,
            sigma_minus: self.sigma,
            p_tilde: p,
            rho: grid[best],
            delta_star: self.delta_star,
            valid: true,
            diagnostics,
        })
    }
}

fn ln_product(ln_first: f64, tail: f64) -> f64 {
    if tail <= 0.0 || ln_first == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        ln_first + tail.ln()
    }
}

/// `P_Local^(epsilon n) * (1 - Phi(sqrt(n) (epsilon - p~) / sqrt(p~ (1 - p~))))`
/// at the selected rho.
pub fn theorem1_bound(inputs: &BoundInputs) -> Result<BoundResult> {
    HorizonContext::new(inputs, Theorem::One)?.evaluate(inputs.epsilon)
}

/// `exp(-epsilon n xi_G xi_N^rho) * (1 - Phi(...))` at the selected rho.
pub fn theorem2_bound(inputs: &BoundInputs) -> Result<BoundResult> {
    HorizonContext::new(inputs, Theorem::Two)?.evaluate(inputs.epsilon)
}

pub fn bound(inputs: &BoundInputs, theorem: Theorem) -> Result<BoundResult> {
    HorizonContext::new(inputs, theorem)?.evaluate(inputs.epsilon)
}
