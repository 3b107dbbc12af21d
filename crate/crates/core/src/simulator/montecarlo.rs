use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::engine::{cascade, check_params, AgentState};
use super::{meets_target, SimConfig};
use crate::error::{input, Result};
use crate::graphmodel::Network;
use crate::io::check_header;
use crate::rng::stream_rng;
use crate::trendmodel::AdoptionParams;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub epsilon: f64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub runs: u64,
}

impl CurvePoint {
    /// Binomial standard error of `p_hat`.
    pub fn std_err(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.runs as f64).sqrt()
    }
}

/// Empirical `P_Trend` per target fraction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmpiricalCurve {
    pub points: Vec<CurvePoint>,
}

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Runs `config.runs` independent cascades in parallel and reports the
/// fraction reaching each target in `config.epsilon_grid`.
pub fn monte_carlo(
    net: &Network,
    seeds: &[usize],
    params: &AdoptionParams,
    config: &SimConfig,
) -> Result<EmpiricalCurve> {
    config.validate()?;
    check_params(net, params)?;
    let initial = AgentState::new(net, seeds)?;
    let sizes = (0..config.runs)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(config.master_seed, i);
            let mut state = initial.clone();
            cascade(&mut state, net, params, config, &mut rng).map(|a| a.len())
        })
        .collect::<Result<Vec<usize>>>()?;
    let n = net.n();
    let points = config
        .epsilon_grid
        .iter()
        .map(|&epsilon| {
            let hits = sizes.iter().filter(|&&s| meets_target(s, n, epsilon)).count() as u64;
            let (ci_low, ci_high) = wilson_interval(hits, config.runs);
            CurvePoint {
                epsilon,
                p_hat: hits as f64 / config.runs as f64,
                ci_low,
                ci_high,
                runs: config.runs,
            }
        })
        .collect();
    Ok(EmpiricalCurve { points })
}

const HEADER: [&str; 5] = ["epsilon", "p_hat", "ci_low", "ci_high", "runs"];

pub fn write_empirical_csv<W: Write>(curve: &EmpiricalCurve, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(HEADER)?;
    for p in &curve.points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_empirical_csv<R: Read>(reader: R) -> Result<EmpiricalCurve> {
    let mut r = csv::Reader::from_reader(reader);
    check_header(r.headers()?, &HEADER)?;
    let points = r.deserialize().collect::<std::result::Result<Vec<CurvePoint>, _>>()?;
    if points.is_empty() {
        return Err(input("empirical curve has no rows"));
    }
    Ok(EmpiricalCurve { points })
}
