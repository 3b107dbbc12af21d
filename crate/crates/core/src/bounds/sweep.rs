use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundInputs, HorizonContext, Theorem};
use crate::error::{invalid, Result};
use crate::io::check_header;

/// One cell of a bound sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub delta_t: u32,
    pub epsilon: f64,
    pub bound: f64,
    pub rho: f64,
    pub sigma_minus: f64,
    pub p_tilde: f64,
    pub valid: bool,
}

/// Evaluates the bound on every `(delta_t, epsilon)` pair. Rows come out
/// sorted by `delta_t` then `epsilon`; cells without a valid rho are
/// reported with `valid = false` instead of failing the sweep.
pub fn sweep(
    template: &BoundInputs,
    epsilon_grid: &[f64],
    delta_t_list: &[u32],
    theorem: Theorem,
) -> Result<Vec<SweepRow>> {
    if epsilon_grid.is_empty() || delta_t_list.is_empty() {
        return Err(invalid("sweep grids must be non-empty"));
    }
    let mut eps: Vec<f64> = epsilon_grid.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut horizons: Vec<u32> = delta_t_list.to_vec();
    horizons.sort_unstable();
    horizons.dedup();

    let rows: Vec<Vec<SweepRow>> = horizons
        .par_iter()
        .map(|&delta_t| {
            let inputs = BoundInputs {
                delta_t,
                epsilon: eps[0],
                ..template.clone()
            };
            let ctx = HorizonContext::new(&inputs, theorem)?;
            eps.par_iter()
                .map(|&e| {
                    let r = ctx.evaluate(e)?;
                    Ok(SweepRow {
                        delta_t,
                        epsilon: e,
                        bound: r.value,
                        rho: r.rho,
                        sigma_minus: r.sigma_minus,
                        p_tilde: r.p_tilde,
                        valid: r.valid,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Per-epsilon check of whether the bound grows with the horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HorizonOrdering {
    pub epsilon: f64,
    /// Bound non-decreasing across ascending `delta_t`.
    pub nondecreasing_in_delta_t: bool,
    pub min_bound: f64,
    pub max_bound: f64,
}

pub fn horizon_ordering(rows: &[SweepRow]) -> Vec<HorizonOrdering> {
    let mut eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    eps.into_iter()
        .map(|e| {
            let mut cells: Vec<&SweepRow> = rows.iter().filter(|r| r.epsilon == e).collect();
            cells.sort_by_key(|r| r.delta_t);
            let values: Vec<f64> = cells.iter().map(|r| r.bound).collect();
            HorizonOrdering {
                epsilon: e,
                nondecreasing_in_delta_t: values.windows(2).all(|w| w[1] >= w[0]),
                min_bound: values.iter().copied().fold(f64::INFINITY, f64::min),
                max_bound: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

const HEADER: [&str; 7] = ["delta_t", "epsilon", "bound", "rho", "sigma_minus", "p_tilde", "valid"];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(HEADER)?;
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    check_header(rdr.headers()?, &HEADER)?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}
