use std::io::Write;

use serde::Serialize;

use super::EmpiricalCurve;
use crate::bounds::SweepRow;
use crate::error::{input, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRow {
    pub epsilon: f64,
    pub bound: f64,
    pub p_hat: f64,
    pub ci_high: f64,
    pub violation: bool,
}

/// Per-target comparison of an analytic lower bound with simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<CompareRow>,
    pub violations: usize,
    pub violation_fraction: f64,
}

/// Pairs bound rows of a single horizon with an empirical curve over the
/// same targets. A row is a violation when the bound exceeds the upper end
/// of the empirical interval.
pub fn compare(bound_rows: &[SweepRow], empirical: &EmpiricalCurve) -> Result<ComparisonReport> {
    if let Some(first) = bound_rows.first() {
        if bound_rows.iter().any(|r| r.delta_t != first.delta_t) {
            return Err(input("bound rows span several horizons; select one"));
        }
    }
    let mut bounds: Vec<&SweepRow> = bound_rows.iter().collect();
    bounds.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let mut points = empirical.points.clone();
    points.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    if bounds.len() != points.len()
        || bounds.iter().zip(&points).any(|(b, p)| (b.epsilon - p.epsilon).abs() > 1e-9)
    {
        return Err(input("bound and empirical epsilon grids differ"));
    }
    let rows: Vec<CompareRow> = bounds
        .iter()
        .zip(&points)
        .map(|(b, p)| CompareRow {
            epsilon: p.epsilon,
            bound: b.bound,
            p_hat: p.p_hat,
            ci_high: p.ci_high,
            violation: b.bound > p.ci_high,
        })
        .collect();
    let violations = rows.iter().filter(|r| r.violation).count();
    let violation_fraction = if rows.is_empty() {
        0.0
    } else {
        violations as f64 / rows.len() as f64
    };
    Ok(ComparisonReport {
        rows,
        violations,
        violation_fraction,
    })
}

pub fn write_compare_csv<W: Write>(report: &ComparisonReport, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(["epsilon", "bound", "p_hat", "ci_high", "violation"])?;
    for r in &report.rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
