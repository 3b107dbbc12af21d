//! Predicting whether an emerging behavioral anomaly in a social network
//! grows into a global trend.
//!
//! The crate evaluates analytic lower bounds on the probability that a seed
//! group of advocates reaches a target penetration `epsilon` within a horizon
//! of `delta_t` steps, and checks them against a Monte Carlo simulator of
//! one-hop "exposure agents" followed by local adoption.
//!
//! Modules:
//! - [`graphmodel`]: scale-free networks, degree statistics, the degree-ratio
//!   probability `P_Δ`.
//! - [`trendmodel`]: trend state, local adoption model, adoption and influence
//!   factors.
//! - [`bounds`]: low temporal resistance, Chernoff/normal tail terms, the two
//!   trend bounds, ρ search and sweeps.
//! - [`simulator`]: exposure-agent Monte Carlo, exact enumeration for tiny
//!   graphs, bound-vs-empirical comparison.
//! - [`estimation`]: event logs, diffusion factor and adoption parameter
//!   fitting.
//! - [`cli`]: the `trendcast` command line.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimation;
pub mod graphmodel;
pub mod io;
pub mod rng;
pub mod simulator;
pub mod trendmodel;

pub use error::{Error, Result};
