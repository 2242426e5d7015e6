//! Core engine for analyzing the home team's bunt decision in tied extra
//! innings under the ghost-runner rule.
//!
//! The crate is organized as a pipeline plus the numerics it needs:
//!
//! - [`retrosheet`]: event-file parsing and a replay engine that reconstructs
//!   score, outs, and base occupancy before and after every play.
//! - [`season`]: season-level batting/pitching tables and the three
//!   covariates (OPS, sacrifice rate per 100 PA, ERA).
//! - [`cohort`]: extraction of the analysis unit (the first plate appearance
//!   of the home half of a tied extra inning) with treatment, outcome,
//!   covariates, and descriptive summaries.
//! - [`glm`]: weighted logistic regression via IRLS with Wald inference.
//! - [`causal`]: propensity scores, trimming, inverse probability weights,
//!   crude and IPW odds ratios, bootstrap intervals, balance diagnostics.
//! - [`sim`]: a base-out Markov model of a half-inning and a geometric model
//!   of extra-inning game length.
//! - [`synth`]: synthetic cohorts with known mechanisms and a brute-force
//!   marginal-effect oracle for certifying the estimator.
//!
//! Everything here is pure computation over in-memory data; file formats and
//! the command-line interface live in the companion `walkoff-cli` crate. The
//! crate is `no_std` + `alloc` so the engine can be embedded anywhere a
//! heap exists.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod baseout;
pub mod causal;
pub mod cohort;
pub mod glm;
mod linalg;
pub mod retrosheet;
pub mod rng;
pub mod season;
pub mod sim;
pub mod stat;
pub mod synth;

pub use baseout::BaseOutState;
pub use cohort::CohortRecord;
pub use season::CovariateTriple;
