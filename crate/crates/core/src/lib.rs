//! Reproducible benchmark for single-sample pool-based active learning.
//!
//! The crate is organized along the experiment pipeline:
//!
//! * [`rng`]: three independent seeded streams per run.
//! * [`data`]: synthetic generators, tabular loading, splits and pool state.
//! * [`model`]: linear/MLP classifiers, Adam/NAdam, retraining protocols.
//! * [`acquisition`]: random, margin, entropy, BALD, BADGE, Coreset, TypiClust.
//! * [`oracle`]: greedy lookahead oracle with margin fallback.
//! * [`runner`]: the AL loop, restarts, AUC and budget rules.
//! * [`report`]: aggregation, normalization, ranks, variance analysis and
//!   file outputs.
//! * [`config`]: the TOML experiment description.

pub mod acquisition;
pub mod config;
pub mod data;
pub mod error;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod report;
pub mod rng;
pub mod runner;

pub use error::{Error, Result};
