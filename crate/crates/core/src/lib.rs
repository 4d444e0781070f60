//! Directed "immediate causality" networks between market indices.
//!
//! A run ingests an aligned price panel, converts it to log returns, cuts it
//! into calendar windows and estimates a transfer-entropy matrix per window.
//! The resulting matrix series is reduced to scalar diagnostics (average and
//! asymmetry of influence, per-pair activity), a low-pass trend with
//! crisis-lead analysis, and two thresholded graphs.

pub mod config;
pub mod error;
pub mod market;
pub mod metrics;
pub mod netgraph;
pub mod par;
pub mod pipeline;
pub mod report;
pub mod synthetic;
pub mod te;

pub use config::{PairLinkRule, RunConfig};
pub use error::{Error, ErrorKind, Result};
pub use par::Execution;
pub use pipeline::{run, synthesize, Manifest, RunFailure, RunOutput, Stage};
pub use report::render_report;
