//! Similarity learning by pointwise ROC optimization.
//!
//! The crate estimates the positive and negative pairwise risks of a
//! similarity function, solves the constrained problem
//! `max R^+(S) s.t. R^-(S) <= alpha` for three model families, and runs the
//! accompanying numerical studies:
//!
//! - [`dataset`], [`model`]: labeled samples, pair labels, the bilinear,
//!   threshold-indicator and Mahalanobis families.
//! - [`risk`]: complete and incomplete U-statistic estimators, variance
//!   diagnostics, tolerance formulas.
//! - [`solvers`]: closed-form KKT solver for bilinear similarities, exact
//!   threshold scan, projected gradient ascent for MMC.
//! - [`synth`]: sphere-cap and fast-rate data generators with their analytic quantities.
//! - [`eval`]: ROC curves, quantiles, rate fits.
//! - [`ingest`], [`harness`]: IDX/PCA ingestion and the experiment runner.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod harness;
pub mod ingest;
pub mod model;
pub mod risk;
pub mod solvers;
pub mod synth;
pub mod rng;

pub use dataset::{LabeledDataset, PairLabel};
pub use error::{Error, Result};
pub use model::{Similarity, SimilarityModel};
