//! ROC curves, empirical quantiles and learning-rate fits.

mod roc;
mod stats;

pub use roc::{empirical_roc, empirical_roc_z, roc_at, RocCurve};
pub use stats::{empirical_quantile, fit_rate, rank_correlation, RateFit};
