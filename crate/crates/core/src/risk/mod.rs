//! Pairwise risk estimation.
//!
//! The positive and negative empirical risks are (rescaled) U-statistics of
//! degree two. Besides the complete statistics this module provides the two
//! incomplete versions of the negative risk (pairs drawn with replacement,
//! or K-tuples with one member per class), the variance diagnostics used to
//! choose between them, and the tolerance formulas used as constraint slack.

mod estimators;
mod tolerance;
mod variance;

pub use estimators::{
    empirical_risks, negative_risk_complete, negative_risk_pair_sampled, negative_risk_tuple_sampled,
    positive_risk_complete, tuple_kernel, tuple_weights, NegativePairSampler, RiskEstimate, Scheme,
};
pub use tolerance::{tolerance_incomplete, tolerance_incomplete_terms, tolerance_slow, ToleranceConfig};
pub use variance::{variance_components, VarianceComponents};

pub(crate) use estimators::{draw_tuple, require_nonempty_classes};
