//! Solvers for the constrained empirical problem
//! `max R^+_n(S) s.t. R^-_n(S) <= alpha` over each model family.

mod kkt;
mod mmc;
mod psd;
mod threshold;

pub use kkt::{compute_p_n, kkt_residuals, solve_bilinear_kkt, KktCase, KktResiduals, KktSolution};
pub use mmc::{
    mmc_objective, mmc_projected_gradient, positive_scatter, write_trace_csv, MmcConfig, MmcResult, TraceRow,
};
pub use psd::{min_eigenvalue, psd_project};
pub use threshold::{solve_threshold_scan, sorted_pair_statistics, ThresholdSolution};
