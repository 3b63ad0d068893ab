//! Synthetic data generators and their analytic quantities.

mod fast_rates;
mod mixture;
pub mod quad;
mod sphere;

pub use fast_rates::{
    analytic_risks_threshold, check_quantile_condition, corner_set_area, eta_pair, fast_rates_c, mu1, mu1_integral,
    noise_distribution, optimal_threshold, pair_statistic, sample_fast_rates, FastRatesParams, Q_STAR,
};
pub use mixture::{sample_mixture, MixtureParams};
pub use sphere::{sample_sphere, SphereParams};
