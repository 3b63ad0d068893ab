use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::risk::ToleranceConfig;
use crate::solvers::MmcConfig;
use crate::synth::{MixtureParams, SphereParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SphereRoc,
    FastRates,
    MmcSubsample,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::SphereRoc => "sphere-roc",
            ExperimentKind::FastRates => "fast-rates",
            ExperimentKind::MmcSubsample => "mmc-subsample",
        }
    }
}

/// A run description. Only the block matching `experiment` is read; a
/// missing block falls back to its defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses all cores.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere: Option<SphereRocConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_rates: Option<FastRatesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmc: Option<MmcSubsampleConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SphereRocConfig {
    pub n: usize,
    pub alphas: Vec<f64>,
    /// Held-out sample size for the test ROC curves; defaults to `n`.
    pub eval_n: Option<usize>,
    /// Evenly spaced false positive rates at which `roc.csv` reads each curve.
    pub roc_points: usize,
    pub data: SphereParams,
}

impl Default for SphereRocConfig {
    fn default() -> Self {
        Self { n: 1000, alphas: vec![0.32, 0.4, 0.5], eval_n: None, roc_points: 1001, data: SphereParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FastRatesConfig {
    pub alpha: f64,
    pub m: f64,
    pub a_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub repetitions: usize,
    /// Level of the regret quantile that is fitted against `n`.
    pub quantile: f64,
    /// Grid and draw count for `noise.csv`; an empty grid skips it.
    pub noise_grid: Vec<f64>,
    pub noise_draws: usize,
}

impl Default for FastRatesConfig {
    fn default() -> Self {
        Self {
            alpha: 0.26,
            m: 0.35,
            a_list: (1..=9).map(|k| k as f64 / 10.0).collect(),
            n_list: vec![64, 128, 256, 512],
            repetitions: 1000,
            quantile: 0.9,
            noise_grid: vec![0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5],
            noise_draws: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSource {
    /// Gaussian class mixture; train and test sets are drawn per run.
    Mixture {
        #[serde(default)]
        params: MixtureParams,
        #[serde(default = "default_test_n")]
        test_n: usize,
    },
    /// MNIST-style IDX files, PCA-reduced on the training images.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        #[serde(default = "default_pca_target")]
        pca_target: f64,
        /// Cap on the number of test images used for evaluation.
        #[serde(default)]
        test_limit: Option<usize>,
    },
}

fn default_test_n() -> usize {
    2000
}

fn default_pca_target() -> f64 {
    0.9
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Mixture { params: MixtureParams::default(), test_n: default_test_n() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmcSubsampleConfig {
    pub data: DataSource,
    pub n_list: Vec<usize>,
    /// Tuple budgets as fractions of `n`.
    pub b_fractions: Vec<f64>,
    /// Also run on all negative pairs.
    pub include_full: bool,
    pub runs_per_cell: usize,
    pub solver: MmcConfig,
}

impl Default for MmcSubsampleConfig {
    fn default() -> Self {
        Self {
            data: DataSource::default(),
            n_list: vec![2000],
            b_fractions: vec![0.05, 0.15],
            include_full: true,
            runs_per_cell: 5,
            solver: MmcConfig::default(),
        }
    }
}

fn check_alpha(alpha: f64, what: &str) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("{what} = {alpha} outside (0, 1)")));
    }
    Ok(())
}

fn check_counts(counts: &[usize], what: &str) -> Result<()> {
    if counts.is_empty() || counts.contains(&0) {
        return Err(invalid(format!("{what} must be a non-empty list of counts >= 1")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn sphere_block(&self) -> SphereRocConfig {
        self.sphere.clone().unwrap_or_default()
    }

    pub fn fast_rates_block(&self) -> FastRatesConfig {
        self.fast_rates.clone().unwrap_or_default()
    }

    pub fn mmc_block(&self) -> MmcSubsampleConfig {
        self.mmc.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerance.validate()?;
        if self.workers == Some(0) {
            return Err(invalid("workers must be at least 1"));
        }
        match self.experiment {
            ExperimentKind::SphereRoc => {
                let s = self.sphere_block();
                s.data.validate()?;
                check_counts(&[s.n, s.eval_n.unwrap_or(s.n)], "sphere sample sizes")?;
                if s.roc_points < 2 {
                    return Err(invalid("roc_points must be at least 2"));
                }
                if s.alphas.is_empty() {
                    return Err(invalid("sphere alphas must not be empty"));
                }
                for &a in &s.alphas {
                    check_alpha(a, "sphere alpha")?;
                }
            }
            ExperimentKind::FastRates => {
                let f = self.fast_rates_block();
                check_alpha(f.alpha, "fast-rates alpha")?;
                check_counts(&f.n_list, "fast-rates n_list")?;
                check_counts(&[f.repetitions], "fast-rates repetitions")?;
                if f.a_list.is_empty() {
                    return Err(invalid("fast-rates a_list must not be empty"));
                }
                for &a in &f.a_list {
                    crate::synth::FastRatesParams::new(f.alpha, f.m, a)?;
                }
                if !(f.quantile > 0.0 && f.quantile <= 1.0) {
                    return Err(invalid("quantile level must lie in (0, 1]"));
                }
                if f.n_list.len() < 2 {
                    return Err(invalid("rate fits need at least two sample sizes"));
                }
                if !f.noise_grid.is_empty() {
                    check_counts(&[f.noise_draws], "noise_draws")?;
                    if f.noise_grid.iter().any(|t| !(0.0..=0.5).contains(t)) {
                        return Err(invalid("noise grid values must lie in [0, 1/2]"));
                    }
                }
            }
            ExperimentKind::MmcSubsample => {
                let m = self.mmc_block();
                check_counts(&m.n_list, "mmc n_list")?;
                check_counts(&[m.runs_per_cell], "runs_per_cell")?;
                m.solver.validate()?;
                if m.solver.tuple_budget.is_some() {
                    return Err(invalid("set budgets through b_fractions, not solver.tuple_budget"));
                }
                for &b in &m.b_fractions {
                    if !(b > 0.0 && b <= 1.0) {
                        return Err(invalid(format!("B fraction {b} outside (0, 1]")));
                    }
                }
                if m.b_fractions.is_empty() && !m.include_full {
                    return Err(invalid("no budgets to run"));
                }
                match &m.data {
                    DataSource::Mixture { params, test_n } => {
                        params.validate()?;
                        check_counts(&[*test_n], "test_n")?;
                    }
                    DataSource::Idx { pca_target, test_limit, .. } => {
                        if !(*pca_target > 0.0 && *pca_target <= 1.0) {
                            return Err(invalid("pca_target must lie in (0, 1]"));
                        }
                        if *test_limit == Some(0) {
                            return Err(invalid("test_limit must be at least 1"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
