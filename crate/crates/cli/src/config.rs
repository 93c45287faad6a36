//! Study configuration, read from JSON.

use std::path::{Path, PathBuf};

use multinoise_core::{Dispersion, Sign, TestFunction};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    pub basis_size: usize,
    pub particle_cap: usize,
    pub sector_max: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub quad_abs: f64,
    pub quad_rel: f64,
    /// Acceptance threshold for oracle comparisons.
    pub assert_rel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub directory: PathBuf,
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    TransposePairing,
}

/// A correlation word: signs as a string of `-`/`+`, and one index into
/// `smears` per letter.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordSpec {
    pub signs: String,
    pub smears: Vec<usize>,
}

impl WordSpec {
    pub fn parse_signs(&self) -> Result<Vec<Sign>, String> {
        self.signs
            .chars()
            .map(|c| Sign::parse(&c.to_string()).ok_or_else(|| format!("bad sign {c:?} in word {:?}", self.signs)))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub dispersion: Dispersion,
    pub form_factor: TestFunction,
    /// Orders `n` of the coefficient table.
    pub orders: Vec<usize>,
    /// Strictly decreasing coupling values.
    pub lambda_grid: Vec<f64>,
    pub truncation: Truncation,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub output: Output,
    #[serde(default = "default_support_epsilon")]
    pub support_epsilon: f64,
    /// Truncation orders `N` of the kernel study.
    #[serde(default = "default_kernel_orders")]
    pub kernel_orders: Vec<usize>,
    /// Truncation orders `N` of the correlation study.
    #[serde(default = "default_corr_orders")]
    pub corr_orders: Vec<usize>,
    /// Smearing functions in time; the kernel study pairs the first two.
    #[serde(default = "default_smears")]
    pub smears: Vec<TestFunction>,
    #[serde(default = "default_words")]
    pub words: Vec<WordSpec>,
    /// Coefficients of the representation sectors `0..=sector_max`;
    /// defaults to 1 for each.
    #[serde(default)]
    pub sector_gammas: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub fault: Option<Fault>,
}

fn default_support_epsilon() -> f64 {
    1e-10
}

fn default_kernel_orders() -> Vec<usize> {
    vec![0, 1]
}

fn default_corr_orders() -> Vec<usize> {
    vec![0]
}

fn default_smears() -> Vec<TestFunction> {
    vec![TestFunction::gaussian(0.3, 0.8), TestFunction::gaussian(-0.2, 1.1).modulated(-0.5)]
}

fn default_words() -> Vec<WordSpec> {
    vec![WordSpec { signs: "--++".into(), smears: vec![0, 1, 1, 0] }]
}

fn default_trials() -> usize {
    50
}

pub const MAX_ORDER: usize = 6;

impl StudyConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }

    /// Checks shared by every command.
    pub fn validate(&self) -> Result<(), String> {
        self.dispersion.validate().map_err(|e| e.to_string())?;
        if self.form_factor.is_zero() {
            return Err("form_factor must be nonzero".into());
        }
        if self.lambda_grid.is_empty() {
            return Err("lambda_grid must be nonempty".into());
        }
        if self.lambda_grid.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err("lambda_grid entries must be positive".into());
        }
        if self.lambda_grid.windows(2).any(|w| !(w[1] < w[0])) {
            return Err("lambda_grid must be strictly decreasing".into());
        }
        let t = &self.truncation;
        if t.basis_size < 2 || t.particle_cap < 2 {
            return Err("truncation needs basis_size >= 2 and particle_cap >= 2".into());
        }
        let tol = &self.tolerances;
        if [tol.quad_abs, tol.quad_rel, tol.assert_rel, self.support_epsilon]
            .iter()
            .any(|x| !(*x > 0.0) || !x.is_finite())
        {
            return Err("tolerances and support_epsilon must be positive".into());
        }
        if let Some(g) = &self.sector_gammas {
            if g.len() != t.sector_max + 1 {
                return Err(format!("sector_gammas needs {} entries", t.sector_max + 1));
            }
        }
        if self.trials == 0 {
            return Err("trials must be positive".into());
        }
        Ok(())
    }

    pub fn validate_gamma(&self) -> Result<(), String> {
        if self.orders.is_empty() {
            return Err("orders must be nonempty".into());
        }
        if let Some(n) = self.orders.iter().find(|n| **n > MAX_ORDER) {
            return Err(format!("order {n} exceeds {MAX_ORDER}"));
        }
        Ok(())
    }

    /// Checks for the expansion studies.
    pub fn validate_expansion(&self, orders: &[usize], label: &str) -> Result<(), String> {
        if self.lambda_grid.len() < 3 {
            return Err("lambda_grid needs at least 3 values for a rate fit".into());
        }
        if orders.is_empty() {
            return Err(format!("{label} must be nonempty"));
        }
        if let Some(n) = orders.iter().find(|n| **n > MAX_ORDER) {
            return Err(format!("{label}: order {n} exceeds {MAX_ORDER}"));
        }
        Ok(())
    }

    pub fn sector_gammas(&self) -> Vec<(usize, f64)> {
        let n = self.truncation.sector_max + 1;
        match &self.sector_gammas {
            Some(g) => g.iter().copied().enumerate().collect(),
            None => (0..n).map(|i| (i, 1.0)).collect(),
        }
    }
}
