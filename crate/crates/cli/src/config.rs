use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qfock::config::is_high_condition;
use qfock::error::validate_q;
use qfock::spectral::{SweepGrid, ThresholdMode, ThresholdProbe};
use qfock::{EigenSolver, Error, Tolerances};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdSettings {
    pub q: Vec<f64>,
    pub mode: ThresholdMode,
    pub probe: ThresholdProbe,
}

impl Default for ThresholdSettings {
    fn default() -> Self {
        Self {
            q: Vec::new(),
            mode: ThresholdMode::EmpiricalConstants,
            probe: ThresholdProbe::default(),
        }
    }
}

/// Fully resolved run parameters. Embedded verbatim in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub q: f64,
    pub d: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub tolerances: Tolerances,
    pub eigensolver: EigenSolver,
    pub cache_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub sweep: SweepGrid,
    pub threshold: ThresholdSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 0.0,
            d: 2,
            n_max: 3,
            tolerances: Tolerances::default(),
            eigensolver: EigenSolver::default(),
            cache_dir: None,
            format: OutputFormat::Json,
            sweep: SweepGrid::default(),
            threshold: ThresholdSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))
    }

    /// Checks the single-point parameters and returns any warnings.
    pub fn validate_point(&self) -> Result<Vec<String>, Error> {
        validate_q(self.q)?;
        if self.d == 0 {
            return Err(Error::invalid("d must be at least 1"));
        }
        if self.n_max < 2 {
            return Err(Error::invalid(format!(
                "N must be at least 2, got {}",
                self.n_max
            )));
        }
        self.validate_numerics()?;
        Ok(high_condition_warnings(&[self.q]))
    }

    pub fn validate_numerics(&self) -> Result<(), Error> {
        self.tolerances.validate()?;
        let e = &self.eigensolver;
        if !(e.residual_tol.is_finite() && e.residual_tol > 0.0) {
            return Err(Error::invalid("eigen residual tolerance must be positive"));
        }
        if e.max_iterations == 0 || e.dense_cutoff == 0 {
            return Err(Error::invalid(
                "eigensolver cutoff and iteration budget must be positive",
            ));
        }
        Ok(())
    }
}

pub fn high_condition_warnings(qs: &[f64]) -> Vec<String> {
    qs.iter()
        .filter(|&&q| is_high_condition(q))
        .map(|q| format!("q = {q} is close to ±1; Gram matrices are badly conditioned"))
        .collect()
}
