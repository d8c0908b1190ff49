//! Experiment configuration files.

use std::path::{Path, PathBuf};

use polarmem::channel::{FiniteStateChannel, MemoryChannel, ModulationMap, OutputQuantizer};
use polarmem::noise::{BivariateGaussianNoise, BivariateStudentNoise, GilbertElliottNoise};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_PATHS: usize = 100_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    /// Where artifacts go; relative paths resolve against the config file's directory.
    pub output_dir: Option<PathBuf>,
    pub model: ModelConfig,
    pub channel: Option<ChannelConfig>,
    #[serde(default)]
    pub budget: BudgetConfig,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    Gaussian { sigma11: f64, sigma12: f64 },
    Student { sigma11: f64, sigma12: f64, nu: f64 },
    GilbertElliott { flip: f64, error_good: f64, error_bad: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Modulation {
    Antipodal,
    OnOff,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub modulation: Modulation,
    pub amplitude: f64,
    /// State bins used when a continuous model is reduced to a finite-state channel.
    pub fsc_bins: usize,
    pub quantizer: OutputQuantizer,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_paths() -> usize {
    DEFAULT_PATHS
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            paths: DEFAULT_PATHS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Scalar channel quantities and the length-two identity.
    Metrics,
    /// Subchannel reports along a ladder of block lengths.
    Polarize { ladder: Vec<usize> },
    /// One-step Bhattacharyya inequalities from each `L` to `2L`.
    Theorem4 { ladder: Vec<usize> },
    /// Threshold fractions and bounding processes.
    Rate {
        ladder: Vec<usize>,
        /// Block lengths enumerated exactly to estimate the ratio constants.
        exact_levels: Vec<usize>,
        l_max: u32,
        /// Overrides for the process constants; estimated when absent.
        process_rho: Option<f64>,
        process_lambda: Option<f64>,
    },
    /// Memory-aware versus memoryless SC decoding.
    Ber {
        len: usize,
        rate: f64,
        blocks: Vec<usize>,
    },
    /// Single-layer quantities over a sweep of amplitudes.
    Fig3 { amplitudes: Vec<f64> },
    /// Conditional genie Bhattacharyya parameter over a grid of previous noise values.
    Fig4 { t0: Vec<f64> },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Metrics => "metrics",
            Experiment::Polarize { .. } => "polarize",
            Experiment::Theorem4 { .. } => "theorem4",
            Experiment::Rate { .. } => "rate",
            Experiment::Ber { .. } => "ber",
            Experiment::Fig3 { .. } => "fig3",
            Experiment::Fig4 { .. } => "fig4",
        }
    }
}

/// One-line descriptions for `list-experiments`.
pub const EXPERIMENT_KINDS: [(&str, &str); 7] = [
    ("metrics", "I(W), Z(W), genie Z, pairwise informations, length-two identity, I-dagger"),
    ("polarize", "per-index I and Z along a block-length ladder with polarization trends"),
    ("theorem4", "one-step Bhattacharyya inequalities between L and 2L"),
    ("rate", "threshold fractions against the rate bounds and bounding-process tails"),
    ("ber", "bit-error rate of memory-aware versus memoryless SC decoding"),
    ("fig3", "single-layer mutual information gap over an amplitude sweep"),
    ("fig4", "conditional genie Bhattacharyya parameter versus previous noise"),
];

/// Either noise family, built and validated.
pub enum Model {
    Gaussian(MemoryChannel<BivariateGaussianNoise>),
    Student(MemoryChannel<BivariateStudentNoise>),
    GilbertElliott(GilbertElliottNoise),
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn power_of_two_ladder(name: &str, ladder: &[usize], min: usize) -> Result<(), CliError> {
    if ladder.is_empty() {
        return Err(schema(format!("{name} must not be empty")));
    }
    if ladder.iter().any(|&l| !l.is_power_of_two() || l < min) {
        return Err(schema(format!("{name} entries must be powers of two ≥ {min}")));
    }
    if ladder.windows(2).any(|w| w[1] <= w[0]) {
        return Err(schema(format!("{name} must be strictly increasing")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: Self = toml::from_str(&text).map_err(|e| schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Structural checks and model construction, before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(schema("name must be non-empty and use [A-Za-z0-9_-]"));
        }
        let continuous = !matches!(self.model, ModelConfig::GilbertElliott { .. });
        match (&self.channel, continuous) {
            (None, true) => return Err(schema("continuous models need a [channel] section")),
            (Some(_), false) => {
                return Err(schema("the gilbert-elliott model has binary outputs; remove [channel]"))
            }
            _ => {}
        }
        self.model()?;
        if let Some(ch) = &self.channel {
            if ch.fsc_bins == 0 {
                return Err(schema("fsc_bins must be positive"));
            }
        }
        if self.budget.samples < polarmem::trellis::MIN_SAMPLES {
            return Err(schema(format!(
                "budget.samples must be at least {}",
                polarmem::trellis::MIN_SAMPLES
            )));
        }
        if self.budget.paths == 0 {
            return Err(schema("budget.paths must be positive"));
        }
        match &self.experiment {
            Experiment::Metrics => {}
            Experiment::Polarize { ladder } => power_of_two_ladder("ladder", ladder, 1)?,
            Experiment::Theorem4 { ladder } => power_of_two_ladder("ladder", ladder, 1)?,
            Experiment::Rate {
                ladder,
                exact_levels,
                l_max,
                process_rho,
                process_lambda,
            } => {
                power_of_two_ladder("ladder", ladder, 2)?;
                power_of_two_ladder("exact_levels", exact_levels, 1)?;
                if !exact_levels.contains(&2) {
                    return Err(schema("exact_levels must include 2 (process start values)"));
                }
                if *l_max < 2 {
                    return Err(schema("l_max must be at least 2"));
                }
                if process_rho.is_some_and(|r| r < 0.0 || !r.is_finite()) {
                    return Err(schema("process_rho must be finite and ≥ 0"));
                }
                if process_lambda.is_some_and(|l| !(l > 0.0 && l <= 1.0)) {
                    return Err(schema("process_lambda must lie in (0, 1]"));
                }
            }
            Experiment::Ber { len, rate, blocks } => {
                power_of_two_ladder("len", &[*len], 2)?;
                if !(*rate > 0.0 && *rate < 1.0) {
                    return Err(schema("rate must lie in (0, 1)"));
                }
                if blocks.is_empty() || blocks.iter().any(|&b| b < polarmem::trellis::MIN_SAMPLES) {
                    return Err(schema(format!(
                        "blocks must be non-empty with every budget ≥ {}",
                        polarmem::trellis::MIN_SAMPLES
                    )));
                }
                if blocks.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(schema("blocks must be strictly increasing"));
                }
            }
            Experiment::Fig3 { amplitudes } => {
                if !continuous {
                    return Err(schema("fig3 needs a continuous model"));
                }
                if amplitudes.is_empty() || amplitudes.iter().any(|a| *a <= 0.0 || !a.is_finite()) {
                    return Err(schema("amplitudes must be non-empty, positive and finite"));
                }
            }
            Experiment::Fig4 { t0 } => {
                if !continuous {
                    return Err(schema("fig4 needs a continuous model"));
                }
                if t0.is_empty() || t0.iter().any(|t| !t.is_finite()) || t0.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(schema("t0 must be non-empty, finite and strictly increasing"));
                }
            }
        }
        Ok(())
    }

    pub fn modulation(&self, amplitude: f64) -> Result<ModulationMap, CliError> {
        let ch = self.channel.as_ref().ok_or_else(|| schema("missing [channel]"))?;
        match ch.modulation {
            Modulation::Antipodal => ModulationMap::antipodal(amplitude),
            Modulation::OnOff => ModulationMap::on_off(amplitude),
        }
        .map_err(|e| schema(e.to_string()))
    }

    /// The configured model at the configured amplitude.
    pub fn model(&self) -> Result<Model, CliError> {
        let amp = self.channel.as_ref().map_or(1.0, |c| c.amplitude);
        self.model_at(amp)
    }

    pub fn model_at(&self, amplitude: f64) -> Result<Model, CliError> {
        let bad = |e: polarmem::Error| schema(e.to_string());
        Ok(match self.model {
            ModelConfig::Gaussian { sigma11, sigma12 } => Model::Gaussian(MemoryChannel::new(
                BivariateGaussianNoise::new(sigma11, sigma12).map_err(bad)?,
                self.modulation(amplitude)?,
            )),
            ModelConfig::Student { sigma11, sigma12, nu } => Model::Student(MemoryChannel::new(
                BivariateStudentNoise::new(sigma11, sigma12, nu).map_err(bad)?,
                self.modulation(amplitude)?,
            )),
            ModelConfig::GilbertElliott {
                flip,
                error_good,
                error_bad,
            } => Model::GilbertElliott(GilbertElliottNoise::symmetric(flip, error_good, error_bad).map_err(bad)?),
        })
    }

    /// Finite-state form of the configured channel.
    pub fn fsc(&self) -> Result<FiniteStateChannel, CliError> {
        let reduce = |e: polarmem::Error| CliError::Compute(e);
        match self.model()? {
            Model::GilbertElliott(ge) => Ok(FiniteStateChannel::gilbert_elliott(&ge)),
            Model::Gaussian(ch) => {
                let c = self.channel.as_ref().expect("validated");
                ch.to_fsc(c.fsc_bins, &c.quantizer).map_err(reduce)
            }
            Model::Student(ch) => {
                let c = self.channel.as_ref().expect("validated");
                ch.to_fsc(c.fsc_bins, &c.quantizer).map_err(reduce)
            }
        }
    }

    pub fn model_id(&self) -> &'static str {
        match self.model {
            ModelConfig::Gaussian { .. } => "gaussian",
            ModelConfig::Student { .. } => "student",
            ModelConfig::GilbertElliott { .. } => "gilbert-elliott",
        }
    }

    /// First 16 hex digits of the SHA-256 of the model and channel sections.
    pub fn params_hash(&self) -> String {
        let canonical = serde_json::to_string(&(&self.model, &self.channel)).expect("serializable");
        hex::encode(Sha256::digest(canonical.as_bytes()))[..16].to_owned()
    }

    /// SHA-256 of the whole parsed configuration.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("serializable");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn resolve_output(&self, config_path: &Path) -> PathBuf {
        let base = config_path.parent().unwrap_or(Path::new("."));
        match &self.output_dir {
            Some(p) if p.is_absolute() => p.clone(),
            Some(p) => base.join(p),
            None => base.join("out").join(&self.name),
        }
    }
}
