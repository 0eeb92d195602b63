//! Run configuration. One TOML file can carry a `[train]`, an `[audit]` and
//! a `[verify]` section; relative paths resolve against the file's directory.
//!
//! ```toml
//! seed = 7
//!
//! [output]
//! dir = "out"
//!
//! [train]
//! episodes = 3000
//!
//! [audit]
//! architecture = { kind = "gridworld", weights = "out/weights.toml" }
//! scales = [0.0, 0.25, 0.5, 1.0]
//! ```

use std::path::{Path, PathBuf};

use grounding_core::audit::Aggregators;
use grounding_core::gridworld::{AgentSpec, TrainConfig, WorldSpec};
use grounding_core::semantics::MeaningType;
use grounding_core::typology::ThresholdPolicy;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world: Option<WorldSpec>,
    #[serde(default)]
    pub agent: AgentSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<ThresholdPolicy>,
    /// Directory of the file the config was read from.
    #[serde(skip)]
    pub base_dir: PathBuf,
    #[serde(skip)]
    pub source: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            output: OutputSection::default(),
            world: None,
            agent: AgentSection::default(),
            train: None,
            audit: None,
            verify: None,
            thresholds: None,
            base_dir: PathBuf::from("."),
            source: PathBuf::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentSection {
    pub embed_width: usize,
    pub hidden_width: usize,
}

impl Default for AgentSection {
    fn default() -> Self {
        let spec = AgentSpec::default();
        AgentSection {
            embed_width: spec.embed_width,
            hidden_width: spec.hidden_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub episodes: usize,
    pub learning_rate: f64,
    pub final_learning_rate: f64,
    pub sigma: f64,
    pub baseline_decay: f64,
    pub samples_per_command: usize,
    pub heldout: Vec<String>,
    pub log_every: usize,
    /// Final mean distance below which the run counts as converged.
    pub target_loss: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let d = TrainConfig::default();
        TrainSection {
            episodes: d.episodes,
            learning_rate: d.learning_rate,
            final_learning_rate: d.final_learning_rate,
            sigma: d.sigma,
            baseline_decay: d.baseline_decay,
            samples_per_command: d.samples_per_command,
            heldout: d.heldout,
            log_every: d.log_every,
            target_loss: 0.05,
        }
    }
}

impl TrainSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            episodes: self.episodes,
            learning_rate: self.learning_rate,
            final_learning_rate: self.final_learning_rate,
            sigma: self.sigma,
            baseline_decay: self.baseline_decay,
            samples_per_command: self.samples_per_command,
            heldout: self.heldout.clone(),
            log_every: self.log_every,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArchitectureSource {
    /// A trained agent's weight file.
    Gridworld { weights: PathBuf },
    /// A rule base; the built-in one when no file is given.
    Symbolic {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rules: Option<PathBuf>,
    },
    /// The printed grid-world outputs as a lookup table.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Random,
    Exhaustive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    pub architecture: ArchitectureSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meaning_type: Option<MeaningType>,
    /// `gaussian-norm`, `edit` or `finite-neighborhood`; chosen from the
    /// architecture when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threat: Option<String>,
    #[serde(default = "default_scales")]
    pub scales: Vec<f64>,
    #[serde(default = "default_plan")]
    pub plan: PlanKind,
    #[serde(default = "default_samples")]
    pub samples_per_scale: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub items: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heldout: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mechanisms: Option<Vec<String>>,
    #[serde(default = "default_half")]
    pub tau: f64,
    #[serde(default = "default_half")]
    pub success_threshold: f64,
    #[serde(default)]
    pub aggregators: Aggregators,
}

fn default_scales() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0]
}

fn default_plan() -> PlanKind {
    PlanKind::Random
}

fn default_samples() -> usize {
    200
}

fn default_alpha() -> f64 {
    0.1
}

fn default_half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Random finite spaces for the modulus suite.
    pub spaces: usize,
    pub max_points: usize,
    /// Term depth for the homomorphism suite.
    pub depth: usize,
    /// Coordinates probed per parameter tensor; all when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_probes: Option<usize>,
    /// Largest `n` of the truncated `{0} ∪ {1/n}` space.
    pub counterexample_n: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            spaces: 100,
            max_points: 12,
            depth: 4,
            gradient_probes: None,
            counterexample_n: 50,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut cfg: Config = toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        cfg.source = path.to_path_buf();
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn config_error(&self, message: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.source.clone(),
            message: message.into(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(w) = &self.world {
            w.validate().map_err(|e| self.config_error(e.to_string()))?;
        }
        if let Some(t) = &self.thresholds {
            t.validate().map_err(|e| self.config_error(e.to_string()))?;
        }
        if let Some(a) = &self.audit {
            if a.scales.first() != Some(&0.0) {
                return Err(self.config_error("audit.scales must start at 0"));
            }
        }
        if let Some(t) = &self.train {
            t.train_config(self.seed)
                .validate()
                .map_err(|e| self.config_error(e.to_string()))?;
        }
        Ok(())
    }

    /// Files the audit section reads must exist; checked when auditing, so
    /// that one config can train first and audit the result afterwards.
    pub fn check_audit_inputs(&self) -> Result<(), CliError> {
        match self.audit.as_ref().map(|a| &a.architecture) {
            Some(ArchitectureSource::Gridworld { weights }) => self.existing(weights),
            Some(ArchitectureSource::Symbolic { rules: Some(rules) }) => self.existing(rules),
            _ => Ok(()),
        }
    }

    fn existing(&self, p: &Path) -> Result<(), CliError> {
        let full = self.resolve(p);
        if full.is_file() {
            Ok(())
        } else {
            Err(self.config_error(format!("referenced file {} does not exist", full.display())))
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    pub fn world(&self) -> WorldSpec {
        self.world.clone().unwrap_or_default()
    }

    pub fn agent_spec(&self) -> AgentSpec {
        let world = self.world();
        AgentSpec {
            vocab: world.landmarks.keys().chain(world.directions.keys()).cloned().collect(),
            embed_width: self.agent.embed_width,
            hidden_width: self.agent.hidden_width,
            seed: self.seed,
        }
    }

    pub fn thresholds(&self) -> ThresholdPolicy {
        self.thresholds.unwrap_or_default()
    }
}
