//! Run configuration, read from TOML and overridden by CLI flags.
//!
//! ```toml
//! task = "DNN2"            # DNN1..DNN5; sets the class list
//! engine = "nsga2"         # exhaustive | random | roulette | tournament | nsga2 | spea2
//! seed = 7
//! out = "runs/dnn2"
//!
//! [weights]
//! alpha = 0.5
//! beta = 0.5
//!
//! [constraints]
//! s_const_bytes = 4000000
//! q_const = 0.9
//! metric = "accuracy"      # or precision:<class>, recall:<class>, f1:<class>
//!
//! [ga]
//! population = 30
//! generations = 5
//! crossover = 0.4
//! mutation = 0.11
//! cache = true
//! mode = "multi-objective" # or "scalarized"
//!
//! [random]
//! fraction = 0.1
//!
//! [evaluator]
//! backend = "surrogate"    # surrogate | table:<csv> | external:<command>
//! workers = 1
//! timeout_secs = 3600
//! dataset = "data/dnn2.bnxd"
//! cache_file = "runs/dnn2/cache.csv"
//!
//! [trainer]
//! lr = 0.001
//! batch = 128
//! dropout = 0.2
//! beta1 = 0.9
//! beta2 = 0.999
//! max_epochs = 50
//!
//! [net]
//! input_len = 256
//! input_channels = 1
//! ```
//!
//! Every key is optional.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bionet_core::evaluate::TrainerHyperparams;
use bionet_core::metrics::QualityMetric;
use bionet_core::search::{Engine, GaMode, GaSettings, DEFAULT_RANDOM_FRACTION};
use bionet_core::wfdb::{TaskId, TaskSpec};
use bionet_core::NetConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        source: toml::de::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Weights {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintConfig {
    pub s_const_bytes: Option<u64>,
    pub q_const: Option<f64>,
    pub metric: String,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            s_const_bytes: None,
            q_const: None,
            metric: "accuracy".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover: f64,
    pub mutation: f64,
    pub cache: bool,
    pub mode: String,
}

impl Default for GaConfig {
    fn default() -> Self {
        let d = GaSettings::default();
        Self {
            population: d.population_size,
            generations: d.generations,
            crossover: d.crossover_prob,
            mutation: d.mutation_prob,
            cache: d.cache,
            mode: "multi-objective".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomConfig {
    pub fraction: f64,
}

impl Default for RandomConfig {
    fn default() -> Self {
        Self {
            fraction: DEFAULT_RANDOM_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluatorConfig {
    pub backend: String,
    pub workers: usize,
    pub timeout_secs: u64,
    pub dataset: String,
    pub cache_file: Option<PathBuf>,
}

impl Default for EvaluatorConfig {
    fn default() -> Self {
        Self {
            backend: "surrogate".into(),
            workers: 1,
            timeout_secs: 3600,
            dataset: String::new(),
            cache_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub lr: f64,
    pub batch: u32,
    pub dropout: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub max_epochs: u32,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        let h = TrainerHyperparams::default();
        Self {
            lr: h.learning_rate,
            batch: h.batch_size,
            dropout: h.dropout,
            beta1: h.beta1,
            beta2: h.beta2,
            max_epochs: h.max_epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetSection {
    pub input_len: u64,
    pub input_channels: u64,
}

impl Default for NetSection {
    fn default() -> Self {
        let n = NetConfig::default();
        Self {
            input_len: n.input_len,
            input_channels: n.input_channels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: String,
    pub engine: String,
    pub seed: u64,
    /// Output directory; not part of the run's identity.
    #[serde(skip_serializing)]
    pub out: Option<PathBuf>,
    pub weights: Weights,
    pub constraints: ConstraintConfig,
    pub ga: GaConfig,
    pub random: RandomConfig,
    pub evaluator: EvaluatorConfig,
    pub trainer: TrainerConfig,
    pub net: NetSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: TaskId::Dnn1.name().into(),
            engine: "nsga2".into(),
            seed: 0,
            out: None,
            weights: Weights::default(),
            constraints: ConstraintConfig::default(),
            ga: GaConfig::default(),
            random: RandomConfig::default(),
            evaluator: EvaluatorConfig::default(),
            trainer: TrainerConfig::default(),
            net: NetSection::default(),
        }
    }
}

/// Evaluation backend named by `evaluator.backend`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Surrogate,
    Table(PathBuf),
    External(String),
}

impl FromStr for Backend {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || {
            ConfigError::Invalid(format!(
                "evaluator {s:?}: expected surrogate, table:<file> or external:<command>"
            ))
        };
        match s.split_once(':') {
            None if s == "surrogate" => Ok(Self::Surrogate),
            Some(("table", p)) if !p.is_empty() => Ok(Self::Table(p.into())),
            Some(("external", c)) if !c.trim().is_empty() => Ok(Self::External(c.into())),
            _ => Err(bad()),
        }
    }
}

/// Parses `accuracy`, `precision:<c>`, `recall:<c>` or `f1:<c>`.
pub fn parse_metric(s: &str) -> Result<QualityMetric, ConfigError> {
    let bad = || {
        ConfigError::Invalid(format!(
            "metric {s:?}: expected accuracy, precision:<c>, recall:<c> or f1:<c>"
        ))
    };
    let s = s.trim().to_ascii_lowercase();
    if s == "accuracy" {
        return Ok(QualityMetric::Accuracy);
    }
    let (name, class) = s.split_once(':').ok_or_else(bad)?;
    let class: usize = class.parse().map_err(|_| bad())?;
    match name {
        "precision" => Ok(QualityMetric::Precision(class)),
        "recall" => Ok(QualityMetric::Recall(class)),
        "f1" => Ok(QualityMetric::F1(class)),
        _ => Err(bad()),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn task_spec(&self) -> Result<TaskSpec, ConfigError> {
        let id: TaskId = self
            .task
            .parse()
            .map_err(|e: bionet_core::wfdb::WfdbError| ConfigError::Invalid(e.to_string()))?;
        Ok(TaskSpec::preset(id))
    }

    pub fn net_config(&self) -> Result<NetConfig, ConfigError> {
        let cfg = NetConfig {
            input_len: self.net.input_len,
            input_channels: self.net.input_channels,
            ..NetConfig::with_classes(self.task_spec()?.classes.len())
        };
        cfg.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(cfg)
    }

    pub fn engine(&self) -> Result<Engine, ConfigError> {
        let engine: Engine = self
            .engine
            .parse()
            .map_err(|e: bionet_core::search::SearchError| ConfigError::Invalid(e.to_string()))?;
        Ok(match engine {
            Engine::Random { .. } => Engine::Random {
                fraction: self.random.fraction,
            },
            other => other,
        })
    }

    pub fn ga_settings(&self) -> Result<GaSettings, ConfigError> {
        let mode = match self.ga.mode.as_str() {
            "multi-objective" | "multi" => GaMode::MultiObjective,
            "scalarized" | "scalar" => GaMode::Scalarized,
            other => {
                return Err(ConfigError::Invalid(format!(
                    "ga.mode {other:?}: expected multi-objective or scalarized"
                )))
            }
        };
        let s = GaSettings {
            population_size: self.ga.population,
            generations: self.ga.generations,
            crossover_prob: self.ga.crossover,
            mutation_prob: self.ga.mutation,
            seed: self.seed,
            mode,
            cache: self.ga.cache,
        };
        s.validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(s)
    }

    pub fn metric(&self) -> Result<QualityMetric, ConfigError> {
        parse_metric(&self.constraints.metric)
    }

    pub fn backend(&self) -> Result<Backend, ConfigError> {
        self.evaluator.backend.parse()
    }

    pub fn hyperparams(&self) -> TrainerHyperparams {
        let t = &self.trainer;
        TrainerHyperparams {
            learning_rate: t.lr,
            batch_size: t.batch,
            dropout: t.dropout,
            beta1: t.beta1,
            beta2: t.beta2,
            max_epochs: t.max_epochs,
        }
    }

    /// Checks every derived setting at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.net_config()?;
        self.engine()?;
        self.ga_settings()?;
        self.metric()?;
        self.backend()?;
        Ok(())
    }
}
