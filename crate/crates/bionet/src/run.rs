//! End-to-end search runs: configuration in, artifacts out.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Duration;

use bionet_core::evaluate::{Evaluator, SurrogateEvaluator, TaskDescriptor};
use bionet_core::search::{weighted_search, Constraints, CostFunction, SearchError, SearchResult};
use bionet_core::{ArchitectureSpace, EvalError};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cache::{context_hash, CacheError, CachedEvaluator, ResultCache};
use crate::config::{Backend, ConfigError, RunConfig};
use crate::external::{ExternalConfig, ExternalEvaluator};
use crate::output::{self, OutputError};
use crate::protocol::WireHyperparams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_EMPTY_SPACE: i32 = 3;
pub const EXIT_EVALUATOR: i32 = 4;
pub const EXIT_UNSATISFIABLE: i32 = 5;

/// Files written by every run, in manifest order.
pub const RUN_FILES: [&str; 4] = ["evaluated.csv", "pareto.csv", "omega.csv", "log.csv"];

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no architecture fits within the storage constraint")]
    EmptySpace,
    #[error("{0}")]
    Evaluator(EvalError),
    #[error(transparent)]
    Search(SearchError),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::EmptySpace => EXIT_EMPTY_SPACE,
            RunError::Evaluator(_) => EXIT_EVALUATOR,
            _ => EXIT_ERROR,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub result: SearchResult,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    /// No candidate meets the quality constraint.
    pub fn unsatisfiable(&self) -> bool {
        self.result.omega.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.unsatisfiable() {
            EXIT_UNSATISFIABLE
        } else {
            EXIT_OK
        }
    }
}

#[derive(Serialize)]
struct Counts {
    space: usize,
    evaluated: usize,
    pareto: usize,
    omega: usize,
    unique_eval_calls: usize,
    backend_calls: usize,
    over_s_max: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    engine: &'static str,
    seed: u64,
    s_max: u64,
    config: &'a RunConfig,
    counts: Counts,
    /// SHA-256 of each artifact.
    files: BTreeMap<&'static str, String>,
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| RunError::Io {
            path: path.to_owned(),
            source,
        })
}

fn sha256_file(path: &Path) -> Result<String, RunError> {
    let bytes = std::fs::read(path).map_err(|source| RunError::Io {
        path: path.to_owned(),
        source,
    })?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

fn write_artifacts(
    dir: &Path,
    cfg: &RunConfig,
    r: &SearchResult,
    space: usize,
    s_max: u64,
) -> Result<(), RunError> {
    output::write_evaluated(create(&dir.join("evaluated.csv"))?, &r.evaluated, r.engine)?;
    output::write_evaluated(create(&dir.join("pareto.csv"))?, &r.pareto, r.engine)?;
    output::write_evaluated(create(&dir.join("omega.csv"))?, &r.omega, r.engine)?;
    output::write_log(create(&dir.join("log.csv"))?, &r.log)?;
    let mut files = BTreeMap::new();
    for name in RUN_FILES {
        files.insert(name, sha256_file(&dir.join(name))?);
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        engine: r.engine,
        seed: cfg.seed,
        s_max,
        config: cfg,
        counts: Counts {
            space,
            evaluated: r.evaluated.len(),
            pareto: r.pareto.len(),
            omega: r.omega.len(),
            unique_eval_calls: r.unique_eval_calls,
            backend_calls: r.backend_calls,
            over_s_max: r.over_s_max,
        },
        files,
    };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|source| RunError::Io { path, source })
}

/// Runs the configured search and writes `evaluated.csv`, `pareto.csv`,
/// `omega.csv`, `log.csv` and `manifest.json` into `out`. An empty Ω is
/// not an error here; check [`RunOutcome::unsatisfiable`].
pub fn run_search(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let task = cfg.task_spec()?;
    let net = cfg.net_config()?;
    let engine = cfg.engine()?;
    let settings = cfg.ga_settings()?;
    let space = ArchitectureSpace::enumerate();
    let cf = CostFunction::for_space(cfg.weights.alpha, cfg.weights.beta, &space, &net)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let constraints = Constraints {
        s_const: cfg.constraints.s_const_bytes,
        q_const: cfg.constraints.q_const,
        metric: cfg.metric()?,
    };
    constraints
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    std::fs::create_dir_all(out).map_err(|source| RunError::Io {
        path: out.to_owned(),
        source,
    })?;

    let run = |evaluator: &mut dyn Evaluator| {
        weighted_search(&space, &net, cf, &constraints, engine, &settings, evaluator)
    };

    let result = match cfg.backend()? {
        Backend::Surrogate => {
            let mut ev = SurrogateEvaluator::new(net, cfg.seed).with_labels(task.classes.clone());
            run(&mut ev)
        }
        Backend::Table(path) => {
            let file = File::open(&path).map_err(|source| RunError::Io {
                path: path.clone(),
                source,
            })?;
            let mut table = output::read_table(file)?;
            run(&mut table)
        }
        Backend::External(command) => {
            let descriptor = TaskDescriptor {
                classes: task.classes.clone(),
                dataset: cfg.evaluator.dataset.clone(),
            };
            let hp = cfg.hyperparams();
            let context = context_hash(&(
                &command,
                &descriptor.classes,
                &descriptor.dataset,
                WireHyperparams::from(&hp),
            ));
            let cache_path = cfg
                .evaluator
                .cache_file
                .clone()
                .unwrap_or_else(|| out.join("cache.csv"));
            let cache = ResultCache::open(&cache_path)?;
            if cache.skipped() > 0 {
                log::warn!(
                    "{}: ignored {} damaged rows",
                    cache_path.display(),
                    cache.skipped()
                );
            }
            let external = ExternalEvaluator::new(ExternalConfig {
                command,
                workers: cfg.evaluator.workers,
                timeout: Duration::from_secs(cfg.evaluator.timeout_secs),
                task: descriptor,
                hyperparams: hp,
            });
            let mut ev = CachedEvaluator::new(external, &cache, context);
            let r = run(&mut ev);
            log::info!("cache hits {}, trainer calls {}", ev.hits, ev.backend_calls);
            r
        }
    };

    let s_max = cf.s_max();
    match result {
        Ok(result) => {
            write_artifacts(out, cfg, &result, space.len(), s_max)?;
            Ok(RunOutcome {
                result,
                out_dir: out.to_owned(),
            })
        }
        Err(SearchError::EmptySpace) => Err(RunError::EmptySpace),
        Err(SearchError::Evaluation { error, partial }) => {
            // keep what was learned before the failure
            let path = out.join("evaluated.partial.csv");
            output::write_evaluated(create(&path)?, &partial, engine.name())?;
            Err(RunError::Evaluator(error))
        }
        Err(e) => Err(RunError::Search(e)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(dir: &Path, name: &str) -> Vec<u8> {
        std::fs::read(dir.join(name)).unwrap()
    }

    #[test]
    fn surrogate_runs_are_byte_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            seed: 11,
            ..RunConfig::default()
        };
        run_search(&cfg, a.path()).unwrap();
        run_search(&cfg, b.path()).unwrap();
        for name in RUN_FILES.iter().chain(&["manifest.json"]) {
            assert_eq!(read(a.path(), name), read(b.path(), name), "{name}");
        }
    }

    #[test]
    fn exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::default();
        cfg.constraints.s_const_bytes = Some(1);
        let err = run_search(&cfg, dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_EMPTY_SPACE);

        cfg.constraints.s_const_bytes = None;
        cfg.constraints.q_const = Some(1.0);
        let outcome = run_search(&cfg, dir.path()).unwrap();
        assert_eq!(outcome.exit_code(), EXIT_UNSATISFIABLE);
        assert!(dir.path().join("omega.csv").exists());

        cfg.constraints.q_const = None;
        cfg.evaluator.backend = "table:/nonexistent/table.csv".into();
        assert_eq!(
            run_search(&cfg, dir.path()).unwrap_err().exit_code(),
            EXIT_ERROR
        );
    }

    #[test]
    fn table_miss_is_evaluator_failure() {
        let dir = tempfile::tempdir().unwrap();
        let table = dir.path().join("t.csv");
        std::fs::write(&table, "B,x,z,quality\n0,1,4,0.5\n").unwrap();
        let cfg = RunConfig {
            engine: "exhaustive".into(),
            evaluator: crate::config::EvaluatorConfig {
                backend: format!("table:{}", table.display()),
                ..Default::default()
            },
            ..RunConfig::default()
        };
        let err = run_search(&cfg, &dir.path().join("out")).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_EVALUATOR);
    }
}
