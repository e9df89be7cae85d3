//! Evaluator contract and in-process backends.
//!
//! The search engines only ever see an [`Evaluator`]: they hand it
//! architectures and get back [`QualityReport`]s. Backends shipped here:
//!
//! * [`SurrogateEvaluator`]: closed-form quality keyed by the genome, for
//!   tests and call-count studies.
//! * [`TableEvaluator`]: replays recorded results; misses are errors.
//! * [`CountingEvaluator`]: wraps any backend and counts calls.
//!
//! The external trainer process and the persistent cache live in the `bionet`
//! crate.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::archspace::ArchParams;
use crate::metrics::{ClassReport, QualityReport};
use crate::netmodel::{self, NetConfig};
use crate::rng::splitmix64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalErrorKind {
    /// A lookup backend has no row for the architecture.
    Miss,
    Timeout,
    /// Malformed or mismatched response.
    Protocol(String),
    /// The backend answered with `status = failed`.
    Failed(String),
    Io(String),
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalErrorKind::Miss => f.write_str("not present in table"),
            EvalErrorKind::Timeout => f.write_str("timed out"),
            EvalErrorKind::Protocol(m) => write!(f, "protocol error: {m}"),
            EvalErrorKind::Failed(m) => write!(f, "trainer failed: {m}"),
            EvalErrorKind::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

/// Evaluation failure, always tagged with the architecture it concerns.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("evaluating {arch}: {kind}")]
pub struct EvalError {
    pub arch: ArchParams,
    pub kind: EvalErrorKind,
}

impl EvalError {
    pub fn new(arch: ArchParams, kind: EvalErrorKind) -> Self {
        Self { arch, kind }
    }
}

pub trait Evaluator {
    fn evaluate(&mut self, arch: &ArchParams) -> Result<QualityReport, EvalError>;

    /// Evaluates independent architectures. Backends that can run requests
    /// concurrently override this; results must come back in input order.
    fn evaluate_batch(&mut self, archs: &[ArchParams]) -> Vec<Result<QualityReport, EvalError>> {
        archs.iter().map(|a| self.evaluate(a)).collect()
    }
}

impl<E: Evaluator + ?Sized> Evaluator for &mut E {
    fn evaluate(&mut self, arch: &ArchParams) -> Result<QualityReport, EvalError> {
        (**self).evaluate(arch)
    }

    fn evaluate_batch(&mut self, archs: &[ArchParams]) -> Vec<Result<QualityReport, EvalError>> {
        (**self).evaluate_batch(archs)
    }
}

/// Training hyperparameters forwarded to an external trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainerHyperparams {
    pub learning_rate: f64,
    pub batch_size: u32,
    pub dropout: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub max_epochs: u32,
}

impl Default for TrainerHyperparams {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            batch_size: 128,
            dropout: 0.2,
            beta1: 0.9,
            beta2: 0.999,
            max_epochs: 50,
        }
    }
}

/// What the trainer is asked to learn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDescriptor {
    pub classes: Vec<String>,
    pub dataset: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRequest {
    pub id: u64,
    pub arch: ArchParams,
    pub task: TaskDescriptor,
    pub hyperparams: TrainerHyperparams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalStatus {
    Ok(QualityReport),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResponse {
    pub id: u64,
    pub status: EvalStatus,
}

/// Scale of the surrogate's saturating quality curve, in parameters.
pub const SURROGATE_SCALE: f64 = 1.0e6;
/// Half-width of the surrogate's genome-keyed perturbation.
pub const SURROGATE_NOISE: f64 = 0.01;

/// Deterministic stand-in for training:
/// `q = 0.80 + 0.15·(1 − exp(−params / 1e6)) + u`, with `u ∈ [−0.01, 0.01]`
/// drawn from a hash of `(seed, genome)`.
#[derive(Debug, Clone)]
pub struct SurrogateEvaluator {
    cfg: NetConfig,
    seed: u64,
    labels: Vec<String>,
}

impl SurrogateEvaluator {
    pub fn new(cfg: NetConfig, seed: u64) -> Self {
        let labels = (0..cfg.num_classes)
            .map(|c| alloc::format!("class{c}"))
            .collect();
        Self { cfg, seed, labels }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        self.labels = labels;
        self
    }

    pub fn quality(&self, arch: &ArchParams) -> f64 {
        // config is validated at construction of any search; fall back to 0 params
        let params = netmodel::build(arch, &self.cfg)
            .map(|n| n.param_count)
            .unwrap_or(0);
        let base = 0.80 + 0.15 * (1.0 - libm::exp(-(params as f64) / SURROGATE_SCALE));
        let h = splitmix64(self.seed ^ splitmix64(u64::from(arch.encode().bits())));
        let u = (h >> 11) as f64 / (1u64 << 53) as f64;
        base + SURROGATE_NOISE * (2.0 * u - 1.0)
    }
}

impl Evaluator for SurrogateEvaluator {
    fn evaluate(&mut self, arch: &ArchParams) -> Result<QualityReport, EvalError> {
        let q = self.quality(arch);
        Ok(QualityReport {
            accuracy: q,
            per_class: self
                .labels
                .iter()
                .map(|label| ClassReport {
                    label: label.clone(),
                    precision: q,
                    recall: q,
                    f1: q,
                })
                .collect(),
            roc: None,
        })
    }
}

/// Replays recorded results keyed by architecture.
#[derive(Debug, Clone, Default)]
pub struct TableEvaluator {
    rows: BTreeMap<ArchParams, QualityReport>,
}

impl TableEvaluator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, arch: ArchParams, report: QualityReport) {
        self.rows.insert(arch, report);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, arch: &ArchParams) -> Option<&QualityReport> {
        self.rows.get(arch)
    }
}

impl FromIterator<(ArchParams, QualityReport)> for TableEvaluator {
    fn from_iter<I: IntoIterator<Item = (ArchParams, QualityReport)>>(iter: I) -> Self {
        Self {
            rows: iter.into_iter().collect(),
        }
    }
}

impl Evaluator for TableEvaluator {
    fn evaluate(&mut self, arch: &ArchParams) -> Result<QualityReport, EvalError> {
        self.rows
            .get(arch)
            .cloned()
            .ok_or(EvalError::new(*arch, EvalErrorKind::Miss))
    }
}

/// Counts backend calls, including batched ones.
#[derive(Debug, Clone)]
pub struct CountingEvaluator<E> {
    pub inner: E,
    pub calls: usize,
}

impl<E> CountingEvaluator<E> {
    pub fn new(inner: E) -> Self {
        Self { inner, calls: 0 }
    }
}

impl<E: Evaluator> Evaluator for CountingEvaluator<E> {
    fn evaluate(&mut self, arch: &ArchParams) -> Result<QualityReport, EvalError> {
        self.calls += 1;
        self.inner.evaluate(arch)
    }

    fn evaluate_batch(&mut self, archs: &[ArchParams]) -> Vec<Result<QualityReport, EvalError>> {
        self.calls += archs.len();
        self.inner.evaluate_batch(archs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archspace::ArchitectureSpace;

    #[test]
    fn surrogate_is_deterministic() {
        let mut s = SurrogateEvaluator::new(NetConfig::default(), 9);
        let a = ArchParams::new(3, 2, 5).unwrap();
        assert_eq!(s.evaluate(&a).unwrap(), s.evaluate(&a).unwrap());
    }

    #[test]
    fn surrogate_range_over_space() {
        let s = SurrogateEvaluator::new(NetConfig::default(), 1);
        for a in &ArchitectureSpace::enumerate() {
            let q = s.quality(a);
            assert!((0.79..=0.96).contains(&q), "{a}: {q}");
        }
    }

    #[test]
    fn surrogate_tracks_params_within_noise_band() {
        let cfg = NetConfig::default();
        let s = SurrogateEvaluator::new(cfg, 4);
        let mut pts: Vec<(u64, f64)> = ArchitectureSpace::enumerate()
            .iter()
            .map(|a| (netmodel::build(a, &cfg).unwrap().param_count, s.quality(a)))
            .collect();
        pts.sort_by_key(|p| p.0);
        for w in pts.windows(2) {
            assert!(w[1].1 >= w[0].1 - 2.0 * SURROGATE_NOISE - 1e-12);
        }
    }

    #[test]
    fn table_hit_and_miss() {
        let a = ArchParams::new(1, 1, 4).unwrap();
        let b = ArchParams::new(2, 1, 4).unwrap();
        let mut t: TableEvaluator = [(a, QualityReport::accuracy_only(0.5))]
            .into_iter()
            .collect();
        assert_eq!(t.evaluate(&a).unwrap().accuracy, 0.5);
        assert_eq!(t.evaluate(&b), Err(EvalError::new(b, EvalErrorKind::Miss)));
    }
}
