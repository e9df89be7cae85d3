//! Weighted architecture search.
//!
//! [`weighted_search`] is the full pipeline: drop every architecture whose
//! analytical storage exceeds the storage constraint (no training needed),
//! explore the survivors with one of the engines, then keep the Pareto
//! members that meet the quality constraint.
//!
//! Fitness is `φ = α·Q + β·(1 − S/S_MAX)`. Genomes that decode to nothing,
//! or to an architecture outside the (filtered) space, get `φ = 0` and are
//! never evaluated.

mod ga;
pub mod pareto;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::archspace::{ArchParams, ArchitectureSpace};
use crate::evaluate::{EvalError, Evaluator};
use crate::metrics::QualityMetric;
use crate::netmodel::{self, NetConfig, NetError};
use crate::rng::SearchRng;

pub use ga::ga_search;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SearchError {
    #[error("no architecture survives the storage constraint")]
    EmptySpace,
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error("{error}")]
    Evaluation {
        error: EvalError,
        /// Architectures evaluated before the failure.
        partial: Vec<Evaluated>,
    },
    #[error("quality report for {arch} lacks the selected metric")]
    MissingMetric { arch: ArchParams },
}

/// Weighted cost function `φ = α·q + β·(1 − s/S_MAX)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostFunction {
    alpha: f64,
    beta: f64,
    s_max: u64,
}

impl CostFunction {
    pub fn new(alpha: f64, beta: f64, s_max: u64) -> Result<Self, SearchError> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(SearchError::InvalidSettings(alloc::format!(
                "weights must lie in [0, 1], got alpha={alpha} beta={beta}"
            )));
        }
        if s_max == 0 {
            return Err(SearchError::InvalidSettings(
                "S_MAX must be positive".into(),
            ));
        }
        Ok(Self { alpha, beta, s_max })
    }

    /// Uses the largest storage in `space` as `S_MAX`.
    pub fn for_space(
        alpha: f64,
        beta: f64,
        space: &ArchitectureSpace,
        cfg: &NetConfig,
    ) -> Result<Self, SearchError> {
        let s_max = netmodel::s_max(space, cfg)?;
        Self::new(alpha, beta, s_max)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn s_max(&self) -> u64 {
        self.s_max
    }

    pub fn fitness(&self, quality: f64, storage: u64) -> f64 {
        fitness(quality, storage, self)
    }

    /// Normalized storage objective `1 − s/S_MAX` (negative past S_MAX).
    pub fn storage_score(&self, storage: u64) -> f64 {
        1.0 - storage as f64 / self.s_max as f64
    }
}

pub fn fitness(quality: f64, storage: u64, cf: &CostFunction) -> f64 {
    cf.alpha * quality + cf.beta * cf.storage_score(storage)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Constraints {
    /// Largest admissible storage in bytes.
    pub s_const: Option<u64>,
    /// Smallest admissible quality, on `metric`.
    pub q_const: Option<f64>,
    pub metric: QualityMetric,
}

impl Constraints {
    pub fn validate(&self) -> Result<(), SearchError> {
        if let Some(q) = self.q_const {
            if !(0.0..=1.0).contains(&q) {
                return Err(SearchError::InvalidSettings(alloc::format!(
                    "q_const must lie in [0, 1], got {q}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Selector {
    Roulette,
    Tournament,
    Nsga2,
    Spea2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    Exhaustive,
    Random { fraction: f64 },
    Genetic(Selector),
}

impl Engine {
    pub const ALL_GENETIC: [Engine; 4] = [
        Engine::Genetic(Selector::Roulette),
        Engine::Genetic(Selector::Tournament),
        Engine::Genetic(Selector::Nsga2),
        Engine::Genetic(Selector::Spea2),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Engine::Exhaustive => "exhaustive",
            Engine::Random { .. } => "random",
            Engine::Genetic(Selector::Roulette) => "roulette",
            Engine::Genetic(Selector::Tournament) => "tournament",
            Engine::Genetic(Selector::Nsga2) => "nsga2",
            Engine::Genetic(Selector::Spea2) => "spea2",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "exhaustive" => Engine::Exhaustive,
            "random" => Engine::Random {
                fraction: DEFAULT_RANDOM_FRACTION,
            },
            "roulette" => Engine::Genetic(Selector::Roulette),
            "tournament" => Engine::Genetic(Selector::Tournament),
            "nsga2" | "nsga-ii" => Engine::Genetic(Selector::Nsga2),
            "spea2" | "spea-2" => Engine::Genetic(Selector::Spea2),
            other => {
                return Err(SearchError::InvalidSettings(alloc::format!(
                    "unknown engine {other:?}"
                )))
            }
        })
    }
}

pub const DEFAULT_RANDOM_FRACTION: f64 = 0.10;

/// How NSGA-II and SPEA-2 see individuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GaMode {
    /// Every selector works on the scalar φ.
    Scalarized,
    /// NSGA-II and SPEA-2 work on `(Q, 1 − S/S_MAX)`; roulette and
    /// tournament still use φ.
    #[default]
    MultiObjective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaSettings {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub seed: u64,
    pub mode: GaMode,
    /// Evaluate each distinct architecture at most once per run.
    pub cache: bool,
}

impl Default for GaSettings {
    fn default() -> Self {
        Self {
            population_size: 30,
            generations: 5,
            crossover_prob: 0.4,
            mutation_prob: 0.11,
            seed: 0,
            mode: GaMode::default(),
            cache: true,
        }
    }
}

impl GaSettings {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.population_size < 2 {
            return Err(SearchError::InvalidSettings(
                "population_size must be at least 2".into(),
            ));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(SearchError::InvalidSettings(alloc::format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }
}

/// One evaluated architecture.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub arch: ArchParams,
    pub quality: f64,
    pub storage_bytes: u64,
    pub flops: u64,
    pub fitness: f64,
    /// Generation in which the architecture was first evaluated.
    pub generation: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationLog {
    pub generation: usize,
    pub new_evaluations: usize,
    pub unique_total: usize,
    /// Individuals in this generation's batch that scored φ = 0 without
    /// evaluation (invalid genome or outside the space).
    pub discarded: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub engine: &'static str,
    /// Every distinct architecture evaluated, best φ first (ties: smaller
    /// storage, then canonical order).
    pub evaluated: Vec<Evaluated>,
    /// Non-dominated subset of `evaluated` under (higher q, lower s),
    /// descending quality.
    pub pareto: Vec<Evaluated>,
    /// Pareto members meeting the quality constraint.
    pub omega: Vec<Evaluated>,
    pub unique_eval_calls: usize,
    /// Backend calls issued; exceeds `unique_eval_calls` only with the
    /// cache disabled.
    pub backend_calls: usize,
    /// Evaluated architectures whose storage exceeds S_MAX (φ storage term
    /// negative).
    pub over_s_max: usize,
    pub log: Vec<GenerationLog>,
}

impl SearchResult {
    pub fn best(&self) -> Option<&Evaluated> {
        self.evaluated.first()
    }
}

/// Orders by descending φ, then ascending storage, then canonical order.
fn rank_order(a: &Evaluated, b: &Evaluated) -> core::cmp::Ordering {
    b.fitness
        .total_cmp(&a.fitness)
        .then(a.storage_bytes.cmp(&b.storage_bytes))
        .then(a.arch.cmp(&b.arch))
}

/// Non-dominated subset under (higher quality, lower storage), sorted by
/// descending quality (ties: lower storage, then canonical order).
pub fn pareto_front(evaluated: &[Evaluated]) -> Vec<Evaluated> {
    let points: Vec<[f64; 2]> = evaluated
        .iter()
        .map(|e| pareto::qs_point(e.quality, e.storage_bytes as f64))
        .collect();
    let mut front: Vec<Evaluated> = match pareto::nondominated_sort(&points).into_iter().next() {
        Some(first) => first.into_iter().map(|i| evaluated[i].clone()).collect(),
        None => Vec::new(),
    };
    front.sort_by(|a, b| {
        b.quality
            .total_cmp(&a.quality)
            .then(a.storage_bytes.cmp(&b.storage_bytes))
            .then(a.arch.cmp(&b.arch))
    });
    front
}

/// Shared evaluation state: analytical costs, quality memo and the record
/// of every distinct architecture evaluated.
pub(crate) struct Context<'a, E> {
    space: &'a ArchitectureSpace,
    cfg: NetConfig,
    cf: CostFunction,
    metric: QualityMetric,
    evaluator: E,
    use_cache: bool,
    costs: BTreeMap<ArchParams, (u64, u64)>,
    quality: BTreeMap<ArchParams, f64>,
    evaluated: Vec<Evaluated>,
    backend_calls: usize,
    log: Vec<GenerationLog>,
}

impl<'a, E: Evaluator> Context<'a, E> {
    pub(crate) fn new(
        space: &'a ArchitectureSpace,
        cfg: &NetConfig,
        cf: CostFunction,
        metric: QualityMetric,
        evaluator: E,
        use_cache: bool,
    ) -> Result<Self, SearchError> {
        cfg.validate()?;
        Ok(Self {
            space,
            cfg: *cfg,
            cf,
            metric,
            evaluator,
            use_cache,
            costs: BTreeMap::new(),
            quality: BTreeMap::new(),
            evaluated: Vec::new(),
            backend_calls: 0,
            log: Vec::new(),
        })
    }

    pub(crate) fn in_space(&self, arch: &ArchParams) -> bool {
        self.space.contains(arch)
    }

    pub(crate) fn cost_fn(&self) -> &CostFunction {
        &self.cf
    }

    fn costs(&mut self, arch: &ArchParams) -> (u64, u64) {
        if let Some(c) = self.costs.get(arch) {
            return *c;
        }
        // config validated in new()
        let net = netmodel::build(arch, &self.cfg).expect("validated config");
        let c = (net.storage_bytes, net.flops);
        self.costs.insert(*arch, c);
        c
    }

    /// Evaluates `archs` (all in-space) and returns `(quality, storage)` in
    /// input order.
    pub(crate) fn evaluate(
        &mut self,
        archs: &[ArchParams],
        generation: usize,
    ) -> Result<Vec<(f64, u64)>, SearchError> {
        let mut pending: Vec<ArchParams> = Vec::new();
        for a in archs {
            let known = self.use_cache && self.quality.contains_key(a);
            if !known && !(self.use_cache && pending.contains(a)) {
                pending.push(*a);
            }
        }

        let results = if pending.is_empty() {
            Vec::new()
        } else {
            self.evaluator.evaluate_batch(&pending)
        };
        self.backend_calls += pending.len();

        let mut failure = None;
        for (arch, res) in pending.iter().zip(results) {
            match res {
                Ok(report) => {
                    let q = report
                        .select(self.metric)
                        .ok_or(SearchError::MissingMetric { arch: *arch });
                    let q = match q {
                        Ok(q) => q,
                        Err(e) => {
                            failure.get_or_insert(e);
                            continue;
                        }
                    };
                    if !self.quality.contains_key(arch) {
                        let (storage, flops) = self.costs(arch);
                        self.evaluated.push(Evaluated {
                            arch: *arch,
                            quality: q,
                            storage_bytes: storage,
                            flops,
                            fitness: self.cf.fitness(q, storage),
                            generation,
                        });
                    }
                    self.quality.insert(*arch, q);
                }
                Err(error) => {
                    failure.get_or_insert(SearchError::Evaluation {
                        error,
                        partial: Vec::new(),
                    });
                }
            }
        }
        if let Some(mut e) = failure {
            if let SearchError::Evaluation { partial, .. } = &mut e {
                *partial = self.evaluated.clone();
            }
            return Err(e);
        }

        Ok(archs
            .iter()
            .map(|a| {
                let q = self.quality[a];
                (q, self.costs(a).0)
            })
            .collect())
    }

    pub(crate) fn unique(&self) -> usize {
        self.evaluated.len()
    }

    pub(crate) fn push_log(&mut self, entry: GenerationLog) {
        self.log.push(entry);
    }

    pub(crate) fn finish(self, engine: &'static str, q_const: Option<f64>) -> SearchResult {
        let mut evaluated = self.evaluated;
        evaluated.sort_by(rank_order);
        let pareto = pareto_front(&evaluated);
        let omega = pareto
            .iter()
            .filter(|e| q_const.is_none_or(|q| e.quality >= q))
            .cloned()
            .collect();
        let over_s_max = evaluated
            .iter()
            .filter(|e| e.storage_bytes > self.cf.s_max)
            .count();
        SearchResult {
            engine,
            unique_eval_calls: evaluated.len(),
            backend_calls: self.backend_calls,
            over_s_max,
            evaluated,
            pareto,
            omega,
            log: self.log,
        }
    }
}

fn summary_log(generation: usize, new: usize, unique: usize, fitness: &[f64]) -> GenerationLog {
    let best = fitness.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = if fitness.is_empty() {
        0.0
    } else {
        fitness.iter().sum::<f64>() / fitness.len() as f64
    };
    GenerationLog {
        generation,
        new_evaluations: new,
        unique_total: unique,
        discarded: 0,
        best_fitness: best,
        mean_fitness: mean,
    }
}

/// Evaluates every member of `space` exactly once.
pub fn exhaustive<E: Evaluator>(
    space: &ArchitectureSpace,
    cfg: &NetConfig,
    cf: CostFunction,
    constraints: &Constraints,
    evaluator: E,
) -> Result<SearchResult, SearchError> {
    let mut ctx = Context::new(space, cfg, cf, constraints.metric, evaluator, true)?;
    let out = ctx.evaluate(space.members(), 0)?;
    let phi: Vec<f64> = out.iter().map(|&(q, s)| cf.fitness(q, s)).collect();
    let unique = ctx.unique();
    ctx.push_log(summary_log(0, unique, unique, &phi));
    Ok(ctx.finish(Engine::Exhaustive.name(), constraints.q_const))
}

/// Evaluates a uniform sample without replacement of
/// `ceil(fraction · |space|)` members.
pub fn random_search<E: Evaluator>(
    space: &ArchitectureSpace,
    cfg: &NetConfig,
    cf: CostFunction,
    constraints: &Constraints,
    fraction: f64,
    seed: u64,
    evaluator: E,
) -> Result<SearchResult, SearchError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(SearchError::InvalidSettings(alloc::format!(
            "random fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let n = random_sample_size(space.len(), fraction);
    let mut members = space.members().to_vec();
    let mut rng = SearchRng::new(seed);
    rng.shuffle(&mut members);
    members.truncate(n);

    let mut ctx = Context::new(space, cfg, cf, constraints.metric, evaluator, true)?;
    let out = ctx.evaluate(&members, 0)?;
    let phi: Vec<f64> = out.iter().map(|&(q, s)| cf.fitness(q, s)).collect();
    let unique = ctx.unique();
    ctx.push_log(summary_log(0, unique, unique, &phi));
    Ok(ctx.finish("random", constraints.q_const))
}

/// `ceil(fraction · n)`, clamped to `n`, computed without float drift for
/// fractions that are exact decimals.
pub fn random_sample_size(n: usize, fraction: f64) -> usize {
    let raw = fraction * n as f64;
    let rounded = libm::round(raw);
    let k = if libm::fabs(raw - rounded) < 1e-9 {
        rounded
    } else {
        libm::ceil(raw)
    };
    (k as usize).min(n)
}

/// Storage-constraint prefilter: keeps members with storage ≤ `s_const`.
pub fn filter_by_storage(
    space: &ArchitectureSpace,
    cfg: &NetConfig,
    s_const: Option<u64>,
) -> Result<ArchitectureSpace, SearchError> {
    cfg.validate()?;
    Ok(match s_const {
        None => space.clone(),
        Some(limit) => space.filter(|a| {
            netmodel::build(a, cfg)
                .map(|n| n.storage_bytes <= limit)
                .unwrap_or(false)
        }),
    })
}

/// Full weighted search: storage prefilter, exploration, quality
/// post-filter.
pub fn weighted_search<E: Evaluator>(
    space: &ArchitectureSpace,
    cfg: &NetConfig,
    cf: CostFunction,
    constraints: &Constraints,
    engine: Engine,
    settings: &GaSettings,
    evaluator: E,
) -> Result<SearchResult, SearchError> {
    constraints.validate()?;
    settings.validate()?;
    let survivors = filter_by_storage(space, cfg, constraints.s_const)?;
    if survivors.is_empty() {
        return Err(SearchError::EmptySpace);
    }
    match engine {
        Engine::Exhaustive => exhaustive(&survivors, cfg, cf, constraints, evaluator),
        Engine::Random { fraction } => random_search(
            &survivors,
            cfg,
            cf,
            constraints,
            fraction,
            settings.seed,
            evaluator,
        ),
        Engine::Genetic(selector) => ga_search(
            &survivors,
            cfg,
            cf,
            constraints,
            settings,
            selector,
            evaluator,
        ),
    }
}
