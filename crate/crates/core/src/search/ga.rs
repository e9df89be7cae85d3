//! Genetic exploration over 9-bit genomes.
//!
//! One generation: pick parents with the selector, pair them up, apply
//! single-point crossover (probability `crossover_prob`, cut uniform in
//! 1..9) and single-bit-flip mutation (probability `mutation_prob` per
//! child), score the children, then reduce parents + children back to the
//! population size with the selector's survivor rule. The best-φ
//! individual always survives.
//!
//! Every random draw comes from one seeded stream and none depends on how
//! the evaluator schedules its work, so a run is fully determined by
//! `(space, settings, evaluator results)`.

use alloc::vec::Vec;

use super::pareto;
use super::{
    Constraints, Context, CostFunction, GaMode, GaSettings, GenerationLog, SearchError,
    SearchResult, Selector,
};
use crate::archspace::{ArchParams, ArchitectureSpace, Chromosome, GENOME_BITS, GENOME_COUNT};
use crate::evaluate::Evaluator;
use crate::netmodel::NetConfig;
use crate::rng::SearchRng;

/// Re-draws allowed for a pair whose children duplicate existing offspring.
const MAX_REDRAWS: usize = 8;
const TOURNAMENT_SIZE: usize = 2;

#[derive(Debug, Clone, Copy)]
struct Individual {
    genome: Chromosome,
    phi: f64,
    /// `(quality, 1 − S/S_MAX)`; `(0, 0)` for discarded genomes.
    objectives: [f64; 2],
}

pub fn ga_search<E: Evaluator>(
    space: &ArchitectureSpace,
    cfg: &NetConfig,
    cf: CostFunction,
    constraints: &Constraints,
    settings: &GaSettings,
    selector: Selector,
    evaluator: E,
) -> Result<SearchResult, SearchError> {
    settings.validate()?;
    constraints.validate()?;
    if space.is_empty() {
        return Err(SearchError::EmptySpace);
    }
    let size = settings.population_size;
    let mut ctx = Context::new(
        space,
        cfg,
        cf,
        constraints.metric,
        evaluator,
        settings.cache,
    )?;
    let mut rng = SearchRng::new(settings.seed);

    let genomes: Vec<Chromosome> = (0..size)
        .map(|_| Chromosome::from_bits(rng.below(usize::from(GENOME_COUNT)) as u16).unwrap())
        .collect();
    let mut population = score(&mut ctx, &genomes, 0)?;

    for generation in 1..=settings.generations {
        let parents = select_parents(selector, settings.mode, &population, size, &mut rng);
        let children = vary(&population, &parents, settings, size, &mut rng);
        let offspring = score(&mut ctx, &children, generation)?;

        let mut combined = population;
        combined.extend(offspring);
        let mut keep = survivors(selector, settings.mode, &combined, size);
        keep_elite(&mut keep, &combined);
        population = keep.into_iter().map(|i| combined[i]).collect();

        if let Some(last) = ctx.log.last_mut() {
            if last.generation == generation {
                let phi: Vec<f64> = population.iter().map(|p| p.phi).collect();
                last.best_fitness = phi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                last.mean_fitness = phi.iter().sum::<f64>() / phi.len() as f64;
            }
        }
    }

    let engine = match selector {
        Selector::Roulette => "roulette",
        Selector::Tournament => "tournament",
        Selector::Nsga2 => "nsga2",
        Selector::Spea2 => "spea2",
    };
    Ok(ctx.finish(engine, constraints.q_const))
}

/// Scores a batch of genomes; in-space architectures go to the evaluator in
/// one batch, the rest get φ = 0.
fn score<E: Evaluator>(
    ctx: &mut Context<'_, E>,
    genomes: &[Chromosome],
    generation: usize,
) -> Result<Vec<Individual>, SearchError> {
    let decoded: Vec<Option<ArchParams>> = genomes
        .iter()
        .map(|g| g.decode().filter(|a| ctx.in_space(a)))
        .collect();
    let archs: Vec<ArchParams> = decoded.iter().flatten().copied().collect();
    let before = ctx.unique();
    let results = ctx.evaluate(&archs, generation)?;
    let cf = *ctx.cost_fn();

    let mut it = results.into_iter();
    let individuals: Vec<Individual> = genomes
        .iter()
        .zip(&decoded)
        .map(|(g, d)| match d {
            Some(_) => {
                let (q, s) = it.next().expect("one result per in-space genome");
                Individual {
                    genome: *g,
                    phi: cf.fitness(q, s),
                    objectives: [q, cf.storage_score(s)],
                }
            }
            None => Individual {
                genome: *g,
                phi: 0.0,
                objectives: [0.0, 0.0],
            },
        })
        .collect();

    let phi: Vec<f64> = individuals.iter().map(|p| p.phi).collect();
    ctx.push_log(GenerationLog {
        generation,
        new_evaluations: ctx.unique() - before,
        unique_total: ctx.unique(),
        discarded: genomes.len() - archs.len(),
        best_fitness: phi.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean_fitness: phi.iter().sum::<f64>() / phi.len().max(1) as f64,
    });
    Ok(individuals)
}

fn scalar(pop: &[Individual]) -> Vec<[f64; 1]> {
    pop.iter().map(|p| [p.phi]).collect()
}

fn pairs(pop: &[Individual]) -> Vec<[f64; 2]> {
    pop.iter().map(|p| p.objectives).collect()
}

fn select_parents(
    selector: Selector,
    mode: GaMode,
    pop: &[Individual],
    count: usize,
    rng: &mut SearchRng,
) -> Vec<usize> {
    match (selector, mode) {
        (Selector::Roulette, _) => roulette(pop, count, rng),
        (Selector::Tournament, _) => {
            tournament(count, rng, pop.len(), |a, b| pop[a].phi >= pop[b].phi)
        }
        (Selector::Nsga2, GaMode::MultiObjective) => nsga2_parents(&pairs(pop), count, rng),
        (Selector::Nsga2, GaMode::Scalarized) => nsga2_parents(&scalar(pop), count, rng),
        (Selector::Spea2, GaMode::MultiObjective) => spea2_parents(&pairs(pop), count, rng),
        (Selector::Spea2, GaMode::Scalarized) => spea2_parents(&scalar(pop), count, rng),
    }
}

/// Fitness-proportional draw using a cumulative table and binary search.
/// Negative φ values are shifted so the minimum weight is zero.
fn roulette(pop: &[Individual], count: usize, rng: &mut SearchRng) -> Vec<usize> {
    let shift = pop.iter().map(|p| p.phi).fold(0.0f64, f64::min);
    let mut cumulative = Vec::with_capacity(pop.len());
    let mut total = 0.0;
    for p in pop {
        total += p.phi - shift;
        cumulative.push(total);
    }
    (0..count)
        .map(|_| {
            if total <= 0.0 {
                return rng.below(pop.len());
            }
            let target = rng.unit() * total;
            cumulative
                .partition_point(|&c| c <= target)
                .min(pop.len() - 1)
        })
        .collect()
}

/// `better(a, b)` says whether `a` wins against `b`; the first entrant wins
/// ties.
fn tournament(
    count: usize,
    rng: &mut SearchRng,
    n: usize,
    better: impl Fn(usize, usize) -> bool,
) -> Vec<usize> {
    (0..count)
        .map(|_| {
            let mut winner = rng.below(n);
            for _ in 1..TOURNAMENT_SIZE {
                let challenger = rng.below(n);
                if !better(winner, challenger) {
                    winner = challenger;
                }
            }
            winner
        })
        .collect()
}

fn nsga2_parents<const N: usize>(
    points: &[[f64; N]],
    count: usize,
    rng: &mut SearchRng,
) -> Vec<usize> {
    let (rank, crowd) = pareto::rank_and_crowding(points);
    tournament(count, rng, points.len(), |a, b| {
        rank[a] < rank[b] || (rank[a] == rank[b] && crowd[a] >= crowd[b])
    })
}

fn spea2_parents<const N: usize>(
    points: &[[f64; N]],
    count: usize,
    rng: &mut SearchRng,
) -> Vec<usize> {
    let fit = pareto::spea2_fitness(points);
    tournament(count, rng, points.len(), |a, b| fit[a] <= fit[b])
}

fn mutate(c: Chromosome, settings: &GaSettings, rng: &mut SearchRng) -> Chromosome {
    if rng.chance(settings.mutation_prob) {
        c.flip(rng.below(GENOME_BITS))
    } else {
        c
    }
}

fn vary(
    pop: &[Individual],
    parents: &[usize],
    settings: &GaSettings,
    count: usize,
    rng: &mut SearchRng,
) -> Vec<Chromosome> {
    let mut children: Vec<Chromosome> = Vec::with_capacity(count);
    let mut cursor = 0;
    while children.len() < count {
        let a = pop[parents[cursor % parents.len()]].genome;
        let b = pop[parents[(cursor + 1) % parents.len()]].genome;
        cursor += 2;

        let mut attempt = 0;
        let (c1, c2) = loop {
            let (c1, c2) = if rng.chance(settings.crossover_prob) {
                a.crossover(&b, 1 + rng.below(GENOME_BITS - 1))
            } else {
                (a, b)
            };
            let c1 = mutate(c1, settings, rng);
            let c2 = mutate(c2, settings, rng);
            let fresh = c1 != c2 && !children.contains(&c1) && !children.contains(&c2);
            if fresh || attempt == MAX_REDRAWS {
                break (c1, c2);
            }
            attempt += 1;
        };
        children.push(c1);
        if children.len() < count {
            children.push(c2);
        }
    }
    children
}

fn survivors(selector: Selector, mode: GaMode, combined: &[Individual], size: usize) -> Vec<usize> {
    match (selector, mode) {
        (Selector::Roulette | Selector::Tournament, _) => {
            let mut order: Vec<usize> = (0..combined.len()).collect();
            order.sort_by(|&a, &b| combined[b].phi.total_cmp(&combined[a].phi).then(a.cmp(&b)));
            order.truncate(size);
            order.sort_unstable();
            order
        }
        (Selector::Nsga2, GaMode::MultiObjective) => pareto::nsga2_select(&pairs(combined), size),
        (Selector::Nsga2, GaMode::Scalarized) => pareto::nsga2_select(&scalar(combined), size),
        (Selector::Spea2, GaMode::MultiObjective) => pareto::spea2_select(&pairs(combined), size),
        (Selector::Spea2, GaMode::Scalarized) => pareto::spea2_select(&scalar(combined), size),
    }
}

/// Makes sure the first best-φ individual of `combined` is kept, replacing
/// the weakest survivor if needed.
fn keep_elite(keep: &mut [usize], combined: &[Individual]) {
    let Some(best) = (0..combined.len()).reduce(|a, b| {
        if combined[b].phi > combined[a].phi {
            b
        } else {
            a
        }
    }) else {
        return;
    };
    if keep.contains(&best) || keep.is_empty() {
        return;
    }
    let weakest = (0..keep.len())
        .reduce(|a, b| {
            if combined[keep[b]].phi <= combined[keep[a]].phi {
                b
            } else {
                a
            }
        })
        .expect("non-empty");
    keep[weakest] = best;
    keep.sort_unstable();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{CountingEvaluator, SurrogateEvaluator};
    use crate::search::Engine;

    fn setup() -> (ArchitectureSpace, NetConfig, CostFunction) {
        let space = ArchitectureSpace::enumerate();
        let cfg = NetConfig::default();
        let cf = CostFunction::for_space(0.5, 0.5, &space, &cfg).unwrap();
        (space, cfg, cf)
    }

    fn run(selector: Selector, settings: GaSettings) -> SearchResult {
        let (space, cfg, cf) = setup();
        ga_search(
            &space,
            &cfg,
            cf,
            &Constraints::default(),
            &settings,
            selector,
            SurrogateEvaluator::new(cfg, 11),
        )
        .unwrap()
    }

    #[test]
    fn deterministic_per_seed() {
        for e in Engine::ALL_GENETIC {
            let Engine::Genetic(sel) = e else {
                unreachable!()
            };
            let a = run(sel, GaSettings::with_seed(5));
            let b = run(sel, GaSettings::with_seed(5));
            assert_eq!(a, b, "{e}");
        }
    }

    #[test]
    fn call_budget_bound() {
        for sel in [
            Selector::Roulette,
            Selector::Tournament,
            Selector::Nsga2,
            Selector::Spea2,
        ] {
            for seed in 0..5 {
                let r = run(sel, GaSettings::with_seed(seed));
                assert!(r.unique_eval_calls <= 30 * 6);
                assert!(r.unique_eval_calls < 320);
                assert_eq!(r.log.len(), 6);
            }
        }
    }

    #[test]
    fn cache_never_increases_calls() {
        let (space, cfg, cf) = setup();
        for sel in [Selector::Roulette, Selector::Nsga2] {
            let mut calls = [0usize; 2];
            let mut results = Vec::new();
            for (slot, cache) in [true, false].into_iter().enumerate() {
                let settings = GaSettings {
                    cache,
                    ..GaSettings::with_seed(2)
                };
                let mut counter = CountingEvaluator::new(SurrogateEvaluator::new(cfg, 3));
                let r = ga_search(
                    &space,
                    &cfg,
                    cf,
                    &Constraints::default(),
                    &settings,
                    sel,
                    &mut counter,
                )
                .unwrap();
                calls[slot] = counter.calls;
                results.push(r);
            }
            assert!(calls[0] <= calls[1]);
            assert_eq!(calls[0], results[0].unique_eval_calls);
            assert_eq!(results[0].evaluated, results[1].evaluated);
        }
    }

    #[test]
    fn scalarized_mode_runs() {
        let settings = GaSettings {
            mode: GaMode::Scalarized,
            ..GaSettings::with_seed(1)
        };
        for sel in [Selector::Nsga2, Selector::Spea2] {
            let r = run(sel, settings);
            assert!(r.unique_eval_calls > 0);
        }
    }

    #[test]
    fn tiny_population_is_rejected() {
        let (space, cfg, cf) = setup();
        let settings = GaSettings {
            population_size: 1,
            ..GaSettings::default()
        };
        assert!(ga_search(
            &space,
            &cfg,
            cf,
            &Constraints::default(),
            &settings,
            Selector::Roulette,
            SurrogateEvaluator::new(cfg, 1)
        )
        .is_err());
    }

    #[test]
    fn roulette_prefers_heavy_weights() {
        let ind = |phi| Individual {
            genome: Chromosome::from_bits(0).unwrap(),
            phi,
            objectives: [0.0, 0.0],
        };
        let pop = [ind(0.0), ind(1.0), ind(0.0)];
        let mut rng = SearchRng::new(1);
        assert!(roulette(&pop, 50, &mut rng).iter().all(|&i| i == 1));
        let pop = [ind(-1.0), ind(-1.0)];
        assert_eq!(roulette(&pop, 10, &mut rng).len(), 10);
    }
}
