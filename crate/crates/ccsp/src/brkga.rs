//! Generic biased random-key genetic algorithm: population management,
//! elite/mutant partition, biased crossover, and a generation loop over a
//! pluggable decoder.
//!
//! Runs are fully deterministic under a fixed seed: chromosomes are drawn
//! sequentially from one seeded generator and decoding is pure, so parallel
//! evaluation cannot change results.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::decoder::DecodeError;

/// A vector of random keys in [0, 1), one per demand vertex.
pub type Chromosome = Vec<f64>;

#[derive(Debug, Error)]
pub enum BrkgaError {
    #[error("empty problem: decoder wants zero keys")]
    EmptyProblem,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

/// Maps chromosomes to solutions; the only problem-specific component.
/// Implementations must be pure: identical keys give identical outputs.
pub trait Decoder: Sync {
    type Output: Clone + Send;

    /// Number of keys per chromosome.
    fn key_count(&self) -> usize;

    /// Decode keys into (fitness, solution); lower fitness is better.
    fn decode(&self, keys: &[f64]) -> Result<(f64, Self::Output), DecodeError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrkgaParams {
    pub population_size: usize,
    pub elite_fraction: f64,
    pub mutant_fraction: f64,
    /// Per-allele probability of inheriting from the elite parent.
    pub crossover_elite_probability: f64,
    pub seed: u64,
}

impl Default for BrkgaParams {
    fn default() -> Self {
        Self {
            population_size: 1000,
            elite_fraction: 0.40,
            mutant_fraction: 0.20,
            crossover_elite_probability: 0.70,
            seed: 0,
        }
    }
}

impl BrkgaParams {
    pub fn validate(&self) -> Result<(), BrkgaError> {
        let fail = |msg: String| Err(BrkgaError::InvalidParams(msg));
        if self.population_size < 2 {
            return fail("population size must be at least 2".into());
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction < 1.0) {
            return fail(format!("elite fraction {} outside (0,1)", self.elite_fraction));
        }
        if !(self.mutant_fraction > 0.0 && self.mutant_fraction < 1.0) {
            return fail(format!("mutant fraction {} outside (0,1)", self.mutant_fraction));
        }
        if self.elite_fraction + self.mutant_fraction >= 1.0 {
            return fail("elite and mutant fractions must sum below 1".into());
        }
        if self.elite_count() < 1 {
            return fail("elite fraction yields an empty elite set".into());
        }
        if !(self.crossover_elite_probability > 0.5 && self.crossover_elite_probability < 1.0) {
            return fail(format!(
                "crossover elite probability {} outside (0.5, 1)",
                self.crossover_elite_probability
            ));
        }
        Ok(())
    }

    pub fn elite_count(&self) -> usize {
        (self.elite_fraction * self.population_size as f64).floor() as usize
    }

    pub fn mutant_count(&self) -> usize {
        (self.mutant_fraction * self.population_size as f64).floor() as usize
    }
}

/// Stopping rules; any subset may be set, the first to trigger wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    pub max_generations: Option<u32>,
    pub max_seconds: Option<f64>,
    pub stagnation_generations: Option<u32>,
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            max_generations: Some(500),
            max_seconds: Some(60.0),
            stagnation_generations: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxGenerations,
    TimeLimit,
    Stagnation,
}

#[derive(Debug, Clone)]
pub struct Individual<S> {
    pub keys: Chromosome,
    pub fitness: f64,
    pub output: S,
}

/// Individuals sorted ascending by fitness; ties break on the key vector so
/// the order is total and deterministic.
#[derive(Debug, Clone)]
pub struct Population<S> {
    pub individuals: Vec<Individual<S>>,
}

impl<S> Population<S> {
    pub fn best(&self) -> &Individual<S> {
        &self.individuals[0]
    }

    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    /// The first `count` individuals (the elite set of this generation).
    pub fn elites(&self, count: usize) -> &[Individual<S>] {
        &self.individuals[..count.min(self.individuals.len())]
    }

    fn sort(&mut self) {
        self.individuals.sort_by(|a, b| {
            a.fitness
                .partial_cmp(&b.fitness)
                .unwrap()
                .then_with(|| a.keys.partial_cmp(&b.keys).unwrap())
        });
    }
}

/// Composition of one generation transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationStats {
    pub elites_preserved: usize,
    pub mutants_injected: usize,
    pub offspring_created: usize,
}

fn random_chromosome(rng: &mut impl Rng, n: usize) -> Chromosome {
    (0..n).map(|_| rng.gen::<f64>()).collect()
}

fn decode_all<D: Decoder>(
    decoder: &D,
    chromosomes: Vec<Chromosome>,
) -> Result<Vec<Individual<D::Output>>, BrkgaError> {
    chromosomes
        .into_par_iter()
        .map(|keys| {
            let (fitness, output) = decoder.decode(&keys)?;
            Ok(Individual {
                keys,
                fitness,
                output,
            })
        })
        .collect()
}

/// Build and decode the initial population from the seeded generator.
pub fn initialize<D: Decoder>(
    params: &BrkgaParams,
    decoder: &D,
) -> Result<Population<D::Output>, BrkgaError> {
    params.validate()?;
    let n = decoder.key_count();
    if n == 0 {
        return Err(BrkgaError::EmptyProblem);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    initialize_with_rng(params, decoder, &mut rng)
}

fn initialize_with_rng<D: Decoder>(
    params: &BrkgaParams,
    decoder: &D,
    rng: &mut impl Rng,
) -> Result<Population<D::Output>, BrkgaError> {
    let n = decoder.key_count();
    let chromosomes: Vec<Chromosome> = (0..params.population_size)
        .map(|_| random_chromosome(rng, n))
        .collect();
    let mut population = Population {
        individuals: decode_all(decoder, chromosomes)?,
    };
    population.sort();
    Ok(population)
}

/// One generation transition: preserve the elite set, inject fresh mutants,
/// fill the rest with biased crossover of one elite and one non-elite parent
/// (each allele comes from the elite parent with the configured probability).
pub fn evolve<D: Decoder>(
    population: &Population<D::Output>,
    params: &BrkgaParams,
    decoder: &D,
    rng: &mut impl Rng,
) -> Result<(Population<D::Output>, GenerationStats), BrkgaError> {
    let pop_size = population.len();
    let n = decoder.key_count();
    let elite_count = params.elite_count();
    let mutant_count = params.mutant_count();
    let offspring_count = pop_size - elite_count - mutant_count;

    let mut fresh: Vec<Chromosome> = Vec::with_capacity(mutant_count + offspring_count);
    for _ in 0..mutant_count {
        fresh.push(random_chromosome(rng, n));
    }
    for _ in 0..offspring_count {
        let elite = &population.individuals[rng.gen_range(0..elite_count)].keys;
        let other = &population.individuals[rng.gen_range(elite_count..pop_size)].keys;
        let child: Chromosome = (0..n)
            .map(|i| {
                if rng.gen::<f64>() < params.crossover_elite_probability {
                    elite[i]
                } else {
                    other[i]
                }
            })
            .collect();
        fresh.push(child);
    }

    let mut next = Vec::with_capacity(pop_size);
    next.extend(population.individuals[..elite_count].iter().cloned());
    next.extend(decode_all(decoder, fresh)?);
    let mut next = Population { individuals: next };
    next.sort();
    Ok((
        next,
        GenerationStats {
            elites_preserved: elite_count,
            mutants_injected: mutant_count,
            offspring_created: offspring_count,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub generations: u32,
    /// Best fitness after each generation, the initial population included.
    pub best_history: Vec<f64>,
    pub stop_reason: StopReason,
}

/// Full generation loop. The observer sees every generation (the initial one
/// as generation 0) and is where callers harvest elite routes.
pub fn run<D: Decoder>(
    params: &BrkgaParams,
    stop: &StopCriteria,
    decoder: &D,
    mut observer: impl FnMut(u32, &Population<D::Output>),
) -> Result<(Population<D::Output>, RunSummary), BrkgaError> {
    params.validate()?;
    if decoder.key_count() == 0 {
        return Err(BrkgaError::EmptyProblem);
    }
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut population = initialize_with_rng(params, decoder, &mut rng)?;
    let mut history = vec![population.best().fitness];
    observer(0, &population);

    let mut generation = 0u32;
    let mut stagnant = 0u32;
    let reason = loop {
        if stop
            .max_generations
            .is_some_and(|max| generation >= max)
        {
            break StopReason::MaxGenerations;
        }
        if stop
            .max_seconds
            .is_some_and(|max| start.elapsed().as_secs_f64() >= max)
        {
            break StopReason::TimeLimit;
        }
        if stop
            .stagnation_generations
            .is_some_and(|max| stagnant >= max)
        {
            break StopReason::Stagnation;
        }

        let previous_best = population.best().fitness;
        let (next, _) = evolve(&population, params, decoder, &mut rng)?;
        population = next;
        generation += 1;
        let best = population.best().fitness;
        if best < previous_best {
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        history.push(best);
        observer(generation, &population);
    };

    Ok((
        population,
        RunSummary {
            generations: generation,
            best_history: history,
            stop_reason: reason,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::mock::StepRng;

    /// Toy decoder: fitness is the sum of keys, so the optimum drives every
    /// key toward zero.
    struct KeySum {
        n: usize,
    }

    impl Decoder for KeySum {
        type Output = ();

        fn key_count(&self) -> usize {
            self.n
        }

        fn decode(&self, keys: &[f64]) -> Result<(f64, ()), DecodeError> {
            Ok((keys.iter().sum(), ()))
        }
    }

    fn small_params(seed: u64) -> BrkgaParams {
        BrkgaParams {
            population_size: 10,
            elite_fraction: 0.40,
            mutant_fraction: 0.20,
            crossover_elite_probability: 0.70,
            seed,
        }
    }

    #[test]
    fn initialize_is_deterministic_under_seed() {
        let decoder = KeySum { n: 4 };
        let params = small_params(7);
        let a = initialize(&params, &decoder).unwrap();
        let b = initialize(&params, &decoder).unwrap();
        for (x, y) in a.individuals.iter().zip(&b.individuals) {
            assert_eq!(x.keys, y.keys);
            assert_eq!(x.fitness, y.fitness);
        }
    }

    #[test]
    fn initialize_shapes_and_ranges() {
        let decoder = KeySum { n: 4 };
        let pop = initialize(&small_params(1), &decoder).unwrap();
        assert_eq!(pop.len(), 10);
        for ind in &pop.individuals {
            assert_eq!(ind.keys.len(), 4);
            assert!(ind.keys.iter().all(|&k| (0.0..1.0).contains(&k)));
        }
        // Sorted ascending.
        for pair in pop.individuals.windows(2) {
            assert!(pair[0].fitness <= pair[1].fitness);
        }
    }

    #[test]
    fn initialize_rejects_empty_problem() {
        let decoder = KeySum { n: 0 };
        assert!(matches!(
            initialize(&small_params(1), &decoder),
            Err(BrkgaError::EmptyProblem)
        ));
    }

    #[test]
    fn params_validation_rejects_bad_fractions() {
        let mut p = small_params(0);
        p.elite_fraction = 0.7;
        p.mutant_fraction = 0.5;
        assert!(p.validate().is_err());
        let mut p = small_params(0);
        p.crossover_elite_probability = 0.5;
        assert!(p.validate().is_err());
        let mut p = small_params(0);
        p.population_size = 2;
        p.elite_fraction = 0.2; // floor(0.4) = 0 elites
        assert!(p.validate().is_err());
    }

    #[test]
    fn evolve_preserves_four_elites_and_injects_two_mutants() {
        let decoder = KeySum { n: 4 };
        let params = small_params(3);
        let pop = initialize(&params, &decoder).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let (next, stats) = evolve(&pop, &params, &decoder, &mut rng).unwrap();
        assert_eq!(stats.elites_preserved, 4);
        assert_eq!(stats.mutants_injected, 2);
        assert_eq!(stats.offspring_created, 4);
        assert_eq!(next.len(), 10);
        // Every parent elite survives key-for-key.
        for elite in pop.elites(4) {
            assert!(
                next.individuals.iter().any(|ind| ind.keys == elite.keys),
                "elite lost"
            );
        }
    }

    #[test]
    fn forced_rng_trace_clones_the_elite_parent() {
        // A zero-stepping RNG makes every crossover draw 0.0 < 0.7 and every
        // parent index the smallest, so each child equals the best parent.
        let decoder = KeySum { n: 4 };
        let params = small_params(5);
        let pop = initialize(&params, &decoder).unwrap();
        let best_keys = pop.best().keys.clone();
        let mut rng = StepRng::new(0, 0);
        let (next, stats) = evolve(&pop, &params, &decoder, &mut rng).unwrap();
        let clones = next
            .individuals
            .iter()
            .filter(|ind| ind.keys == best_keys)
            .count();
        // The preserved elite copy plus every offspring.
        assert_eq!(clones, 1 + stats.offspring_created);
        // Mutants drew all-zero keys from the stub generator.
        let zeros = next
            .individuals
            .iter()
            .filter(|ind| ind.keys.iter().all(|&k| k == 0.0))
            .count();
        assert_eq!(zeros, stats.mutants_injected);
    }

    #[test]
    fn run_history_is_monotone_and_deterministic() {
        let decoder = KeySum { n: 6 };
        let params = small_params(11);
        let stop = StopCriteria {
            max_generations: Some(30),
            max_seconds: None,
            stagnation_generations: None,
        };
        let (_, summary) = run(&params, &stop, &decoder, |_, _| {}).unwrap();
        assert_eq!(summary.generations, 30);
        assert_eq!(summary.best_history.len(), 31);
        for pair in summary.best_history.windows(2) {
            assert!(pair[1] <= pair[0], "best fitness regressed");
        }
        let (_, again) = run(&params, &stop, &decoder, |_, _| {}).unwrap();
        assert_eq!(summary.best_history, again.best_history);
    }

    #[test]
    fn zero_generations_returns_initial_best() {
        let decoder = KeySum { n: 4 };
        let params = small_params(2);
        let stop = StopCriteria {
            max_generations: Some(0),
            max_seconds: None,
            stagnation_generations: None,
        };
        let initial = initialize(&params, &decoder).unwrap();
        let (final_pop, summary) = run(&params, &stop, &decoder, |_, _| {}).unwrap();
        assert_eq!(summary.generations, 0);
        assert_eq!(summary.stop_reason, StopReason::MaxGenerations);
        assert_eq!(final_pop.best().keys, initial.best().keys);
    }

    #[test]
    fn stagnation_stop_triggers() {
        let decoder = KeySum { n: 1 };
        let params = small_params(4);
        let stop = StopCriteria {
            max_generations: Some(1000),
            max_seconds: None,
            stagnation_generations: Some(3),
        };
        let (_, summary) = run(&params, &stop, &decoder, |_, _| {}).unwrap();
        assert_eq!(summary.stop_reason, StopReason::Stagnation);
        assert!(summary.generations < 1000);
    }

    #[test]
    fn observer_sees_every_generation() {
        let decoder = KeySum { n: 3 };
        let params = small_params(8);
        let stop = StopCriteria {
            max_generations: Some(5),
            max_seconds: None,
            stagnation_generations: None,
        };
        let mut seen = Vec::new();
        run(&params, &stop, &decoder, |gen, pop| {
            seen.push((gen, pop.len()));
        })
        .unwrap();
        assert_eq!(seen, (0..=5).map(|g| (g, 10)).collect::<Vec<_>>());
    }
}
