//! Generational skeleton shared by the pointer-based and linear-combination
//! geometric semantic engines.
//!
//! Both engines run the exact same loop over the exact same random stream;
//! only the individual representation behind [`Representation`] differs.
//! That is what makes paired runs comparable generation by generation: under
//! one seed the operator choices, tournament draws, crossover constants and
//! random trees are identical, so any divergence in fitness traces comes from
//! the representations themselves.
//!
//! Random draws per offspring happen in a fixed, documented order:
//!
//! 1. operator choice (one uniform draw against `p_crossover`),
//! 2. parent tournament(s) (`tournament_size` index draws each),
//! 3. the crossover constant `k`, or the two random trees for mutation.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{target_std, Dataset};
use crate::engine::{
    best_index, fitness_or_sentinel, tournament_select, EngineError, GenerationRecord, GsgpConfig,
};
use crate::expr::{self, Expr};

/// Datasets a run evaluates against. Test rows ride along so representations
/// that cache test semantics (the pointer engine) can do so.
#[derive(Clone, Copy)]
pub struct RunContext<'a> {
    pub train: &'a Dataset,
    pub test: &'a Dataset,
}

/// A randomly grown function together with its training-set values, computed
/// once by the skeleton so every representation sees identical numbers.
pub struct RandomTree {
    pub tree: Arc<Expr>,
    pub train_values: Vec<f64>,
}

impl RandomTree {
    pub fn evaluate(tree: Arc<Expr>, rows: &[Vec<f64>]) -> RandomTree {
        let train_values = expr::semantics_raw(&tree, rows);
        RandomTree { tree, train_values }
    }
}

/// Child semantics of a geometric semantic mutation:
/// `parent + delta * (rm - rn)`, elementwise.
///
/// Every engine must go through this helper (and [`crossover_semantics`]) so
/// the floating-point operation order is identical across representations.
pub fn mutation_semantics(parent: &[f64], delta: f64, rm: &[f64], rn: &[f64]) -> Vec<f64> {
    debug_assert!(parent.len() == rm.len() && parent.len() == rn.len());
    parent
        .iter()
        .zip(rm.iter().zip(rn))
        .map(|(p, (m, n))| p + delta * (m - n))
        .collect()
}

/// Child semantics of a geometric semantic crossover:
/// `k * first + (1 - k) * second`, elementwise.
pub fn crossover_semantics(first: &[f64], k: f64, second: &[f64]) -> Vec<f64> {
    debug_assert_eq!(first.len(), second.len());
    let k2 = 1.0 - k;
    first
        .iter()
        .zip(second)
        .map(|(a, b)| k * a + k2 * b)
        .collect()
}

/// How a semantic engine represents individuals.
///
/// The skeleton owns the random stream and the population; implementations
/// turn initial trees and operator applications into individuals and expose
/// cached training semantics for fitness.
pub trait Representation {
    type Individual;

    /// Wraps an initial-population tree. `train_values` are the tree's
    /// training-set outputs, already computed by the skeleton.
    fn lift(
        &mut self,
        tree: &Arc<Expr>,
        train_values: Vec<f64>,
        ctx: &RunContext<'_>,
    ) -> Self::Individual;

    /// Geometric semantic mutation with step `delta` and random trees `rm`,
    /// `rn`.
    fn mutate(
        &mut self,
        parent: &Self::Individual,
        delta: f64,
        rm: &RandomTree,
        rn: &RandomTree,
        ctx: &RunContext<'_>,
    ) -> Self::Individual;

    /// Geometric semantic crossover with constant `k` sampled from [0, 1).
    fn crossover(
        &mut self,
        first: &Self::Individual,
        second: &Self::Individual,
        k: f64,
        ctx: &RunContext<'_>,
    ) -> Self::Individual;

    fn train_semantics<'i>(&self, individual: &'i Self::Individual) -> &'i [f64];

    /// Node count rendered as a decimal string.
    fn size_string(&self, individual: &Self::Individual) -> String;

    /// Copy used by elitism; representations with shared immutable state can
    /// make this cheap.
    fn clone_individual(&self, individual: &Self::Individual) -> Self::Individual;
}

/// The generational loop, generic over the individual representation.
pub struct SemanticEvolution<'a, R: Representation> {
    repr: R,
    config: GsgpConfig,
    ctx: RunContext<'a>,
    rng: ChaCha8Rng,
    delta: f64,
    population: Vec<R::Individual>,
    fitness: Vec<f64>,
    generation: usize,
    records: Vec<GenerationRecord>,
}

impl<'a, R: Representation> SemanticEvolution<'a, R> {
    /// Validates the configuration, generates the initial population with
    /// ramped half-and-half, and records generation 0.
    pub fn new(
        mut repr: R,
        config: GsgpConfig,
        train: &'a Dataset,
        test: &'a Dataset,
    ) -> Result<Self, EngineError> {
        config.validate()?;
        if train.d() != test.d() {
            return Err(EngineError::FeatureMismatch {
                train: train.d(),
                test: test.d(),
            });
        }
        let ctx = RunContext { train, test };
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        // Mutation step: fixed for the whole run.
        let delta = if config.p_mutation > 0.0 {
            config.ms_fraction * target_std(train)?
        } else {
            0.0
        };
        if config.p_mutation > 0.0 && delta <= 0.0 {
            return Err(EngineError::Config(
                "training target has zero spread; the mutation step would be 0".into(),
            ));
        }

        let trees = expr::ramped_half_and_half(
            config.pop_size,
            config.max_depth,
            train.d(),
            config.erc_range,
            &mut rng,
        );
        let mut population = Vec::with_capacity(config.pop_size);
        let mut fitness = Vec::with_capacity(config.pop_size);
        for tree in &trees {
            let train_values = expr::semantics_raw(tree, train.rows());
            let individual = repr.lift(tree, train_values, &ctx);
            fitness.push(fitness_or_sentinel(
                repr.train_semantics(&individual),
                train.target(),
            ));
            population.push(individual);
        }

        let best = best_index(&fitness);
        let records = vec![GenerationRecord {
            generation: 0,
            best_train_rmse: fitness[best],
            best_size: repr.size_string(&population[best]),
            elapsed_secs: started.elapsed().as_secs_f64(),
        }];

        Ok(SemanticEvolution {
            repr,
            config,
            ctx,
            rng,
            delta,
            population,
            fitness,
            generation: 0,
            records,
        })
    }

    /// Advances one generation: elitism of one, then offspring produced by
    /// crossover or mutation until the population is refilled.
    pub fn step(&mut self) {
        let started = Instant::now();
        let pop_size = self.config.pop_size;
        let k_tournament = self.config.tournament_size;

        let elite = best_index(&self.fitness);
        let mut next_population = Vec::with_capacity(pop_size);
        let mut next_fitness = Vec::with_capacity(pop_size);
        next_population.push(self.repr.clone_individual(&self.population[elite]));
        next_fitness.push(self.fitness[elite]);

        while next_population.len() < pop_size {
            let crossover = self.rng.gen::<f64>() < self.config.p_crossover;
            let child = if crossover {
                let first = tournament_select(&self.fitness, k_tournament, &mut self.rng);
                let second = tournament_select(&self.fitness, k_tournament, &mut self.rng);
                let k = self.rng.gen::<f64>();
                self.repr.crossover(
                    &self.population[first],
                    &self.population[second],
                    k,
                    &self.ctx,
                )
            } else {
                let parent = tournament_select(&self.fitness, k_tournament, &mut self.rng);
                let rm = self.grow_random_tree();
                let rn = self.grow_random_tree();
                self.repr
                    .mutate(&self.population[parent], self.delta, &rm, &rn, &self.ctx)
            };
            next_fitness.push(fitness_or_sentinel(
                self.repr.train_semantics(&child),
                self.ctx.train.target(),
            ));
            next_population.push(child);
        }

        self.population = next_population;
        self.fitness = next_fitness;
        self.generation += 1;

        let best = best_index(&self.fitness);
        self.records.push(GenerationRecord {
            generation: self.generation,
            best_train_rmse: self.fitness[best],
            best_size: self.repr.size_string(&self.population[best]),
            elapsed_secs: started.elapsed().as_secs_f64(),
        });
    }

    fn grow_random_tree(&mut self) -> RandomTree {
        let tree = expr::grow(
            self.config.max_depth,
            self.ctx.train.d(),
            self.config.erc_range,
            &mut self.rng,
        );
        RandomTree::evaluate(tree, self.ctx.train.rows())
    }

    /// Runs every remaining generation.
    pub fn run_to_end(&mut self) {
        while self.generation < self.config.generations {
            self.step();
        }
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn generations_remaining(&self) -> usize {
        self.config.generations - self.generation
    }

    pub fn mutation_step(&self) -> f64 {
        self.delta
    }

    pub fn population(&self) -> &[R::Individual] {
        &self.population
    }

    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn best(&self) -> usize {
        best_index(&self.fitness)
    }

    pub fn records(&self) -> &[GenerationRecord] {
        &self.records
    }

    pub fn representation(&self) -> &R {
        &self.repr
    }

    pub fn context(&self) -> &RunContext<'a> {
        &self.ctx
    }

    pub fn into_parts(self) -> (R, Vec<R::Individual>, Vec<f64>, Vec<GenerationRecord>) {
        (self.repr, self.population, self.fitness, self.records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mutation_semantics_at_zero_step_is_identity() {
        let parent = vec![1.5, -0.25, 7.0];
        let rm = vec![3.0, 2.0, 1.0];
        let rn = vec![0.5, 0.5, 0.5];
        let child = mutation_semantics(&parent, 0.0, &rm, &rn);
        assert_eq!(child, parent);
    }

    #[test]
    fn crossover_semantics_endpoints() {
        let a = vec![1.0, 1.0];
        let b = vec![0.0, 2.0];
        assert_eq!(crossover_semantics(&a, 1.0, &b), a);
        assert_eq!(crossover_semantics(&a, 0.3, &b), vec![0.3, 1.7]);
    }

    #[test]
    fn crossover_semantics_stays_in_the_segment() {
        let a = vec![2.0, -1.0, 0.5];
        let b = vec![-3.0, 4.0, 0.5];
        for i in 0..=10 {
            let k = i as f64 / 10.0;
            for (j, v) in crossover_semantics(&a, k, &b).iter().enumerate() {
                let lo = a[j].min(b[j]) - 1e-12;
                let hi = a[j].max(b[j]) + 1e-12;
                assert!(*v >= lo && *v <= hi, "k={k}, coord {j}: {v} outside [{lo}, {hi}]");
            }
        }
    }
}
