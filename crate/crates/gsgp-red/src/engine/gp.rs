//! Canonical GP baseline: subtree crossover and subtree mutation over
//! expression trees, tournament selection, elitism of one.
//!
//! No depth or size cap is applied to offspring; growth is bounded in
//! practice by the run length. Random draws per offspring follow the same
//! order as the semantic engines: operator choice, then parent tournaments,
//! then the operator's own draws (node picks, grown subtree).

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::engine::{
    best_index, fitness_or_sentinel, tournament_select, BestSummary, EngineError, EngineKind,
    GenerationRecord, GpConfig, RunReport, REPORT_SCHEMA_VERSION,
};
use crate::expr::{self, Expr};

/// Returns the subtree rooted at preorder index `index` (root is 0).
fn subtree_at(tree: &Arc<Expr>, index: usize) -> &Arc<Expr> {
    if index == 0 {
        return tree;
    }
    match tree.as_ref() {
        Expr::Func { left, right, .. } => {
            let left_count = expr::node_count(left);
            if index - 1 < left_count {
                subtree_at(left, index - 1)
            } else {
                subtree_at(right, index - 1 - left_count)
            }
        }
        _ => unreachable!("preorder index out of range"),
    }
}

/// Rebuilds the path from the root to preorder index `index`, substituting
/// `replacement` there; everything off the path is shared.
fn with_replaced(tree: &Arc<Expr>, index: usize, replacement: Arc<Expr>) -> Arc<Expr> {
    if index == 0 {
        return replacement;
    }
    match tree.as_ref() {
        Expr::Func { op, left, right } => {
            let left_count = expr::node_count(left);
            if index - 1 < left_count {
                let new_left = with_replaced(left, index - 1, replacement);
                Expr::func(*op, new_left, right.clone())
            } else {
                let new_right = with_replaced(right, index - 1 - left_count, replacement);
                Expr::func(*op, left.clone(), new_right)
            }
        }
        _ => unreachable!("preorder index out of range"),
    }
}

/// Subtree crossover: a uniformly chosen node of a copy of `first` is
/// replaced by a uniformly chosen subtree of `second`.
pub fn subtree_crossover(first: &Arc<Expr>, second: &Arc<Expr>, rng: &mut impl Rng) -> Arc<Expr> {
    let site = rng.gen_range(0..expr::node_count(first));
    let donor = rng.gen_range(0..expr::node_count(second));
    with_replaced(first, site, subtree_at(second, donor).clone())
}

/// Subtree mutation: a uniformly chosen node of a copy of `parent` is
/// replaced by a freshly grown tree of depth at most `max_depth`.
pub fn subtree_mutation(
    parent: &Arc<Expr>,
    max_depth: usize,
    num_vars: usize,
    erc_range: (f64, f64),
    rng: &mut impl Rng,
) -> Arc<Expr> {
    let site = rng.gen_range(0..expr::node_count(parent));
    let replacement = expr::grow(max_depth, num_vars, erc_range, rng);
    with_replaced(parent, site, replacement)
}

/// Everything a finished GP run exposes: the serializable report plus the
/// final population for further inspection.
pub struct GpRun {
    pub report: RunReport,
    pub population: Vec<Arc<Expr>>,
    pub fitness: Vec<f64>,
    pub best: usize,
}

pub fn run_gp(config: &GpConfig, train: &Dataset, test: &Dataset) -> Result<GpRun, EngineError> {
    config.validate()?;
    if train.d() != test.d() {
        return Err(EngineError::FeatureMismatch {
            train: train.d(),
            test: test.d(),
        });
    }

    let run_start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let num_vars = train.d();

    let mut population = expr::ramped_half_and_half(
        config.pop_size,
        config.max_depth,
        num_vars,
        config.erc_range,
        &mut rng,
    );
    let mut fitness: Vec<f64> = population.iter().map(|t| train_fitness(t, train)).collect();

    let mut records = Vec::with_capacity(config.generations + 1);
    let gen_started = Instant::now();
    let best = best_index(&fitness);
    records.push(GenerationRecord {
        generation: 0,
        best_train_rmse: fitness[best],
        best_size: expr::node_count(&population[best]).to_string(),
        elapsed_secs: gen_started.elapsed().as_secs_f64(),
    });

    for generation in 1..=config.generations {
        let gen_started = Instant::now();
        let elite = best_index(&fitness);
        let mut next_population = Vec::with_capacity(config.pop_size);
        let mut next_fitness = Vec::with_capacity(config.pop_size);
        next_population.push(population[elite].clone());
        next_fitness.push(fitness[elite]);

        while next_population.len() < config.pop_size {
            let crossover = rng.gen::<f64>() < config.p_crossover;
            let child = if crossover {
                let first = tournament_select(&fitness, config.tournament_size, &mut rng);
                let second = tournament_select(&fitness, config.tournament_size, &mut rng);
                subtree_crossover(&population[first], &population[second], &mut rng)
            } else {
                let parent = tournament_select(&fitness, config.tournament_size, &mut rng);
                subtree_mutation(
                    &population[parent],
                    config.max_depth,
                    num_vars,
                    config.erc_range,
                    &mut rng,
                )
            };
            next_fitness.push(train_fitness(&child, train));
            next_population.push(child);
        }

        population = next_population;
        fitness = next_fitness;
        let best = best_index(&fitness);
        records.push(GenerationRecord {
            generation,
            best_train_rmse: fitness[best],
            best_size: expr::node_count(&population[best]).to_string(),
            elapsed_secs: gen_started.elapsed().as_secs_f64(),
        });
    }

    let best = best_index(&fitness);
    let best_tree = &population[best];
    let test_values = expr::semantics_raw(best_tree, test.rows());
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        engine: EngineKind::Gp,
        dataset: train.name().to_string(),
        seed: config.seed,
        train_rows: train.n(),
        test_rows: test.n(),
        num_features: train.d(),
        generations: records,
        best: BestSummary {
            train_rmse: fitness[best],
            test_rmse: fitness_or_sentinel(&test_values, test.target()),
            size: expr::node_count(best_tree).to_string(),
            term_count: None,
            expression: Some(expr::infix(best_tree)),
            term_table: None,
        },
        wall_time_secs: run_start.elapsed().as_secs_f64(),
    };

    Ok(GpRun {
        report,
        population,
        fitness,
        best,
    })
}

fn train_fitness(tree: &Expr, train: &Dataset) -> f64 {
    let values = expr::semantics_raw(tree, train.rows());
    fitness_or_sentinel(&values, train.target())
}
