//! Pointer-based geometric semantic GP.
//!
//! Offspring never materialize trees during evolution: each individual is a
//! DAG node holding references to its parents and the operator's random
//! trees, plus cached training and test semantics propagated from the parent
//! values. Node counts follow the operator recurrences exactly and are kept
//! as arbitrary-precision integers because they grow exponentially with the
//! generation count.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use thiserror::Error;

use crate::data::Dataset;
use crate::engine::semantic::{
    crossover_semantics, mutation_semantics, RandomTree, Representation, RunContext,
    SemanticEvolution,
};
use crate::engine::{
    fitness_or_sentinel, BestSummary, EngineError, EngineKind, GsgpConfig, RunReport,
    REPORT_SCHEMA_VERSION,
};
use crate::expr::{self, Expr, Op, Semantics};

/// Extra nodes a mutation adds on top of its operands: the `+`, `*`, the step
/// constant and the `-` joining the two random trees.
pub const MUTATION_EXTRA_NODES: usize = 4;

/// Extra nodes a crossover adds on top of its parents: the `+`, two `*` and
/// the two weight constants, with `1 - k` folded into a single constant.
pub const CROSSOVER_EXTRA_NODES: usize = 5;

pub type PointerRef = Arc<PointerIndividual>;

/// How an individual came to be; mutation and crossover offspring reference
/// their parents instead of storing a tree.
#[derive(Debug)]
pub enum Origin {
    Initial {
        tree: Arc<Expr>,
    },
    Mutation {
        parent: PointerRef,
        rm: Arc<Expr>,
        rn: Arc<Expr>,
        delta: f64,
    },
    Crossover {
        first: PointerRef,
        second: PointerRef,
        k: f64,
    },
}

/// A GSGP individual: lineage reference, cached semantics, exact node count.
///
/// Semantics vectors normally hold finite values; an individual whose
/// semantics overflowed is kept (with the raw IEEE values) and flagged by the
/// infinity fitness sentinel instead.
#[derive(Debug)]
pub struct PointerIndividual {
    pub origin: Origin,
    pub train_semantics: Semantics,
    pub test_semantics: Semantics,
    pub exact_size: BigUint,
}

/// Geometric semantic mutation: semantics move by `delta * (rm - rn)`, the
/// size follows `size(parent) + nodes(rm) + nodes(rn) + 4`, and no tree is
/// built.
pub fn gsm(parent: &PointerRef, delta: f64, rm: &RandomTree, rn: &RandomTree, test_rows: &[Vec<f64>]) -> PointerRef {
    let rm_test = expr::semantics_raw(&rm.tree, test_rows);
    let rn_test = expr::semantics_raw(&rn.tree, test_rows);
    let train_semantics = Semantics(mutation_semantics(
        &parent.train_semantics,
        delta,
        &rm.train_values,
        &rn.train_values,
    ));
    let test_semantics =
        Semantics(mutation_semantics(&parent.test_semantics, delta, &rm_test, &rn_test));
    let exact_size = &parent.exact_size
        + BigUint::from(expr::node_count(&rm.tree))
        + BigUint::from(expr::node_count(&rn.tree))
        + BigUint::from(MUTATION_EXTRA_NODES);
    Arc::new(PointerIndividual {
        origin: Origin::Mutation {
            parent: parent.clone(),
            rm: rm.tree.clone(),
            rn: rn.tree.clone(),
            delta,
        },
        train_semantics,
        test_semantics,
        exact_size,
    })
}

/// Geometric semantic crossover: the child's semantics is the convex
/// combination `k * first + (1 - k) * second`; the size follows
/// `size(first) + size(second) + 5`.
pub fn gsx_e(first: &PointerRef, second: &PointerRef, k: f64) -> PointerRef {
    let train_semantics = Semantics(crossover_semantics(
        &first.train_semantics,
        k,
        &second.train_semantics,
    ));
    let test_semantics =
        Semantics(crossover_semantics(&first.test_semantics, k, &second.test_semantics));
    let exact_size =
        &first.exact_size + &second.exact_size + BigUint::from(CROSSOVER_EXTRA_NODES);
    Arc::new(PointerIndividual {
        origin: Origin::Crossover {
            first: first.clone(),
            second: second.clone(),
            k,
        },
        train_semantics,
        test_semantics,
        exact_size,
    })
}

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error("refusing to materialize {exact_size} nodes (budget {budget})")]
    BudgetExceeded { exact_size: String, budget: usize },
}

/// Materializes the full expression tree of an individual.
///
/// Mutation becomes `parent + delta * (rm - rn)` and crossover becomes
/// `k * first + (1 - k) * second` with the second weight folded to a
/// constant, so `node_count` of the result equals `exact_size`. Shared
/// lineage is memoized, which keeps the physical allocation proportional to
/// the DAG rather than the tree; the logical node count is unchanged. Asking
/// for more nodes than `node_budget` is refused — for long runs that is the
/// expected outcome.
pub fn reconstruct(
    individual: &PointerRef,
    node_budget: usize,
) -> Result<Arc<Expr>, ReconstructError> {
    if individual.exact_size > BigUint::from(node_budget) {
        return Err(ReconstructError::BudgetExceeded {
            exact_size: individual.exact_size.to_string(),
            budget: node_budget,
        });
    }
    let mut memo: HashMap<*const PointerIndividual, Arc<Expr>> = HashMap::new();
    Ok(rebuild(individual, &mut memo))
}

fn rebuild(
    individual: &PointerRef,
    memo: &mut HashMap<*const PointerIndividual, Arc<Expr>>,
) -> Arc<Expr> {
    let key = Arc::as_ptr(individual);
    if let Some(done) = memo.get(&key) {
        return done.clone();
    }
    let tree = match &individual.origin {
        Origin::Initial { tree } => tree.clone(),
        Origin::Mutation {
            parent,
            rm,
            rn,
            delta,
        } => {
            let parent_tree = rebuild(parent, memo);
            Expr::func(
                Op::Add,
                parent_tree,
                Expr::func(
                    Op::Mul,
                    Expr::constant(*delta),
                    Expr::func(Op::Sub, rm.clone(), rn.clone()),
                ),
            )
        }
        Origin::Crossover { first, second, k } => {
            let first_tree = rebuild(first, memo);
            let second_tree = rebuild(second, memo);
            Expr::func(
                Op::Add,
                Expr::func(Op::Mul, Expr::constant(*k), first_tree),
                Expr::func(Op::Mul, Expr::constant(1.0 - *k), second_tree),
            )
        }
    };
    memo.insert(key, tree.clone());
    tree
}

/// The pointer representation plugged into the shared evolution skeleton.
pub struct PointerRepresentation;

impl Representation for PointerRepresentation {
    type Individual = PointerRef;

    fn lift(
        &mut self,
        tree: &Arc<Expr>,
        train_values: Vec<f64>,
        ctx: &RunContext<'_>,
    ) -> PointerRef {
        // Test semantics are cached for every individual during evolution,
        // matching the cost profile of the reference implementation.
        let test_semantics = Semantics(expr::semantics_raw(tree, ctx.test.rows()));
        Arc::new(PointerIndividual {
            origin: Origin::Initial { tree: tree.clone() },
            train_semantics: Semantics(train_values),
            test_semantics,
            exact_size: BigUint::from(expr::node_count(tree)),
        })
    }

    fn mutate(
        &mut self,
        parent: &PointerRef,
        delta: f64,
        rm: &RandomTree,
        rn: &RandomTree,
        ctx: &RunContext<'_>,
    ) -> PointerRef {
        gsm(parent, delta, rm, rn, ctx.test.rows())
    }

    fn crossover(
        &mut self,
        first: &PointerRef,
        second: &PointerRef,
        k: f64,
        _ctx: &RunContext<'_>,
    ) -> PointerRef {
        gsx_e(first, second, k)
    }

    fn train_semantics<'i>(&self, individual: &'i PointerRef) -> &'i [f64] {
        &individual.train_semantics
    }

    fn size_string(&self, individual: &PointerRef) -> String {
        individual.exact_size.to_string()
    }

    fn clone_individual(&self, individual: &PointerRef) -> PointerRef {
        individual.clone()
    }
}

/// A finished pointer-GSGP run.
pub struct GsgpRun {
    pub report: RunReport,
    pub population: Vec<PointerRef>,
    pub fitness: Vec<f64>,
    pub best: usize,
}

pub fn run_gsgp(
    config: &GsgpConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<GsgpRun, EngineError> {
    let run_start = Instant::now();
    let mut evolution =
        SemanticEvolution::new(PointerRepresentation, config.clone(), train, test)?;
    evolution.run_to_end();
    let best = evolution.best();
    let (_, population, fitness, records) = evolution.into_parts();

    let best_individual = &population[best];
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        engine: EngineKind::Gsgp,
        dataset: train.name().to_string(),
        seed: config.seed,
        train_rows: train.n(),
        test_rows: test.n(),
        num_features: train.d(),
        generations: records,
        best: BestSummary {
            train_rmse: fitness[best],
            test_rmse: fitness_or_sentinel(&best_individual.test_semantics, test.target()),
            size: best_individual.exact_size.to_string(),
            term_count: None,
            expression: None,
            term_table: None,
        },
        wall_time_secs: run_start.elapsed().as_secs_f64(),
    };

    Ok(GsgpRun {
        report,
        population,
        fitness,
        best,
    })
}
