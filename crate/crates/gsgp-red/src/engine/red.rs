//! GSGP with reduced trees: individuals are aggregated linear combinations.
//!
//! The geometric semantic operators only ever build linear combinations of
//! trees, so every individual can be kept as a term table `sum(c_i * f_i)`
//! where each `f_i` is either an initial-population tree or a random tree
//! generated by mutation. Two steps run on every offspring:
//!
//! * **expansion** distributes the operator's coefficients over the parent
//!   term tables, producing a flat list of `(coefficient, function)` terms;
//! * **aggregation** merges terms whose functions are structurally identical
//!   (same canonical key), keeping the first occurrence and summing the
//!   coefficients into it.
//!
//! Semantics are updated incrementally from the parent semantics with the
//! exact arithmetic the pointer engine uses, so a paired run under the same
//! seed produces the same fitness trace while the stored individuals stay
//! small.

use std::sync::Arc;
use std::time::Instant;

use indexmap::map::Entry;
use indexmap::IndexMap;

use crate::data::Dataset;
use crate::engine::semantic::{
    crossover_semantics, mutation_semantics, RandomTree, Representation, RunContext,
    SemanticEvolution,
};
use crate::engine::{
    fitness_or_sentinel, BestSummary, EngineError, EngineKind, GsgpConfig, RunReport, TermExport,
    REPORT_SCHEMA_VERSION,
};
use crate::expr::{self, Expr, Op, Semantics};

/// Whether a stored function came from the initial population or was
/// generated by a mutation during the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FnSource {
    Initial,
    Random,
}

/// One stored copy of every distinct tree seen in a run, keyed by canonical
/// form. If a mutation regenerates a tree that already exists (or an initial
/// tree), the existing copy is reused, so term tables across the whole
/// population share their functions.
#[derive(Debug, Default)]
pub struct TreeStore {
    entries: IndexMap<Arc<str>, StoredTree>,
}

#[derive(Debug, Clone)]
pub struct StoredTree {
    pub tree: Arc<Expr>,
    pub source: FnSource,
}

impl TreeStore {
    pub fn new() -> TreeStore {
        TreeStore::default()
    }

    /// Returns the canonical key and the stored entry, inserting on first
    /// sight. The source tag of the first insertion wins, so an initial tree
    /// regenerated later by mutation stays tagged as initial.
    pub fn intern(&mut self, tree: Arc<Expr>, source: FnSource) -> (Arc<str>, StoredTree) {
        let key: Arc<str> = Arc::from(expr::canonical_key(&tree).as_str());
        match self.entries.entry(key.clone()) {
            Entry::Occupied(existing) => (key, existing.get().clone()),
            Entry::Vacant(slot) => {
                let stored = StoredTree { tree, source };
                slot.insert(stored.clone());
                (key, stored)
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&StoredTree> {
        self.entries.get(key)
    }

    /// Number of distinct trees stored.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One aggregated term: a coefficient on a stored function.
#[derive(Debug, Clone)]
pub struct TermEntry {
    pub coefficient: f64,
    pub function: Arc<Expr>,
    pub source: FnSource,
}

/// A term list fresh out of expansion: keys may repeat, coefficients may be
/// zero. [`aggregate`] turns it into a well-formed [`LinearIndividual`].
#[derive(Debug, Clone)]
pub struct Expansion {
    pub terms: Vec<(Arc<str>, TermEntry)>,
    pub train_semantics: Semantics,
}

/// An individual as an insertion-ordered term table.
///
/// Invariants after aggregation: keys are unique, no coefficient is exactly
/// zero, and the cached training semantics equal the dot product of the
/// coefficients with the function semantics (up to the incremental-update
/// rounding the engine is specified to tolerate).
#[derive(Debug, Clone)]
pub struct LinearIndividual {
    terms: IndexMap<Arc<str>, TermEntry>,
    pub train_semantics: Semantics,
}

impl LinearIndividual {
    /// Number of terms, i.e. distinct functions composing the individual.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Arc<str>, &TermEntry)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &str) -> Option<f64> {
        self.terms.get(key).map(|t| t.coefficient)
    }

    /// Coefficients in term order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.values().map(|t| t.coefficient).collect()
    }

    /// The term list as an expansion, e.g. to re-run aggregation.
    pub fn to_expansion(&self) -> Expansion {
        Expansion {
            terms: self
                .terms
                .iter()
                .map(|(k, t)| (k.clone(), t.clone()))
                .collect(),
            train_semantics: self.train_semantics.clone(),
        }
    }

    pub fn term_table(&self) -> Vec<TermExport> {
        self.terms
            .iter()
            .map(|(key, term)| TermExport {
                coefficient: term.coefficient,
                key: key.to_string(),
                function: expr::infix(&term.function),
            })
            .collect()
    }
}

/// Wraps an initial-population tree as the single-term combination
/// `1 * tree`.
pub fn lift_initial(
    tree: Arc<Expr>,
    store: &mut TreeStore,
    train_rows: &[Vec<f64>],
) -> LinearIndividual {
    let values = expr::semantics_raw(&tree, train_rows);
    lift_initial_with_semantics(tree, store, values)
}

fn lift_initial_with_semantics(
    tree: Arc<Expr>,
    store: &mut TreeStore,
    train_values: Vec<f64>,
) -> LinearIndividual {
    let (key, stored) = store.intern(tree, FnSource::Initial);
    let mut terms = IndexMap::with_capacity(1);
    terms.insert(
        key,
        TermEntry {
            coefficient: 1.0,
            function: stored.tree,
            source: stored.source,
        },
    );
    LinearIndividual {
        terms,
        train_semantics: Semantics(train_values),
    }
}

/// Expansion of a mutation offspring: the parent's terms unchanged, followed
/// by `(+delta, rm)` and `(-delta, rn)`. Semantics update incrementally, in
/// the same arithmetic order the pointer engine uses.
pub fn expand_gsm(
    parent: &LinearIndividual,
    delta: f64,
    rm: &RandomTree,
    rn: &RandomTree,
    store: &mut TreeStore,
) -> Expansion {
    let mut terms: Vec<(Arc<str>, TermEntry)> = Vec::with_capacity(parent.terms.len() + 2);
    for (key, term) in &parent.terms {
        terms.push((key.clone(), term.clone()));
    }
    let (rm_key, rm_stored) = store.intern(rm.tree.clone(), FnSource::Random);
    terms.push((
        rm_key,
        TermEntry {
            coefficient: delta,
            function: rm_stored.tree,
            source: rm_stored.source,
        },
    ));
    let (rn_key, rn_stored) = store.intern(rn.tree.clone(), FnSource::Random);
    terms.push((
        rn_key,
        TermEntry {
            coefficient: -delta,
            function: rn_stored.tree,
            source: rn_stored.source,
        },
    ));
    let train_semantics = Semantics(mutation_semantics(
        parent.train_semantics.as_slice(),
        delta,
        &rm.train_values,
        &rn.train_values,
    ));
    Expansion {
        terms,
        train_semantics,
    }
}

/// Expansion of a crossover offspring: the first parent's coefficients scaled
/// by `k`, then the second parent's scaled by `1 - k`.
pub fn expand_gsx(p1: &LinearIndividual, p2: &LinearIndividual, k: f64) -> Expansion {
    assert!((0.0..=1.0).contains(&k), "crossover weight must be in [0, 1]");
    let k2 = 1.0 - k;
    let mut terms: Vec<(Arc<str>, TermEntry)> =
        Vec::with_capacity(p1.terms.len() + p2.terms.len());
    for (key, term) in &p1.terms {
        terms.push((
            key.clone(),
            TermEntry {
                coefficient: k * term.coefficient,
                ..term.clone()
            },
        ));
    }
    for (key, term) in &p2.terms {
        terms.push((
            key.clone(),
            TermEntry {
                coefficient: k2 * term.coefficient,
                ..term.clone()
            },
        ));
    }
    let train_semantics = Semantics(crossover_semantics(
        p1.train_semantics.as_slice(),
        k,
        p2.train_semantics.as_slice(),
    ));
    Expansion {
        terms,
        train_semantics,
    }
}

/// Merges duplicate functions: the first occurrence of a key survives and
/// every later coefficient is added into it, in encounter order. Terms whose
/// final coefficient is exactly zero are dropped (a zero-weight function
/// contributes nothing). Cached semantics pass through untouched —
/// aggregation is a purely structural rewrite.
pub fn aggregate(expansion: Expansion) -> LinearIndividual {
    let mut terms: IndexMap<Arc<str>, TermEntry> = IndexMap::with_capacity(expansion.terms.len());
    for (key, term) in expansion.terms {
        match terms.entry(key) {
            Entry::Occupied(mut existing) => {
                existing.get_mut().coefficient += term.coefficient;
            }
            Entry::Vacant(slot) => {
                slot.insert(term);
            }
        }
    }
    terms.retain(|_, term| term.coefficient != 0.0);
    LinearIndividual {
        terms,
        train_semantics: expansion.train_semantics,
    }
}

/// Dot-product semantics over arbitrary inputs, summed in term order. Used to
/// evaluate the final best individual on the test set; during evolution the
/// incremental cache is used instead.
pub fn red_semantics(individual: &LinearIndividual, rows: &[Vec<f64>]) -> Semantics {
    let mut acc = vec![0.0f64; rows.len()];
    for term in individual.terms.values() {
        let values = expr::semantics_raw(&term.function, rows);
        for (a, v) in acc.iter_mut().zip(values) {
            *a += term.coefficient * v;
        }
    }
    Semantics(acc)
}

/// Node count of the individual flattened as a left-deep sum of
/// `coefficient * function` products: each term costs its function's nodes
/// plus 2 (the `*` and the coefficient), and `s - 1` additions join them.
pub fn red_node_count(individual: &LinearIndividual) -> usize {
    let s = individual.terms.len();
    let function_nodes: usize = individual
        .terms
        .values()
        .map(|t| expr::node_count(&t.function) + 2)
        .sum();
    function_nodes + s.saturating_sub(1)
}

/// Materializes the flattened expression: `node_count` of the result equals
/// [`red_node_count`].
pub fn to_expression(individual: &LinearIndividual) -> Arc<Expr> {
    let mut terms = individual.terms.values();
    let first = terms
        .next()
        .expect("a linear individual has at least one term");
    let mut acc = Expr::func(
        Op::Mul,
        Expr::constant(first.coefficient),
        first.function.clone(),
    );
    for term in terms {
        let product = Expr::func(
            Op::Mul,
            Expr::constant(term.coefficient),
            term.function.clone(),
        );
        acc = Expr::func(Op::Add, acc, product);
    }
    acc
}

/// The linear-combination representation plugged into the shared skeleton.
/// Every offspring goes through expansion then aggregation; test semantics
/// are never computed during evolution.
pub struct RedRepresentation {
    pub store: TreeStore,
}

impl RedRepresentation {
    pub fn new() -> RedRepresentation {
        RedRepresentation {
            store: TreeStore::new(),
        }
    }
}

impl Default for RedRepresentation {
    fn default() -> Self {
        RedRepresentation::new()
    }
}

impl Representation for RedRepresentation {
    type Individual = LinearIndividual;

    fn lift(
        &mut self,
        tree: &Arc<Expr>,
        train_values: Vec<f64>,
        _ctx: &RunContext<'_>,
    ) -> LinearIndividual {
        lift_initial_with_semantics(tree.clone(), &mut self.store, train_values)
    }

    fn mutate(
        &mut self,
        parent: &LinearIndividual,
        delta: f64,
        rm: &RandomTree,
        rn: &RandomTree,
        _ctx: &RunContext<'_>,
    ) -> LinearIndividual {
        aggregate(expand_gsm(parent, delta, rm, rn, &mut self.store))
    }

    fn crossover(
        &mut self,
        first: &LinearIndividual,
        second: &LinearIndividual,
        k: f64,
        _ctx: &RunContext<'_>,
    ) -> LinearIndividual {
        aggregate(expand_gsx(first, second, k))
    }

    fn train_semantics<'i>(&self, individual: &'i LinearIndividual) -> &'i [f64] {
        individual.train_semantics.as_slice()
    }

    fn size_string(&self, individual: &LinearIndividual) -> String {
        red_node_count(individual).to_string()
    }

    fn clone_individual(&self, individual: &LinearIndividual) -> LinearIndividual {
        individual.clone()
    }
}

/// A finished GSGP-Red run. The tree store is returned alongside the final
/// population so lineage analytics can inspect which functions survived.
pub struct RedRun {
    pub report: RunReport,
    pub population: Vec<LinearIndividual>,
    pub fitness: Vec<f64>,
    pub best: usize,
    pub store: TreeStore,
}

pub fn run_gsgp_red(
    config: &GsgpConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<RedRun, EngineError> {
    let run_start = Instant::now();
    let mut evolution =
        SemanticEvolution::new(RedRepresentation::new(), config.clone(), train, test)?;
    evolution.run_to_end();
    let best = evolution.best();
    let (repr, population, fitness, records) = evolution.into_parts();

    // Test fitness is evaluated once, for the best overall individual.
    let best_individual = &population[best];
    let test_values = red_semantics(best_individual, test.rows());
    let report = RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        engine: EngineKind::GsgpRed,
        dataset: train.name().to_string(),
        seed: config.seed,
        train_rows: train.n(),
        test_rows: test.n(),
        num_features: train.d(),
        generations: records,
        best: BestSummary {
            train_rmse: fitness[best],
            test_rmse: fitness_or_sentinel(test_values.as_slice(), test.target()),
            size: red_node_count(best_individual).to_string(),
            term_count: Some(best_individual.term_count()),
            expression: None,
            term_table: Some(best_individual.term_table()),
        },
        wall_time_secs: run_start.elapsed().as_secs_f64(),
    };

    Ok(RedRun {
        report,
        population,
        fitness,
        best,
        store: repr.store,
    })
}
