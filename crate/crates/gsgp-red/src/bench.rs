//! Experiment orchestration: cross-validated repeated runs for every engine,
//! per-dataset medians, pairwise Wilcoxon tests, and the paired equivalence
//! check between the pointer-based and linear-combination engines.
//!
//! Seeds are a pure function of `(base_seed, dataset index, fold, repeat)` and
//! carry no engine component, so the two geometric engines consume identical
//! random streams on every job and stay paired. Jobs are independent and may
//! run on a worker pool; results are aggregated after a deterministic sort,
//! so only wall-clock fields vary between repeated suite invocations.

use std::path::PathBuf;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{kfold_split, load_csv, Dataset, FoldAssignment, TargetColumn};
use crate::engine::gp::run_gp;
use crate::engine::gsgp::{run_gsgp, PointerRepresentation};
use crate::engine::red::{red_node_count, run_gsgp_red, RedRepresentation};
use crate::engine::semantic::SemanticEvolution;
use crate::engine::{EngineKind, GpConfig, GsgpConfig, REPORT_SCHEMA_VERSION};
use crate::growth::biguint_log10;
use crate::stats::{median_biguint, median_f64, wilcoxon_signed_rank, DiffSign, WilcoxonDecision};

/// Significance level of the suite's Wilcoxon tests.
pub const SUITE_ALPHA: f64 = 0.05;

/// Relative deviation above which a paired run is considered divergent.
pub const EQUIVALENCE_HARD_LIMIT: f64 = 1e-6;

/// Relative deviation above which a paired run is flagged with a warning
/// (summation order differs between the incremental and dot-product paths).
pub const EQUIVALENCE_WARN_LIMIT: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid suite configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] crate::engine::EngineError),
    #[error(transparent)]
    Data(#[from] crate::data::DataError),
    #[error(transparent)]
    Diverged(#[from] EquivalenceError),
}

#[derive(Debug, Error)]
#[error(
    "engines diverged at generation {generation}: relative deviation {deviation:.3e} \
     exceeds {EQUIVALENCE_HARD_LIMIT:.0e}"
)]
pub struct EquivalenceError {
    pub generation: usize,
    pub deviation: f64,
}

/// One dataset entry of a suite.
#[derive(Debug, Clone)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub target: TargetColumn,
}

/// Full description of a benchmark suite.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub datasets: Vec<DatasetSpec>,
    pub engines: Vec<EngineKind>,
    pub folds: usize,
    pub repeats_per_fold: usize,
    pub base_seed: u64,
    pub gp: GpConfig,
    pub gsgp: GsgpConfig,
    pub workers: usize,
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.datasets.is_empty() {
            return Err(BenchError::Config("no datasets given".into()));
        }
        if self.engines.is_empty() {
            return Err(BenchError::Config("no engines selected".into()));
        }
        if self.folds < 2 {
            return Err(BenchError::Config("folds must be at least 2".into()));
        }
        if self.repeats_per_fold < 1 {
            return Err(BenchError::Config("repeats must be at least 1".into()));
        }
        if self.workers < 1 {
            return Err(BenchError::Config("workers must be at least 1".into()));
        }
        self.gp.validate()?;
        self.gsgp.validate()?;
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Seed for one run; engine-independent so paired engines share streams.
pub fn derive_run_seed(base_seed: u64, dataset_index: usize, fold: usize, repeat: usize) -> u64 {
    let mut h = splitmix64(base_seed ^ 0x72756e73); // "runs"
    h = splitmix64(h ^ dataset_index as u64);
    h = splitmix64(h ^ fold as u64);
    splitmix64(h ^ repeat as u64)
}

/// Seed for a dataset's fold assignment; shared by every engine and repeat.
pub fn derive_fold_seed(base_seed: u64, dataset_index: usize) -> u64 {
    splitmix64(splitmix64(base_seed ^ 0x666f6c6473) ^ dataset_index as u64)
}

/// Outcome of one completed run inside a suite.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub engine: EngineKind,
    pub fold: usize,
    pub repeat: usize,
    pub seed: u64,
    pub train_rmse: f64,
    pub test_rmse: f64,
    /// Node count as a decimal string.
    pub size: String,
    pub wall_time_secs: f64,
}

/// Aggregated row for one (dataset, engine) pair.
#[derive(Debug, Clone, Serialize)]
pub struct EngineRow {
    pub engine: EngineKind,
    pub runs_completed: usize,
    pub median_train_rmse: f64,
    pub median_test_rmse: f64,
    pub median_size: String,
    pub median_wall_time_secs: f64,
}

/// Relation of gsgp-red to a comparator on one metric, on the paper's
/// better / worse / indistinguishable scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Better,
    Worse,
    Indistinguishable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    /// The engine gsgp-red is compared against.
    pub versus: EngineKind,
    pub metric: &'static str,
    pub w_statistic: f64,
    pub n_used: usize,
    pub relation: Relation,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetReport {
    pub dataset: String,
    pub rows: usize,
    pub features: usize,
    pub fold_assignment: FoldAssignment,
    pub outcomes: Vec<RunOutcome>,
    pub engine_rows: Vec<EngineRow>,
    pub comparisons: Vec<ComparisonRow>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub base_seed: u64,
    pub folds: usize,
    pub repeats_per_fold: usize,
    /// Wall-time comparisons are only meaningful between runs executed with
    /// the same worker count.
    pub workers: usize,
    pub datasets: Vec<DatasetReport>,
    /// Datasets that failed to load, with the cause.
    pub aborted_datasets: Vec<String>,
}

/// Runs the whole suite: `folds x repeats` runs per engine per dataset.
/// A dataset that fails to load aborts only itself; individual run failures
/// are recorded in the dataset's failure list.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, BenchError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| BenchError::Config(format!("cannot build worker pool: {e}")))?;

    let mut report = SuiteReport {
        schema_version: REPORT_SCHEMA_VERSION,
        base_seed: config.base_seed,
        folds: config.folds,
        repeats_per_fold: config.repeats_per_fold,
        workers: config.workers,
        datasets: Vec::new(),
        aborted_datasets: Vec::new(),
    };

    for (dataset_index, spec) in config.datasets.iter().enumerate() {
        let dataset = match load_csv(&spec.path, spec.target) {
            Ok(ds) => ds,
            Err(error) => {
                report
                    .aborted_datasets
                    .push(format!("{}: {error}", spec.path.display()));
                continue;
            }
        };
        match run_dataset(config, dataset_index, &dataset, &pool) {
            Ok(ds_report) => report.datasets.push(ds_report),
            Err(error) => {
                report
                    .aborted_datasets
                    .push(format!("{}: {error}", dataset.name()));
            }
        }
    }
    Ok(report)
}

struct Job {
    engine: EngineKind,
    fold: usize,
    repeat: usize,
    seed: u64,
}

fn run_dataset(
    config: &SuiteConfig,
    dataset_index: usize,
    dataset: &Dataset,
    pool: &rayon::ThreadPool,
) -> Result<DatasetReport, BenchError> {
    let fold_assignment = kfold_split(
        dataset,
        config.folds,
        derive_fold_seed(config.base_seed, dataset_index),
    )?;
    let splits: Vec<(Dataset, Dataset)> = (0..config.folds)
        .map(|fold| fold_assignment.split(dataset, fold))
        .collect();

    let mut jobs = Vec::new();
    for &engine in &config.engines {
        for fold in 0..config.folds {
            for repeat in 0..config.repeats_per_fold {
                jobs.push(Job {
                    engine,
                    fold,
                    repeat,
                    seed: derive_run_seed(config.base_seed, dataset_index, fold, repeat),
                });
            }
        }
    }

    let results: Vec<Result<RunOutcome, String>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let (train, test) = &splits[job.fold];
                run_job(config, job, train, test)
            })
            .collect()
    });

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for result in results {
        match result {
            Ok(outcome) => outcomes.push(outcome),
            Err(message) => failures.push(message),
        }
    }
    outcomes.sort_by_key(|o| (o.engine.as_str(), o.fold, o.repeat));

    let engine_rows = aggregate_rows(&config.engines, &outcomes);
    let comparisons = compare_red_to_others(&config.engines, &outcomes);

    Ok(DatasetReport {
        dataset: dataset.name().to_string(),
        rows: dataset.n(),
        features: dataset.d(),
        fold_assignment,
        outcomes,
        engine_rows,
        comparisons,
        failures,
    })
}

fn run_job(
    config: &SuiteConfig,
    job: &Job,
    train: &Dataset,
    test: &Dataset,
) -> Result<RunOutcome, String> {
    let label = format!(
        "{} fold {} repeat {} (seed {})",
        job.engine, job.fold, job.repeat, job.seed
    );
    let report = match job.engine {
        EngineKind::Gp => {
            let cfg = GpConfig {
                seed: job.seed,
                ..config.gp.clone()
            };
            run_gp(&cfg, train, test).map_err(|e| format!("{label}: {e}"))?.report
        }
        EngineKind::Gsgp => {
            let cfg = GsgpConfig {
                seed: job.seed,
                ..config.gsgp.clone()
            };
            run_gsgp(&cfg, train, test)
                .map_err(|e| format!("{label}: {e}"))?
                .report
        }
        EngineKind::GsgpRed => {
            let cfg = GsgpConfig {
                seed: job.seed,
                ..config.gsgp.clone()
            };
            run_gsgp_red(&cfg, train, test)
                .map_err(|e| format!("{label}: {e}"))?
                .report
        }
    };
    Ok(RunOutcome {
        engine: job.engine,
        fold: job.fold,
        repeat: job.repeat,
        seed: job.seed,
        train_rmse: report.best.train_rmse,
        test_rmse: report.best.test_rmse,
        size: report.best.size.clone(),
        wall_time_secs: report.wall_time_secs,
    })
}

fn aggregate_rows(engines: &[EngineKind], outcomes: &[RunOutcome]) -> Vec<EngineRow> {
    engines
        .iter()
        .filter_map(|&engine| {
            let runs: Vec<&RunOutcome> =
                outcomes.iter().filter(|o| o.engine == engine).collect();
            if runs.is_empty() {
                return None;
            }
            let train: Vec<f64> = runs.iter().map(|o| o.train_rmse).collect();
            let test: Vec<f64> = runs.iter().map(|o| o.test_rmse).collect();
            let wall: Vec<f64> = runs.iter().map(|o| o.wall_time_secs).collect();
            let sizes: Vec<BigUint> = runs
                .iter()
                .map(|o| o.size.parse().expect("sizes are decimal strings"))
                .collect();
            Some(EngineRow {
                engine,
                runs_completed: runs.len(),
                median_train_rmse: median_f64(&train).expect("non-empty"),
                median_test_rmse: median_f64(&test).expect("non-empty"),
                median_size: median_biguint(&sizes).expect("non-empty").to_string(),
                median_wall_time_secs: median_f64(&wall).expect("non-empty"),
            })
        })
        .collect()
}

/// Pairwise Wilcoxon tests of gsgp-red against each other engine on test
/// RMSE, size and time. Lower is better on all three metrics.
fn compare_red_to_others(engines: &[EngineKind], outcomes: &[RunOutcome]) -> Vec<ComparisonRow> {
    if !engines.contains(&EngineKind::GsgpRed) {
        return Vec::new();
    }
    let mut comparisons = Vec::new();
    for &other in engines.iter().filter(|&&e| e != EngineKind::GsgpRed) {
        let red = paired_metrics(outcomes, EngineKind::GsgpRed);
        let them = paired_metrics(outcomes, other);
        if red.len() != them.len() || red.is_empty() {
            continue;
        }
        for (metric, pick) in [
            ("test_rmse", 0usize),
            ("size_log10", 1),
            ("time", 2),
        ] {
            let x: Vec<f64> = red.iter().map(|m| m.1[pick]).collect();
            let y: Vec<f64> = them.iter().map(|m| m.1[pick]).collect();
            let outcome =
                wilcoxon_signed_rank(&x, &y, SUITE_ALPHA).expect("equal-length samples");
            let relation = match (outcome.decision, outcome.direction) {
                (WilcoxonDecision::Reject, Some(DiffSign::Negative)) => Relation::Better,
                (WilcoxonDecision::Reject, _) => Relation::Worse,
                (WilcoxonDecision::FailToReject, _) => Relation::Indistinguishable,
                (WilcoxonDecision::Inconclusive, _) => Relation::Inconclusive,
            };
            comparisons.push(ComparisonRow {
                versus: other,
                metric,
                w_statistic: outcome.w,
                n_used: outcome.n_used,
                relation,
            });
        }
    }
    comparisons
}

/// Per-(fold, repeat) metric triples for one engine, keyed for pairing.
fn paired_metrics(outcomes: &[RunOutcome], engine: EngineKind) -> Vec<((usize, usize), [f64; 3])> {
    let mut rows: Vec<((usize, usize), [f64; 3])> = outcomes
        .iter()
        .filter(|o| o.engine == engine)
        .map(|o| {
            let size: BigUint = o.size.parse().expect("sizes are decimal strings");
            (
                (o.fold, o.repeat),
                [o.test_rmse, biguint_log10(&size), o.wall_time_secs],
            )
        })
        .collect();
    rows.sort_by_key(|r| r.0);
    rows
}

type MetricRender = fn(&EngineRow) -> String;

/// Renders the aligned-column text tables (one per metric) for a suite.
pub fn render_tables(report: &SuiteReport) -> String {
    let mut out = String::new();
    let metrics: [(&str, MetricRender); 4] = [
        ("Median train RMSE", |r| format!("{:.6}", r.median_train_rmse)),
        ("Median test RMSE", |r| format!("{:.6}", r.median_test_rmse)),
        ("Median size (nodes)", |r| pretty_size(&r.median_size)),
        ("Median time (s)", |r| {
            format!("{:.3}", r.median_wall_time_secs)
        }),
    ];
    for (title, render) in metrics {
        out.push_str(title);
        out.push('\n');
        out.push_str(&format!("{:<18}", "dataset"));
        let engines: Vec<EngineKind> = report
            .datasets
            .first()
            .map(|d| d.engine_rows.iter().map(|r| r.engine).collect())
            .unwrap_or_default();
        for engine in &engines {
            out.push_str(&format!("{:>16}", engine.to_string()));
        }
        out.push('\n');
        for ds in &report.datasets {
            out.push_str(&format!("{:<18}", truncate(&ds.dataset, 17)));
            for engine in &engines {
                let cell = ds
                    .engine_rows
                    .iter()
                    .find(|r| r.engine == *engine)
                    .map(render)
                    .unwrap_or_else(|| "-".into());
                out.push_str(&format!("{cell:>16}"));
            }
            out.push('\n');
        }
        out.push('\n');
    }

    out.push_str("gsgp-red versus the other engines (Wilcoxon signed-rank, alpha 0.05)\n");
    for ds in &report.datasets {
        for row in &ds.comparisons {
            out.push_str(&format!(
                "{:<18} vs {:<5} {:<10} W={:<8.1} n={:<3} {}\n",
                truncate(&ds.dataset, 17),
                row.versus.to_string(),
                row.metric,
                row.w_statistic,
                row.n_used,
                match row.relation {
                    Relation::Better => "better",
                    Relation::Worse => "worse",
                    Relation::Indistinguishable => "indistinguishable",
                    Relation::Inconclusive => "inconclusive",
                },
            ));
        }
    }
    if !report.aborted_datasets.is_empty() {
        out.push_str("\naborted datasets:\n");
        for failure in &report.aborted_datasets {
            out.push_str(&format!("  {failure}\n"));
        }
    }
    out
}

fn pretty_size(decimal: &str) -> String {
    if decimal.len() <= 12 {
        decimal.to_string()
    } else {
        let value: BigUint = decimal.parse().expect("decimal size");
        format!("~1e{:.0}", biguint_log10(&value))
    }
}

fn truncate(text: &str, max: usize) -> String {
    if text.len() <= max {
        text.to_string()
    } else {
        format!("{}…", &text[..max - 1])
    }
}

/// Outcome of a paired pointer/linear run under one seed.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub schema_version: u32,
    pub seed: u64,
    pub generations: usize,
    pub pop_size: usize,
    /// Largest relative deviation of per-generation best train RMSE.
    pub max_rmse_rel_deviation: f64,
    /// Deviation above the warning threshold but below the hard limit.
    pub warning: bool,
    /// Largest relative deviation between the final best individuals' cached
    /// training semantics, elementwise.
    pub max_semantics_rel_deviation: f64,
    pub gsgp_exact_size: String,
    pub red_node_count: usize,
    pub red_term_count: usize,
    /// log10(exact size) - log10(reduced node count).
    pub size_magnitude_gap: f64,
    /// (generation, individual) pairs where the reduced node count exceeded
    /// the pointer engine's exact size. The flattening convention pays a
    /// fixed 2-node coefficient wrapper per term, so initial individuals
    /// (+2) and mutation offspring of near-initial parents (+4 before any
    /// merge savings) exceed the pointer size until aggregation has material
    /// to merge; after the startup transient the reduced form dominates.
    pub size_dominance_violations: usize,
    /// Last generation containing such a violation, if any.
    pub last_dominance_violation_generation: Option<usize>,
}

fn relative_deviation(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if !a.is_finite() || !b.is_finite() {
        return f64::INFINITY;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Runs the pointer-based and linear-combination engines in lockstep under
/// one seed and quantifies how far apart they are. Semantically they must
/// agree; the report captures how tightly, plus the size reduction.
pub fn verify_equivalence(
    seed: u64,
    config: &GsgpConfig,
    train: &Dataset,
    test: &Dataset,
) -> Result<EquivalenceReport, BenchError> {
    let cfg = GsgpConfig {
        seed,
        ..config.clone()
    };
    let mut pointer = SemanticEvolution::new(PointerRepresentation, cfg.clone(), train, test)?;
    let mut linear = SemanticEvolution::new(RedRepresentation::new(), cfg.clone(), train, test)?;

    let mut max_deviation = 0.0f64;
    let mut first_divergence: Option<(usize, f64)> = None;
    let mut dominance_violations = 0usize;
    let mut last_violation_generation = None;

    for generation in 0..=cfg.generations {
        if generation > 0 {
            pointer.step();
            linear.step();
        }
        let a = pointer.records()[generation].best_train_rmse;
        let b = linear.records()[generation].best_train_rmse;
        let deviation = relative_deviation(a, b);
        max_deviation = max_deviation.max(deviation);
        if deviation > EQUIVALENCE_HARD_LIMIT && first_divergence.is_none() {
            first_divergence = Some((generation, deviation));
        }
        for (p, l) in pointer.population().iter().zip(linear.population()) {
            if BigUint::from(red_node_count(l)) > p.exact_size {
                dominance_violations += 1;
                last_violation_generation = Some(generation);
            }
        }
    }

    if let Some((generation, deviation)) = first_divergence {
        return Err(EquivalenceError {
            generation,
            deviation,
        }
        .into());
    }

    let best_pointer = &pointer.population()[pointer.best()];
    let best_linear = &linear.population()[linear.best()];
    let max_semantics_rel_deviation = best_pointer
        .train_semantics
        .iter()
        .zip(best_linear.train_semantics.as_slice())
        .map(|(a, b)| relative_deviation(*a, *b))
        .fold(0.0f64, f64::max);

    let reduced = red_node_count(best_linear);
    let size_magnitude_gap =
        biguint_log10(&best_pointer.exact_size) - (reduced as f64).log10();

    Ok(EquivalenceReport {
        schema_version: REPORT_SCHEMA_VERSION,
        seed,
        generations: cfg.generations,
        pop_size: cfg.pop_size,
        max_rmse_rel_deviation: max_deviation,
        warning: max_deviation > EQUIVALENCE_WARN_LIMIT,
        max_semantics_rel_deviation,
        gsgp_exact_size: best_pointer.exact_size.to_string(),
        red_node_count: reduced,
        red_term_count: best_linear.term_count(),
        size_magnitude_gap,
        size_dominance_violations: dominance_violations,
        last_dominance_violation_generation: last_violation_generation,
    })
}
