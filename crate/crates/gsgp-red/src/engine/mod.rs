//! Evolutionary engines: canonical GP, pointer-based GSGP, and the
//! linear-combination variant that expands and aggregates every offspring.
//!
//! All three engines share the same generational shape: ramped half-and-half
//! initialization, tournament selection with replacement, mutually exclusive
//! crossover/mutation per offspring, and elitism of one. A run is strictly
//! sequential and fully determined by its seed.

pub mod gp;
pub mod gsgp;
pub mod red;
pub mod semantic;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::DataError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("train and test sets disagree on feature count ({train} vs {test})")]
    FeatureMismatch { train: usize, test: usize },
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Which engine a run or a benchmark row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EngineKind {
    Gp,
    Gsgp,
    GsgpRed,
}

impl EngineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EngineKind::Gp => "gp",
            EngineKind::Gsgp => "gsgp",
            EngineKind::GsgpRed => "gsgp-red",
        }
    }

    pub fn parse(text: &str) -> Option<EngineKind> {
        match text {
            "gp" => Some(EngineKind::Gp),
            "gsgp" => Some(EngineKind::Gsgp),
            "gsgp-red" => Some(EngineKind::GsgpRed),
            _ => None,
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Settings for the canonical GP engine.
///
/// Crossover and mutation are mutually exclusive per offspring, so the two
/// probabilities must sum to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GpConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub max_depth: usize,
    pub erc_range: (f64, f64),
    pub seed: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            pop_size: 1000,
            generations: 250,
            tournament_size: 7,
            p_crossover: 0.9,
            p_mutation: 0.1,
            max_depth: 6,
            erc_range: (-1.0, 1.0),
            seed: 0,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        validate_common(
            self.pop_size,
            self.tournament_size,
            self.p_crossover,
            self.p_mutation,
            self.max_depth,
            self.erc_range,
        )
    }
}

/// Settings shared by the two geometric semantic engines.
///
/// The mutation step is `ms_fraction` times the population standard deviation
/// of the training target, fixed once per run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GsgpConfig {
    pub pop_size: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub max_depth: usize,
    pub erc_range: (f64, f64),
    pub ms_fraction: f64,
    pub seed: u64,
}

impl Default for GsgpConfig {
    fn default() -> Self {
        GsgpConfig {
            pop_size: 1000,
            generations: 250,
            tournament_size: 10,
            p_crossover: 0.5,
            p_mutation: 0.5,
            max_depth: 6,
            erc_range: (-1.0, 1.0),
            ms_fraction: 0.1,
            seed: 0,
        }
    }
}

impl GsgpConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        validate_common(
            self.pop_size,
            self.tournament_size,
            self.p_crossover,
            self.p_mutation,
            self.max_depth,
            self.erc_range,
        )?;
        if self.p_mutation > 0.0 && !(self.ms_fraction > 0.0 && self.ms_fraction.is_finite()) {
            return Err(EngineError::Config(
                "ms_fraction must be a positive number when mutation is enabled".into(),
            ));
        }
        Ok(())
    }
}

fn validate_common(
    pop_size: usize,
    tournament_size: usize,
    p_crossover: f64,
    p_mutation: f64,
    max_depth: usize,
    erc_range: (f64, f64),
) -> Result<(), EngineError> {
    if pop_size < 2 {
        return Err(EngineError::Config("pop_size must be at least 2".into()));
    }
    if tournament_size < 1 || tournament_size > pop_size {
        return Err(EngineError::Config(format!(
            "tournament_size must be in [1, {pop_size}]"
        )));
    }
    if !(0.0..=1.0).contains(&p_crossover) || !(0.0..=1.0).contains(&p_mutation) {
        return Err(EngineError::Config(
            "operator probabilities must lie in [0, 1]".into(),
        ));
    }
    if (p_crossover + p_mutation - 1.0).abs() > 1e-9 {
        return Err(EngineError::Config(
            "p_crossover + p_mutation must equal 1 (operators are mutually exclusive)".into(),
        ));
    }
    if max_depth < 1 {
        return Err(EngineError::Config("max_depth must be at least 1".into()));
    }
    if !(erc_range.0.is_finite() && erc_range.1.is_finite() && erc_range.0 <= erc_range.1) {
        return Err(EngineError::Config(
            "erc_range must be a finite, ordered interval".into(),
        ));
    }
    Ok(())
}

/// Tournament selection with replacement: draws `k` indices uniformly and
/// returns the one with minimal fitness; ties go to the earliest draw.
pub fn tournament_select(fitness: &[f64], k: usize, rng: &mut impl Rng) -> usize {
    assert!(!fitness.is_empty() && k >= 1);
    let mut winner = rng.gen_range(0..fitness.len());
    for _ in 1..k {
        let challenger = rng.gen_range(0..fitness.len());
        if fitness[challenger] < fitness[winner] {
            winner = challenger;
        }
    }
    winner
}

/// Stable argmin: lowest index among equals. Individuals holding the
/// worst-fitness sentinel (infinity) only win if everything else does too.
pub(crate) fn best_index(fitness: &[f64]) -> usize {
    let mut best = 0;
    for (i, f) in fitness.iter().enumerate().skip(1) {
        if *f < fitness[best] {
            best = i;
        }
    }
    best
}

/// Training fitness with the overflow policy all engines share: a semantics
/// vector that overflowed (or an RMSE that does) gets the infinity sentinel
/// so it loses every tournament against a finite competitor.
pub(crate) fn fitness_or_sentinel(predicted: &[f64], target: &[f64]) -> f64 {
    let value = crate::data::rmse_unchecked(predicted, target);
    if value.is_finite() {
        value
    } else {
        f64::INFINITY
    }
}

/// Per-generation progress snapshot. `best_size` is a decimal string because
/// pointer-based GSGP sizes exceed any native integer width.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_train_rmse: f64,
    pub best_size: String,
    pub elapsed_secs: f64,
}

/// One term of an exported linear combination.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermExport {
    pub coefficient: f64,
    pub key: String,
    pub function: String,
}

/// Final-individual summary attached to a run report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestSummary {
    pub train_rmse: f64,
    pub test_rmse: f64,
    /// Node count as a decimal string (exact even when astronomically large).
    pub size: String,
    /// Number of linear-combination terms; present only for gsgp-red.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_count: Option<usize>,
    /// Infix rendering when the expression is materialized in the report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    /// Term table for external simplifiers; present only for gsgp-red.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub term_table: Option<Vec<TermExport>>,
}

/// Serializable result of a single run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub engine: EngineKind,
    pub dataset: String,
    pub seed: u64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub num_features: usize,
    pub generations: Vec<GenerationRecord>,
    pub best: BestSummary,
    pub wall_time_secs: f64,
}

impl RunReport {
    /// Equality ignoring wall-clock fields, for determinism checks.
    pub fn same_outcome(&self, other: &RunReport) -> bool {
        self.engine == other.engine
            && self.seed == other.seed
            && self.generations.len() == other.generations.len()
            && self
                .generations
                .iter()
                .zip(&other.generations)
                .all(|(a, b)| {
                    a.generation == b.generation
                        && a.best_train_rmse.to_bits() == b.best_train_rmse.to_bits()
                        && a.best_size == b.best_size
                })
            && self.best.train_rmse.to_bits() == other.best.train_rmse.to_bits()
            && self.best.test_rmse.to_bits() == other.best.test_rmse.to_bits()
            && self.best.size == other.best.size
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_configs_validate() {
        GpConfig::default().validate().unwrap();
        GsgpConfig::default().validate().unwrap();
    }

    #[test]
    fn probability_split_must_sum_to_one() {
        let cfg = GpConfig {
            p_crossover: 0.9,
            p_mutation: 0.2,
            ..GpConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn degenerate_tournament_is_uniform() {
        let fitness = vec![5.0, 1.0, 3.0, 2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [0usize; 4];
        for _ in 0..4000 {
            seen[tournament_select(&fitness, 1, &mut rng)] += 1;
        }
        for count in seen {
            assert!((800..1200).contains(&count), "k=1 should ignore fitness: {seen:?}");
        }
    }

    #[test]
    fn tournament_ties_go_to_the_earliest_draw() {
        let fitness = vec![2.0, 2.0, 2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut probe = rng.clone();
        let first_draw = probe.gen_range(0..fitness.len());
        assert_eq!(tournament_select(&fitness, 3, &mut rng), first_draw);
    }

    #[test]
    fn tournament_selection_frequency_is_monotone_in_rank() {
        // pop 10, k 7: best rank should dominate, with a fat head and a thin tail
        let fitness: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut wins = [0usize; 10];
        for _ in 0..10_000 {
            wins[tournament_select(&fitness, 7, &mut rng)] += 1;
        }
        for rank in 0..6 {
            assert!(
                wins[rank] >= wins[rank + 1],
                "selection frequency not monotone: {wins:?}"
            );
        }
        // with replacement the best can still be missed
        assert!(wins[0] < 10_000);
        assert!(wins[7..].iter().all(|w| *w <= wins[6]));
    }

    #[test]
    fn sentinel_fitness_for_overflowed_semantics() {
        assert_eq!(
            fitness_or_sentinel(&[f64::INFINITY, 0.0], &[0.0, 0.0]),
            f64::INFINITY
        );
        assert_eq!(
            fitness_or_sentinel(&[f64::NAN, 0.0], &[0.0, 0.0]),
            f64::INFINITY
        );
        assert_eq!(fitness_or_sentinel(&[3.0, 4.0], &[3.0, 4.0]), 0.0);
    }
}
