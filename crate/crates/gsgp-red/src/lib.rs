//! Symbolic regression with geometric semantic operators and reduced trees.
//!
//! Three engines share one evolutionary loop:
//!
//! * **gp** — canonical genetic programming over expression trees (subtree
//!   crossover and mutation), the baseline comparator;
//! * **gsgp** — pointer-based geometric semantic GP: offspring reference
//!   their parents, semantics propagate numerically, and exact node counts
//!   are tracked with big integers because they grow exponentially;
//! * **gsgp-red** — the same search over individuals kept as aggregated
//!   linear combinations: every offspring is expanded into a flat term table
//!   and duplicate functions are merged by summing coefficients. Results are
//!   semantically identical to gsgp while the stored solutions stay smaller
//!   by many orders of magnitude.
//!
//! A cross-validated benchmark harness runs all three engines on shared
//! seeds, reports medians, and applies Wilcoxon signed-rank tests; a paired
//! equivalence check quantifies how tightly the two geometric engines agree.
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```text
//! cargo run -p gsgp-red --example expansion_aggregation   # term tables step by step
//! cargo run -p gsgp-red --example run_gp                  # baseline GP run
//! cargo run -p gsgp-red --example run_gsgp                # pointer GSGP, exponential sizes
//! cargo run -p gsgp-red --example run_gsgp_red            # reduced individuals
//! cargo run -p gsgp-red --example equivalence_check       # paired engines, one seed
//! cargo run -p gsgp-red --example growth_curves           # expected-size formulas vs measurement
//! cargo run -p gsgp-red --example tree_survival           # initial-tree frequency histogram
//! cargo run -p gsgp-red --example cv_benchmark            # small cross-validated suite
//! ```
//!
//! The `gsgp-red` binary exposes the same functionality as subcommands
//! (`run`, `bench`, `analyze-growth`, `verify-equivalence`, `expected-size`);
//! see the README for flags and file formats.

pub mod bench;
pub mod cli;
pub mod data;
pub mod engine;
pub mod expr;
pub mod growth;
pub mod stats;

pub use data::{Dataset, FoldAssignment, TargetColumn};
pub use engine::gp::{run_gp, GpRun};
pub use engine::gsgp::{run_gsgp, GsgpRun, PointerIndividual};
pub use engine::red::{run_gsgp_red, LinearIndividual, RedRun};
pub use engine::{EngineKind, GpConfig, GsgpConfig, RunReport};
pub use expr::{Expr, Op, Semantics};
