//! A small cross-validated benchmark of all three engines on two synthetic
//! datasets, with medians and Wilcoxon comparisons.
//!
//! ```bash
//! cargo run -p gsgp-red --example cv_benchmark
//! ```

use std::io::Write;
use std::path::PathBuf;

use gsgp_red::bench::{render_tables, run_suite, DatasetSpec, SuiteConfig};
use gsgp_red::data::{synthetic, Dataset, TargetColumn};
use gsgp_red::engine::{EngineKind, GpConfig, GsgpConfig};

fn write_csv(dir: &std::path::Path, name: &str, dataset: &Dataset) -> PathBuf {
    let path = dir.join(name);
    let mut file = std::fs::File::create(&path).expect("temp file");
    for (row, y) in dataset.rows().iter().zip(dataset.target()) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(file, "{},{}", cells.join(","), y).unwrap();
    }
    path
}

fn main() {
    let dir = std::env::temp_dir().join(format!("gsgp_red_cv_benchmark_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let a = write_csv(&dir, "product_plus_term.csv", &synthetic::product_plus_term(60, 1, 0.05));
    let b = write_csv(&dir, "damped_ratio.csv", &synthetic::damped_ratio(60, 2, 0.05));

    let config = SuiteConfig {
        datasets: vec![
            DatasetSpec { path: a, target: TargetColumn::Last },
            DatasetSpec { path: b, target: TargetColumn::Last },
        ],
        engines: vec![EngineKind::Gp, EngineKind::Gsgp, EngineKind::GsgpRed],
        folds: 3,
        repeats_per_fold: 2,
        base_seed: 17,
        gp: GpConfig {
            pop_size: 40,
            generations: 15,
            ..GpConfig::default()
        },
        gsgp: GsgpConfig {
            pop_size: 40,
            generations: 15,
            ..GsgpConfig::default()
        },
        workers: 2,
    };
    println!(
        "3-fold x 2 repeats, {} runs per engine per dataset, workers {}\n",
        config.folds * config.repeats_per_fold,
        config.workers
    );

    let report = run_suite(&config).expect("suite runs");
    print!("{}", render_tables(&report));

    std::fs::remove_dir_all(dir).ok();
}
