//! Paired run of the pointer-based and reduced engines under one seed: the
//! fitness traces agree to the bit, the stored sizes do not.
//!
//! ```bash
//! cargo run -p gsgp-red --example equivalence_check
//! ```

use gsgp_red::bench::verify_equivalence;
use gsgp_red::data::synthetic;
use gsgp_red::engine::GsgpConfig;

fn main() {
    let train = synthetic::damped_ratio(60, 11, 0.0);
    let test = synthetic::damped_ratio(30, 12, 0.0);
    let config = GsgpConfig {
        pop_size: 20,
        generations: 25,
        p_crossover: 0.9,
        p_mutation: 0.1,
        ms_fraction: 0.5,
        ..GsgpConfig::default()
    };

    println!(
        "paired gsgp / gsgp-red on {}: pop {}, {} generations\n",
        train.name(),
        config.pop_size,
        config.generations
    );

    for seed in 1..=5u64 {
        match verify_equivalence(seed, &config, &train, &test) {
            Ok(report) => println!(
                "seed {seed}: max RMSE deviation {:.1e}, exact {} vs reduced {} nodes \
                 ({:.1} orders of magnitude)",
                report.max_rmse_rel_deviation,
                report.gsgp_exact_size,
                report.red_node_count,
                report.size_magnitude_gap,
            ),
            Err(error) => println!("seed {seed}: DIVERGED — {error}"),
        }
    }
}
