//! Which initial trees survive the evolution? After a run, count how many
//! final-population individuals contain each founder as a term: selection
//! collapses the founder set to a small, high-frequency core.
//!
//! ```bash
//! cargo run -p gsgp-red --example tree_survival
//! ```

use gsgp_red::data::synthetic;
use gsgp_red::engine::red::run_gsgp_red;
use gsgp_red::engine::GsgpConfig;
use gsgp_red::growth::initial_tree_frequency;

fn main() {
    let train = synthetic::product_plus_term(60, 21, 0.05);
    let config = GsgpConfig {
        pop_size: 40,
        generations: 30,
        seed: 7,
        ..GsgpConfig::default()
    };
    println!(
        "gsgp-red on {}: pop {}, {} generations\n",
        train.name(),
        config.pop_size,
        config.generations
    );

    let run = run_gsgp_red(&config, &train, &train).expect("valid configuration");
    let histogram = initial_tree_frequency(&run.population);

    println!(
        "{} of {} initial trees survive in the final population",
        histogram.distinct_survivors, config.pop_size
    );
    println!("\ntop survivors (individuals containing the tree):");
    for (key, count) in histogram.counts.iter().take(10) {
        println!("{count:>4}  {key}");
    }
    if histogram.counts.len() > 10 {
        println!("      ... and {} more", histogram.counts.len() - 10);
    }

    println!("\nCSV for plotting:\n{}", histogram.to_csv());
}
