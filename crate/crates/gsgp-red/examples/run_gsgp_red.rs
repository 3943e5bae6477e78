//! GSGP with reduced trees: same search as the pointer engine, but the best
//! individual comes out as a compact, printable linear combination.
//!
//! ```bash
//! cargo run -p gsgp-red --example run_gsgp_red
//! ```

use gsgp_red::data::synthetic;
use gsgp_red::engine::red::{red_node_count, run_gsgp_red, to_expression};
use gsgp_red::engine::GsgpConfig;
use gsgp_red::expr::infix;

fn main() {
    let train = synthetic::damped_ratio(80, 1, 0.05);
    let test = synthetic::damped_ratio(40, 2, 0.05);

    let config = GsgpConfig {
        pop_size: 50,
        generations: 40,
        seed: 42,
        ..GsgpConfig::default()
    };
    println!(
        "gsgp-red on {}: pop {}, {} generations, seed {}\n",
        train.name(),
        config.pop_size,
        config.generations,
        config.seed
    );

    let run = run_gsgp_red(&config, &train, &test).expect("valid configuration");
    for record in run.report.generations.iter().step_by(5) {
        println!(
            "gen {:>3}: best train RMSE {:.5}  ({} nodes)",
            record.generation, record.best_train_rmse, record.best_size
        );
    }

    let best = &run.population[run.best];
    println!(
        "\nbest: train RMSE {:.5}, test RMSE {:.5}, {} nodes across {} terms",
        run.report.best.train_rmse,
        run.report.best.test_rmse,
        red_node_count(best),
        best.term_count(),
    );
    println!(
        "store: {} distinct trees shared across the whole run\n",
        run.store.len()
    );

    println!("term table of the best individual:");
    for (_, term) in best.terms().take(12) {
        println!("  {:+.4} x {}", term.coefficient, infix(&term.function));
    }
    if best.term_count() > 12 {
        println!("  ... and {} more terms", best.term_count() - 12);
    }

    let flat = to_expression(best);
    let text = infix(&flat);
    if text.len() <= 500 {
        println!("\nflattened: {text}");
    } else {
        println!("\nflattened expression is {} characters", text.len());
    }
}
