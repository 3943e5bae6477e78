//! Baseline GP run on a synthetic regression problem.
//!
//! ```bash
//! cargo run -p gsgp-red --example run_gp
//! ```

use gsgp_red::data::synthetic;
use gsgp_red::engine::gp::run_gp;
use gsgp_red::engine::GpConfig;

fn main() {
    let train = synthetic::product_plus_term(80, 1, 0.05);
    let test = synthetic::product_plus_term(40, 2, 0.05);

    let config = GpConfig {
        pop_size: 100,
        generations: 40,
        seed: 42,
        ..GpConfig::default()
    };
    println!(
        "gp on {}: pop {}, {} generations, tournament {}, seed {}\n",
        train.name(),
        config.pop_size,
        config.generations,
        config.tournament_size,
        config.seed
    );

    let run = run_gp(&config, &train, &test).expect("valid configuration");
    for record in run.report.generations.iter().step_by(5) {
        println!(
            "gen {:>3}: best train RMSE {:.5}  ({} nodes)",
            record.generation, record.best_train_rmse, record.best_size
        );
    }
    println!(
        "\nbest: train RMSE {:.5}, test RMSE {:.5}, {} nodes",
        run.report.best.train_rmse, run.report.best.test_rmse, run.report.best.size
    );
    println!(
        "expression: {}",
        run.report.best.expression.as_deref().unwrap_or("-")
    );
}
