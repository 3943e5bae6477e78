//! Pointer-based GSGP run: watch the exact solution size explode while the
//! search itself stays cheap.
//!
//! ```bash
//! cargo run -p gsgp-red --example run_gsgp
//! ```

use gsgp_red::data::synthetic;
use gsgp_red::engine::gsgp::{reconstruct, run_gsgp};
use gsgp_red::engine::GsgpConfig;

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
        "gsgp on {}: pop {}, {} generations, seed {}\n",
        train.name(),
        config.pop_size,
        config.generations,
        config.seed
    );

    let run = run_gsgp(&config, &train, &test).expect("valid configuration");
    for record in run.report.generations.iter().step_by(5) {
        println!(
            "gen {:>3}: best train RMSE {:.5}  (exact size {} nodes)",
            record.generation, record.best_train_rmse, record.best_size
        );
    }
    println!(
        "\nbest: train RMSE {:.5}, test RMSE {:.5}, exact size {} nodes",
        run.report.best.train_rmse, run.report.best.test_rmse, run.report.best.size
    );

    // materializing the tree is refused once it would not fit the budget
    match reconstruct(&run.population[run.best], 10_000) {
        Ok(tree) => println!("reconstructed: {}", gsgp_red::expr::infix(&tree)),
        Err(refusal) => println!("{refusal}"),
    }
}
