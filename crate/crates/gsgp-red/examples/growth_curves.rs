//! Expected solution sizes: closed-form curves against Monte-Carlo
//! measurements of the actual operators.
//!
//! ```bash
//! cargo run -p gsgp-red --example growth_curves
//! ```

use gsgp_red::data::Dataset;
use gsgp_red::engine::gsgp::{
    gsm, gsx_e, PointerRef, PointerRepresentation, CROSSOVER_EXTRA_NODES, MUTATION_EXTRA_NODES,
};
use gsgp_red::engine::semantic::{RandomTree, Representation, RunContext};
use gsgp_red::expr;
use gsgp_red::growth::{
    expected_size_gsm, expected_size_gsx_e, expected_size_gsx_e_log10, expected_size_gsx_m,
    GrowthParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let rows = vec![vec![0.5, -0.5, 0.25], vec![1.0, 0.0, -1.0]];
    let train = Dataset::new("mc", rows.clone(), vec![0.0, 1.0]).unwrap();
    let ctx = RunContext {
        train: &train,
        test: &train,
    };
    let erc = (-1.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    // pools of initial individuals and random functions; their means are the
    // measured formula parameters
    let mut repr = PointerRepresentation;
    let initials: Vec<PointerRef> = expr::ramped_half_and_half(2048, 6, 3, erc, &mut rng)
        .into_iter()
        .map(|tree| {
            let values = expr::semantics(&tree, &rows).unwrap().0;
            repr.lift(&tree, values, &ctx)
        })
        .collect();
    let randoms: Vec<RandomTree> = (0..4096)
        .map(|_| RandomTree::evaluate(expr::grow(6, 3, erc, &mut rng), &rows))
        .collect();
    let e_p0 = initials
        .iter()
        .map(|i| i.exact_size.to_string().parse::<f64>().unwrap())
        .sum::<f64>()
        / initials.len() as f64;
    let e_r = randoms
        .iter()
        .map(|r| expr::node_count(&r.tree) as f64)
        .sum::<f64>()
        / randoms.len() as f64;
    println!("measured E[P0] = {e_p0:.2}, E[r] = {e_r:.2}\n");

    let params = |g: u32| GrowthParams {
        e_p0,
        e_r,
        a: MUTATION_EXTRA_NODES as u32,
        b: CROSSOVER_EXTRA_NODES as u32,
        c: 4,
        g,
    };

    println!("mutation only (200 lineages per row):");
    println!("{:>4} {:>14} {:>14}", "g", "expected", "measured");
    for g in [0u32, 5, 10, 20] {
        let mut total = 0.0;
        for _ in 0..200 {
            let mut individual = initials[rng.gen_range(0..initials.len())].clone();
            for _ in 0..g {
                let rm = &randoms[rng.gen_range(0..randoms.len())];
                let rn = &randoms[rng.gen_range(0..randoms.len())];
                individual = gsm(&individual, 0.1, rm, rn, &rows);
            }
            total += individual.exact_size.to_string().parse::<f64>().unwrap();
        }
        println!(
            "{:>4} {:>14.1} {:>14.1}",
            g,
            expected_size_gsm(&params(g)),
            total / 200.0
        );
    }

    println!("\ncrossover only (100 full-binary lineages per row):");
    println!("{:>4} {:>14} {:>14}", "g", "expected", "measured");
    for g in [0u32, 4, 8, 10] {
        let mut total = 0.0;
        for _ in 0..100 {
            let root = lineage(g, &mut rng, &initials);
            total += root.exact_size.to_string().parse::<f64>().unwrap();
        }
        println!(
            "{:>4} {:>14.1} {:>14.1}",
            g,
            expected_size_gsx_e(&params(g)),
            total / 100.0
        );
    }

    println!("\nextrapolated to long runs (formula only):");
    for g in [50u32, 100, 250] {
        println!(
            "  g = {:>3}: crossover ~1e{:.1}, Manhattan variant ~{:.3e}",
            g,
            expected_size_gsx_e_log10(&params(g)),
            expected_size_gsx_m(&params(g)),
        );
    }
}

fn lineage(depth: u32, rng: &mut ChaCha8Rng, initials: &[PointerRef]) -> PointerRef {
    if depth == 0 {
        return initials[rng.gen_range(0..initials.len())].clone();
    }
    let first = lineage(depth - 1, rng, initials);
    let second = lineage(depth - 1, rng, initials);
    gsx_e(&first, &second, rng.gen())
}
