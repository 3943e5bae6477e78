//! Expansion and aggregation on a tiny population, step by step.
//!
//! Three single-term individuals are lifted, then one crossover and two
//! mutations are applied. The second mutation draws a random tree that is
//! structurally identical to its parent's function, so aggregation merges
//! the two terms by summing their coefficients.
//!
//! ```bash
//! cargo run -p gsgp-red --example expansion_aggregation
//! ```

use gsgp_red::engine::red::{aggregate, expand_gsm, expand_gsx, lift_initial, LinearIndividual, TreeStore};
use gsgp_red::engine::semantic::RandomTree;
use gsgp_red::expr::{infix, Expr, Op};

fn show(label: &str, individual: &LinearIndividual) {
    println!("{label}:");
    for (_, term) in individual.terms() {
        println!("  {:+.3} x {}", term.coefficient, infix(&term.function));
    }
    println!();
}

fn main() {
    let rows = vec![vec![1.6, 0.6], vec![0.5, 2.0], vec![-0.25, 1.0]];
    let mut store = TreeStore::new();

    let p1 = lift_initial(
        Expr::func(Op::Aq, Expr::variable(0), Expr::variable(1)),
        &mut store,
        &rows,
    );
    let p2 = lift_initial(
        Expr::func(Op::Add, Expr::variable(1), Expr::constant(0.4)),
        &mut store,
        &rows,
    );
    let p3 = lift_initial(
        Expr::func(Op::Sub, Expr::variable(0), Expr::constant(0.6)),
        &mut store,
        &rows,
    );
    show("p1 (lifted)", &p1);
    show("p2 (lifted)", &p2);
    show("p3 (lifted)", &p3);

    println!("--- crossover of p2 and p3 with k = 0.3 ---\n");
    let crossed = aggregate(expand_gsx(&p2, &p3, 0.3));
    show("k*p2 + (1-k)*p3", &crossed);

    println!("--- mutation of p1, step 0.1, random trees x0 and 2*x1 ---\n");
    let rm = RandomTree::evaluate(Expr::variable(0), &rows);
    let rn = RandomTree::evaluate(
        Expr::func(Op::Mul, Expr::constant(2.0), Expr::variable(1)),
        &rows,
    );
    let mutated = aggregate(expand_gsm(&p1, 0.1, &rm, &rn, &mut store));
    show("p1 + 0.1*(x0 - 2*x1)", &mutated);

    println!("--- mutation of p3 whose first random tree equals (x0 - 0.6) ---\n");
    let rm = RandomTree::evaluate(
        Expr::func(Op::Sub, Expr::variable(0), Expr::constant(0.6)),
        &rows,
    );
    let rn = RandomTree::evaluate(
        Expr::func(Op::Mul, Expr::variable(0), Expr::variable(1)),
        &rows,
    );
    let expansion = expand_gsm(&p3, 0.1, &rm, &rn, &mut store);
    println!("expanded, before aggregation ({} terms):", expansion.terms.len());
    for (_, term) in &expansion.terms {
        println!("  {:+.3} x {}", term.coefficient, infix(&term.function));
    }
    println!();
    let merged = aggregate(expansion);
    show(
        "aggregated: the duplicate merges into a single 1.1 coefficient",
        &merged,
    );

    println!(
        "the store holds {} distinct trees for the whole population",
        store.len()
    );
}
