//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them on success). Every tolerance is fixed
//! in code; nothing is calibrated at runtime.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigUint;

use gsgp_red::bench::{verify_equivalence, EQUIVALENCE_WARN_LIMIT};
use gsgp_red::data::{synthetic, Dataset};
use gsgp_red::engine::gp::run_gp;
use gsgp_red::engine::gsgp::{
    gsx_e, reconstruct, run_gsgp, Origin, PointerRef, PointerRepresentation,
    CROSSOVER_EXTRA_NODES, MUTATION_EXTRA_NODES,
};
use gsgp_red::engine::red::{
    aggregate, expand_gsm, expand_gsx, lift_initial, red_semantics, Expansion, FnSource,
    TermEntry, TreeStore,
};
use gsgp_red::engine::semantic::{RandomTree, RunContext, Representation, SemanticEvolution};
use gsgp_red::engine::{GpConfig, GsgpConfig};
use gsgp_red::expr::{self, canonical_key, node_count, Expr, Op};
use gsgp_red::growth::{expected_size_gsm, expected_size_gsx_e, GrowthParams};
use gsgp_red::stats::{median_f64, wilcoxon_signed_rank, WilcoxonDecision};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn finish(criterion: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed <= budget,
        "{criterion}: exceeded the runtime budget ({elapsed:?} > {budget:?})"
    );
    println!("acceptance {criterion}: PASS ({elapsed:?})");
}

// -- criterion 1 -------------------------------------------------------------
// Lifting three initial individuals, one crossover and two mutations must
// reproduce the coefficient vectors [0.3, 0.7], [1, 0.1, -0.1], [1.1, -0.1]
// bit-exactly, with the duplicated function merged.
#[test]
fn acceptance_1_worked_example_golden() {
    let started = Instant::now();

    let rows = vec![vec![1.6, 0.6], vec![0.5, 2.0], vec![-0.25, 1.0]];
    let mut store = TreeStore::new();

    // x0/x1 analog, x1 + 0.4, x0 - 0.6
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
    for lifted in [&p1, &p2, &p3] {
        assert_eq!(lifted.coefficients(), vec![1.0]);
    }

    // crossover of p2 and p3 with k = 0.3
    let crossed = aggregate(expand_gsx(&p2, &p3, 0.3));
    assert_coefficients_bit_equal(&crossed.coefficients(), &[0.3, 0.7]);

    // mutation of p1 with step 0.1, random trees x0 and 2 * x1
    let rm = RandomTree::evaluate(Expr::variable(0), &rows);
    let rn = RandomTree::evaluate(
        Expr::func(Op::Mul, Expr::constant(2.0), Expr::variable(1)),
        &rows,
    );
    let mutated = aggregate(expand_gsm(&p1, 0.1, &rm, &rn, &mut store));
    assert_coefficients_bit_equal(&mutated.coefficients(), &[1.0, 0.1, -0.1]);

    // mutation of p3 whose first random tree regenerates (x0 - 0.6)
    let rm = RandomTree::evaluate(
        Expr::func(Op::Sub, Expr::variable(0), Expr::constant(0.6)),
        &rows,
    );
    let rn = RandomTree::evaluate(
        Expr::func(Op::Mul, Expr::variable(0), Expr::variable(1)),
        &rows,
    );
    let expansion = expand_gsm(&p3, 0.1, &rm, &rn, &mut store);
    assert_eq!(expansion.terms.len(), 3);
    let merged = aggregate(expansion);
    assert_eq!(merged.term_count(), 2, "the duplicate (x0 - 0.6) must merge");
    assert_coefficients_bit_equal(&merged.coefficients(), &[1.1, -0.1]);
    let first_key = merged.terms().next().unwrap().0.clone();
    assert_eq!(
        &*first_key,
        canonical_key(&Expr::func(Op::Sub, Expr::variable(0), Expr::constant(0.6))).as_str()
    );

    finish("1 (worked-example golden test)", started, Duration::from_secs(1));
}

fn assert_coefficients_bit_equal(got: &[f64], expected: &[f64]) {
    assert_eq!(got.len(), expected.len(), "term counts: {got:?} vs {expected:?}");
    for (g, e) in got.iter().zip(expected) {
        assert_eq!(
            g.to_bits(),
            e.to_bits(),
            "coefficient {g:?} is not bit-equal to {e:?} (full vectors {got:?} vs {expected:?})"
        );
    }
}

// -- criterion 2 -------------------------------------------------------------
// Paired pointer/linear runs over 5 seeds x 2 synthetic datasets agree on
// per-generation best train RMSE within relative 1e-9.
#[test]
fn acceptance_2_paired_semantic_equivalence() {
    let started = Instant::now();
    let config = GsgpConfig {
        pop_size: 50,
        generations: 25,
        ..GsgpConfig::default()
    };
    let datasets = [
        (
            synthetic::product_plus_term(100, 2001, 0.05),
            synthetic::product_plus_term(50, 2002, 0.05),
        ),
        (
            synthetic::damped_ratio(100, 2003, 0.05),
            synthetic::damped_ratio(50, 2004, 0.05),
        ),
    ];
    for (train, test) in &datasets {
        for seed in 1..=5u64 {
            let report = verify_equivalence(seed, &config, train, test)
                .expect("deviation above 1e-6 is a hard failure");
            assert!(
                report.max_rmse_rel_deviation <= EQUIVALENCE_WARN_LIMIT,
                "seed {seed} on {}: deviation {:.3e} above 1e-9",
                train.name(),
                report.max_rmse_rel_deviation
            );
        }
    }
    finish("2 (paired semantic equivalence)", started, Duration::from_secs(120));
}

// -- criterion 3 -------------------------------------------------------------
// In a crossover-only run every offspring's exact size equals
// size(p1) + size(p2) + 5 as integers, and reconstruction under budget
// materializes exactly that many nodes.
#[test]
fn acceptance_3_exact_size_recurrence() {
    let started = Instant::now();
    let train = synthetic::product_plus_term(40, 3001, 0.0);
    let config = GsgpConfig {
        pop_size: 20,
        generations: 8,
        tournament_size: 10,
        p_crossover: 1.0,
        p_mutation: 0.0,
        seed: 5,
        ..GsgpConfig::default()
    };
    let mut evolution =
        SemanticEvolution::new(PointerRepresentation, config.clone(), &train, &train).unwrap();
    let mut offspring_checked = 0usize;
    for _ in 0..config.generations {
        evolution.step();
        for individual in evolution.population() {
            if let Origin::Crossover { first, second, .. } = &individual.origin {
                assert_eq!(
                    individual.exact_size,
                    &first.exact_size
                        + &second.exact_size
                        + BigUint::from(CROSSOVER_EXTRA_NODES),
                    "crossover size recurrence broken"
                );
                offspring_checked += 1;
            }
        }
    }
    assert!(offspring_checked >= 100, "only {offspring_checked} offspring seen");

    let best = &evolution.population()[evolution.best()];
    let tree = reconstruct(best, 5_000_000).expect("desk-scale best fits the budget");
    assert_eq!(BigUint::from(node_count(&tree)), best.exact_size);

    finish("3 (exact size recurrence)", started, Duration::from_secs(30));
}

// -- criterion 4 -------------------------------------------------------------
// Monte-Carlo lineages with measured expected sizes stay within 5% of the
// closed-form expected-size formulas.
#[test]
fn acceptance_4_expected_size_formulas() {
    let started = Instant::now();
    let rows = vec![vec![0.5, -0.5, 0.25], vec![1.0, 0.0, -1.0]];
    let train = Dataset::new("mc", rows.clone(), vec![0.0, 1.0]).unwrap();
    let ctx = RunContext {
        train: &train,
        test: &train,
    };
    let erc = (-1.0, 1.0);
    let vars = train.d();

    // E[P0] and E[r] measured from generated populations; lineages resample
    // those same pools so the parameters describe exactly the distribution
    // the lineages draw from
    let mut rng = ChaCha8Rng::seed_from_u64(4000);
    let initial_pool: Vec<PointerRef> = {
        let mut repr = PointerRepresentation;
        expr::ramped_half_and_half(4096, 6, vars, erc, &mut rng)
            .into_iter()
            .map(|tree| {
                let values = expr::semantics(&tree, &rows).unwrap().0;
                repr.lift(&tree, values, &ctx)
            })
            .collect()
    };
    let random_pool: Vec<RandomTree> = (0..8192)
        .map(|_| RandomTree::evaluate(expr::grow(6, vars, erc, &mut rng), &rows))
        .collect();
    let e_p0 = initial_pool
        .iter()
        .map(|ind| biguint_to_f64(&ind.exact_size))
        .sum::<f64>()
        / initial_pool.len() as f64;
    let e_r = random_pool
        .iter()
        .map(|r| node_count(&r.tree) as f64)
        .sum::<f64>()
        / random_pool.len() as f64;

    // mutation-only lineages, g = 20
    let gsm_generations = 20u32;
    let mut rng = ChaCha8Rng::seed_from_u64(4100);
    let mut total = 0.0f64;
    let lineages = 200;
    for _ in 0..lineages {
        let mut individual = initial_pool[rng.gen_range(0..initial_pool.len())].clone();
        for _ in 0..gsm_generations {
            let rm = &random_pool[rng.gen_range(0..random_pool.len())];
            let rn = &random_pool[rng.gen_range(0..random_pool.len())];
            individual = gsgp_red::engine::gsgp::gsm(&individual, 0.1, rm, rn, &rows);
        }
        total += biguint_to_f64(&individual.exact_size);
    }
    let observed_gsm = total / lineages as f64;
    let expected_gsm = expected_size_gsm(&GrowthParams {
        e_p0,
        e_r,
        a: MUTATION_EXTRA_NODES as u32,
        b: CROSSOVER_EXTRA_NODES as u32,
        c: 4,
        g: gsm_generations,
    });
    let gsm_error = (observed_gsm - expected_gsm).abs() / expected_gsm;
    println!(
        "criterion 4 detail: mutation sizes {observed_gsm:.1} vs {expected_gsm:.1} ({:.2}%)",
        100.0 * gsm_error
    );
    assert!(
        gsm_error <= 0.05,
        "mutation sizes: observed {observed_gsm:.1} vs expected {expected_gsm:.1} ({:.1}%)",
        100.0 * gsm_error
    );

    // crossover-only full-binary lineages, g = 10
    let gsx_generations = 10u32;
    let mut total = 0.0f64;
    for _ in 0..lineages {
        let root = crossover_lineage(gsx_generations, &mut rng, &initial_pool);
        total += biguint_to_f64(&root.exact_size);
    }
    let observed_gsx = total / lineages as f64;
    let expected_gsx = expected_size_gsx_e(&GrowthParams {
        e_p0,
        e_r,
        a: MUTATION_EXTRA_NODES as u32,
        b: CROSSOVER_EXTRA_NODES as u32,
        c: 4,
        g: gsx_generations,
    });
    let gsx_error = (observed_gsx - expected_gsx).abs() / expected_gsx;
    println!(
        "criterion 4 detail: crossover sizes {observed_gsx:.1} vs {expected_gsx:.1} ({:.2}%)",
        100.0 * gsx_error
    );
    assert!(
        gsx_error <= 0.05,
        "crossover sizes: observed {observed_gsx:.1} vs expected {expected_gsx:.1} ({:.1}%)",
        100.0 * gsx_error
    );

    finish("4 (expected-size formulas)", started, Duration::from_secs(60));
}

fn crossover_lineage(
    depth: u32,
    rng: &mut ChaCha8Rng,
    initial_pool: &[PointerRef],
) -> PointerRef {
    if depth == 0 {
        return initial_pool[rng.gen_range(0..initial_pool.len())].clone();
    }
    let first = crossover_lineage(depth - 1, rng, initial_pool);
    let second = crossover_lineage(depth - 1, rng, initial_pool);
    gsx_e(&first, &second, rng.gen())
}

fn biguint_to_f64(value: &BigUint) -> f64 {
    value.to_string().parse().expect("decimal to f64")
}

// -- criterion 5 -------------------------------------------------------------
// Scaled size-reduction claim: the paired crossover-heavy desk run must show
// at least 5 orders of magnitude between the pointer engine's exact size and
// the reduced node count of the best individual, and the reduced size must
// never exceed the exact size for any individual at any generation.
#[test]
fn acceptance_5_scaled_size_reduction() {
    let started = Instant::now();
    let train = synthetic::damped_ratio(30, 41, 0.0);
    let test = synthetic::damped_ratio(15, 42, 0.0);
    let config = GsgpConfig {
        pop_size: 20,
        generations: 25,
        tournament_size: 10,
        p_crossover: 0.9,
        p_mutation: 0.1,
        ms_fraction: 0.5,
        ..GsgpConfig::default()
    };
    let report = verify_equivalence(3, &config, &train, &test).unwrap();
    println!(
        "criterion 5 detail: exact {} vs reduced {} nodes -> gap {:.2} orders; \
         dominance violations {} (last at generation {:?})",
        report.gsgp_exact_size,
        report.red_node_count,
        report.size_magnitude_gap,
        report.size_dominance_violations,
        report.last_dominance_violation_generation,
    );
    assert!(
        report.size_magnitude_gap >= 5.0,
        "size gap {:.2} below 5 orders of magnitude",
        report.size_magnitude_gap
    );
    assert_eq!(
        report.size_dominance_violations, 0,
        "reduced node count exceeded exact size {} time(s), last at generation {:?} \
         (lifted initials carry a +2-node coefficient wrapper by the flattening \
         convention, so the startup generations violate dominance by construction)",
        report.size_dominance_violations, report.last_dominance_violation_generation,
    );
    finish("5 (scaled size reduction)", started, Duration::from_secs(60));
}

// -- criterion 6 -------------------------------------------------------------
// The Wilcoxon implementation must agree with exhaustive sign-enumeration
// decisions for all n <= 10 over 100 random paired integer samples, and the
// n = 6 all-positive case must reject at the 5% level.
#[test]
fn acceptance_6_wilcoxon_oracle() {
    let started = Instant::now();

    let x: Vec<f64> = (1..=6).map(f64::from).collect();
    let y = vec![0.0; 6];
    let outcome = wilcoxon_signed_rank(&x, &y, 0.05).unwrap();
    assert_eq!(outcome.decision, WilcoxonDecision::Reject);
    assert_eq!(outcome.w, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(6000);
    let mut conclusive = 0usize;
    for sample in 0..100 {
        let n = rng.gen_range(5..=10usize);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-4..=4i32) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-4..=4i32) as f64).collect();
        let ours = wilcoxon_signed_rank(&x, &y, 0.05).unwrap();
        let oracle = oracle_decision(&x, &y, 0.05);
        assert_eq!(
            ours.decision, oracle,
            "sample {sample}: x={x:?} y={y:?} disagreed (W+={}, W-={})",
            ours.w_plus, ours.w_minus
        );
        if ours.decision != WilcoxonDecision::Inconclusive {
            conclusive += 1;
        }
    }
    assert!(conclusive >= 60, "too few conclusive samples ({conclusive})");

    finish("6 (Wilcoxon oracle)", started, Duration::from_secs(10));
}

/// Independent oracle: textbook ranking plus exhaustive enumeration of all
/// 2^n sign assignments.
fn oracle_decision(x: &[f64], y: &[f64], alpha: f64) -> WilcoxonDecision {
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let n = diffs.len();
    if n < 5 {
        return WilcoxonDecision::Inconclusive;
    }

    // average ranks of |d|, computed by sorting pairs
    let mut indexed: Vec<(usize, f64)> = diffs.iter().map(|d| d.abs()).enumerate().collect();
    indexed.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let mut ranks = vec![0.0f64; n];
    let mut i = 0;
    while i < indexed.len() {
        let mut j = i;
        while j < indexed.len() && indexed[j].1 == indexed[i].1 {
            j += 1;
        }
        let average: f64 = ((i + 1)..=j).map(|r| r as f64).sum::<f64>() / (j - i) as f64;
        for item in &indexed[i..j] {
            ranks[item.0] = average;
        }
        i = j;
    }

    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let w_minus: f64 = ranks.iter().sum::<f64>() - w_plus;
    let w = w_plus.min(w_minus);

    // exhaustive null distribution of the positive-rank sum
    let mut at_or_below = 0u64;
    for mask in 0u32..(1 << n) {
        let s: f64 = (0..n)
            .filter(|bit| mask & (1 << bit) != 0)
            .map(|bit| ranks[bit])
            .sum();
        if s <= w + 1e-12 {
            at_or_below += 1;
        }
    }
    let p = (2.0 * at_or_below as f64 / (1u64 << n) as f64).min(1.0);
    if p <= alpha {
        WilcoxonDecision::Reject
    } else {
        WilcoxonDecision::FailToReject
    }
}

// -- criterion 7 -------------------------------------------------------------
// Qualitative engine trend on y = x0*x1 + x2 with noise: over 10 seeds the
// gsgp-red median final train RMSE must not exceed gp's at matched budgets,
// and every engine's best-train trace must be non-increasing.
#[test]
fn acceptance_7_engine_sanity_trend() {
    let started = Instant::now();
    let train = synthetic::product_plus_term(80, 7000, 0.1);
    let test = synthetic::product_plus_term(40, 7001, 0.1);

    let mut gp_final = Vec::new();
    let mut red_final = Vec::new();
    for seed in 1..=10u64 {
        let gp_config = GpConfig {
            pop_size: 50,
            generations: 30,
            seed,
            ..GpConfig::default()
        };
        let gp_run = run_gp(&gp_config, &train, &test).unwrap();
        assert_non_increasing("gp", seed, &gp_run.report.generations);
        gp_final.push(gp_run.report.best.train_rmse);

        let semantic_config = GsgpConfig {
            pop_size: 50,
            generations: 30,
            seed,
            ..GsgpConfig::default()
        };
        let gsgp_run = run_gsgp(&semantic_config, &train, &test).unwrap();
        assert_non_increasing("gsgp", seed, &gsgp_run.report.generations);

        let red_run = gsgp_red::run_gsgp_red(&semantic_config, &train, &test).unwrap();
        assert_non_increasing("gsgp-red", seed, &red_run.report.generations);
        red_final.push(red_run.report.best.train_rmse);
    }

    let gp_median = median_f64(&gp_final).unwrap();
    let red_median = median_f64(&red_final).unwrap();
    println!("criterion 7 detail: median train RMSE gp {gp_median:.4} vs gsgp-red {red_median:.4}");
    assert!(
        red_median <= gp_median,
        "gsgp-red median {red_median:.6} worse than gp {gp_median:.6}"
    );

    finish("7 (engine sanity trend)", started, Duration::from_secs(300));
}

fn assert_non_increasing(
    engine: &str,
    seed: u64,
    records: &[gsgp_red::engine::GenerationRecord],
) {
    let rmse: Vec<f64> = records.iter().map(|r| r.best_train_rmse).collect();
    assert!(
        rmse.windows(2).all(|w| w[1] <= w[0]),
        "{engine} seed {seed}: best train RMSE increased: {rmse:?}"
    );
}

// -- criterion 8 -------------------------------------------------------------
// Aggregation over 1,000 random linear individuals with injected duplicates:
// unique keys, correct coefficient sums, dot-product semantics preserved
// within 1e-12, idempotence.
#[test]
fn acceptance_8_aggregation_properties() {
    let started = Instant::now();
    let rows = vec![
        vec![0.5, -1.0],
        vec![1.25, 0.75],
        vec![-0.5, 0.25],
        vec![2.0, -0.125],
        vec![0.0, 1.0],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8000);

    for round in 0..1000 {
        // distinct base terms, then duplicates of a random subset
        let base_count = rng.gen_range(2..=8usize);
        let mut terms: Vec<(std::sync::Arc<str>, TermEntry)> = Vec::new();
        for _ in 0..base_count {
            let tree = expr::grow(4, 2, (-1.0, 1.0), &mut rng);
            terms.push(term(tree, rng.gen_range(-2.0..=2.0)));
        }
        let duplicates = rng.gen_range(1..=base_count);
        for _ in 0..duplicates {
            let source = rng.gen_range(0..base_count);
            let tree = terms[source].1.function.clone();
            terms.push(term(tree, rng.gen_range(-2.0..=2.0)));
        }
        // shuffle so duplicates are interleaved
        for i in (1..terms.len()).rev() {
            terms.swap(i, rng.gen_range(0..=i));
        }

        // oracle: dot product and coefficient sums in encounter order
        let mut oracle_sums: Vec<(std::sync::Arc<str>, f64)> = Vec::new();
        let mut oracle_values = vec![0.0f64; rows.len()];
        for (key, entry) in &terms {
            match oracle_sums.iter_mut().find(|(k, _)| k == key) {
                Some((_, sum)) => *sum += entry.coefficient,
                None => oracle_sums.push((key.clone(), entry.coefficient)),
            }
            let values = expr::semantics(&entry.function, &rows).unwrap();
            for (acc, v) in oracle_values.iter_mut().zip(values.0) {
                *acc += entry.coefficient * v;
            }
        }
        oracle_sums.retain(|(_, sum)| *sum != 0.0);

        let expansion = Expansion {
            terms,
            train_semantics: expr::Semantics(oracle_values.clone()),
        };
        let aggregated = aggregate(expansion);

        // key uniqueness and coefficient sums (bit-exact: same fold order)
        let got: Vec<(std::sync::Arc<str>, f64)> = aggregated
            .terms()
            .map(|(k, t)| (k.clone(), t.coefficient))
            .collect();
        let mut seen = std::collections::HashSet::new();
        for (key, _) in &got {
            assert!(seen.insert(key.clone()), "round {round}: duplicate key after aggregation");
        }
        assert_eq!(got.len(), oracle_sums.len(), "round {round}");
        for ((gk, gc), (ok, oc)) in got.iter().zip(&oracle_sums) {
            assert_eq!(gk, ok, "round {round}: term order changed");
            assert_eq!(gc.to_bits(), oc.to_bits(), "round {round}: coefficient sum");
        }

        // dot-product semantics preserved
        let recomputed = red_semantics(&aggregated, &rows);
        for (a, b) in recomputed.0.iter().zip(&oracle_values) {
            assert!(
                (a - b).abs() <= 1e-12,
                "round {round}: semantics drifted ({a} vs {b})"
            );
        }

        // idempotence
        let again = aggregate(aggregated.to_expansion());
        let twice: Vec<(std::sync::Arc<str>, u64)> = again
            .terms()
            .map(|(k, t)| (k.clone(), t.coefficient.to_bits()))
            .collect();
        let once: Vec<(std::sync::Arc<str>, u64)> = aggregated
            .terms()
            .map(|(k, t)| (k.clone(), t.coefficient.to_bits()))
            .collect();
        assert_eq!(once, twice, "round {round}: aggregation is not idempotent");
    }

    finish("8 (aggregation property suite)", started, Duration::from_secs(30));
}

fn term(tree: Arc<Expr>, coefficient: f64) -> (Arc<str>, TermEntry) {
    let key: Arc<str> = Arc::from(canonical_key(&tree).as_str());
    (
        key,
        TermEntry {
            coefficient,
            function: tree,
            source: FnSource::Initial,
        },
    )
}
