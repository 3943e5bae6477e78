//! Expression trees shared by every engine.
//!
//! Trees are immutable after construction and use `Arc` children, so subtrees
//! can be shared freely between individuals and across threads. The function
//! set is fixed: the three binary arithmetic operators and the analytic
//! quotient `aq(a, b) = a / sqrt(1 + b^2)`, which behaves like division but
//! has no discontinuity (the denominator is always >= 1).

use std::fmt::Write as _;
use std::sync::Arc;

use rand::Rng;
use thiserror::Error;

/// Binary function symbols available to all engines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Add,
    Sub,
    Mul,
    /// Analytic quotient: `a / sqrt(1 + b^2)`.
    Aq,
}

pub const FUNCTION_SET: [Op; 4] = [Op::Add, Op::Sub, Op::Mul, Op::Aq];

impl Op {
    #[inline]
    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Add => a + b,
            Op::Sub => a - b,
            Op::Mul => a * b,
            Op::Aq => a / (1.0 + b * b).sqrt(),
        }
    }

    /// Symbol used in the canonical prefix rendering.
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Aq => "aq",
        }
    }
}

/// An immutable expression tree node.
///
/// All four function symbols are binary; terminals are either an input
/// variable (by column index) or a finite constant.
#[derive(Debug)]
pub enum Expr {
    Func {
        op: Op,
        left: Arc<Expr>,
        right: Arc<Expr>,
    },
    Var(usize),
    Const(f64),
}

impl Expr {
    pub fn variable(index: usize) -> Arc<Expr> {
        Arc::new(Expr::Var(index))
    }

    /// Stored constants must be finite; NaN or infinity here is a bug in the
    /// caller, not a data condition.
    pub fn constant(value: f64) -> Arc<Expr> {
        assert!(value.is_finite(), "expression constants must be finite");
        Arc::new(Expr::Const(value))
    }

    pub fn func(op: Op, left: Arc<Expr>, right: Arc<Expr>) -> Arc<Expr> {
        Arc::new(Expr::Func { op, left, right })
    }
}

/// Output vector of an expression over a fixed set of input rows.
///
/// Produced by [`semantics`], whose entries are guaranteed finite. Engines
/// also move these around internally for individuals flagged with a
/// worst-fitness sentinel, in which case entries may be non-finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Semantics(pub Vec<f64>);

impl Semantics {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Deref for Semantics {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl PartialEq<Vec<f64>> for Semantics {
    fn eq(&self, other: &Vec<f64>) -> bool {
        self.0 == *other
    }
}

/// Path from the root to a node, used to report where an evaluation overflowed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NodePath(Vec<&'static str>);

impl NodePath {
    fn prepend(mut self, step: &'static str) -> Self {
        self.0.insert(0, step);
        self
    }
}

impl std::fmt::Display for NodePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "root")?;
        for step in &self.0 {
            write!(f, ".{step}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("evaluation overflowed to a non-finite value at {path}")]
    NonFinite { path: NodePath },
    #[error("variable x{index} out of range for a row of width {width}")]
    BadVariable { index: usize, width: usize },
}

impl EvalError {
    fn through(self, step: &'static str) -> Self {
        match self {
            EvalError::NonFinite { path } => EvalError::NonFinite {
                path: path.prepend(step),
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("row {row}: {source}")]
pub struct SemanticsError {
    pub row: usize,
    #[source]
    pub source: EvalError,
}

/// Evaluates `expr` on one input row.
///
/// Every intermediate function value is checked: an overflow to infinity (or
/// NaN) is an error carrying the path of the offending node. The analytic
/// quotient itself cannot overflow or divide by zero for finite operands.
pub fn evaluate(expr: &Expr, row: &[f64]) -> Result<f64, EvalError> {
    match expr {
        Expr::Var(i) => row
            .get(*i)
            .copied()
            .ok_or(EvalError::BadVariable {
                index: *i,
                width: row.len(),
            }),
        Expr::Const(v) => Ok(*v),
        Expr::Func { op, left, right } => {
            let a = evaluate(left, row).map_err(|e| e.through("left"))?;
            let b = evaluate(right, row).map_err(|e| e.through("right"))?;
            let v = op.apply(a, b);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(EvalError::NonFinite {
                    path: NodePath::default(),
                })
            }
        }
    }
}

/// Unchecked evaluation used inside the engines: non-finite values propagate
/// through IEEE arithmetic instead of erroring, and the caller decides what a
/// non-finite output means (worst-fitness sentinel).
pub(crate) fn eval_raw(expr: &Expr, row: &[f64]) -> f64 {
    match expr {
        Expr::Var(i) => row[*i],
        Expr::Const(v) => *v,
        Expr::Func { op, left, right } => op.apply(eval_raw(left, row), eval_raw(right, row)),
    }
}

/// Evaluates `expr` on every row, in row order.
pub fn semantics(expr: &Expr, rows: &[Vec<f64>]) -> Result<Semantics, SemanticsError> {
    let mut values = Vec::with_capacity(rows.len());
    for (row_index, row) in rows.iter().enumerate() {
        let v = evaluate(expr, row).map_err(|source| SemanticsError {
            row: row_index,
            source,
        })?;
        values.push(v);
    }
    Ok(Semantics(values))
}

pub(crate) fn semantics_raw(expr: &Expr, rows: &[Vec<f64>]) -> Vec<f64> {
    rows.iter().map(|row| eval_raw(expr, row)).collect()
}

/// Total number of nodes, functions and terminals alike.
pub fn node_count(expr: &Expr) -> usize {
    match expr {
        Expr::Func { left, right, .. } => 1 + node_count(left) + node_count(right),
        _ => 1,
    }
}

/// Depth of the tree; a single terminal has depth 1.
pub fn depth(expr: &Expr) -> usize {
    match expr {
        Expr::Func { left, right, .. } => 1 + depth(left).max(depth(right)),
        _ => 1,
    }
}

/// Structural identity: same shape, same symbols, constants equal at the bit
/// level. This is the equivalence that [`canonical_key`] mirrors; no algebraic
/// normalization (commutativity, etc.) is applied.
pub fn structural_eq(a: &Expr, b: &Expr) -> bool {
    match (a, b) {
        (Expr::Var(i), Expr::Var(j)) => i == j,
        (Expr::Const(x), Expr::Const(y)) => x.to_bits() == y.to_bits(),
        (
            Expr::Func {
                op: oa,
                left: la,
                right: ra,
            },
            Expr::Func {
                op: ob,
                left: lb,
                right: rb,
            },
        ) => oa == ob && structural_eq(la, lb) && structural_eq(ra, rb),
        _ => false,
    }
}

/// Deterministic prefix serialization; two trees yield the same key iff they
/// are structurally identical.
///
/// Constants are rendered as the hexadecimal of their IEEE-754 bits, so keys
/// compare constants exactly rather than by a rounded decimal. This is what
/// the linear-combination engine hashes term tables by.
pub fn canonical_key(expr: &Expr) -> String {
    let mut out = String::new();
    write_canonical(expr, &mut out);
    out
}

fn write_canonical(expr: &Expr, out: &mut String) {
    match expr {
        Expr::Var(i) => {
            let _ = write!(out, "x{i}");
        }
        Expr::Const(v) => {
            let _ = write!(out, "#{:016x}", v.to_bits());
        }
        Expr::Func { op, left, right } => {
            out.push('(');
            out.push_str(op.symbol());
            out.push(' ');
            write_canonical(left, out);
            out.push(' ');
            write_canonical(right, out);
            out.push(')');
        }
    }
}

/// Human-readable infix rendering; constants use the shortest decimal form
/// that round-trips, so this is for reading, not for hashing.
pub fn infix(expr: &Expr) -> String {
    let mut out = String::new();
    write_infix(expr, &mut out);
    out
}

fn write_infix(expr: &Expr, out: &mut String) {
    match expr {
        Expr::Var(i) => {
            let _ = write!(out, "x{i}");
        }
        Expr::Const(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Func { op, left, right } => match op {
            Op::Aq => {
                out.push_str("aq(");
                write_infix(left, out);
                out.push_str(", ");
                write_infix(right, out);
                out.push(')');
            }
            _ => {
                out.push('(');
                write_infix(left, out);
                let _ = write!(out, " {} ", op.symbol());
                write_infix(right, out);
                out.push(')');
            }
        },
    }
}

/// Random tree generation with the grow scheme.
///
/// At interior depths the node kind is chosen with probability proportional
/// to set sizes: 4 function symbols against `num_vars` variables plus one
/// ephemeral-random-constant slot. At the maximum depth only terminals are
/// drawn. ERC values are sampled uniformly from `erc_range` at node-creation
/// time and fixed thereafter.
pub fn grow(
    max_depth: usize,
    num_vars: usize,
    erc_range: (f64, f64),
    rng: &mut impl Rng,
) -> Arc<Expr> {
    assert!(max_depth >= 1, "max_depth must be at least 1");
    if max_depth == 1 {
        return random_terminal(num_vars, erc_range, rng);
    }
    let choices = FUNCTION_SET.len() + num_vars + 1;
    let pick = rng.gen_range(0..choices);
    if pick < FUNCTION_SET.len() {
        let op = FUNCTION_SET[pick];
        let left = grow(max_depth - 1, num_vars, erc_range, rng);
        let right = grow(max_depth - 1, num_vars, erc_range, rng);
        Expr::func(op, left, right)
    } else {
        terminal_from_slot(pick - FUNCTION_SET.len(), num_vars, erc_range, rng)
    }
}

/// Random tree generation with the full scheme: function nodes at every depth
/// below the maximum, terminals at the maximum. A full tree of depth `d` has
/// exactly `2^d - 1` nodes.
pub fn full(
    max_depth: usize,
    num_vars: usize,
    erc_range: (f64, f64),
    rng: &mut impl Rng,
) -> Arc<Expr> {
    assert!(max_depth >= 1, "max_depth must be at least 1");
    if max_depth == 1 {
        return random_terminal(num_vars, erc_range, rng);
    }
    let op = FUNCTION_SET[rng.gen_range(0..FUNCTION_SET.len())];
    let left = full(max_depth - 1, num_vars, erc_range, rng);
    let right = full(max_depth - 1, num_vars, erc_range, rng);
    Expr::func(op, left, right)
}

fn random_terminal(num_vars: usize, erc_range: (f64, f64), rng: &mut impl Rng) -> Arc<Expr> {
    let slot = rng.gen_range(0..num_vars + 1);
    terminal_from_slot(slot, num_vars, erc_range, rng)
}

fn terminal_from_slot(
    slot: usize,
    num_vars: usize,
    erc_range: (f64, f64),
    rng: &mut impl Rng,
) -> Arc<Expr> {
    if slot < num_vars {
        Expr::variable(slot)
    } else {
        Expr::constant(rng.gen_range(erc_range.0..=erc_range.1))
    }
}

/// Ramped half-and-half initialization: the population is split across depth
/// ramps `2..=max_depth`, and within each ramp alternates grown and full
/// trees.
pub fn ramped_half_and_half(
    pop_size: usize,
    max_depth: usize,
    num_vars: usize,
    erc_range: (f64, f64),
    rng: &mut impl Rng,
) -> Vec<Arc<Expr>> {
    assert!(pop_size >= 2, "population size must be at least 2");
    let min_depth = 2.min(max_depth);
    let ramps: Vec<usize> = (min_depth..=max_depth).collect();
    let base = pop_size / ramps.len();
    let remainder = pop_size % ramps.len();

    let mut population = Vec::with_capacity(pop_size);
    for (ramp_index, &ramp_depth) in ramps.iter().enumerate() {
        let count = base + usize::from(ramp_index < remainder);
        for j in 0..count {
            let tree = if j % 2 == 0 {
                grow(ramp_depth, num_vars, erc_range, rng)
            } else {
                full(ramp_depth, num_vars, erc_range, rng)
            };
            population.push(tree);
        }
    }
    population
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn aq(a: f64, b: f64) -> f64 {
        Op::Aq.apply(a, b)
    }

    #[test]
    fn analytic_quotient_identity_cases() {
        assert_eq!(aq(5.0, 0.0), 5.0);
        // sqrt(1 + 3) = 2 analytically; squaring fl(sqrt(3)) costs one ulp
        assert!((aq(1.0, 3.0_f64.sqrt()) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn evaluate_simple_arithmetic() {
        // x1 + 0.4 at a row where x1 = 0.6
        let e = Expr::func(Op::Add, Expr::variable(1), Expr::constant(0.4));
        assert_eq!(evaluate(&e, &[9.9, 0.6]).unwrap(), 1.0);

        // x0 - 0.6 over two rows
        let e = Expr::func(Op::Sub, Expr::variable(0), Expr::constant(0.6));
        let s = semantics(&e, &[vec![1.6, 0.0], vec![0.6, 0.0]]).unwrap();
        assert_eq!(s.0, vec![1.0, 0.0]);
    }

    #[test]
    fn evaluate_reports_bad_variable() {
        let e = Expr::variable(3);
        match evaluate(&e, &[1.0, 2.0]) {
            Err(EvalError::BadVariable { index: 3, width: 2 }) => {}
            other => panic!("unexpected result: {other:?}"),
        }
    }

    #[test]
    fn evaluate_reports_overflow_with_path() {
        // (big * big) - x0, overflow happens in the left child
        let big = Expr::constant(1e308);
        let mul = Expr::func(Op::Mul, big.clone(), big);
        let e = Expr::func(Op::Sub, mul, Expr::variable(0));
        match evaluate(&e, &[1.0]) {
            Err(EvalError::NonFinite { path }) => assert_eq!(path.to_string(), "root.left"),
            other => panic!("unexpected result: {other:?}"),
        }
    }

    #[test]
    fn semantics_attaches_row_index() {
        let e = Expr::func(Op::Mul, Expr::variable(0), Expr::variable(0));
        let rows = vec![vec![2.0], vec![1e200], vec![3.0]];
        let err = semantics(&e, &rows).unwrap_err();
        assert_eq!(err.row, 1);
    }

    #[test]
    fn semantics_of_constant_and_projection() {
        let c = Expr::constant(2.5);
        let s = semantics(&c, &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(s.0, vec![2.5, 2.5, 2.5]);

        let v = Expr::variable(0);
        let s = semantics(&v, &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        assert_eq!(s.0, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn node_count_examples() {
        assert_eq!(node_count(&Expr::constant(1.0)), 1);
        let e = Expr::func(Op::Add, Expr::variable(1), Expr::constant(0.4));
        assert_eq!(node_count(&e), 3);
        // k*t1 + k'*t2 with single-terminal t1, t2
        let e = Expr::func(
            Op::Add,
            Expr::func(Op::Mul, Expr::constant(0.3), Expr::variable(0)),
            Expr::func(Op::Mul, Expr::constant(0.7), Expr::variable(1)),
        );
        assert_eq!(node_count(&e), 7);
    }

    #[test]
    fn canonical_key_examples() {
        assert_eq!(canonical_key(&Expr::variable(0)), "x0");

        let ab = Expr::func(Op::Add, Expr::variable(0), Expr::variable(1));
        let ba = Expr::func(Op::Add, Expr::variable(1), Expr::variable(0));
        assert_ne!(canonical_key(&ab), canonical_key(&ba));

        let one = Expr::func(Op::Sub, Expr::variable(0), Expr::constant(0.6));
        let two = Expr::func(Op::Sub, Expr::variable(0), Expr::constant(0.6));
        assert_eq!(canonical_key(&one), canonical_key(&two));
    }

    #[test]
    fn grow_at_depth_one_is_a_terminal() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = grow(1, 3, (-1.0, 1.0), &mut rng);
            assert_eq!(node_count(&t), 1);
        }
    }

    #[test]
    fn grow_respects_depth_and_erc_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut erc_seen = 0usize;
        for _ in 0..10_000 {
            let t = grow(6, 2, (-1.0, 1.0), &mut rng);
            assert!(depth(&t) <= 6);
            assert!(node_count(&t) <= 63);
            erc_seen += check_constants_in_range(&t, -1.0, 1.0);
        }
        assert!(erc_seen > 0, "no ERC constants drawn in 10k trees");
    }

    fn check_constants_in_range(e: &Expr, lo: f64, hi: f64) -> usize {
        match e {
            Expr::Const(v) => {
                assert!(*v >= lo && *v <= hi, "ERC {v} outside [{lo}, {hi}]");
                1
            }
            Expr::Var(_) => 0,
            Expr::Func { left, right, .. } => {
                check_constants_in_range(left, lo, hi) + check_constants_in_range(right, lo, hi)
            }
        }
    }

    #[test]
    fn full_tree_at_depth_six_has_63_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = full(6, 3, (-1.0, 1.0), &mut rng);
        assert_eq!(node_count(&t), 63);
        assert_eq!(depth(&t), 6);
    }

    #[test]
    fn ramped_population_depths_are_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pop = ramped_half_and_half(1000, 6, 4, (-1.0, 1.0), &mut rng);
        assert_eq!(pop.len(), 1000);
        for t in &pop {
            assert!(depth(t) <= 6);
        }
    }

    #[test]
    fn smallest_ramp_is_one_grown_one_full() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pop = ramped_half_and_half(2, 2, 2, (-1.0, 1.0), &mut rng);
        assert_eq!(pop.len(), 2);
        assert!(depth(&pop[0]) <= 2);
        // the second tree uses the full scheme at depth 2: exactly 3 nodes
        assert_eq!(node_count(&pop[1]), 3);
    }

    #[test]
    fn grow_is_deterministic_under_a_seed() {
        let t1 = grow(6, 3, (-1.0, 1.0), &mut ChaCha8Rng::seed_from_u64(99));
        let t2 = grow(6, 3, (-1.0, 1.0), &mut ChaCha8Rng::seed_from_u64(99));
        assert!(structural_eq(&t1, &t2));
        assert_eq!(canonical_key(&t1), canonical_key(&t2));
    }

    // -- canonical key <-> structural identity ------------------------------

    fn deep_copy(e: &Expr) -> Arc<Expr> {
        match e {
            Expr::Var(i) => Expr::variable(*i),
            Expr::Const(v) => Arc::new(Expr::Const(*v)),
            Expr::Func { op, left, right } => Expr::func(*op, deep_copy(left), deep_copy(right)),
        }
    }

    /// Flips one low mantissa bit of the `target`-th constant, if any.
    fn flip_constant_bit(e: &Expr, target: &mut usize) -> Option<Arc<Expr>> {
        match e {
            Expr::Var(_) => None,
            Expr::Const(v) => {
                if *target == 0 {
                    Some(Arc::new(Expr::Const(f64::from_bits(v.to_bits() ^ 1))))
                } else {
                    *target -= 1;
                    None
                }
            }
            Expr::Func { op, left, right } => {
                if let Some(l) = flip_constant_bit(left, target) {
                    return Some(Expr::func(*op, l, right.clone()));
                }
                if let Some(r) = flip_constant_bit(right, target) {
                    return Some(Expr::func(*op, left.clone(), r));
                }
                None
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = Arc<Expr>> {
        let leaf = prop_oneof![
            (0usize..4).prop_map(Expr::variable),
            (-2.0f64..2.0).prop_map(Expr::constant),
        ];
        leaf.prop_recursive(4, 32, 2, |inner| {
            ((0usize..4), inner.clone(), inner)
                .prop_map(|(op, l, r)| Expr::func(FUNCTION_SET[op], l, r))
        })
    }

    proptest! {
        #[test]
        fn canonical_key_matches_structural_identity(a in arb_expr(), b in arb_expr()) {
            let same_key = canonical_key(&a) == canonical_key(&b);
            prop_assert_eq!(same_key, structural_eq(&a, &b));
        }

        #[test]
        fn canonical_key_survives_deep_copy(a in arb_expr()) {
            let copy = deep_copy(&a);
            prop_assert!(structural_eq(&a, &copy));
            prop_assert_eq!(canonical_key(&a), canonical_key(&copy));
        }

        #[test]
        fn one_bit_constant_change_changes_the_key(a in arb_expr()) {
            let mut target = 0usize;
            if let Some(mutated) = flip_constant_bit(&a, &mut target) {
                prop_assert!(!structural_eq(&a, &mutated));
                prop_assert_ne!(canonical_key(&a), canonical_key(&mutated));
            }
        }

        #[test]
        fn evaluation_is_deterministic(a in arb_expr(), row in proptest::collection::vec(-3.0f64..3.0, 4)) {
            let v1 = evaluate(&a, &row);
            let v2 = evaluate(&a, &row);
            match (v1, v2) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                (Err(e1), Err(e2)) => prop_assert_eq!(e1, e2),
                other => prop_assert!(false, "mismatched results: {:?}", other),
            }
        }

        #[test]
        fn aq_denominator_never_below_one(a in -1e300f64..1e300, b in -1e300f64..1e300) {
            let d = (1.0 + b * b).sqrt();
            prop_assert!(d >= 1.0);
            let v = Op::Aq.apply(a, b);
            // finite operands can never divide by zero
            prop_assert!(!v.is_nan());
        }
    }
}
