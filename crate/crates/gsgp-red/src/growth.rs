//! Closed-form expected-size formulas for the geometric semantic operators,
//! and lineage analytics over final populations.
//!
//! With `e_p0` the expected node count of an initial individual, `e_r` the
//! expected node count of an operator-generated random tree, and `a`, `b`,
//! `c` the constant node overheads of mutation, Euclidean crossover and
//! Manhattan crossover:
//!
//! * mutation only:            `e_p0 + g * (2*e_r + a)`
//! * Euclidean crossover only: `2^g * e_p0 + (2^g - 1) * b`
//! * Manhattan crossover only: `2^g * e_p0 + (2^g - 1) * (e_r + c)`
//!
//! The Manhattan operator is not implemented as an engine operator; its
//! formula is provided for comparison only.

use num_bigint::BigUint;
use serde::Serialize;

use crate::engine::red::{FnSource, LinearIndividual};

/// Parameters of the expected-size formulas.
#[derive(Debug, Clone, Copy)]
pub struct GrowthParams {
    /// Expected node count of an initial-population individual.
    pub e_p0: f64,
    /// Expected node count of an operator-generated random tree.
    pub e_r: f64,
    /// Extra nodes added by one mutation.
    pub a: u32,
    /// Extra nodes added by one Euclidean crossover.
    pub b: u32,
    /// Extra nodes added by one Manhattan crossover.
    pub c: u32,
    /// Generation.
    pub g: u32,
}

pub fn expected_size_gsm(p: &GrowthParams) -> f64 {
    p.e_p0 + p.g as f64 * (2.0 * p.e_r + p.a as f64)
}

/// May return infinity once `2^g` overflows f64; use
/// [`expected_size_gsx_e_log10`] or [`expected_size_gsx_e_exact`] beyond that.
pub fn expected_size_gsx_e(p: &GrowthParams) -> f64 {
    let pow = (p.g as f64).exp2();
    pow * p.e_p0 + (pow - 1.0) * p.b as f64
}

pub fn expected_size_gsx_m(p: &GrowthParams) -> f64 {
    let pow = (p.g as f64).exp2();
    pow * p.e_p0 + (pow - 1.0) * (p.e_r + p.c as f64)
}

/// log10 of the Euclidean-crossover expected size, computed in log space so
/// it stays finite for any `g`. Uses `E = 2^g * (e_p0 + b) - b`.
pub fn expected_size_gsx_e_log10(p: &GrowthParams) -> f64 {
    log10_pow2_form(p.g, p.e_p0, p.b as f64)
}

/// log10 of the Manhattan-crossover expected size.
pub fn expected_size_gsx_m_log10(p: &GrowthParams) -> f64 {
    log10_pow2_form(p.g, p.e_p0, p.e_r + p.c as f64)
}

fn log10_pow2_form(g: u32, base: f64, extra: f64) -> f64 {
    // ln(2^g * (base + extra) - extra), with the subtrahend folded in via
    // ln(1 - x); exp(-ln_main) underflows to 0 for large g, which is exact
    // enough there.
    let ln_main = g as f64 * std::f64::consts::LN_2 + (base + extra).ln();
    let correction = (-extra * (-ln_main).exp()).ln_1p();
    (ln_main + correction) / std::f64::consts::LN_10
}

/// Exact integer evaluation for integral parameters.
pub fn expected_size_gsm_exact(e_p0: u64, e_r: u64, a: u64, g: u64) -> BigUint {
    BigUint::from(e_p0) + BigUint::from(g) * BigUint::from(2 * e_r + a)
}

pub fn expected_size_gsx_e_exact(e_p0: u64, b: u64, g: u32) -> BigUint {
    let pow = BigUint::from(1u32) << g;
    &pow * BigUint::from(e_p0) + (pow - BigUint::from(1u32)) * BigUint::from(b)
}

pub fn expected_size_gsx_m_exact(e_p0: u64, e_r: u64, c: u64, g: u32) -> BigUint {
    let pow = BigUint::from(1u32) << g;
    &pow * BigUint::from(e_p0) + (pow - BigUint::from(1u32)) * BigUint::from(e_r + c)
}

/// log10 of an arbitrary-precision integer.
pub fn biguint_log10(n: &BigUint) -> f64 {
    let digits = n.to_str_radix(10);
    let take = digits.len().min(17);
    let lead: f64 = digits[..take].parse().expect("decimal digits");
    lead.log10() + (digits.len() - take) as f64
}

/// How often each surviving initial-population tree appears across a final
/// population: one count per individual containing it as a term.
#[derive(Debug, Clone, Serialize)]
pub struct FrequencyHistogram {
    pub schema_version: u32,
    /// (canonical key, number of individuals containing the tree), sorted by
    /// count descending, key ascending.
    pub counts: Vec<(String, usize)>,
    /// Number of distinct initial trees still present.
    pub distinct_survivors: usize,
    pub population_size: usize,
}

impl FrequencyHistogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("key,count\n");
        for (key, count) in &self.counts {
            // canonical keys contain no commas or quotes
            out.push_str(key);
            out.push(',');
            out.push_str(&count.to_string());
            out.push('\n');
        }
        out
    }
}

/// Counts, per distinct initial-population tree, how many individuals of the
/// population contain it as a term. Keys are unique within an aggregated
/// individual, so each individual contributes at most one count per tree
/// even when a mutation regenerated it.
pub fn initial_tree_frequency(population: &[LinearIndividual]) -> FrequencyHistogram {
    let mut counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for individual in population {
        for (key, term) in individual.terms() {
            if term.source == FnSource::Initial {
                *counts.entry(key).or_insert(0) += 1;
            }
        }
    }
    let mut counts: Vec<(String, usize)> = counts
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    FrequencyHistogram {
        schema_version: crate::engine::REPORT_SCHEMA_VERSION,
        distinct_survivors: counts.len(),
        population_size: population.len(),
        counts,
    }
}
