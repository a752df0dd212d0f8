//! Acceptance gate: one criterion per test, one status line per criterion.
//!
//! Each criterion bundles the verification checks that substantiate it and
//! prints a single PASS/FAIL line with every check's worst residual against
//! its pinned tolerance. Run with
//!
//! ```text
//! cargo test --test acceptance -- --nocapture
//! ```
//!
//! to see the lines on success as well as on failure.

mod common;

use std::time::{Duration, Instant};

use common::{min_rep, oracle_classes, Rep};
use graphstar::enumerate_classes;
use graphstar::geometry::KahlerChart;
use graphstar::verify::{
    check_associativity, check_budding_bijection, check_budding_identity, check_circuit_form,
    check_class_counts, check_composition_identity, check_determinism, check_first_order_bracket,
    check_flat_factorial, check_fusion_partition, check_potential_commutator,
    check_structural_invariants, check_telescoping_sum, doubled_sphere_chart,
    enriched_disc_chart, CheckReport, DEFAULT_SEED,
};

fn criterion(number: usize, title: &str, budget: Duration, reports: Vec<CheckReport>) {
    let pass = reports.iter().all(|r| r.pass);
    let spent: Duration = reports.iter().map(|r| r.runtime).sum();
    let detail: Vec<String> = reports
        .iter()
        .map(|r| format!("{} {:.2e} within {:.0e}", r.name, r.max_residual, r.tolerance))
        .collect();
    println!(
        "{} criterion {:2}: {} [{}] in {:.1}s",
        if pass { "PASS" } else { "FAIL" },
        number,
        title,
        detail.join("; "),
        spent.as_secs_f64()
    );
    for r in &reports {
        assert!(r.pass, "{r}");
    }
    assert!(
        spent <= budget,
        "criterion {number} took {:.1}s, budget {:.0}s",
        spent.as_secs_f64(),
        budget.as_secs_f64()
    );
}

/// Frozen low-order class counts, plus class-by-class agreement with the
/// independent degree-sequence oracle at the first nontrivial orders.
#[test]
fn criterion_01_class_counts() {
    let start = Instant::now();
    let mut mismatches = 0u64;
    let mut inspected = 0u64;
    for k in 0..=3i64 {
        let ours: std::collections::BTreeSet<Rep> = enumerate_classes(2, k, None)
            .iter()
            .map(|c| min_rep(2, c.graph.internal_weights(), c.graph.edges()))
            .collect();
        let oracle = oracle_classes(2, k);
        inspected += oracle.len() as u64;
        mismatches += ours.symmetric_difference(&oracle).count() as u64;
    }
    let oracle_report = CheckReport {
        name: "oracle-cross-check".into(),
        parameters: format!("two externals, weights 0..=3, {inspected} oracle classes"),
        max_residual: mismatches as f64,
        tolerance: 0.0,
        pass: mismatches == 0,
        runtime: start.elapsed(),
    };
    criterion(
        1,
        "enumerated classes match frozen counts and an independent oracle",
        Duration::from_secs(60),
        vec![check_class_counts(), oracle_report],
    );
}

/// On flat charts the product must reduce to the factorial formula in
/// matched derivatives, through sixth order.
#[test]
fn criterion_02_flat_factorial() {
    criterion(
        2,
        "flat-chart coefficients reduce to the factorial formula through order six",
        Duration::from_secs(60),
        vec![
            check_flat_factorial(1, 6, DEFAULT_SEED),
            check_flat_factorial(2, 6, DEFAULT_SEED),
        ],
    );
}

/// Every enumerated class satisfies the degree and weight constraints that
/// define validity.
#[test]
fn criterion_03_structural_invariants() {
    criterion(
        3,
        "every enumerated class is structurally valid",
        Duration::from_secs(60),
        vec![check_structural_invariants()],
    );
}

/// The antisymmetric part of the first-order coefficient is -i times the
/// Poisson bracket on every chart tried.
#[test]
fn criterion_04_first_order_bracket() {
    criterion(
        4,
        "first-order antisymmetrization is the Poisson bracket",
        Duration::from_secs(120),
        vec![check_first_order_bracket(DEFAULT_SEED)],
    );
}

/// Both nestings of two products agree with the three-argument expansion
/// through third order on curved charts, including one with a higher
/// potential switched on.
#[test]
fn criterion_05_associativity() {
    let fs = KahlerChart::builtin("fubini-study", 1).expect("builtin chart");
    let disc = KahlerChart::builtin("hyperbolic-disc", 1).expect("builtin chart");
    let enriched = enriched_disc_chart();
    criterion(
        5,
        "star products associate through order three",
        Duration::from_secs(600),
        vec![
            check_associativity(&fs, 3, 5, 3, DEFAULT_SEED),
            check_associativity(&disc, 3, 5, 3, DEFAULT_SEED),
            check_associativity(&enriched, 3, 5, 3, DEFAULT_SEED),
        ],
    );
}

/// The automorphism-weighted class sum and the circuit-order sum produce
/// the same coefficients in one and two dimensions.
#[test]
fn criterion_06_circuit_form() {
    criterion(
        6,
        "circuit-order sums reproduce the automorphism-weighted sums",
        Duration::from_secs(300),
        vec![check_circuit_form(DEFAULT_SEED)],
    );
}

/// Fusion partitions the three-external classes and satisfies the weighted
/// composition identity pair by pair.
#[test]
fn criterion_07_fusion() {
    criterion(
        7,
        "fusion partitions three-external classes and composes partition functions",
        Duration::from_secs(300),
        vec![check_fusion_partition(), check_composition_identity(DEFAULT_SEED)],
    );
}

/// Budding is a weight-graded automorphism-preserving bijection, its value
/// identity holds graph by graph, and the induced gradient sums telescope.
#[test]
fn criterion_08_budding() {
    criterion(
        8,
        "budding pairs graph levels and telescopes the gradient sums",
        Duration::from_secs(300),
        vec![
            check_budding_bijection(),
            check_budding_identity(DEFAULT_SEED),
            check_telescoping_sum(DEFAULT_SEED),
        ],
    );
}

/// The potential-gradient series star-commutes with each coordinate to the
/// identity, on flat charts and on curved ones with and without a higher
/// potential.
#[test]
fn criterion_09_potential_commutator() {
    let flat1 = KahlerChart::builtin("flat", 1).expect("builtin chart");
    let flat2 = KahlerChart::builtin("flat", 2).expect("builtin chart");
    let fs = KahlerChart::builtin("fubini-study", 1).expect("builtin chart");
    criterion(
        9,
        "potential gradients star-commute with coordinates to the identity",
        Duration::from_secs(600),
        vec![
            check_potential_commutator(&flat1, true, DEFAULT_SEED),
            check_potential_commutator(&flat2, true, DEFAULT_SEED),
            check_potential_commutator(&fs, false, DEFAULT_SEED),
            check_potential_commutator(&doubled_sphere_chart(), false, DEFAULT_SEED),
        ],
    );
}

/// Two runs of the same seeded checks serialize to identical bytes.
#[test]
fn criterion_10_determinism() {
    criterion(
        10,
        "verification reports are byte-for-byte deterministic",
        Duration::from_secs(120),
        vec![check_determinism(DEFAULT_SEED)],
    );
}
