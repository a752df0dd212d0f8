//! Deterministic verification of the identities the product construction
//! rests on. Every check draws its random fields and points from a caller
//! seed through a fixed-stream generator, evaluates both sides of one
//! identity numerically and reports the worst relative residual against a
//! pinned tolerance. Structural checks count violations instead, with a
//! zero tolerance.
//!
//! Reports serialize without their runtime so that two runs of the same
//! suite produce byte-identical output.

use std::collections::BTreeMap;
use std::fmt;
use std::rc::Rc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::decor::{
    compatible_circuit_count, enumerate_labelled_circuit_classes,
    enumerate_labelled_circuit_classes_mod_sink, incidence_multi_indices, DecoratedForm,
};
use crate::expr::{parse_expression, Expr, ScalarField};
use crate::geometry::KahlerChart;
use crate::graph::enumerate::enumerate_classes;
use crate::jet::{Dir, Jet};
use crate::operator::{
    chart_signature_table, multi_coefficient, slot_requirement, star_coefficient,
    star_coefficient_circuit_form, star_series, Arg, Evaluator, MemoryStore, StarOptions,
};
use crate::series::FormalSeries;
use crate::surgery::{bud, debud, fuse};

/// Seed used by the command line and test drivers unless overridden.
pub const DEFAULT_SEED: u64 = 7;

/// Outcome of one verification check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub parameters: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip)]
    pub runtime: Duration,
}

impl CheckReport {
    fn finish(name: &str, parameters: String, max_residual: f64, tolerance: f64, start: Instant) -> CheckReport {
        CheckReport {
            name: name.to_string(),
            parameters,
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            runtime: start.elapsed(),
        }
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} [{}] residual {:.3e} tolerance {:.1e} ({:.2}s)",
            self.status(),
            self.name,
            self.parameters,
            self.max_residual,
            self.tolerance,
            self.runtime.as_secs_f64()
        )
    }
}

/// One report per JSON line, runtimes omitted; identical inputs give
/// identical bytes.
pub fn reports_to_json(reports: &[CheckReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r).expect("report serializes"));
        out.push('\n');
    }
    out
}

/// Random polynomial in the coordinates and their conjugates, every
/// monomial through the degree bound present with a coefficient drawn
/// uniformly from the unit disc.
pub fn random_polynomial(rng: &mut ChaCha8Rng, m: usize, max_deg: usize) -> ScalarField {
    fn monomials(
        rng: &mut ChaCha8Rng,
        m: usize,
        max_deg: usize,
        var: usize,
        exps: &mut Vec<usize>,
        terms: &mut Vec<Expr>,
    ) {
        if var == 2 * m {
            let radius = rng.gen::<f64>().sqrt();
            let angle = rng.gen::<f64>() * std::f64::consts::TAU;
            let mut expr = Expr::Const(Complex64::from_polar(radius, angle));
            for (i, &e) in exps.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let base = if i < m { Expr::Z(i + 1) } else { Expr::Zbar(i - m + 1) };
                let factor =
                    if e == 1 { base } else { Expr::Pow(Rc::new(base), e as i64) };
                expr = Expr::Mul(Rc::new(expr), Rc::new(factor));
            }
            terms.push(expr);
            return;
        }
        let used: usize = exps[..var].iter().sum();
        for e in 0..=(max_deg - used) {
            exps[var] = e;
            monomials(rng, m, max_deg, var + 1, exps, terms);
        }
        exps[var] = 0;
    }
    let mut terms = Vec::new();
    let mut exps = vec![0usize; 2 * m];
    monomials(rng, m, max_deg, 0, &mut exps, &mut terms);
    let sum = terms
        .into_iter()
        .reduce(|a, b| Expr::Add(Rc::new(a), Rc::new(b)))
        .expect("at least the constant term");
    ScalarField::from_ast(sum)
}

/// Uniform point in the polydisc of the given radius.
pub fn random_point(rng: &mut ChaCha8Rng, m: usize, radius: f64) -> Vec<Complex64> {
    (0..m)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let angle = rng.gen::<f64>() * std::f64::consts::TAU;
            Complex64::from_polar(r, angle)
        })
        .collect()
}

/// Hyperbolic disc metric with nonzero potentials at weights 0, 1 and 2.
/// The higher potentials are deliberately not conjugation-symmetric: none
/// of the identities under test need real potentials, so skewed terms widen
/// the coverage.
pub fn enriched_disc_chart() -> KahlerChart {
    let mut potentials = BTreeMap::new();
    potentials.insert(-1, parse_expression("-log(1 - z1*zb1)").expect("metric potential"));
    potentials
        .insert(0, parse_expression("0.3*z1*zb1 + 0.2*z1^2*zb1^2").expect("weight 0 potential"));
    potentials
        .insert(1, parse_expression("0.25*z1*zb1 + 0.1*z1^2*zb1").expect("weight 1 potential"));
    potentials
        .insert(2, parse_expression("0.2*z1*zb1 + 0.15*z1*zb1^2").expect("weight 2 potential"));
    KahlerChart::new("enriched-disc", 1, potentials).expect("valid chart")
}

/// Two-dimensional chart with a non-diagonal metric, cubic and quartic
/// metric corrections and two higher potentials.
pub fn curved_plane_chart() -> KahlerChart {
    let phi = parse_expression(
        "z1*zb1 + z2*zb2 + 0.25*z1*zb2 + 0.25*z2*zb1 + 0.1*z1^2*zb1*zb2 + 0.1*z1*z2*zb1^2",
    )
    .expect("metric potential");
    let p0 = parse_expression("0.2*z1*z2*zb1*zb2 + 0.1*z1*zb1").expect("weight 0 potential");
    let p1 = parse_expression("0.15*z1*zb1*z2*zb2 + 0.1*z2*zb2").expect("weight 1 potential");
    let mut potentials = BTreeMap::new();
    potentials.insert(-1, phi);
    potentials.insert(0, p0);
    potentials.insert(1, p1);
    KahlerChart::new("curved-plane", 2, potentials).expect("valid chart")
}

fn relative(difference: f64, scale: f64) -> f64 {
    difference / scale.max(1.0)
}

fn factorial(n: u32) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// All exponent vectors of the given length summing to `total`.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn go(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i + 1 == cur.len() {
            cur[i] = left;
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v;
            go(i + 1, left - v, cur, out);
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; parts];
    go(0, total, &mut cur, &mut out);
    out
}

/// Class counts of the enumeration at low weights against frozen references.
pub fn check_class_counts() -> CheckReport {
    let start = Instant::now();
    let two = [1u64, 1, 5, 42, 592];
    let three = [1u64, 3, 20, 208];
    let mut worst = 0.0f64;
    for (k, &want) in two.iter().enumerate() {
        let got = enumerate_classes(2, k as i64, None).len() as u64;
        worst = worst.max((got as f64 - want as f64).abs());
    }
    for (k, &want) in three.iter().enumerate() {
        let got = enumerate_classes(3, k as i64, None).len() as u64;
        worst = worst.max((got as f64 - want as f64).abs());
    }
    CheckReport::finish(
        "class-counts",
        "two externals through weight 4, three externals through weight 3".into(),
        worst,
        0.0,
        start,
    )
}

/// Structural invariants of every enumerated class, checked by direct edge
/// inspection: sources only emit, sinks only receive, internal vertices do
/// both, weight -1 vertices have degree at least 3, and from weight 1 on
/// both externals of a two-external graph are touched.
pub fn check_structural_invariants() -> CheckReport {
    let start = Instant::now();
    let mut violations = 0u64;
    let mut classes = 0u64;
    for (n_ext, k_max) in [(2usize, 4i64), (3, 3)] {
        for k in 0..=k_max {
            for class in enumerate_classes(n_ext, k, None) {
                classes += 1;
                let g = &class.graph;
                let mut indeg = vec![0usize; g.vertex_count()];
                let mut outdeg = vec![0usize; g.vertex_count()];
                for &(t, h) in g.edges() {
                    outdeg[t as usize] += 1;
                    indeg[h as usize] += 1;
                }
                if indeg[0] != 0 {
                    violations += 1;
                }
                if outdeg[n_ext - 1] != 0 {
                    violations += 1;
                }
                for (i, &w) in g.internal_weights().iter().enumerate() {
                    let v = n_ext + i;
                    if indeg[v] == 0 || outdeg[v] == 0 {
                        violations += 1;
                    }
                    if w == -1 && indeg[v] + outdeg[v] < 3 {
                        violations += 1;
                    }
                }
                if n_ext == 2 && k >= 1 {
                    for v in 0..2 {
                        if indeg[v] + outdeg[v] == 0 {
                            violations += 1;
                        }
                    }
                }
            }
        }
    }
    CheckReport::finish(
        "structural-invariants",
        format!("{classes} classes inspected"),
        violations as f64,
        0.0,
        start,
    )
}

/// On the flat chart the order-k coefficient must reduce to the multi-index
/// factorial formula: the sum over exponent vectors of weight k of both
/// arguments' matched derivatives over the factorial.
pub fn check_flat_factorial(m: usize, h_max: i64, seed: u64) -> CheckReport {
    let start = Instant::now();
    let chart = KahlerChart::builtin("flat", m).expect("builtin chart");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let f1 = random_polynomial(&mut rng, m, 4);
        let f2 = random_polynomial(&mut rng, m, 4);
        let point = random_point(&mut rng, m, 0.5);
        let table =
            chart_signature_table(&chart, &point, 0, 2 * h_max as usize).expect("table");
        let opts = StarOptions { filter: Some(&table), store: None };
        let j1 = f1.eval_jet(&point, h_max as usize).expect("jet");
        let j2 = f2.eval_jet(&point, h_max as usize).expect("jet");
        let zeros = vec![0u32; m];
        for k in 0..=h_max {
            let got = star_coefficient(&chart, k, Arg::Field(&f1), Arg::Field(&f2), &point, 0, &opts)
                .expect("coefficient")
                .eval_center();
            let mut want = Complex64::new(0.0, 0.0);
            for alpha in compositions(k as u32, m) {
                let fac: f64 = alpha.iter().map(|&c| factorial(c)).product();
                let a = j1.derive_multi(&zeros, &alpha).expect("derivative").eval_center();
                let b = j2.derive_multi(&alpha, &zeros).expect("derivative").eval_center();
                want += a * b / fac;
            }
            worst = worst.max(relative((got - want).norm(), got.norm().max(want.norm())));
        }
    }
    CheckReport::finish(
        "flat-factorial",
        format!("m={m}, orders 0..={h_max}, 3 field pairs, seed {seed}"),
        worst,
        1e-12,
        start,
    )
}

/// The antisymmetric part of the first-order coefficient must be -i times
/// the Poisson bracket of the metric potential's form.
pub fn check_first_order_bracket(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let charts = [
        KahlerChart::builtin("flat", 1).expect("builtin chart"),
        KahlerChart::builtin("fubini-study", 1).expect("builtin chart"),
        KahlerChart::builtin("hyperbolic-disc", 1).expect("builtin chart"),
    ];
    let opts = StarOptions::default();
    for chart in &charts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let f1 = random_polynomial(&mut rng, 1, 4);
            let f2 = random_polynomial(&mut rng, 1, 4);
            let point = random_point(&mut rng, 1, 0.5);
            let d12 = star_coefficient(chart, 1, Arg::Field(&f1), Arg::Field(&f2), &point, 0, &opts)
                .expect("coefficient")
                .eval_center();
            let d21 = star_coefficient(chart, 1, Arg::Field(&f2), Arg::Field(&f1), &point, 0, &opts)
                .expect("coefficient")
                .eval_center();
            let bracket = chart.poisson_bracket(&f1, &f2, &point).expect("bracket");
            let residual = (d12 - d21 + Complex64::new(0.0, 1.0) * bracket).norm();
            let scale = d12.norm().max(d21.norm()).max(bracket.norm());
            worst = worst.max(relative(residual, scale));
        }
    }
    CheckReport::finish(
        "first-order-bracket",
        format!("flat, fubini-study, hyperbolic-disc; 20 pairs each; seed {seed}"),
        worst,
        1e-10,
        start,
    )
}

/// Both nestings of two products agree order by order with the
/// three-argument coefficients, through the given order.
pub fn check_associativity(
    chart: &KahlerChart,
    h_max: i64,
    triples: usize,
    points: usize,
    seed: u64,
) -> CheckReport {
    let start = Instant::now();
    let m = chart.dimension();
    let store = MemoryStore::new();
    let opts = StarOptions { filter: None, store: Some(&store) };
    let d_left = slot_requirement(2, 0, h_max, &opts);
    let d_right = slot_requirement(2, 1, h_max, &opts);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..triples {
        let f1 = random_polynomial(&mut rng, m, 3);
        let f2 = random_polynomial(&mut rng, m, 3);
        let f3 = random_polynomial(&mut rng, m, 3);
        for _ in 0..points {
            let point = random_point(&mut rng, m, 0.5);
            let inner12: Vec<Jet> = (0..=h_max)
                .map(|j| {
                    star_coefficient(chart, j, Arg::Field(&f1), Arg::Field(&f2), &point, d_left, &opts)
                        .expect("inner coefficient")
                })
                .collect();
            let inner23: Vec<Jet> = (0..=h_max)
                .map(|j| {
                    star_coefficient(chart, j, Arg::Field(&f2), Arg::Field(&f3), &point, d_right, &opts)
                        .expect("inner coefficient")
                })
                .collect();
            for k in 0..=h_max {
                let flat =
                    multi_coefficient(chart, k, &[Arg::Field(&f1), Arg::Field(&f2), Arg::Field(&f3)], &point, 0, &opts)
                        .expect("three-argument coefficient")
                        .eval_center();
                let mut left = Complex64::new(0.0, 0.0);
                let mut right = Complex64::new(0.0, 0.0);
                for j in 0..=k {
                    let i = k - j;
                    left += star_coefficient(
                        chart,
                        i,
                        Arg::Jet(&inner12[j as usize]),
                        Arg::Field(&f3),
                        &point,
                        0,
                        &opts,
                    )
                    .expect("outer coefficient")
                    .eval_center();
                    right += star_coefficient(
                        chart,
                        i,
                        Arg::Field(&f1),
                        Arg::Jet(&inner23[j as usize]),
                        &point,
                        0,
                        &opts,
                    )
                    .expect("outer coefficient")
                    .eval_center();
                }
                let scale = flat.norm().max(left.norm()).max(right.norm());
                worst = worst.max(relative((left - flat).norm(), scale));
                worst = worst.max(relative((right - flat).norm(), scale));
            }
        }
    }
    CheckReport::finish(
        "associativity",
        format!(
            "chart={}, orders 0..={h_max}, {triples} triples, {points} points, seed {seed}",
            chart.name()
        ),
        worst,
        1e-8,
        start,
    )
}

/// The automorphism-weighted class sum and the circuit-order class sum give
/// the same coefficients.
pub fn check_circuit_form(seed: u64) -> CheckReport {
    let start = Instant::now();
    let charts = [
        KahlerChart::builtin("hyperbolic-disc", 1).expect("builtin chart"),
        curved_plane_chart(),
    ];
    let opts = StarOptions::default();
    let mut worst = 0.0f64;
    for chart in &charts {
        let m = chart.dimension();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2 {
            let f1 = random_polynomial(&mut rng, m, 3);
            let f2 = random_polynomial(&mut rng, m, 3);
            let point = random_point(&mut rng, m, 0.4);
            for k in 0..=2i64 {
                let by_auts =
                    star_coefficient(chart, k, Arg::Field(&f1), Arg::Field(&f2), &point, 0, &opts)
                        .expect("class sum")
                        .eval_center();
                let by_circuits =
                    star_coefficient_circuit_form(chart, k, Arg::Field(&f1), Arg::Field(&f2), &point, 0)
                        .expect("circuit sum")
                        .eval_center();
                let scale = by_auts.norm().max(by_circuits.norm());
                worst = worst.max(relative((by_auts - by_circuits).norm(), scale));
            }
        }
    }
    CheckReport::finish(
        "circuit-form",
        format!("hyperbolic-disc and curved-plane, orders 0..=2, seed {seed}"),
        worst,
        1e-10,
        start,
    )
}

/// Fusing every sink-order class with every full class at complementary
/// weights hits every three-external class exactly once.
pub fn check_fusion_partition() -> CheckReport {
    let start = Instant::now();
    let mut defects = 0u64;
    let mut total = 0u64;
    for k in 0..=2i64 {
        let mut produced: BTreeMap<DecoratedForm, usize> = BTreeMap::new();
        for k1 in 0..=k {
            let k2 = k - k1;
            for (_, g1) in enumerate_labelled_circuit_classes_mod_sink(2, k1, 1).expect("classes") {
                for (_, g2) in enumerate_labelled_circuit_classes(2, k2, 1).expect("classes") {
                    for (form, _) in fuse(&g1, &g2).expect("fusion") {
                        *produced.entry(form).or_insert(0) += 1;
                    }
                }
            }
        }
        let expected = enumerate_labelled_circuit_classes(3, k, 1).expect("classes");
        total += expected.len() as u64;
        for (form, _) in &expected {
            match produced.remove(form) {
                Some(1) => {}
                Some(_) | None => defects += 1,
            }
        }
        defects += produced.len() as u64;
    }
    CheckReport::finish(
        "fusion-partition",
        format!("weights 0..=2, m=1, {total} target classes"),
        defects as f64,
        0.0,
        start,
    )
}

/// Per fused pair, the weighted composition of the two partition functions
/// equals the weighted sum of the fused partition functions. The inner
/// value enters as a jet deep enough for the sink's degree, and the sink
/// multi-index factorial compensates for the forgotten sink order.
pub fn check_composition_identity(seed: u64) -> CheckReport {
    let start = Instant::now();
    let chart = enriched_disc_chart();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..2 {
        let f1 = random_polynomial(&mut rng, 1, 3);
        let f2 = random_polynomial(&mut rng, 1, 3);
        let f3 = random_polynomial(&mut rng, 1, 3);
        let point = random_point(&mut rng, 1, 0.4);
        for k in 0..=2i64 {
            for k1 in 0..=k {
                let k2 = k - k1;
                for (_, g1) in
                    enumerate_labelled_circuit_classes_mod_sink(2, k1, 1).expect("classes")
                {
                    for (_, g2) in enumerate_labelled_circuit_classes(2, k2, 1).expect("classes") {
                        let depth_inner = g1.graph.in_degree(1);
                        let mut ev2 = Evaluator::new(
                            &chart,
                            &point,
                            &[Arg::Field(&f2), Arg::Field(&f3)],
                            depth_inner,
                            [&g2.graph],
                        )
                        .expect("inner evaluator");
                        let inner =
                            ev2.lambda(&g2.graph, &g2.labelling).expect("inner value");
                        let mut ev1 = Evaluator::new(
                            &chart,
                            &point,
                            &[Arg::Field(&f1), Arg::Jet(&inner)],
                            0,
                            [&g1.graph],
                        )
                        .expect("outer evaluator");
                        let outer =
                            ev1.lambda(&g1.graph, &g1.labelling).expect("outer value").eval_center();
                        let alpha = incidence_multi_indices(&g1.graph, &g1.labelling, 1).0;
                        let c1 = compatible_circuit_count(&g1.graph, &g1.labelling);
                        let c2 = compatible_circuit_count(&g2.graph, &g2.labelling);
                        let lhs = outer * alpha.factorial() as f64 / (c1 as f64 * c2 as f64);

                        let fused = fuse(&g1, &g2).expect("fusion");
                        let graphs: Vec<&crate::graph::Graph> =
                            fused.iter().map(|(_, dg)| &dg.graph).collect();
                        let mut ev3 = Evaluator::new(
                            &chart,
                            &point,
                            &[Arg::Field(&f1), Arg::Field(&f2), Arg::Field(&f3)],
                            0,
                            graphs,
                        )
                        .expect("fused evaluator");
                        let mut rhs = Complex64::new(0.0, 0.0);
                        for (_, dg) in &fused {
                            let value =
                                ev3.lambda(&dg.graph, &dg.labelling).expect("fused value");
                            let c = compatible_circuit_count(&dg.graph, &dg.labelling);
                            rhs += value.eval_center() / c as f64;
                        }
                        let scale = lhs.norm().max(rhs.norm());
                        worst = worst.max(relative((lhs - rhs).norm(), scale));
                    }
                }
            }
        }
    }
    CheckReport::finish(
        "composition-identity",
        format!("enriched disc, weights 0..=2, m=1, seed {seed}"),
        worst,
        1e-10,
        start,
    )
}

/// Budding pairs the graph levels: every class with a degree-1 first
/// external at weight k+1 arises exactly once, automorphism count intact,
/// either from branching classes at weight k+1 (bud weight -1) or from a
/// class at weight k-l (bud weight l >= 0); and debudding recovers the
/// source.
pub fn check_budding_bijection() -> CheckReport {
    let start = Instant::now();
    let mut defects = 0u64;
    let mut budded_total = 0u64;
    fn record(
        produced: &mut BTreeMap<Vec<i64>, (usize, u64)>,
        g: &crate::graph::Graph,
        auts: u64,
        defects: &mut u64,
    ) {
        let info = crate::graph::canon::canonicalize(g);
        let entry = produced.entry(info.form.tokens().to_vec()).or_insert((0, auts));
        entry.0 += 1;
        if entry.1 != auts {
            *defects += 1;
        }
    }
    for k in 1..=3i64 {
        let mut produced: BTreeMap<Vec<i64>, (usize, u64)> = BTreeMap::new();
        for class in enumerate_classes(2, k + 1, None) {
            if class.ext_degrees[0] > 1 {
                match bud(&class.graph, -1) {
                    Ok(b) => record(&mut produced, &b, class.auts, &mut defects),
                    Err(_) => defects += 1,
                }
            }
        }
        for l in 0..=(k - 1) as i32 {
            for class in enumerate_classes(2, k - l as i64, None) {
                match bud(&class.graph, l) {
                    Ok(b) => record(&mut produced, &b, class.auts, &mut defects),
                    Err(_) => defects += 1,
                }
            }
        }
        let targets: BTreeMap<Vec<i64>, u64> = enumerate_classes(2, k + 1, None)
            .into_iter()
            .filter(|c| c.ext_degrees[0] == 1)
            .map(|c| (c.canonical.tokens().to_vec(), c.auts))
            .collect();
        budded_total += targets.len() as u64;
        for (form, want_auts) in &targets {
            match produced.remove(form) {
                Some((1, auts)) if auts == *want_auts => {}
                _ => defects += 1,
            }
        }
        defects += produced.len() as u64;
        for class in enumerate_classes(2, k + 1, None) {
            if class.ext_degrees[0] != 1 {
                continue;
            }
            let round = debud(&class.graph)
                .and_then(|(src, l)| bud(&src, l))
                .map(|again| crate::graph::canon::canonicalize(&again).form == class.canonical);
            if !matches!(round, Ok(true)) {
                defects += 1;
            }
        }
    }
    CheckReport::finish(
        "budding-bijection",
        format!("weights 2..=4, {budded_total} budded classes"),
        defects as f64,
        0.0,
        start,
    )
}

/// Budding a graph and feeding the new external the gradient of the metric
/// potential contracts the fresh edge against the inverse metric: the value
/// is minus the original graph fed the gradient of the budded weight's
/// potential.
pub fn check_budding_identity(seed: u64) -> CheckReport {
    let start = Instant::now();
    let chart = enriched_disc_chart();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..2 {
        let f2 = random_polynomial(&mut rng, 1, 3);
        let point = random_point(&mut rng, 1, 0.4);
        for k in 1..=3i64 {
            for class in enumerate_classes(2, k, None) {
                let g = &class.graph;
                for l in [-1i32, 0, 1, 2] {
                    if l == -1 && class.ext_degrees[0] < 2 {
                        continue;
                    }
                    let b = bud(g, l).expect("budded graph");
                    let deg_b = b.out_degree(0);
                    let deg_g = g.out_degree(0);
                    let grad_metric = chart
                        .potential_jet(-1, &point, deg_b + 1)
                        .expect("potential")
                        .expect("weight -1 present")
                        .derive(Dir::Holo(0))
                        .expect("gradient");
                    let grad_l = chart
                        .potential_jet(l, &point, deg_g + 1)
                        .expect("potential")
                        .expect("enriched chart has this weight")
                        .derive(Dir::Holo(0))
                        .expect("gradient");
                    let mut ev_b = Evaluator::new(
                        &chart,
                        &point,
                        &[Arg::Jet(&grad_metric), Arg::Field(&f2)],
                        0,
                        [&b],
                    )
                    .expect("budded evaluator");
                    let lhs = ev_b.gamma(&b).expect("budded value").eval_center();
                    let mut ev_g = Evaluator::new(
                        &chart,
                        &point,
                        &[Arg::Jet(&grad_l), Arg::Field(&f2)],
                        0,
                        [g],
                    )
                    .expect("base evaluator");
                    let rhs = -ev_g.gamma(g).expect("base value").eval_center();
                    let scale = lhs.norm().max(rhs.norm());
                    worst = worst.max(relative((lhs - rhs).norm(), scale));
                }
            }
        }
    }
    CheckReport::finish(
        "budding-identity",
        format!("enriched disc, weights 1..=3, bud weights -1..=2, seed {seed}"),
        worst,
        1e-8,
        start,
    )
}

/// Order by order, the coefficients applied to the potential gradients and
/// a coordinate telescope to zero: the bud pairing matches each term at one
/// weight against a term at the next.
pub fn check_telescoping_sum(seed: u64) -> CheckReport {
    let start = Instant::now();
    let chart = enriched_disc_chart();
    let zs = parse_expression("z1").expect("coordinate");
    let store = MemoryStore::new();
    let opts = StarOptions { filter: None, store: Some(&store) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..2 {
        let point = random_point(&mut rng, 1, 0.4);
        for k in 1..=3i64 {
            let d0 = slot_requirement(2, 0, k + 1, &opts);
            let mut total = Complex64::new(0.0, 0.0);
            let mut scale = 0.0f64;
            for l in -1..=(k - 1) as i32 {
                let grad = chart
                    .potential_jet(l, &point, d0 + 1)
                    .expect("potential")
                    .expect("enriched chart has this weight")
                    .derive(Dir::Holo(0))
                    .expect("gradient");
                let term = star_coefficient(
                    &chart,
                    k - l as i64,
                    Arg::Jet(&grad),
                    Arg::Field(&zs),
                    &point,
                    0,
                    &opts,
                )
                .expect("coefficient")
                .eval_center();
                total += term;
                scale = scale.max(term.norm());
            }
            worst = worst.max(relative(total.norm(), scale));
        }
    }
    CheckReport::finish(
        "telescoping-sum",
        format!("enriched disc, orders 1..=3, seed {seed}"),
        worst,
        1e-8,
        start,
    )
}

/// The series of potential gradients star-commutes with each coordinate to
/// the identity matrix: gradients on the left reproduce the coordinate
/// pairing, coordinates on the left multiply pointwise.
pub fn check_potential_commutator(chart: &KahlerChart, filtered: bool, seed: u64) -> CheckReport {
    let start = Instant::now();
    let m = chart.dimension();
    let h_max = 3i64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = random_point(&mut rng, m, 0.4);
    let table = if filtered {
        Some(chart_signature_table(chart, &point, 0, 2 * (h_max as usize + 1)).expect("table"))
    } else {
        None
    };
    let store = MemoryStore::new();
    let opts = StarOptions { filter: table.as_ref(), store: Some(&store) };
    let depth = slot_requirement(2, 0, h_max + 1, &opts)
        .max(slot_requirement(2, 1, h_max + 1, &opts));
    let mut worst = 0.0f64;
    for r in 0..m {
        let psi_coeffs: Vec<Jet> = (-1..=h_max)
            .map(|w| match chart.potential_jet(w as i32, &point, depth + 1).expect("potential") {
                Some(jet) => jet.derive(Dir::Holo(r)).expect("gradient"),
                None => Jet::zero(m, depth),
            })
            .collect();
        let psi = FormalSeries::new(-1, psi_coeffs);
        for s in 0..m {
            let zs_jet = ScalarField::from_ast(Expr::Z(s + 1))
                .eval_jet(&point, depth)
                .expect("coordinate jet");
            let mut zs_coeffs = vec![zs_jet];
            for _ in 0..=h_max {
                zs_coeffs.push(Jet::zero(m, depth));
            }
            let zs = FormalSeries::new(0, zs_coeffs);
            let a = star_series(chart, &psi, &zs, &point, 0, h_max, &opts).expect("product");
            let b = star_series(chart, &zs, &psi, &point, 0, h_max, &opts).expect("product");
            for n in a.leading()..=a.trunc().min(b.trunc()) {
                let av = a.get(n).expect("order in range").eval_center();
                let bv = b.get(n).expect("order in range").eval_center();
                let target = if n == 0 && r == s {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let scale = av.norm().max(bv.norm());
                worst = worst.max(relative((av - bv - target).norm(), scale));
            }
        }
    }
    CheckReport::finish(
        "potential-commutator",
        format!(
            "chart={}, m={m}, orders -1..={h_max}, filter={filtered}, seed {seed}",
            chart.name()
        ),
        worst,
        1e-8,
        start,
    )
}

/// Running a subset of the suite twice must serialize to identical bytes.
pub fn check_determinism(seed: u64) -> CheckReport {
    let start = Instant::now();
    let run = || {
        reports_to_json(&[
            check_flat_factorial(1, 4, seed),
            check_first_order_bracket(seed),
        ])
    };
    let first = run();
    let second = run();
    let residual = if first == second { 0.0 } else { 1.0 };
    CheckReport::finish(
        "determinism",
        format!("two runs of two checks, seed {seed}"),
        residual,
        0.0,
        start,
    )
}

/// Fubini-Study metric with the weight 1 potential set to the same
/// function, the simplest chart whose gradient series has two terms.
pub fn doubled_sphere_chart() -> KahlerChart {
    let mut potentials = BTreeMap::new();
    potentials.insert(-1, parse_expression("log(1 + z1*zb1)").expect("metric potential"));
    potentials.insert(1, parse_expression("log(1 + z1*zb1)").expect("weight 1 potential"));
    KahlerChart::new("doubled-sphere", 1, potentials).expect("valid chart")
}

/// A deferred check ready to run.
pub type CheckThunk = Box<dyn FnOnce() -> CheckReport>;

/// Every check of the suite in a fixed order, paired with its report name.
/// Names repeat where one check runs under several configurations; the
/// pairing lets a caller select by name without running the rest.
pub fn suite(seed: u64) -> Vec<(&'static str, CheckThunk)> {
    let mut list: Vec<(&'static str, CheckThunk)> = Vec::new();
    list.push(("class-counts", Box::new(check_class_counts)));
    list.push(("structural-invariants", Box::new(check_structural_invariants)));
    list.push(("flat-factorial", Box::new(move || check_flat_factorial(1, 6, seed))));
    list.push(("flat-factorial", Box::new(move || check_flat_factorial(2, 6, seed))));
    list.push(("first-order-bracket", Box::new(move || check_first_order_bracket(seed))));
    for name in ["fubini-study", "hyperbolic-disc"] {
        list.push((
            "associativity",
            Box::new(move || {
                let chart = KahlerChart::builtin(name, 1).expect("builtin chart");
                check_associativity(&chart, 3, 5, 3, seed)
            }),
        ));
    }
    list.push((
        "associativity",
        Box::new(move || check_associativity(&enriched_disc_chart(), 3, 5, 3, seed)),
    ));
    list.push(("circuit-form", Box::new(move || check_circuit_form(seed))));
    list.push(("fusion-partition", Box::new(check_fusion_partition)));
    list.push(("composition-identity", Box::new(move || check_composition_identity(seed))));
    list.push(("budding-bijection", Box::new(check_budding_bijection)));
    list.push(("budding-identity", Box::new(move || check_budding_identity(seed))));
    list.push(("telescoping-sum", Box::new(move || check_telescoping_sum(seed))));
    for m in [1usize, 2] {
        list.push((
            "potential-commutator",
            Box::new(move || {
                let chart = KahlerChart::builtin("flat", m).expect("builtin chart");
                check_potential_commutator(&chart, true, seed)
            }),
        ));
    }
    list.push((
        "potential-commutator",
        Box::new(move || {
            let chart = KahlerChart::builtin("fubini-study", 1).expect("builtin chart");
            check_potential_commutator(&chart, false, seed)
        }),
    ));
    list.push((
        "potential-commutator",
        Box::new(move || check_potential_commutator(&doubled_sphere_chart(), false, seed)),
    ));
    list.push(("determinism", Box::new(move || check_determinism(seed))));
    list
}

/// The full suite in a fixed order.
pub fn run_suite(seed: u64) -> Vec<CheckReport> {
    suite(seed).into_iter().map(|(_, run)| run()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compositions_cover_the_simplex() {
        assert_eq!(compositions(3, 1), vec![vec![3]]);
        let two = compositions(3, 2);
        assert_eq!(two, vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
        assert_eq!(compositions(4, 3).len(), 15);
    }

    #[test]
    fn reports_serialize_without_runtime() {
        let report = CheckReport {
            name: "sample".into(),
            parameters: "none".into(),
            max_residual: 0.5,
            tolerance: 1.0,
            pass: true,
            runtime: Duration::from_secs(3),
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(!json.contains("runtime"));
        assert!(json.contains("\"max_residual\":0.5"));
    }

    #[test]
    fn random_fields_round_trip_through_their_source() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for m in 1..=2 {
            let f = random_polynomial(&mut rng, m, 3);
            let again = parse_expression(f.source()).unwrap();
            let point = random_point(&mut rng, m, 0.5);
            let a = f.eval_jet(&point, 2).unwrap();
            let b = again.eval_jet(&point, 2).unwrap();
            assert!(a.checked_sub(&b).unwrap().max_abs() < 1e-9);
        }
    }

    #[test]
    fn count_and_structure_checks_pass() {
        assert!(check_class_counts().pass);
        assert!(check_structural_invariants().pass);
    }

    #[test]
    fn bracket_check_passes() {
        let report = check_first_order_bracket(DEFAULT_SEED);
        assert!(report.pass, "{report}");
    }

    #[test]
    fn determinism_check_passes() {
        assert!(check_determinism(DEFAULT_SEED).pass);
    }

    #[test]
    fn suite_registers_every_check() {
        let names: Vec<&str> = suite(DEFAULT_SEED).iter().map(|(n, _)| *n).collect();
        assert_eq!(names.len(), 19);
        for want in [
            "class-counts",
            "structural-invariants",
            "flat-factorial",
            "first-order-bracket",
            "associativity",
            "circuit-form",
            "fusion-partition",
            "composition-identity",
            "budding-bijection",
            "budding-identity",
            "telescoping-sum",
            "potential-commutator",
            "determinism",
        ] {
            assert!(names.contains(&want), "missing {want}");
        }
    }
}
