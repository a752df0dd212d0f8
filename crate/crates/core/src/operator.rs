//! Evaluation of graph operators on a chart.
//!
//! Each graph denotes a multidifferential operator. An edge u -> v carries a
//! factor of the inverse metric; the incidence label at the tail picks its
//! barred index, the label at the head its unbarred one. A vertex collects
//! the labels of its incident edges into a derivative: head labels of
//! incoming edges differentiate holomorphically, tail labels of outgoing
//! edges anti-holomorphically. External vertices differentiate the operator
//! arguments, an internal vertex of weight w differentiates the potential of
//! that weight, with a minus sign per internal vertex. Summing the resulting
//! products over all labellings gives the operator's value; dividing each
//! graph by its automorphism count and summing over all graphs of one total
//! weight gives the star-product coefficient at that order.
//!
//! Everything is computed in jet arithmetic at a point, so operator values
//! can themselves be differentiated, which is what nested products need.
//! Derivatives of arguments and potentials are memoized per multi-index;
//! argument jets are prepared once, deep enough for every graph in play.

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_complex::Complex64;
use thiserror::Error;

use crate::decor::compatible_circuit_count;
use crate::expr::{EvalError, ScalarField};
use crate::geometry::{GeometryError, KahlerChart};
use crate::graph::enumerate::{enumerate_classes, GraphClass, SignatureTable};
use crate::graph::Graph;
use crate::jet::{Jet, JetError, JetMatrix};
use crate::series::{FormalSeries, StarSeries};

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected {want} arguments, got {got}")]
    ArgCount { got: usize, want: usize },
    #[error("argument {slot} needs a jet of depth {need}, got {got}")]
    ArgDepth { slot: usize, need: usize, got: usize },
    #[error("argument {slot} has dimension {got}, chart has {want}")]
    ArgDimension { slot: usize, got: usize, want: usize },
    #[error("point has {got} coordinates, chart has {want}")]
    CoordsDimension { got: usize, want: usize },
    #[error("graph exceeds the evaluation plan: {0}")]
    OutsidePlan(String),
    #[error("operators take 2 to 4 arguments, got {0}")]
    UnsupportedArity(usize),
}

/// One operator argument: a field differentiated on demand, or a jet already
/// evaluated at the point (as deep as the graphs in play require).
#[derive(Clone, Copy)]
pub enum Arg<'a> {
    Field(&'a ScalarField),
    Jet(&'a Jet),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum TensorSource {
    Slot(usize),
    Potential(i32),
}

/// Evaluates graph operators at one point of one chart, for a fixed
/// argument list and output depth. Construction prepares the inverse metric,
/// the argument jets and the potential jets at the depths demanded by the
/// planned graphs; evaluation then only derives, truncates and multiplies.
pub struct Evaluator {
    m: usize,
    depth: usize,
    slot_caps: Vec<usize>,
    pot_caps: BTreeMap<i32, usize>,
    inverse_metric: JetMatrix,
    args: Vec<Jet>,
    potentials: BTreeMap<i32, Jet>,
    cache: HashMap<(TensorSource, Vec<u32>, Vec<u32>), Jet>,
}

impl Evaluator {
    /// Plans for every graph in `graphs`; evaluating a graph that needs
    /// deeper derivatives than any planned one is an error.
    pub fn new<'g>(
        chart: &KahlerChart,
        coords: &[Complex64],
        args: &[Arg],
        depth: usize,
        graphs: impl IntoIterator<Item = &'g Graph>,
    ) -> Result<Evaluator, OperatorError> {
        let m = chart.dimension();
        if coords.len() != m {
            return Err(OperatorError::CoordsDimension { got: coords.len(), want: m });
        }
        let mut slot_caps = vec![0usize; args.len()];
        let mut pot_caps: BTreeMap<i32, usize> = BTreeMap::new();
        for g in graphs {
            if g.n_ext() != args.len() {
                return Err(OperatorError::ArgCount { got: args.len(), want: g.n_ext() });
            }
            let deg = g.degrees();
            for (slot, cap) in slot_caps.iter_mut().enumerate() {
                *cap = (*cap).max(deg[slot].0 + deg[slot].1);
            }
            for (i, &w) in g.internal_weights().iter().enumerate() {
                let v = g.n_ext() + i;
                let c = pot_caps.entry(w).or_insert(0);
                *c = (*c).max(deg[v].0 + deg[v].1);
            }
        }

        let mut arg_jets = Vec::with_capacity(args.len());
        for (slot, arg) in args.iter().enumerate() {
            let need = depth + slot_caps[slot];
            let jet = match arg {
                Arg::Field(f) => f.eval_jet(coords, need)?,
                Arg::Jet(j) => {
                    if j.m() != m {
                        return Err(OperatorError::ArgDimension { slot, got: j.m(), want: m });
                    }
                    if j.depth() < need {
                        return Err(OperatorError::ArgDepth { slot, need, got: j.depth() });
                    }
                    j.truncate(need)
                }
            };
            arg_jets.push(jet);
        }

        let mut potentials = BTreeMap::new();
        for (&w, &cap) in &pot_caps {
            if let Some(jet) = chart.potential_jet(w, coords, depth + cap)? {
                potentials.insert(w, jet);
            }
        }

        Ok(Evaluator {
            m,
            depth,
            slot_caps,
            pot_caps,
            inverse_metric: chart.inverse_metric_jet(coords, depth)?,
            args: arg_jets,
            potentials,
            cache: HashMap::new(),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    fn check_plan(&self, g: &Graph) -> Result<(), OperatorError> {
        if g.n_ext() != self.args.len() {
            return Err(OperatorError::ArgCount { got: self.args.len(), want: g.n_ext() });
        }
        let deg = g.degrees();
        for slot in 0..g.n_ext() {
            if deg[slot].0 + deg[slot].1 > self.slot_caps[slot] {
                return Err(OperatorError::OutsidePlan(format!(
                    "external {slot} has degree {}",
                    deg[slot].0 + deg[slot].1
                )));
            }
        }
        for (i, &w) in g.internal_weights().iter().enumerate() {
            let v = g.n_ext() + i;
            if deg[v].0 + deg[v].1 > self.pot_caps.get(&w).copied().unwrap_or(0) {
                return Err(OperatorError::OutsidePlan(format!(
                    "weight {w} vertex has degree {}",
                    deg[v].0 + deg[v].1
                )));
            }
        }
        Ok(())
    }

    /// Derivative of an argument or potential, truncated to the output
    /// depth. A missing potential is the zero field.
    fn tensor_jet(
        &mut self,
        source: TensorSource,
        alpha: &[u32],
        beta: &[u32],
    ) -> Result<Jet, OperatorError> {
        let key = (source, alpha.to_vec(), beta.to_vec());
        if let Some(hit) = self.cache.get(&key) {
            return Ok(hit.clone());
        }
        let base = match &key.0 {
            TensorSource::Slot(i) => Some(&self.args[*i]),
            TensorSource::Potential(w) => self.potentials.get(w),
        };
        let jet = match base {
            Some(b) => b.derive_multi(alpha, beta)?.truncate(self.depth),
            None => Jet::zero(self.m, self.depth),
        };
        self.cache.insert(key, jet.clone());
        Ok(jet)
    }

    /// Value of one labelling: the product of vertex derivatives and edge
    /// metric factors, with a sign per internal vertex. `tails[e]` and
    /// `heads[e]` are the labels at edge `e`'s endpoints.
    fn labelling_term(
        &mut self,
        g: &Graph,
        tails: &[u8],
        heads: &[u8],
    ) -> Result<Jet, OperatorError> {
        let mut product = if g.n_int() % 2 == 1 {
            Jet::constant(self.m, self.depth, Complex64::new(-1.0, 0.0))
        } else {
            Jet::constant(self.m, self.depth, Complex64::new(1.0, 0.0))
        };
        for v in 0..g.vertex_count() as u32 {
            let mut alpha = vec![0u32; self.m];
            let mut beta = vec![0u32; self.m];
            for e in g.in_edges(v) {
                alpha[heads[e] as usize] += 1;
            }
            for e in g.out_edges(v) {
                beta[tails[e] as usize] += 1;
            }
            let source = if g.is_external(v) {
                TensorSource::Slot(v as usize)
            } else {
                TensorSource::Potential(g.weight_of(v).expect("internal vertex has a weight"))
            };
            let factor = self.tensor_jet(source, &alpha, &beta)?;
            if factor.is_zero() {
                return Ok(Jet::zero(self.m, self.depth));
            }
            product = product.checked_mul(&factor)?;
        }
        for e in 0..g.edge_count() {
            let factor = self.inverse_metric.entry(tails[e] as usize, heads[e] as usize);
            if factor.is_zero() {
                return Ok(Jet::zero(self.m, self.depth));
            }
            product = product.checked_mul(factor)?;
        }
        Ok(product)
    }

    /// Value of the graph under one fixed labelling, signs included.
    pub fn lambda(
        &mut self,
        g: &Graph,
        labelling: &crate::decor::Labelling,
    ) -> Result<Jet, OperatorError> {
        self.check_plan(g)?;
        let e = g.edge_count();
        let tails: Vec<u8> = (0..e).map(|i| labelling.at_tail(i)).collect();
        let heads: Vec<u8> = (0..e).map(|i| labelling.at_head(i)).collect();
        self.labelling_term(g, &tails, &heads)
    }

    /// Full operator value: the labelling sum over all m^(2E) label
    /// assignments.
    pub fn gamma(&mut self, g: &Graph) -> Result<Jet, OperatorError> {
        self.check_plan(g)?;
        let e = g.edge_count();
        let mut total = Jet::zero(self.m, self.depth);
        let mut slots = vec![0u8; 2 * e];
        loop {
            let (tails, heads) = slots.split_at(e);
            let term = self.labelling_term(g, tails, heads)?;
            total = total.checked_add(&term)?;
            let mut i = 2 * e;
            loop {
                if i == 0 {
                    return Ok(total);
                }
                i -= 1;
                if (slots[i] as usize) + 1 < self.m {
                    slots[i] += 1;
                    for s in slots[i + 1..].iter_mut() {
                        *s = 0;
                    }
                    break;
                }
                slots[i] = 0;
            }
        }
    }
}

/// Source of enumerated graph levels, letting callers reuse previous runs.
/// Only unfiltered levels may be stored; filtered requests are served by
/// filtering a stored unfiltered level (admissibility is per vertex, so the
/// results agree) and are never written back.
pub trait LevelStore {
    fn load(&self, n_ext: usize, k: i64) -> Option<Vec<GraphClass>>;
    fn save(&self, n_ext: usize, k: i64, classes: &[GraphClass]);
}

/// In-process level store.
#[derive(Default)]
pub struct MemoryStore {
    inner: Mutex<HashMap<(usize, i64), Vec<GraphClass>>>,
}

impl MemoryStore {
    pub fn new() -> MemoryStore {
        MemoryStore::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("store lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl LevelStore for MemoryStore {
    fn load(&self, n_ext: usize, k: i64) -> Option<Vec<GraphClass>> {
        self.inner.lock().expect("store lock").get(&(n_ext, k)).cloned()
    }

    fn save(&self, n_ext: usize, k: i64, classes: &[GraphClass]) {
        self.inner
            .lock()
            .expect("store lock")
            .insert((n_ext, k), classes.to_vec());
    }
}

/// Knobs shared by the star-product entry points.
#[derive(Default, Clone, Copy)]
pub struct StarOptions<'a> {
    /// Restricts enumeration to internal vertex shapes that can contribute,
    /// typically from [`chart_signature_table`].
    pub filter: Option<&'a SignatureTable>,
    pub store: Option<&'a dyn LevelStore>,
}

fn class_admissible(class: &GraphClass, table: &SignatureTable) -> bool {
    let g = &class.graph;
    let deg = g.degrees();
    g.internal_weights()
        .iter()
        .enumerate()
        .all(|(i, &w)| {
            let v = g.n_ext() + i;
            table.admits(w, deg[v].0, deg[v].1)
        })
}

/// Graph classes at one level, through the store when one is given.
pub fn level_classes(n_ext: usize, k: i64, opts: &StarOptions) -> Vec<GraphClass> {
    match opts.filter {
        Some(table) => {
            if let Some(all) = opts.store.and_then(|s| s.load(n_ext, k)) {
                return all.into_iter().filter(|c| class_admissible(c, table)).collect();
            }
            enumerate_classes(n_ext, k, Some(table))
        }
        None => {
            if let Some(hit) = opts.store.and_then(|s| s.load(n_ext, k)) {
                return hit;
            }
            let classes = enumerate_classes(n_ext, k, None);
            if let Some(s) = opts.store {
                s.save(n_ext, k, &classes);
            }
            classes
        }
    }
}

/// How many derivatives the argument in `slot` can receive across all
/// levels up to `k_max`; nested products need their inner jets this much
/// deeper than the output.
pub fn slot_requirement(n_ext: usize, slot: usize, k_max: i64, opts: &StarOptions) -> usize {
    (0..=k_max)
        .flat_map(|k| level_classes(n_ext, k, opts))
        .map(|c| c.ext_degrees[slot])
        .max()
        .unwrap_or(0)
}

/// Internal vertex shapes whose tensors are not identically zero in the jet
/// of the chart at this point and depth. Graphs containing an inadmissible
/// vertex contribute nothing to any labelling sum there, so enumeration may
/// skip them; the table is specific to the point and output depth it was
/// built for. `degree_cap` bounds the vertex degrees worth tabulating and
/// must cover every graph level the table will filter.
pub fn chart_signature_table(
    chart: &KahlerChart,
    coords: &[Complex64],
    depth: usize,
    degree_cap: usize,
) -> Result<SignatureTable, OperatorError> {
    let m = chart.dimension();
    if coords.len() != m {
        return Err(OperatorError::CoordsDimension { got: coords.len(), want: m });
    }
    let mut per_weight = BTreeMap::new();
    for w in chart.weights() {
        let jet = chart
            .potential_jet(w, coords, depth + degree_cap)?
            .expect("chart weights have potentials");
        // Bidegrees (holomorphic, anti-holomorphic) of nonzero monomials.
        let space = jet.space();
        let mut bidegrees: Vec<(usize, usize)> = Vec::new();
        for (i, c) in jet.coefficients().iter().enumerate() {
            if c.re == 0.0 && c.im == 0.0 {
                continue;
            }
            let exps = space.exponents(i);
            let da: usize = exps[..m].iter().map(|&x| x as usize).sum();
            let db: usize = exps[m..].iter().map(|&x| x as usize).sum();
            if !bidegrees.contains(&(da, db)) {
                bidegrees.push((da, db));
            }
        }
        // A (p, q) derivative survives truncation to the output depth
        // exactly when some nonzero monomial dominates it componentwise in
        // total bidegree with at most `depth` excess.
        let mut shapes = Vec::new();
        for p in 1..=degree_cap {
            for q in 1..=degree_cap {
                if p + q > degree_cap {
                    continue;
                }
                // Weight -1 vertices below the degree floor cannot occur in
                // a valid graph, so their shapes are dead weight.
                if w == -1 && p + q < 3 {
                    continue;
                }
                let live = bidegrees
                    .iter()
                    .any(|&(da, db)| da >= p && db >= q && (da - p) + (db - q) <= depth);
                if live {
                    shapes.push((p, q));
                }
            }
        }
        if !shapes.is_empty() {
            per_weight.insert(w, shapes);
        }
    }
    Ok(SignatureTable::new(per_weight))
}

/// Star-product coefficient at order `k`: the automorphism-weighted sum of
/// all two-argument graph operators of that weight.
pub fn star_coefficient(
    chart: &KahlerChart,
    k: i64,
    f1: Arg,
    f2: Arg,
    coords: &[Complex64],
    depth: usize,
    opts: &StarOptions,
) -> Result<Jet, OperatorError> {
    multi_coefficient(chart, k, &[f1, f2], coords, depth, opts)
}

/// The n-argument analogue of [`star_coefficient`]. Arities 2 and 3 are
/// exercised by the verification suite; arity 4 is exposed for exploration
/// but enumeration cost grows steeply with it.
pub fn multi_coefficient(
    chart: &KahlerChart,
    k: i64,
    args: &[Arg],
    coords: &[Complex64],
    depth: usize,
    opts: &StarOptions,
) -> Result<Jet, OperatorError> {
    if !(2..=4).contains(&args.len()) {
        return Err(OperatorError::UnsupportedArity(args.len()));
    }
    let classes = level_classes(args.len(), k, opts);
    let mut ev = Evaluator::new(chart, coords, args, depth, classes.iter().map(|c| &c.graph))?;
    let mut total = Jet::zero(chart.dimension(), depth);
    for class in &classes {
        let value = ev.gamma(&class.graph)?;
        total = total.checked_add(&value.scale(Complex64::new(1.0 / class.auts as f64, 0.0)))?;
    }
    Ok(total)
}

/// The same coefficient computed from labelled-graph classes with circuit
/// structures: each class contributes its single-labelling value divided by
/// its compatible-circuit count instead of grouping by automorphisms.
pub fn star_coefficient_circuit_form(
    chart: &KahlerChart,
    k: i64,
    f1: Arg,
    f2: Arg,
    coords: &[Complex64],
    depth: usize,
) -> Result<Jet, OperatorError> {
    let m = chart.dimension();
    let classes = crate::decor::enumerate_labelled_circuit_classes(2, k, m)
        .expect("chart dimension is positive");
    let args = [f1, f2];
    let mut ev = Evaluator::new(
        chart,
        coords,
        &args,
        depth,
        classes.iter().map(|(_, dg)| &dg.graph),
    )?;
    let mut total = Jet::zero(m, depth);
    for (_, dg) in &classes {
        let value = ev.lambda(&dg.graph, &dg.labelling)?;
        let c = compatible_circuit_count(&dg.graph, &dg.labelling);
        total = total.checked_add(&value.scale(Complex64::new(1.0 / c as f64, 0.0)))?;
    }
    Ok(total)
}

/// Star product of two power series in h with jet coefficients, computed
/// through order `h_max` inclusive (or less if the operands are known less
/// far). The product is h-bilinear: the order-n output collects every
/// coefficient at level k applied to argument coefficients at orders
/// summing to n - k. Series coefficients must be deep enough for the levels
/// that touch them; see [`slot_requirement`].
pub fn star_series(
    chart: &KahlerChart,
    a: &StarSeries,
    b: &StarSeries,
    coords: &[Complex64],
    depth: usize,
    h_max: i64,
    opts: &StarOptions,
) -> Result<StarSeries, OperatorError> {
    let m = chart.dimension();
    let leading = a.leading() + b.leading();
    let last = (a.trunc() + b.leading()).min(b.trunc() + a.leading()).min(h_max);
    assert!(last >= leading, "product is not known at any requested order");
    let mut coeffs = Vec::new();
    for n in leading..=last {
        let mut total = Jet::zero(m, depth);
        for i in a.leading()..=a.trunc() {
            for j in b.leading()..=b.trunc() {
                let k = n - i - j;
                if k < 0 {
                    continue;
                }
                let (ai, bj) =
                    (a.get(i).expect("order inside range"), b.get(j).expect("order inside range"));
                if ai.is_zero() || bj.is_zero() {
                    continue;
                }
                let term =
                    star_coefficient(chart, k, Arg::Jet(ai), Arg::Jet(bj), coords, depth, opts)?;
                total = total.checked_add(&term)?;
            }
        }
        coeffs.push(total);
    }
    Ok(FormalSeries::new(leading, coeffs))
}

/// Star product of two fields as a series in h with jet coefficients of the
/// given depth, computed through order `h_max` inclusive.
pub fn star_product(
    chart: &KahlerChart,
    f1: &ScalarField,
    f2: &ScalarField,
    coords: &[Complex64],
    depth: usize,
    h_max: i64,
    opts: &StarOptions,
) -> Result<StarSeries, OperatorError> {
    assert!(h_max >= 0, "a product of fields starts at order zero");
    let d1 = depth + slot_requirement(2, 0, h_max, opts);
    let d2 = depth + slot_requirement(2, 1, h_max, opts);
    let j1 = f1.eval_jet(coords, d1)?;
    let j2 = f2.eval_jet(coords, d2)?;
    let pad = |jet: Jet| -> StarSeries {
        let mut coeffs = vec![jet.clone()];
        for _ in 0..h_max {
            coeffs.push(Jet::zero(jet.m(), jet.depth()));
        }
        FormalSeries::new(0, coeffs)
    };
    star_series(chart, &pad(j1), &pad(j2), coords, depth, h_max, opts)
}

/// How the symbolic emitter renders operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolicFormat {
    Ascii,
    Latex,
}

fn format_rational(num: i64, den: u64, format: SymbolicFormat) -> String {
    match format {
        SymbolicFormat::Ascii => {
            if den == 1 {
                format!("{num}")
            } else {
                format!("{num}/{den}")
            }
        }
        SymbolicFormat::Latex => {
            if den == 1 {
                format!("{num}")
            } else if num < 0 {
                format!("-\\frac{{{}}}{{{den}}}", -num)
            } else {
                format!("\\frac{{{num}}}{{{den}}}")
            }
        }
    }
}

fn format_derivative(
    target: &str,
    holo: &[String],
    anti: &[String],
    format: SymbolicFormat,
) -> String {
    match format {
        SymbolicFormat::Ascii => {
            let mut s = String::new();
            if !holo.is_empty() {
                s.push_str(&format!("d_{{{}}} ", holo.join(" ")));
            }
            if !anti.is_empty() {
                s.push_str(&format!("db_{{{}}} ", anti.join(" ")));
            }
            if s.is_empty() {
                target.to_string()
            } else {
                format!("({s}{target})")
            }
        }
        SymbolicFormat::Latex => {
            let mut s = String::new();
            if !holo.is_empty() {
                s.push_str(&format!("\\partial_{{{}}} ", holo.join(" ")));
            }
            if !anti.is_empty() {
                s.push_str(&format!("\\bar\\partial_{{{}}} ", anti.join(" ")));
            }
            if s.is_empty() {
                target.to_string()
            } else {
                format!("\\left({s}{target}\\right)")
            }
        }
    }
}

/// Renders the order-k coefficient of the n-argument operator as a sum of
/// index contractions, one term per graph class. Edge e carries an index
/// pair: p<e> (unbarred, at the head) and q<e> (barred, at the tail); each
/// pair appears once on a metric factor and once in a derivative, and
/// repeated indices are summed over the chart dimension. Signs from
/// internal vertices are folded into the leading rationals.
pub fn emit_operator(n_ext: usize, k: i64, format: SymbolicFormat) -> String {
    let classes = enumerate_classes(n_ext, k, None);
    let mut terms = Vec::new();
    for class in &classes {
        let g = &class.graph;
        let sign: i64 = if g.n_int() % 2 == 1 { -1 } else { 1 };
        let mut factors = Vec::new();
        for (e, _) in g.edges().iter().enumerate() {
            factors.push(match format {
                SymbolicFormat::Ascii => format!("g^{{q{} p{}}}", e + 1, e + 1),
                SymbolicFormat::Latex => format!("g^{{\\bar q_{{{}}} p_{{{}}}}}", e + 1, e + 1),
            });
        }
        for v in 0..g.vertex_count() as u32 {
            let holo: Vec<String> = g
                .in_edges(v)
                .into_iter()
                .map(|e| match format {
                    SymbolicFormat::Ascii => format!("p{}", e + 1),
                    SymbolicFormat::Latex => format!("p_{{{}}}", e + 1),
                })
                .collect();
            let anti: Vec<String> = g
                .out_edges(v)
                .into_iter()
                .map(|e| match format {
                    SymbolicFormat::Ascii => format!("q{}", e + 1),
                    SymbolicFormat::Latex => format!("q_{{{}}}", e + 1),
                })
                .collect();
            let target = if g.is_external(v) {
                match format {
                    SymbolicFormat::Ascii => format!("f{}", v + 1),
                    SymbolicFormat::Latex => format!("f_{{{}}}", v + 1),
                }
            } else {
                let w = g.weight_of(v).expect("internal weight");
                match format {
                    SymbolicFormat::Ascii => format!("Phi_{{{w}}}"),
                    SymbolicFormat::Latex => format!("\\Phi_{{{w}}}"),
                }
            };
            factors.push(format_derivative(&target, &holo, &anti, format));
        }
        let coefficient = format_rational(sign, class.auts, format);
        let body = factors.join(" ");
        terms.push(if coefficient == "1" {
            body
        } else if coefficient == "-1" {
            format!("-{body}")
        } else {
            format!("{coefficient} {body}")
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ").replace("+ -", "- ")
    }
}
