//! Labellings and circuit structures on graphs.
//!
//! A labelling assigns a coordinate index (0-based, below the chart
//! dimension m) to each edge incidence: one at the tail vertex, one at the
//! head. A circuit structure totally orders each vertex's incoming edges and
//! its outgoing edges. The two are compatible when labels never decrease
//! along any of those orders; the number of compatible circuit structures
//! for a fixed labelling factorizes as a product of multi-index factorials,
//! one pair per vertex.
//!
//! Isomorphism of decorated graphs preserves labels and circuit order, so
//! canonical forms extend the plain graph encoding with per-vertex incidence
//! records, minimized over the graph's optimal relabellings.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::canon::{canonicalize, CanonicalForm};
use crate::graph::enumerate::enumerate_classes;
use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecorError {
    #[error("labelling covers {got} edges, graph has {want}")]
    WrongEdgeCount { got: usize, want: usize },
    #[error("label {label} out of range for dimension {m}")]
    LabelOutOfRange { label: u8, m: usize },
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("circuit order at vertex {0} is not a permutation of its incident edges")]
    BadCircuitOrder(u32),
    #[error("circuit order at vertex {0} violates label order")]
    IncompatibleCircuit(u32),
}

/// Per-edge incidence labels; edge indices follow `Graph::edges()`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Labelling {
    m: usize,
    tail_labels: Vec<u8>,
    head_labels: Vec<u8>,
}

impl Labelling {
    pub fn new(
        g: &Graph,
        m: usize,
        tail_labels: Vec<u8>,
        head_labels: Vec<u8>,
    ) -> Result<Labelling, DecorError> {
        if m == 0 {
            return Err(DecorError::ZeroDimension);
        }
        let want = g.edge_count();
        if tail_labels.len() != want || head_labels.len() != want {
            return Err(DecorError::WrongEdgeCount {
                got: tail_labels.len().min(head_labels.len()),
                want,
            });
        }
        for &l in tail_labels.iter().chain(&head_labels) {
            if l as usize >= m {
                return Err(DecorError::LabelOutOfRange { label: l, m });
            }
        }
        Ok(Labelling { m, tail_labels, head_labels })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Label at the tail incidence of edge `e`.
    pub fn at_tail(&self, e: usize) -> u8 {
        self.tail_labels[e]
    }

    /// Label at the head incidence of edge `e`.
    pub fn at_head(&self, e: usize) -> u8 {
        self.head_labels[e]
    }

    /// Label of the incidence of edge `e` at vertex `v`, if incident.
    pub fn at(&self, g: &Graph, v: u32, e: usize) -> Option<u8> {
        let (t, h) = g.edges()[e];
        if t == v {
            Some(self.tail_labels[e])
        } else if h == v {
            Some(self.head_labels[e])
        } else {
            None
        }
    }
}

/// Occurrence counts of each coordinate index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(m: usize) -> MultiIndex {
        MultiIndex(vec![0; m])
    }

    pub fn from_labels(m: usize, labels: impl IntoIterator<Item = u8>) -> MultiIndex {
        let mut counts = vec![0u32; m];
        for l in labels {
            counts[l as usize] += 1;
        }
        MultiIndex(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn factorial(&self) -> u64 {
        self.0
            .iter()
            .map(|&c| (1..=c as u64).product::<u64>())
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Total orders on each vertex's incoming and outgoing edges, as edge-index
/// sequences. `in_orders[v][p]` is the edge in position p at vertex v.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CircuitStructure {
    pub in_orders: Vec<Vec<usize>>,
    pub out_orders: Vec<Vec<usize>>,
}

impl CircuitStructure {
    /// Position of edge `e` in its tail vertex's outgoing order.
    pub fn tail_position(&self, g: &Graph, e: usize) -> usize {
        let (t, _) = g.edges()[e];
        self.out_orders[t as usize]
            .iter()
            .position(|&x| x == e)
            .expect("edge present in its tail's order")
    }

    fn is_permutation_of(order: &[usize], mut expected: Vec<usize>) -> bool {
        let mut got = order.to_vec();
        got.sort_unstable();
        expected.sort_unstable();
        got == expected
    }

    pub fn validate(&self, g: &Graph, l: &Labelling) -> Result<(), DecorError> {
        for v in 0..g.vertex_count() as u32 {
            let vin = &self.in_orders[v as usize];
            let vout = &self.out_orders[v as usize];
            if !Self::is_permutation_of(vin, g.in_edges(v)) || !Self::is_permutation_of(vout, g.out_edges(v)) {
                return Err(DecorError::BadCircuitOrder(v));
            }
            let ascending = |edges: &[usize], label: &dyn Fn(usize) -> u8| {
                edges.windows(2).all(|w| label(w[0]) <= label(w[1]))
            };
            if !ascending(vin, &|e| l.at_head(e)) || !ascending(vout, &|e| l.at_tail(e)) {
                return Err(DecorError::IncompatibleCircuit(v));
            }
        }
        Ok(())
    }
}

/// A graph with a labelling and, optionally, a compatible circuit structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoratedGraph {
    pub graph: Graph,
    pub labelling: Labelling,
    pub circuit: Option<CircuitStructure>,
}

impl DecoratedGraph {
    pub fn new(
        graph: Graph,
        labelling: Labelling,
        circuit: Option<CircuitStructure>,
    ) -> Result<DecoratedGraph, DecorError> {
        if labelling.tail_labels.len() != graph.edge_count() {
            return Err(DecorError::WrongEdgeCount {
                got: labelling.tail_labels.len(),
                want: graph.edge_count(),
            });
        }
        if let Some(c) = &circuit {
            c.validate(&graph, &labelling)?;
        }
        Ok(DecoratedGraph { graph, labelling, circuit })
    }

    pub fn m(&self) -> usize {
        self.labelling.m
    }
}

/// The multi-index pair at a vertex: incoming head labels and outgoing tail
/// labels.
pub fn incidence_multi_indices(g: &Graph, l: &Labelling, v: u32) -> (MultiIndex, MultiIndex) {
    assert!((v as usize) < g.vertex_count(), "unknown vertex {v}");
    let alpha = MultiIndex::from_labels(l.m, g.in_edges(v).into_iter().map(|e| l.at_head(e)));
    let beta = MultiIndex::from_labels(l.m, g.out_edges(v).into_iter().map(|e| l.at_tail(e)));
    (alpha, beta)
}

/// All raw labellings, lexicographic in (tail labels, head labels) per edge
/// order; m^(2E) of them.
pub fn enumerate_labellings(g: &Graph, m: usize) -> Result<Vec<Labelling>, DecorError> {
    if m == 0 {
        return Err(DecorError::ZeroDimension);
    }
    let e = g.edge_count();
    let mut out = Vec::new();
    let mut slots = vec![0u8; 2 * e];
    loop {
        let (tails, heads) = slots.split_at(e);
        out.push(Labelling {
            m,
            tail_labels: tails.to_vec(),
            head_labels: heads.to_vec(),
        });
        // Odometer increment.
        let mut i = 2 * e;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if (slots[i] as usize) + 1 < m {
                slots[i] += 1;
                for s in slots[i + 1..].iter_mut() {
                    *s = 0;
                }
                break;
            }
        }
    }
}

/// Product over vertices of the factorials of the incidence multi-indices;
/// equals the number of compatible circuit structures.
pub fn compatible_circuit_count(g: &Graph, l: &Labelling) -> u64 {
    (0..g.vertex_count() as u32)
        .map(|v| {
            let (alpha, beta) = incidence_multi_indices(g, l, v);
            alpha.factorial() * beta.factorial()
        })
        .product()
}

/// Orders of `edges` along which `label` never decreases: the sorted order
/// with equal-label blocks permuted freely.
fn ascending_orders(edges: &[usize], label: &dyn Fn(usize) -> u8) -> Vec<Vec<usize>> {
    let mut sorted = edges.to_vec();
    sorted.sort_by_key(|&e| (label(e), e));
    // Group into equal-label blocks.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for e in sorted {
        match blocks.last_mut() {
            Some(b) if label(b[0]) == label(e) => b.push(e),
            _ => blocks.push(vec![e]),
        }
    }
    let mut orders = vec![Vec::new()];
    for block in blocks {
        let perms = permute(&block);
        let mut next = Vec::with_capacity(orders.len() * perms.len());
        for head in &orders {
            for tail in &perms {
                let mut o = head.clone();
                o.extend_from_slice(tail);
                next.push(o);
            }
        }
        orders = next;
    }
    orders
}

fn permute(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permute(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every circuit structure compatible with the labelling.
pub fn enumerate_compatible_circuits(g: &Graph, l: &Labelling) -> Vec<CircuitStructure> {
    let v_count = g.vertex_count();
    let in_choices: Vec<Vec<Vec<usize>>> = (0..v_count as u32)
        .map(|v| ascending_orders(&g.in_edges(v), &|e| l.at_head(e)))
        .collect();
    let out_choices: Vec<Vec<Vec<usize>>> = (0..v_count as u32)
        .map(|v| ascending_orders(&g.out_edges(v), &|e| l.at_tail(e)))
        .collect();
    let mut out = Vec::new();
    let mut in_pick = vec![0usize; v_count];
    let mut out_pick = vec![0usize; v_count];
    loop {
        out.push(CircuitStructure {
            in_orders: (0..v_count).map(|v| in_choices[v][in_pick[v]].clone()).collect(),
            out_orders: (0..v_count).map(|v| out_choices[v][out_pick[v]].clone()).collect(),
        });
        // Mixed-radix increment over (in_pick, out_pick).
        let mut carried = true;
        for v in (0..v_count).rev() {
            if out_pick[v] + 1 < out_choices[v].len() {
                out_pick[v] += 1;
                carried = false;
            } else {
                out_pick[v] = 0;
                if in_pick[v] + 1 < in_choices[v].len() {
                    in_pick[v] += 1;
                    carried = false;
                } else {
                    in_pick[v] = 0;
                }
            }
            if !carried {
                break;
            }
        }
        if carried {
            return out;
        }
    }
}

/// Canonical key for a decorated graph; total order, usable as a map key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DecoratedForm(Vec<i64>);

impl DecoratedForm {
    pub fn tokens(&self) -> &[i64] {
        &self.0
    }
}

/// Encodes the decoration under one vertex relabelling. Each vertex lists
/// its incoming edges as records (new tail id, head label, tail label, and,
/// with a circuit, the edge's position in its tail's outgoing order); record
/// lists follow the incoming circuit order where present and are sorted
/// otherwise. A sorted record list at the sink forgets exactly the sink's
/// incoming order, which is the equivalence used by graph fusion. Every edge
/// appears in exactly one record, tagged with its tail-side position, so the
/// encoding pins the whole structure without naming edges.
fn encode_decoration(dg: &DecoratedGraph, perm: &[u32], sort_sink_records: bool) -> Vec<i64> {
    let g = &dg.graph;
    let v_count = g.vertex_count();
    let sink = (g.n_ext() - 1) as u32;
    // records[new head id] = list of (new tail id, head label, tail label, tail pos)
    let mut records: Vec<Vec<(i64, i64, i64, i64)>> = vec![Vec::new(); v_count];
    match &dg.circuit {
        Some(c) => {
            for v in 0..v_count as u32 {
                for &e in &c.in_orders[v as usize] {
                    let (t, _) = g.edges()[e];
                    records[perm[v as usize] as usize].push((
                        perm[t as usize] as i64,
                        dg.labelling.at_head(e) as i64,
                        dg.labelling.at_tail(e) as i64,
                        c.tail_position(g, e) as i64,
                    ));
                }
            }
            if sort_sink_records {
                records[perm[sink as usize] as usize].sort_unstable();
            }
        }
        None => {
            for (e, &(t, h)) in g.edges().iter().enumerate() {
                records[perm[h as usize] as usize].push((
                    perm[t as usize] as i64,
                    dg.labelling.at_head(e) as i64,
                    dg.labelling.at_tail(e) as i64,
                    -1,
                ));
            }
            for r in &mut records {
                r.sort_unstable();
            }
        }
    }
    let mut tokens = Vec::new();
    for r in records {
        tokens.push(-2);
        for (a, b, c, d) in r {
            tokens.extend_from_slice(&[a, b, c, d]);
        }
    }
    tokens
}

fn decorated_form_inner(dg: &DecoratedGraph, sort_sink_records: bool) -> DecoratedForm {
    let info = canonicalize(&dg.graph);
    let mut best: Option<Vec<i64>> = None;
    for perm in &info.optimal_perms {
        let cand = encode_decoration(dg, perm, sort_sink_records);
        if best.as_ref().map_or(true, |b| cand < *b) {
            best = Some(cand);
        }
    }
    let mut tokens = info.form.tokens().to_vec();
    tokens.push(i64::MIN); // separator between graph and decoration sections
    tokens.extend(best.expect("graphs have at least one optimal relabelling"));
    DecoratedForm(tokens)
}

/// Canonical form preserving labels and full circuit order.
pub fn decorated_canonical_form(dg: &DecoratedGraph) -> DecoratedForm {
    decorated_form_inner(dg, false)
}

/// Canonical form forgetting the incoming order at the sink external vertex
/// (the fusion equivalence; class size is the factorial of the sink's
/// incoming multi-index).
pub fn decorated_canonical_form_mod_sink(dg: &DecoratedGraph) -> DecoratedForm {
    decorated_form_inner(dg, true)
}

/// One representative per isomorphism class of labelled graphs with a
/// compatible circuit structure, at the given externals, weight and
/// dimension; sorted by canonical form.
pub fn enumerate_labelled_circuit_classes(
    n_ext: usize,
    k: i64,
    m: usize,
) -> Result<Vec<(DecoratedForm, DecoratedGraph)>, DecorError> {
    if m == 0 {
        return Err(DecorError::ZeroDimension);
    }
    let mut classes: BTreeMap<DecoratedForm, DecoratedGraph> = BTreeMap::new();
    for class in enumerate_classes(n_ext, k, None) {
        for l in enumerate_labellings(&class.graph, m)? {
            for c in enumerate_compatible_circuits(&class.graph, &l) {
                let dg = DecoratedGraph {
                    graph: class.graph.clone(),
                    labelling: l.clone(),
                    circuit: Some(c),
                };
                let form = decorated_canonical_form(&dg);
                classes.entry(form).or_insert(dg);
            }
        }
    }
    Ok(classes.into_iter().collect())
}

/// One representative per class under the coarser equivalence that also
/// forgets the incoming order at the sink; sorted by that canonical form.
pub fn enumerate_labelled_circuit_classes_mod_sink(
    n_ext: usize,
    k: i64,
    m: usize,
) -> Result<Vec<(DecoratedForm, DecoratedGraph)>, DecorError> {
    let mut classes: BTreeMap<DecoratedForm, DecoratedGraph> = BTreeMap::new();
    for (_, dg) in enumerate_labelled_circuit_classes(n_ext, k, m)? {
        let form = decorated_canonical_form_mod_sink(&dg);
        classes.entry(form).or_insert(dg);
    }
    Ok(classes.into_iter().collect())
}

/// Graph canonical form shared by every decorated form of the same graph.
pub fn underlying_form(dg: &DecoratedGraph) -> CanonicalForm {
    canonicalize(&dg.graph).form
}
