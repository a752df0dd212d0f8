//! Graph surgery: fusion, defusion, budding and debudding.
//!
//! Fusion composes a two-external decorated graph into the first slot of a
//! three-external picture: the first graph's sink is cut open and each of
//! its dangling edges is re-attached on the second graph's side, either
//! entering an existing vertex or splitting an edge at a fresh weight -1
//! vertex. Defusion inverts this, reading the second factor off the part of
//! the graph that feeds the middle external. Budding converts the first
//! external into an internal vertex fed by a fresh external; together with
//! its inverse it pairs graph levels of adjacent weights.
//!
//! Fusion and defusion work on decorated graphs (labels and circuit orders
//! travel through the surgery); budding works on plain graphs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::decor::{
    decorated_canonical_form, CircuitStructure, DecorError, DecoratedForm, DecoratedGraph,
    Labelling, MultiIndex,
};
use crate::graph::{Graph, GraphError};

#[derive(Debug, Error)]
pub enum SurgeryError {
    #[error("expected a graph with {want} externals, got {got}")]
    ExternalCount { got: usize, want: usize },
    #[error("surgery needs a circuit structure on the graph")]
    MissingCircuit,
    #[error("graphs have different label dimensions: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("weight {0} is below the floor")]
    WeightBelowFloor(i32),
    #[error("budding at weight -1 needs the first external to have degree at least 2")]
    BudNeedsBranching,
    #[error("budding needs the first external to have an edge")]
    BudNeedsEdges,
    #[error("not a budded graph: {0}")]
    NotABud(&'static str),
    #[error("surgery produced an invalid graph: {0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decor(#[from] DecorError),
}

/// A set of decorated graphs identified by forgetting the incoming order at
/// the sink, carried as one representative plus the class size (the
/// factorial of the sink's incoming multi-index).
#[derive(Debug, Clone)]
pub struct EquivClass {
    pub representative: DecoratedGraph,
    pub size: u64,
}

/// One edge under construction; endpoints use working vertex ids and labels
/// stay attached to their incidences.
#[derive(Debug, Clone)]
struct WorkEdge {
    tail: usize,
    head: usize,
    tail_label: u8,
    head_label: u8,
    /// Eligible for splitting during fusion: second-factor edges and the
    /// pieces of previous splits, never first-factor or dangling edges.
    differentiable: bool,
    alive: bool,
}

const UNATTACHED: usize = usize::MAX;

#[derive(Debug, Clone)]
struct WorkState {
    /// Internal weights by vertex id; externals hold None.
    weights: Vec<Option<i32>>,
    edges: Vec<WorkEdge>,
    in_orders: Vec<Vec<usize>>,
    out_orders: Vec<Vec<usize>>,
    /// Vertices on the second factor's side, the legal attachment targets.
    second_side: Vec<bool>,
}

impl WorkState {
    fn new_vertex(&mut self, weight: Option<i32>, second_side: bool) -> usize {
        self.weights.push(weight);
        self.in_orders.push(Vec::new());
        self.out_orders.push(Vec::new());
        self.second_side.push(second_side);
        self.weights.len() - 1
    }

    /// Finishes the state into a decorated graph with `n_ext` externals.
    /// Working ids must already put externals first; edges are renumbered to
    /// the sorted order the graph representation uses.
    fn assemble(&self, n_ext: usize, m: usize) -> Result<DecoratedGraph, SurgeryError> {
        let keep: Vec<usize> = (0..self.edges.len()).filter(|&e| self.edges[e].alive).collect();
        debug_assert!(keep.iter().all(|&e| self.edges[e].head != UNATTACHED));
        let mut sorted = keep.clone();
        sorted.sort_by_key(|&e| (self.edges[e].tail, self.edges[e].head));
        let mut final_index = vec![usize::MAX; self.edges.len()];
        for (new, &old) in sorted.iter().enumerate() {
            final_index[old] = new;
        }
        let weights: Vec<i32> = self.weights.iter().filter_map(|w| *w).collect();
        let edges: Vec<(u32, u32)> = sorted
            .iter()
            .map(|&e| (self.edges[e].tail as u32, self.edges[e].head as u32))
            .collect();
        let graph = Graph::new(n_ext, weights, edges);
        graph.validate()?;
        let labelling = Labelling::new(
            &graph,
            m,
            sorted.iter().map(|&e| self.edges[e].tail_label).collect(),
            sorted.iter().map(|&e| self.edges[e].head_label).collect(),
        )?;
        let remap = |order: &Vec<usize>| -> Vec<usize> {
            order
                .iter()
                .filter(|&&e| self.edges[e].alive)
                .map(|&e| final_index[e])
                .collect()
        };
        let circuit = CircuitStructure {
            in_orders: self.in_orders.iter().map(remap).collect(),
            out_orders: self.out_orders.iter().map(remap).collect(),
        };
        Ok(DecoratedGraph::new(graph, labelling, Some(circuit))?)
    }
}

fn require_decorated_pair(g: &DecoratedGraph) -> Result<&CircuitStructure, SurgeryError> {
    if g.graph.n_ext() != 2 {
        return Err(SurgeryError::ExternalCount { got: g.graph.n_ext(), want: 2 });
    }
    g.circuit.as_ref().ok_or(SurgeryError::MissingCircuit)
}

/// All ways to compose `g1` into the first slot of `g2`, as decorated
/// three-external classes sorted by canonical form.
///
/// The sink of `g1` is removed; its incoming edges keep their labels and
/// their positions in their tails' outgoing orders and are re-attached one
/// at a time on `g2`'s side, either (a) as a new incoming edge of any
/// second-side vertex, inserted at every position its label allows, or (b)
/// by splitting a differentiable edge at a fresh weight -1 vertex whose two
/// new incidences run over all labels and compatible orders. `g2`'s
/// externals become the middle and last externals of the result; total
/// weight adds. The incoming order at `g1`'s sink plays no part, so inputs
/// differing only there fuse identically.
pub fn fuse(
    g1: &DecoratedGraph,
    g2: &DecoratedGraph,
) -> Result<Vec<(DecoratedForm, DecoratedGraph)>, SurgeryError> {
    let c1 = require_decorated_pair(g1)?.clone();
    let c2 = require_decorated_pair(g2)?.clone();
    if g1.m() != g2.m() {
        return Err(SurgeryError::DimensionMismatch(g1.m(), g2.m()));
    }
    let m = g1.m();
    let t1 = g1.graph.n_int();

    // Working ids: 0 first external (from g1), 1 middle (g2's first),
    // 2 last (g2's sink), then g1 internals, g2 internals, fresh vertices.
    let map1 = |v: u32| -> usize {
        match v {
            0 => 0,
            1 => UNATTACHED, // the cut sink
            x => 3 + (x as usize - 2),
        }
    };
    let map2 = |v: u32| -> usize {
        match v {
            0 => 1,
            1 => 2,
            x => 3 + t1 + (x as usize - 2),
        }
    };

    let mut st = WorkState {
        weights: vec![None, None, None],
        edges: Vec::new(),
        in_orders: vec![Vec::new(); 3],
        out_orders: vec![Vec::new(); 3],
        second_side: vec![false, true, true],
    };
    for &w in g1.graph.internal_weights() {
        st.new_vertex(Some(w), false);
    }
    for &w in g2.graph.internal_weights() {
        st.new_vertex(Some(w), true);
    }

    // g1 edges come first so edge ids match g1's for the dangling set.
    let mut loose = Vec::new();
    for (e, &(t, h)) in g1.graph.edges().iter().enumerate() {
        let head = map1(h);
        st.edges.push(WorkEdge {
            tail: map1(t),
            head,
            tail_label: g1.labelling.at_tail(e),
            head_label: g1.labelling.at_head(e),
            differentiable: false,
            alive: true,
        });
        if head == UNATTACHED {
            loose.push(e);
        }
    }
    let offset = g1.graph.edge_count();
    for (e, &(t, h)) in g2.graph.edges().iter().enumerate() {
        st.edges.push(WorkEdge {
            tail: map2(t),
            head: map2(h),
            tail_label: g2.labelling.at_tail(e),
            head_label: g2.labelling.at_head(e),
            differentiable: true,
            alive: true,
        });
        debug_assert_eq!(e + offset, st.edges.len() - 1);
    }
    // Circuit orders carry over; the cut sink's incoming order is dropped.
    for v in 0..g1.graph.vertex_count() as u32 {
        let nv = map1(v);
        if nv == UNATTACHED {
            continue;
        }
        st.in_orders[nv] = c1.in_orders[v as usize].clone();
        st.out_orders[nv] = c1.out_orders[v as usize].clone();
    }
    for v in 0..g2.graph.vertex_count() as u32 {
        let nv = map2(v);
        st.in_orders[nv] = c2.in_orders[v as usize].iter().map(|&e| e + offset).collect();
        st.out_orders[nv] = c2.out_orders[v as usize].iter().map(|&e| e + offset).collect();
    }

    let mut out = BTreeMap::new();
    attach_loose_ends(&st, &loose, m, &mut out)?;
    Ok(out.into_iter().collect())
}

fn attach_loose_ends(
    st: &WorkState,
    loose: &[usize],
    m: usize,
    out: &mut BTreeMap<DecoratedForm, DecoratedGraph>,
) -> Result<(), SurgeryError> {
    let Some((&e, rest)) = loose.split_first() else {
        let dg = st.assemble(3, m)?;
        out.entry(decorated_canonical_form(&dg)).or_insert(dg);
        return Ok(());
    };
    let r = st.edges[e].head_label;

    // (a) Enter an existing second-side vertex at a label-compatible spot.
    for v in 0..st.weights.len() {
        if !st.second_side[v] {
            continue;
        }
        let labels: Vec<u8> = st.in_orders[v].iter().map(|&d| st.edges[d].head_label).collect();
        let lo = labels.iter().filter(|&&x| x < r).count();
        let hi = labels.iter().filter(|&&x| x <= r).count();
        for pos in lo..=hi {
            let mut next = st.clone();
            next.edges[e].head = v;
            next.in_orders[v].insert(pos, e);
            attach_loose_ends(&next, rest, m, out)?;
        }
    }

    // (b) Split a differentiable edge at a fresh weight -1 vertex; the two
    // new incidences take every label, the vertex every compatible order.
    for d in 0..st.edges.len() {
        if !st.edges[d].differentiable || !st.edges[d].alive {
            continue;
        }
        for c1 in 0..m as u8 {
            for c2 in 0..m as u8 {
                let mut next = st.clone();
                let v = next.new_vertex(Some(-1), true);
                let y = next.edges[d].head;
                let outer = next.edges[d].head_label;
                let piece = next.edges.len();
                next.edges.push(WorkEdge {
                    tail: v,
                    head: y,
                    tail_label: c2,
                    head_label: outer,
                    differentiable: true,
                    alive: true,
                });
                let slot = next.in_orders[y]
                    .iter()
                    .position(|&x| x == d)
                    .expect("edge is in its head's incoming order");
                next.in_orders[y][slot] = piece;
                next.edges[d].head = v;
                next.edges[d].head_label = c1;
                next.edges[e].head = v;
                next.out_orders[v] = vec![piece];
                let orders: &[Vec<usize>] = if c1 < r {
                    &[vec![d, e]]
                } else if c1 > r {
                    &[vec![e, d]]
                } else {
                    &[vec![d, e], vec![e, d]]
                };
                for order in orders {
                    let mut branch = next.clone();
                    branch.in_orders[v] = order.clone();
                    attach_loose_ends(&branch, rest, m, out)?;
                }
            }
        }
    }
    Ok(())
}

/// Splits a three-external decorated graph back into the pair fusion made
/// it from: the sink-order class of the first factor and the full second
/// factor.
///
/// The second factor lives on the middle external, its successors and the
/// sink; weight -1 vertices left with one incoming and one outgoing edge
/// there are remnants of fusion splits and are spliced away (their free
/// labels forgotten, the outer incidences rejoined in place). Everything
/// else, with the edges that crossed into that region gathered as incoming
/// edges of a fresh sink, is the first factor; its sink order is arbitrary,
/// so it is returned as a class whose size is the number of compatible
/// orders.
pub fn defuse(f: &DecoratedGraph) -> Result<(EquivClass, DecoratedGraph), SurgeryError> {
    let g = &f.graph;
    if g.n_ext() != 3 {
        return Err(SurgeryError::ExternalCount { got: g.n_ext(), want: 3 });
    }
    let circuit = f.circuit.as_ref().ok_or(SurgeryError::MissingCircuit)?;
    let m = f.m();
    let mut in_s = g.successors(1);
    in_s[1] = true;
    in_s[2] = true;

    let mut edges: Vec<WorkEdge> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(t, h))| WorkEdge {
            tail: t as usize,
            head: h as usize,
            tail_label: f.labelling.at_tail(e),
            head_label: f.labelling.at_head(e),
            differentiable: false,
            alive: true,
        })
        .collect();
    let mut in_orders = circuit.in_orders.clone();
    let out_orders = circuit.out_orders.clone();
    let mut removed = vec![false; g.vertex_count()];

    // Splice split remnants: weight -1 vertices whose degree inside the
    // second-side region is down to one in, one out.
    loop {
        let mut target = None;
        for v in g.n_ext()..g.vertex_count() {
            if !in_s[v] || removed[v] || g.weight_of(v as u32) != Some(-1) {
                continue;
            }
            let ins: Vec<usize> = (0..edges.len())
                .filter(|&e| edges[e].alive && edges[e].head == v && in_s[edges[e].tail])
                .collect();
            let outs: Vec<usize> =
                (0..edges.len()).filter(|&e| edges[e].alive && edges[e].tail == v).collect();
            if ins.len() == 1 && outs.len() == 1 {
                target = Some((v, ins[0], outs[0]));
                break;
            }
        }
        let Some((v, e_in, e_out)) = target else { break };
        let y = edges[e_out].head;
        edges[e_in].head = y;
        edges[e_in].head_label = edges[e_out].head_label;
        let slot = in_orders[y]
            .iter()
            .position(|&x| x == e_out)
            .expect("edge is in its head's incoming order");
        in_orders[y][slot] = e_in;
        edges[e_out].alive = false;
        removed[v] = true;
    }

    // Second factor: the region on and below the middle external.
    let mut second = WorkState {
        weights: vec![None, None],
        edges: Vec::new(),
        in_orders: vec![Vec::new(); 2],
        out_orders: vec![Vec::new(); 2],
        second_side: vec![true; 2],
    };
    let mut second_vertex = vec![UNATTACHED; g.vertex_count()];
    second_vertex[1] = 0;
    second_vertex[2] = 1;
    for v in g.n_ext()..g.vertex_count() {
        if in_s[v] && !removed[v] {
            second_vertex[v] = second.new_vertex(g.weight_of(v as u32), true);
        }
    }
    let mut second_edge = vec![UNATTACHED; edges.len()];
    for (e, we) in edges.iter().enumerate() {
        if we.alive && in_s[we.tail] {
            second_edge[e] = second.edges.len();
            second.edges.push(WorkEdge {
                tail: second_vertex[we.tail],
                head: second_vertex[we.head],
                ..we.clone()
            });
        }
    }
    for v in 0..g.vertex_count() {
        let nv = second_vertex[v];
        if nv == UNATTACHED {
            continue;
        }
        second.in_orders[nv] = in_orders[v]
            .iter()
            .filter(|&&e| second_edge[e] != UNATTACHED)
            .map(|&e| second_edge[e])
            .collect();
        second.out_orders[nv] = out_orders[v]
            .iter()
            .filter(|&&e| second_edge[e] != UNATTACHED)
            .map(|&e| second_edge[e])
            .collect();
    }
    let g2 = second.assemble(2, m)?;

    // First factor: everything else, crossing edges rerouted to a fresh
    // sink whose incoming order is normalized to ascending labels.
    let mut first = WorkState {
        weights: vec![None, None],
        edges: Vec::new(),
        in_orders: vec![Vec::new(); 2],
        out_orders: vec![Vec::new(); 2],
        second_side: vec![false; 2],
    };
    let mut first_vertex = vec![UNATTACHED; g.vertex_count()];
    first_vertex[0] = 0;
    for v in g.n_ext()..g.vertex_count() {
        if !in_s[v] {
            first_vertex[v] = first.new_vertex(g.weight_of(v as u32), false);
        }
    }
    let mut first_edge = vec![UNATTACHED; edges.len()];
    let mut crossing = Vec::new();
    for (e, we) in edges.iter().enumerate() {
        if !we.alive || in_s[we.tail] {
            continue;
        }
        first_edge[e] = first.edges.len();
        let head = if in_s[we.head] {
            crossing.push(e);
            1
        } else {
            first_vertex[we.head]
        };
        first.edges.push(WorkEdge { tail: first_vertex[we.tail], head, ..we.clone() });
    }
    for v in 0..g.vertex_count() {
        let nv = first_vertex[v];
        if nv == UNATTACHED {
            continue;
        }
        first.in_orders[nv] = in_orders[v]
            .iter()
            .filter(|&&e| first_edge[e] != UNATTACHED)
            .map(|&e| first_edge[e])
            .collect();
        first.out_orders[nv] = out_orders[v]
            .iter()
            .filter(|&&e| first_edge[e] != UNATTACHED)
            .map(|&e| first_edge[e])
            .collect();
    }
    crossing.sort_by_key(|&e| (edges[e].head_label, e));
    first.in_orders[1] = crossing.iter().map(|&e| first_edge[e]).collect();
    let alpha = MultiIndex::from_labels(m, crossing.iter().map(|&e| edges[e].head_label));
    let g1 = first.assemble(2, m)?;
    Ok((EquivClass { representative: g1, size: alpha.factorial() }, g2))
}

/// Turns the first external into an internal vertex of weight `l`, fed by a
/// fresh first external through a single new edge. The result's weight is
/// the input's plus `1 + l`. For `l = -1` the first external must have
/// degree at least 2 so the new vertex clears the degree floor; for
/// `l >= 0` it must have at least one edge so the new vertex has an output.
pub fn bud(g: &Graph, l: i32) -> Result<Graph, SurgeryError> {
    if g.n_ext() != 2 {
        return Err(SurgeryError::ExternalCount { got: g.n_ext(), want: 2 });
    }
    if l < -1 {
        return Err(SurgeryError::WeightBelowFloor(l));
    }
    let first_degree = g.out_degree(0);
    if l == -1 && first_degree < 2 {
        return Err(SurgeryError::BudNeedsBranching);
    }
    if first_degree == 0 {
        return Err(SurgeryError::BudNeedsEdges);
    }
    let budded = (2 + g.n_int()) as u32;
    let map = |v: u32| if v == 0 { budded } else { v };
    let mut edges: Vec<(u32, u32)> = g.edges().iter().map(|&(t, h)| (map(t), map(h))).collect();
    edges.push((0, budded));
    let mut weights = g.internal_weights().to_vec();
    weights.push(l);
    let out = Graph::new(2, weights, edges);
    out.validate()?;
    Ok(out)
}

/// Inverse of [`bud`]: requires the first external to have exactly one
/// edge, into an internal vertex that no other edge enters. Returns the
/// graph with that vertex promoted to first external, and its weight.
pub fn debud(g: &Graph) -> Result<(Graph, i32), SurgeryError> {
    if g.n_ext() != 2 {
        return Err(SurgeryError::ExternalCount { got: g.n_ext(), want: 2 });
    }
    let out_edges = g.out_edges(0);
    if out_edges.len() != 1 {
        return Err(SurgeryError::NotABud("first external degree is not 1"));
    }
    let bud_edge = out_edges[0];
    let u = g.edges()[bud_edge].1;
    if g.is_external(u) {
        return Err(SurgeryError::NotABud("the single edge goes straight to the sink"));
    }
    if g.in_degree(u) != 1 {
        return Err(SurgeryError::NotABud("the budded vertex has other incoming edges"));
    }
    let l = g.weight_of(u).expect("internal vertex has a weight");
    let mut map = vec![0u32; g.vertex_count()];
    map[1] = 1;
    map[u as usize] = 0;
    let mut next = 2u32;
    let mut weights = Vec::new();
    for v in 2..g.vertex_count() as u32 {
        if v == u {
            continue;
        }
        map[v as usize] = next;
        next += 1;
        weights.push(g.weight_of(v).expect("internal vertex has a weight"));
    }
    let edges: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|&(e, _)| e != bud_edge)
        .map(|(_, &(t, h))| (map[t as usize], map[h as usize]))
        .collect();
    let out = Graph::new(2, weights, edges);
    out.validate()?;
    Ok((out, l))
}
