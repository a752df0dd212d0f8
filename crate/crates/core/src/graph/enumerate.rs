//! Exhaustive enumeration of graph classes at a fixed total weight.
//!
//! Graphs are built per weight multiset by inserting internal vertices one
//! at a time in topological order, each arriving with its full incoming edge
//! multiset; partial states are deduplicated by canonical form after every
//! insertion, which keeps symmetric blowup in check. Once all internals are
//! placed, the remaining edge budget is distributed over the external
//! receivers and candidates are validated and deduplicated once more.
//!
//! An optional signature table restricts which internal vertex shapes
//! (weight, in-degree, out-degree) may appear. Filtering commutes with
//! enumeration: the filtered list equals the unfiltered list minus graphs
//! containing an inadmissible vertex, because admissibility is a per-vertex
//! property. Evaluators exploit this with tables of shapes whose vertex
//! tensors are nonzero on a chart, which shrinks the search drastically on
//! charts with few potentials.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::canon::{canonicalize, CanonicalForm};
use super::Graph;

/// Admissible (in, out) degree pairs per internal vertex weight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignatureTable {
    per_weight: BTreeMap<i32, Vec<(usize, usize)>>,
}

impl SignatureTable {
    pub fn new(per_weight: BTreeMap<i32, Vec<(usize, usize)>>) -> SignatureTable {
        SignatureTable { per_weight }
    }

    /// Admits every shape with the given weights up to a degree cap.
    pub fn permissive(weights: impl IntoIterator<Item = i32>, degree_cap: usize) -> SignatureTable {
        let mut per_weight = BTreeMap::new();
        for w in weights {
            let mut pairs = Vec::new();
            for ins in 1..=degree_cap {
                for outs in 1..=degree_cap {
                    if ins + outs <= degree_cap + 1 {
                        pairs.push((ins, outs));
                    }
                }
            }
            per_weight.insert(w, pairs);
        }
        SignatureTable { per_weight }
    }

    pub fn weights(&self) -> Vec<i32> {
        self.per_weight.keys().copied().collect()
    }

    pub fn admits(&self, weight: i32, ins: usize, outs: usize) -> bool {
        self.per_weight
            .get(&weight)
            .map(|pairs| pairs.contains(&(ins, outs)))
            .unwrap_or(false)
    }

    /// Some admissible shape has this in-degree.
    pub fn admits_in(&self, weight: i32, ins: usize) -> bool {
        self.per_weight
            .get(&weight)
            .map(|pairs| pairs.iter().any(|&(p, _)| p == ins))
            .unwrap_or(false)
    }
}

/// One isomorphism class: a canonical incarnation plus evaluation metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphClass {
    pub graph: Graph,
    pub canonical: CanonicalForm,
    /// Automorphisms with distinguishable parallel edges; operator sums
    /// divide by this.
    pub auts: u64,
    pub vertex_auts: u64,
    /// Total degree of each external; the argument in that slot is
    /// differentiated at most this many times.
    pub ext_degrees: Vec<usize>,
    /// Largest total degree over internal vertices, 0 when there are none.
    pub max_internal_degree: usize,
}

impl GraphClass {
    pub fn from_graph(g: &Graph) -> GraphClass {
        let info = canonicalize(g);
        let graph = info.canonical_graph;
        let deg = graph.degrees();
        let ext_degrees = (0..graph.n_ext()).map(|v| deg[v].0 + deg[v].1).collect();
        let max_internal_degree = (graph.n_ext()..graph.vertex_count())
            .map(|v| deg[v].0 + deg[v].1)
            .max()
            .unwrap_or(0);
        GraphClass {
            graph,
            canonical: info.form,
            auts: info.auts,
            vertex_auts: info.vertex_auts,
            ext_degrees,
            max_internal_degree,
        }
    }
}

/// Insertion cost of a weight toward the budget `2k`: a weight w vertex
/// needs degree max(3, 2) when w = -1 and contributes 2w to the doubled
/// total weight otherwise, which bounds how many can fit at a given order.
fn cost(w: i32) -> i64 {
    match w {
        -1 => 1,
        0 => 2,
        w => 2 + 2 * w as i64,
    }
}

fn weight_multisets(weights: &[i32], k: i64) -> Vec<Vec<i32>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(
        weights: &[i32],
        idx: usize,
        budget: i64,
        weight_sum: i64,
        k: i64,
        current: &mut Vec<i32>,
        out: &mut Vec<Vec<i32>>,
    ) {
        // Edge budget must stay non-negative.
        if k - weight_sum >= 0 {
            out.push(current.clone());
        }
        for j in idx..weights.len() {
            let w = weights[j];
            if cost(w) > budget {
                continue;
            }
            current.push(w);
            go(weights, j, budget - cost(w), weight_sum + w as i64, k, current, out);
            current.pop();
        }
    }
    go(weights, 0, 2 * k, 0, k, &mut current, &mut out);
    out
}

/// Multisets of `size` picks from `items`, each as a sorted vector.
fn multisets_of(items: &[u32], size: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(items: &[u32], idx: usize, left: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for j in idx..items.len() {
            current.push(items[j]);
            go(items, j, left - 1, current, out);
            current.pop();
        }
    }
    go(items, 0, size, &mut current, &mut out);
    out
}

fn multiset_minus(full: &[i32], placed: &[i32]) -> Vec<i32> {
    let mut remaining = full.to_vec();
    for &w in placed {
        if let Some(pos) = remaining.iter().position(|&x| x == w) {
            remaining.remove(pos);
        }
    }
    remaining
}

/// All isomorphism classes with `n_ext` externals and total weight `k`,
/// sorted by canonical form. `filter` restricts internal vertex shapes; see
/// the module doc for why filtering commutes with enumeration.
pub fn enumerate_classes(
    n_ext: usize,
    k: i64,
    filter: Option<&SignatureTable>,
) -> Vec<GraphClass> {
    assert!(n_ext >= 2, "operators take at least two arguments");
    if k < 0 {
        return Vec::new();
    }
    let weight_floor_range: Vec<i32> = (-1..k as i32).collect();
    let admissible_weights: Vec<i32> = match filter {
        Some(f) => f.weights().into_iter().filter(|w| weight_floor_range.contains(w)).collect(),
        None => weight_floor_range,
    };

    let mut results: BTreeMap<CanonicalForm, GraphClass> = BTreeMap::new();
    for multiset in weight_multisets(&admissible_weights, k) {
        let e_target = k - multiset.iter().map(|&w| w as i64).sum::<i64>();
        debug_assert!(e_target >= 0);
        enumerate_for_multiset(n_ext, &multiset, e_target, filter, &mut results);
    }
    results.into_values().collect()
}

fn enumerate_for_multiset(
    n_ext: usize,
    multiset: &[i32],
    e_target: i64,
    filter: Option<&SignatureTable>,
    results: &mut BTreeMap<CanonicalForm, GraphClass>,
) {
    let base = Graph::new(n_ext, Vec::new(), Vec::new());
    let mut level: BTreeMap<CanonicalForm, Graph> = BTreeMap::new();
    level.insert(canonicalize(&base).form, base);

    for _step in 0..multiset.len() {
        let mut next: BTreeMap<CanonicalForm, Graph> = BTreeMap::new();
        for g in level.values() {
            let remaining = multiset_minus(multiset, g.internal_weights());
            let mut distinct = remaining.clone();
            distinct.dedup();
            let new_id = g.vertex_count() as u32;
            let sink = (n_ext - 1) as u32;
            let emitters: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| v != sink).collect();
            let deg = g.degrees();
            let deficient_now = (n_ext..g.vertex_count()).filter(|&v| deg[v].1 == 0).count() as i64;
            for &w in &distinct {
                // After insertion there is one less vertex to add, and the
                // new vertex starts with no outgoing edges.
                let future = remaining.len() as i64 - 1;
                let p_budget = e_target - g.edge_count() as i64 - future - 1;
                for p in 1..=p_budget.max(0) as usize {
                    if let Some(f) = filter {
                        if !f.admits_in(w, p) {
                            continue;
                        }
                    }
                    for tails in multisets_of(&emitters, p) {
                        // Out-needs prune: deficient internals and every
                        // future internal each require an edge with a
                        // distinct tail, none placed yet.
                        let still_deficient = deficient_now
                            - tails
                                .iter()
                                .filter(|&&t| {
                                    !g.is_external(t) && deg[t as usize].1 == 0
                                })
                                .collect::<std::collections::BTreeSet<_>>()
                                .len() as i64;
                        let placed = g.edge_count() as i64 + p as i64;
                        if placed + still_deficient + 1 + future > e_target {
                            continue;
                        }
                        let mut weights = g.internal_weights().to_vec();
                        weights.push(w);
                        let mut edges = g.edges().to_vec();
                        edges.extend(tails.iter().map(|&t| (t, new_id)));
                        let candidate = Graph::new(n_ext, weights, edges);
                        let form = canonicalize(&candidate).form;
                        next.entry(form).or_insert(candidate);
                    }
                }
            }
        }
        level = next;
    }

    for g in level.values() {
        let e_rem = e_target - g.edge_count() as i64;
        if e_rem < 0 {
            continue;
        }
        finalize_state(n_ext, g, e_rem, filter, results);
    }
}

/// Distributes the remaining edges over external receivers and records every
/// candidate that survives validation and the signature filter.
fn finalize_state(
    n_ext: usize,
    g: &Graph,
    e_rem: i64,
    filter: Option<&SignatureTable>,
    results: &mut BTreeMap<CanonicalForm, GraphClass>,
) {
    let sink = (n_ext - 1) as u32;
    let emitters: Vec<u32> = (0..g.vertex_count() as u32).filter(|&v| v != sink).collect();
    let receivers: Vec<u32> = (1..n_ext as u32).collect();
    let deg = g.degrees();

    // Per emitter, receivers it may hit (no loops).
    let slots: Vec<(u32, Vec<u32>)> = emitters
        .iter()
        .map(|&u| (u, receivers.iter().copied().filter(|&r| r != u).collect()))
        .collect();

    let mut extra: Vec<(u32, u32)> = Vec::new();
    fn go(
        slots: &[(u32, Vec<u32>)],
        idx: usize,
        left: i64,
        g: &Graph,
        deg: &[(usize, usize)],
        extra: &mut Vec<(u32, u32)>,
        filter: Option<&SignatureTable>,
        results: &mut BTreeMap<CanonicalForm, GraphClass>,
    ) {
        if idx == slots.len() {
            if left != 0 {
                return;
            }
            let mut edges = g.edges().to_vec();
            edges.extend_from_slice(extra);
            let candidate = Graph::new(g.n_ext(), g.internal_weights().to_vec(), edges);
            if candidate.validate().is_err() {
                return;
            }
            if let Some(f) = filter {
                let cdeg = candidate.degrees();
                for (i, &w) in candidate.internal_weights().iter().enumerate() {
                    let v = candidate.n_ext() + i;
                    if !f.admits(w, cdeg[v].0, cdeg[v].1) {
                        return;
                    }
                }
            }
            let class = GraphClass::from_graph(&candidate);
            results.entry(class.canonical.clone()).or_insert(class);
            return;
        }
        let (u, ref recv) = slots[idx];
        let must_emit = !g.is_external(u) && deg[u as usize].1 == 0;
        // Distribute 0..=left over this emitter's receivers.
        fn spread(
            recv: &[u32],
            ridx: usize,
            u: u32,
            left_here: i64,
            sent: i64,
            min_sent: i64,
            rest: &mut dyn FnMut(i64, &mut Vec<(u32, u32)>),
            extra: &mut Vec<(u32, u32)>,
        ) {
            if ridx == recv.len() {
                if sent >= min_sent {
                    rest(left_here, extra);
                }
                return;
            }
            for m in 0..=left_here {
                for _ in 0..m {
                    extra.push((u, recv[ridx]));
                }
                spread(recv, ridx + 1, u, left_here - m, sent + m, min_sent, rest, extra);
                for _ in 0..m {
                    extra.pop();
                }
            }
        }
        let min_sent = if must_emit { 1 } else { 0 };
        let mut rest = |left_after: i64, extra: &mut Vec<(u32, u32)>| {
            go(slots, idx + 1, left_after, g, deg, extra, filter, results);
        };
        spread(recv, 0, u, left, 0, min_sent, &mut rest, extra);
    }
    go(&slots, 0, e_rem, g, &deg, &mut extra, filter, results);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_zero_is_the_bare_product() {
        let classes = enumerate_classes(2, 0, None);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].graph.edge_count(), 0);
        assert_eq!(classes[0].graph.n_int(), 0);
        assert_eq!(classes[0].auts, 1);
    }

    #[test]
    fn order_one_is_the_single_edge() {
        let classes = enumerate_classes(2, 1, None);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes[0].graph.edges(), &[(0, 1)]);
    }

    #[test]
    fn order_two_has_five_classes() {
        let classes = enumerate_classes(2, 2, None);
        assert_eq!(classes.len(), 5);
        for c in &classes {
            assert_eq!(c.graph.total_weight(), 2);
            assert!(c.graph.is_valid());
        }
        // Shape census: (internals, edges, auts) triples.
        let mut census: Vec<(usize, usize, u64)> = classes
            .iter()
            .map(|c| (c.graph.n_int(), c.graph.edge_count(), c.auts))
            .collect();
        census.sort();
        assert_eq!(
            census,
            vec![(0, 2, 2), (1, 2, 1), (1, 3, 2), (1, 3, 2), (2, 4, 2)]
        );
    }

    #[test]
    fn three_argument_low_orders() {
        assert_eq!(enumerate_classes(3, 0, None).len(), 1);
        // One edge in any of the three external slots.
        let classes = enumerate_classes(3, 1, None);
        assert_eq!(classes.len(), 3);
        let mut edge_sets: Vec<Vec<(u32, u32)>> =
            classes.iter().map(|c| c.graph.edges().to_vec()).collect();
        edge_sets.sort();
        assert_eq!(edge_sets, vec![vec![(0, 1)], vec![(0, 2)], vec![(1, 2)]]);
    }

    #[test]
    fn weights_are_exact_through_order_three() {
        for k in 0..=3 {
            for c in enumerate_classes(2, k, None) {
                assert_eq!(c.graph.total_weight(), k);
                assert!(c.graph.is_valid());
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = enumerate_classes(2, 3, None);
        let b = enumerate_classes(2, 3, None);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.canonical, y.canonical);
            assert_eq!(x.graph, y.graph);
        }
    }

    #[test]
    fn filtered_enumeration_equals_filtered_list() {
        // A table admitting only degree (1,1) weight -1 vertices kills every
        // graph with internals, leaving the parallel edge class.
        let mut per_weight = BTreeMap::new();
        per_weight.insert(-1, vec![(1usize, 1usize)]);
        let table = SignatureTable::new(per_weight);
        for k in 1..=4 {
            let filtered = enumerate_classes(2, k, Some(&table));
            assert_eq!(filtered.len(), 1, "order {k}");
            assert_eq!(filtered[0].graph.n_int(), 0);
            assert_eq!(filtered[0].graph.edge_count(), k as usize);

            let full = enumerate_classes(2, k, None);
            let manually: Vec<&GraphClass> = full
                .iter()
                .filter(|c| {
                    let deg = c.graph.degrees();
                    c.graph.internal_weights().iter().enumerate().all(|(i, &w)| {
                        let v = c.graph.n_ext() + i;
                        table.admits(w, deg[v].0, deg[v].1)
                    })
                })
                .collect();
            assert_eq!(manually.len(), filtered.len(), "order {k}");
        }
    }

    #[test]
    fn negative_order_is_empty() {
        assert!(enumerate_classes(2, -1, None).is_empty());
    }

    #[test]
    fn class_metadata_matches_graph() {
        for c in enumerate_classes(2, 2, None) {
            let deg = c.graph.degrees();
            for (v, &d) in c.ext_degrees.iter().enumerate() {
                assert_eq!(d, deg[v].0 + deg[v].1);
            }
            let max_int = (c.graph.n_ext()..c.graph.vertex_count())
                .map(|v| deg[v].0 + deg[v].1)
                .max()
                .unwrap_or(0);
            assert_eq!(c.max_internal_degree, max_int);
        }
    }
}
