//! Canonical forms and automorphism counts.
//!
//! Externals are pinned pointwise; internals are interchangeable when a
//! weight-preserving relabelling maps the edge multiset to itself. The
//! canonicalizer runs partition refinement with full individualization
//! backtracking and takes the minimal leaf encoding as the canonical form.
//! Every leaf is visited, so the number of leaves attaining the minimum is
//! exactly the number of internal-vertex automorphisms; multiplying by the
//! factorials of the parallel-edge classes gives the automorphism count of
//! the multigraph with distinguishable edges, which is the symmetry factor
//! operator sums divide by.

use serde::{Deserialize, Serialize};

use super::Graph;

/// Bumped when the encoding layout changes; cached enumerations embed it.
pub const CANON_VERSION: i64 = 1;

/// Total-order key identifying an isomorphism class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm(Vec<i64>);

impl CanonicalForm {
    pub fn tokens(&self) -> &[i64] {
        &self.0
    }
}

#[derive(Debug, Clone)]
pub struct CanonicalInfo {
    pub form: CanonicalForm,
    /// Weight-preserving internal relabellings mapping the edge multiset to
    /// itself.
    pub vertex_auts: u64,
    /// `vertex_auts` times the product over parallel classes of mult!.
    pub auts: u64,
    /// All vertex relabellings (old id to new id, externals fixed) that
    /// realize the canonical form. Their count equals `vertex_auts`.
    pub optimal_perms: Vec<Vec<u32>>,
    /// The graph relabelled by any optimal permutation (all agree).
    pub canonical_graph: Graph,
}

/// Applies a vertex relabelling; `perm[v]` is the new id of vertex `v`.
/// Externals must map to themselves.
pub fn relabel(g: &Graph, perm: &[u32]) -> Graph {
    let n = g.n_ext();
    debug_assert!(perm.iter().take(n).enumerate().all(|(i, &p)| p as usize == i));
    let mut weights = vec![0i32; g.n_int()];
    for (i, &w) in g.internal_weights().iter().enumerate() {
        let old = (n + i) as u32;
        weights[perm[old as usize] as usize - n] = w;
    }
    let edges = g
        .edges()
        .iter()
        .map(|&(t, h)| (perm[t as usize], perm[h as usize]))
        .collect();
    Graph::new(n, weights, edges)
}

struct Searcher<'g> {
    g: &'g Graph,
    n_ext: usize,
    v_count: usize,
    /// Multiplicity matrix, `mult[t * v_count + h]`.
    mult: Vec<u32>,
    best: Option<Vec<i64>>,
    best_perms: Vec<Vec<u32>>,
}

type Partition = Vec<Vec<u32>>;

impl<'g> Searcher<'g> {
    fn new(g: &'g Graph) -> Searcher<'g> {
        let v_count = g.vertex_count();
        let mut mult = vec![0u32; v_count * v_count];
        for &(t, h) in g.edges() {
            mult[t as usize * v_count + h as usize] += 1;
        }
        Searcher { g, n_ext: g.n_ext(), v_count, mult, best: None, best_perms: Vec::new() }
    }

    fn initial_partition(&self) -> Partition {
        let mut cells: Partition = (0..self.n_ext as u32).map(|v| vec![v]).collect();
        let mut weight_groups: Vec<(i32, Vec<u32>)> = Vec::new();
        for (i, &w) in self.g.internal_weights().iter().enumerate() {
            let v = (self.n_ext + i) as u32;
            match weight_groups.iter_mut().find(|(gw, _)| *gw == w) {
                Some((_, cell)) => cell.push(v),
                None => weight_groups.push((w, vec![v])),
            }
        }
        weight_groups.sort_by_key(|&(w, _)| w);
        cells.extend(weight_groups.into_iter().map(|(_, cell)| cell));
        cells
    }

    /// Signature of a vertex against the current cells: per cell, total edge
    /// multiplicity out of and into the vertex.
    fn signature(&self, v: u32, cells: &Partition) -> Vec<(u64, u64)> {
        cells
            .iter()
            .map(|cell| {
                let mut out = 0u64;
                let mut inc = 0u64;
                for &u in cell {
                    out += self.mult[v as usize * self.v_count + u as usize] as u64;
                    inc += self.mult[u as usize * self.v_count + v as usize] as u64;
                }
                (out, inc)
            })
            .collect()
    }

    /// Splits cells by signature until stable. Sub-cells of a split cell stay
    /// contiguous, ordered by signature, so the refined partition is
    /// invariant under relabelling.
    fn refine(&self, cells: &mut Partition) {
        loop {
            let mut changed = false;
            let mut next: Partition = Vec::with_capacity(cells.len());
            for cell in cells.iter() {
                if cell.len() == 1 {
                    next.push(cell.clone());
                    continue;
                }
                let mut keyed: Vec<(Vec<(u64, u64)>, u32)> =
                    cell.iter().map(|&v| (self.signature(v, cells), v)).collect();
                keyed.sort();
                let mut groups: Partition = Vec::new();
                let mut last_key: Option<&Vec<(u64, u64)>> = None;
                for (key, v) in &keyed {
                    if last_key == Some(key) {
                        groups.last_mut().unwrap().push(*v);
                    } else {
                        groups.push(vec![*v]);
                        last_key = Some(key);
                    }
                }
                if groups.len() > 1 {
                    changed = true;
                }
                next.extend(groups);
            }
            *cells = next;
            if !changed {
                return;
            }
        }
    }

    fn search(&mut self, mut cells: Partition) {
        self.refine(&mut cells);
        let split_at = cells.iter().position(|c| c.len() > 1);
        match split_at {
            None => self.record_leaf(&cells),
            Some(idx) => {
                let members = cells[idx].clone();
                for &v in &members {
                    let mut branched: Partition = Vec::with_capacity(cells.len() + 1);
                    branched.extend_from_slice(&cells[..idx]);
                    branched.push(vec![v]);
                    branched.push(members.iter().copied().filter(|&u| u != v).collect());
                    branched.extend_from_slice(&cells[idx + 1..]);
                    self.search(branched);
                }
            }
        }
    }

    fn record_leaf(&mut self, cells: &Partition) {
        // Discrete partition: position of each vertex is its cell index.
        let mut perm = vec![0u32; self.v_count];
        for (pos, cell) in cells.iter().enumerate() {
            perm[cell[0] as usize] = pos as u32;
        }
        let encoding = self.encode(&perm);
        match &self.best {
            Some(best) if *best < encoding => {}
            Some(best) if *best == encoding => self.best_perms.push(perm),
            _ => {
                self.best = Some(encoding);
                self.best_perms = vec![perm];
            }
        }
    }

    fn encode(&self, perm: &[u32]) -> Vec<i64> {
        let t = self.g.n_int();
        let mut tokens = Vec::with_capacity(3 + t + 3 * self.g.edge_count());
        tokens.push(CANON_VERSION);
        tokens.push(self.n_ext as i64);
        tokens.push(t as i64);
        let mut weights = vec![0i64; t];
        for (i, &w) in self.g.internal_weights().iter().enumerate() {
            let new_pos = perm[self.n_ext + i] as usize - self.n_ext;
            weights[new_pos] = w as i64;
        }
        tokens.extend_from_slice(&weights);
        let mut triples: Vec<(u32, u32, u32)> = Vec::new();
        for t_old in 0..self.v_count {
            for h_old in 0..self.v_count {
                let m = self.mult[t_old * self.v_count + h_old];
                if m > 0 {
                    triples.push((perm[t_old], perm[h_old], m));
                }
            }
        }
        triples.sort_unstable();
        for (t, h, m) in triples {
            tokens.push(t as i64);
            tokens.push(h as i64);
            tokens.push(m as i64);
        }
        tokens
    }
}

pub fn canonicalize(g: &Graph) -> CanonicalInfo {
    let mut searcher = Searcher::new(g);
    searcher.search(searcher.initial_partition());
    let form = CanonicalForm(searcher.best.expect("at least one leaf"));
    let optimal_perms = searcher.best_perms;
    let vertex_auts = optimal_perms.len() as u64;
    let mut auts = vertex_auts;
    for (_, _, m) in g.edge_multiplicities() {
        for f in 2..=m as u64 {
            auts *= f;
        }
    }
    let canonical_graph = relabel(g, &optimal_perms[0]);
    CanonicalInfo { form, vertex_auts, auts, optimal_perms, canonical_graph }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_edges_count_factorially() {
        let g = Graph::new(2, vec![], vec![(0, 1); 4]);
        let info = canonicalize(&g);
        assert_eq!(info.vertex_auts, 1);
        assert_eq!(info.auts, 24);
    }

    #[test]
    fn twin_internals_are_swappable() {
        // ext0 feeds two identical weight 0 vertices, both into ext1.
        let g = Graph::new(2, vec![0, 0], vec![(0, 2), (0, 3), (2, 1), (3, 1)]);
        let info = canonicalize(&g);
        assert_eq!(info.vertex_auts, 2);
        assert_eq!(info.auts, 2);
    }

    #[test]
    fn weights_break_twin_symmetry() {
        let g = Graph::new(2, vec![0, 1], vec![(0, 2), (0, 3), (2, 1), (3, 1)]);
        let info = canonicalize(&g);
        assert_eq!(info.vertex_auts, 1);
    }

    #[test]
    fn chain_has_trivial_symmetry() {
        let g = Graph::new(2, vec![-1, -1], vec![(0, 2), (2, 3), (2, 3), (3, 1)]);
        let info = canonicalize(&g);
        assert_eq!(info.vertex_auts, 1);
        // The doubled middle edge contributes 2!.
        assert_eq!(info.auts, 2);
    }

    #[test]
    fn canonical_form_is_relabelling_invariant() {
        let g = Graph::new(2, vec![-1, 0, 1], vec![(0, 2), (0, 3), (2, 4), (3, 4), (2, 1), (4, 1)]);
        let info = canonicalize(&g);
        // Swap internals 2 and 4 (ids), i.e. send 2->4, 3->3, 4->2.
        let swapped = relabel(&g, &[0, 1, 4, 3, 2]);
        let info2 = canonicalize(&swapped);
        assert_eq!(info.form, info2.form);
        assert_eq!(info.auts, info2.auts);
        assert_eq!(info.canonical_graph, info2.canonical_graph);
    }

    #[test]
    fn optimal_perms_all_realize_the_same_graph() {
        let g = Graph::new(2, vec![0, 0, 0], vec![(0, 2), (0, 3), (0, 4), (2, 1), (3, 1), (4, 1)]);
        let info = canonicalize(&g);
        assert_eq!(info.vertex_auts, 6);
        for perm in &info.optimal_perms {
            assert_eq!(relabel(&g, perm), info.canonical_graph);
        }
    }

    #[test]
    fn distinct_structures_get_distinct_forms() {
        let a = Graph::new(2, vec![-1], vec![(0, 2), (0, 2), (2, 1)]);
        let b = Graph::new(2, vec![-1], vec![(0, 2), (2, 1), (2, 1)]);
        assert_ne!(canonicalize(&a).form, canonicalize(&b).form);
    }

    #[test]
    fn incarnation_count_obeys_orbit_stabilizer() {
        use std::collections::BTreeSet;
        // For each graph: #distinct relabellings * vertex_auts = t!.
        let cases = vec![
            Graph::new(2, vec![0, 0], vec![(0, 2), (0, 3), (2, 1), (3, 1)]),
            Graph::new(2, vec![-1, -1], vec![(0, 2), (2, 3), (2, 3), (3, 1)]),
            Graph::new(2, vec![0, 0, 0], vec![(0, 2), (0, 3), (0, 4), (2, 1), (3, 1), (4, 1)]),
            Graph::new(2, vec![-1, 0, 1], vec![(0, 2), (0, 3), (2, 4), (3, 4), (2, 1), (4, 1)]),
        ];
        for g in cases {
            let t = g.n_int();
            let info = canonicalize(&g);
            let mut seen = BTreeSet::new();
            let perms = permutations(t);
            let factorial: u64 = (1..=t as u64).product();
            for p in &perms {
                let mut full: Vec<u32> = (0..g.n_ext() as u32).collect();
                full.extend(p.iter().map(|&x| (x + g.n_ext()) as u32));
                seen.insert(relabel(&g, &full));
            }
            assert_eq!(seen.len() as u64 * info.vertex_auts, factorial);
        }
    }

    fn permutations(t: usize) -> Vec<Vec<usize>> {
        if t == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for rest in permutations(t - 1) {
            for slot in 0..t {
                let mut p = rest.clone();
                p.insert(slot, t - 1);
                out.push(p);
            }
        }
        out
    }
}
