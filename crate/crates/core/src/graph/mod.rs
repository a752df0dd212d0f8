//! Weighted acyclic multigraphs.
//!
//! A graph has `n >= 2` external vertices, numbered `0..n`, holding the
//! operator arguments in order, plus any number of internal vertices, each
//! carrying an integer weight `>= -1`. Edges are directed and may repeat;
//! parallel edges are interchangeable. Validity:
//!
//! - no loops, no directed cycles;
//! - external 0 has no incoming edges, external n-1 no outgoing ones
//!   (externals in between are unconstrained);
//! - every internal vertex has at least one incoming and one outgoing edge;
//! - internal vertices of weight -1 have total degree at least 3.
//!
//! The weight of the whole graph is the edge count plus the sum of the
//! internal weights; operators pick up one power of the deformation
//! parameter per unit of graph weight.

pub mod canon;
pub mod enumerate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("fewer than two external vertices")]
    TooFewExternals,
    #[error("edge endpoint {0} out of range")]
    EndpointOutOfRange(u32),
    #[error("loop at vertex {0}")]
    Loop(u32),
    #[error("directed cycle through vertex {0}")]
    Cycle(u32),
    #[error("first external vertex has an incoming edge")]
    FirstExternalIncoming,
    #[error("last external vertex has an outgoing edge")]
    LastExternalOutgoing,
    #[error("internal vertex {0} has no incoming edge")]
    InternalNoIncoming(u32),
    #[error("internal vertex {0} has no outgoing edge")]
    InternalNoOutgoing(u32),
    #[error("weight -1 vertex {0} has degree below 3")]
    LightVertexDegree(u32),
    #[error("vertex {vertex} has weight {weight}, below -1")]
    WeightBelowFloor { vertex: u32, weight: i32 },
}

/// Directed multigraph with ordered externals and weighted internals.
///
/// Vertex ids: `0..n_ext` are the externals in argument order, the rest are
/// internals; internal `i` has id `n_ext + i` and weight `weights[i]`. Edges
/// are kept sorted, so equal graphs have equal representations, and an edge
/// index is a stable handle while the edge list is not mutated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Graph {
    n_ext: usize,
    weights: Vec<i32>,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    pub fn new(n_ext: usize, weights: Vec<i32>, mut edges: Vec<(u32, u32)>) -> Graph {
        edges.sort_unstable();
        Graph { n_ext, weights, edges }
    }

    pub fn n_ext(&self) -> usize {
        self.n_ext
    }

    pub fn n_int(&self) -> usize {
        self.weights.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.n_ext + self.weights.len()
    }

    pub fn is_external(&self, v: u32) -> bool {
        (v as usize) < self.n_ext
    }

    /// Weight of an internal vertex; externals have none.
    pub fn weight_of(&self, v: u32) -> Option<i32> {
        if self.is_external(v) {
            None
        } else {
            self.weights.get(v as usize - self.n_ext).copied()
        }
    }

    pub fn internal_weights(&self) -> &[i32] {
        &self.weights
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edge count plus total internal weight.
    pub fn total_weight(&self) -> i64 {
        self.edges.len() as i64 + self.weights.iter().map(|&w| w as i64).sum::<i64>()
    }

    pub fn in_degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|&&(_, h)| h == v).count()
    }

    pub fn out_degree(&self, v: u32) -> usize {
        self.edges.iter().filter(|&&(t, _)| t == v).count()
    }

    /// Indices into `edges()` of edges whose head is `v`, ascending.
    pub fn in_edges(&self, v: u32) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|&(_, &(_, h))| h == v)
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices into `edges()` of edges whose tail is `v`, ascending.
    pub fn out_edges(&self, v: u32) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|&(_, &(t, _))| t == v)
            .map(|(i, _)| i)
            .collect()
    }

    /// Incoming and outgoing degree per vertex, one pass.
    pub fn degrees(&self) -> Vec<(usize, usize)> {
        let mut deg = vec![(0usize, 0usize); self.vertex_count()];
        for &(t, h) in &self.edges {
            deg[t as usize].1 += 1;
            deg[h as usize].0 += 1;
        }
        deg
    }

    /// Parallel classes: distinct (tail, head) pairs with multiplicities,
    /// ascending.
    pub fn edge_multiplicities(&self) -> Vec<(u32, u32, u32)> {
        let mut out: Vec<(u32, u32, u32)> = Vec::new();
        for &(t, h) in &self.edges {
            match out.last_mut() {
                Some(last) if last.0 == t && last.1 == h => last.2 += 1,
                _ => out.push((t, h, 1)),
            }
        }
        out
    }

    /// Vertices reachable from `v` by directed paths, excluding `v` itself
    /// (the graph is acyclic whenever valid).
    pub fn successors(&self, v: u32) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for &(t, h) in &self.edges {
                if t == u && !seen[h as usize] {
                    seen[h as usize] = true;
                    stack.push(h);
                }
            }
        }
        seen
    }

    /// Checks validity; rules are tested in a fixed order so the reported
    /// error is deterministic.
    pub fn validate(&self) -> Result<(), GraphError> {
        if self.n_ext < 2 {
            return Err(GraphError::TooFewExternals);
        }
        let v_count = self.vertex_count() as u32;
        for &(t, h) in &self.edges {
            if t >= v_count {
                return Err(GraphError::EndpointOutOfRange(t));
            }
            if h >= v_count {
                return Err(GraphError::EndpointOutOfRange(h));
            }
        }
        for &(t, h) in &self.edges {
            if t == h {
                return Err(GraphError::Loop(t));
            }
        }
        if let Some(v) = self.find_cycle() {
            return Err(GraphError::Cycle(v));
        }
        let deg = self.degrees();
        if deg[0].0 > 0 {
            return Err(GraphError::FirstExternalIncoming);
        }
        if deg[self.n_ext - 1].1 > 0 {
            return Err(GraphError::LastExternalOutgoing);
        }
        for (i, &w) in self.weights.iter().enumerate() {
            let v = (self.n_ext + i) as u32;
            let (din, dout) = deg[v as usize];
            if din == 0 {
                return Err(GraphError::InternalNoIncoming(v));
            }
            if dout == 0 {
                return Err(GraphError::InternalNoOutgoing(v));
            }
            if w == -1 && din + dout < 3 {
                return Err(GraphError::LightVertexDegree(v));
            }
            if w < -1 {
                return Err(GraphError::WeightBelowFloor { vertex: v, weight: w });
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_ok()
    }

    /// Kahn's algorithm; returns a vertex on a cycle if one exists.
    fn find_cycle(&self) -> Option<u32> {
        let v_count = self.vertex_count();
        let mut indeg = vec![0usize; v_count];
        for &(_, h) in &self.edges {
            indeg[h as usize] += 1;
        }
        let mut queue: Vec<u32> = (0..v_count as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .collect();
        let mut removed = 0;
        while let Some(u) = queue.pop() {
            removed += 1;
            for &(t, h) in &self.edges {
                if t == u {
                    indeg[h as usize] -= 1;
                    if indeg[h as usize] == 0 {
                        queue.push(h);
                    }
                }
            }
        }
        if removed == v_count {
            None
        } else {
            (0..v_count as u32).find(|&v| indeg[v as usize] > 0)
        }
    }

    /// Internal vertex ids in a topological order (externals excluded).
    pub fn internal_topological_order(&self) -> Vec<u32> {
        let v_count = self.vertex_count();
        let mut indeg = vec![0usize; v_count];
        for &(_, h) in &self.edges {
            indeg[h as usize] += 1;
        }
        let mut ready: Vec<u32> = (0..v_count as u32)
            .filter(|&v| indeg[v as usize] == 0)
            .collect();
        ready.sort_unstable_by(|a, b| b.cmp(a));
        let mut order = Vec::new();
        while let Some(u) = ready.pop() {
            if !self.is_external(u) {
                order.push(u);
            }
            for &(t, h) in &self.edges {
                if t == u {
                    indeg[h as usize] -= 1;
                    if indeg[h as usize] == 0 {
                        ready.push(h);
                        ready.sort_unstable_by(|a, b| b.cmp(a));
                    }
                }
            }
        }
        order
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph serializes")
    }

    pub fn from_json(json: &str) -> Result<Graph, serde_json::Error> {
        let g: Graph = serde_json::from_str(json)?;
        Ok(Graph::new(g.n_ext, g.weights, g.edges))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(weight: i32) -> Graph {
        // ext0 -> v -> ext1
        Graph::new(2, vec![weight], vec![(0, 2), (2, 1)])
    }

    #[test]
    fn parallel_edges_are_valid() {
        let g = Graph::new(2, vec![], vec![(0, 1), (0, 1), (0, 1)]);
        assert!(g.is_valid());
        assert_eq!(g.total_weight(), 3);
        assert_eq!(g.edge_multiplicities(), vec![(0, 1, 3)]);
    }

    #[test]
    fn weight_zero_chain_is_valid() {
        let g = chain(0);
        assert!(g.is_valid());
        assert_eq!(g.total_weight(), 2);
    }

    #[test]
    fn light_chain_needs_degree_three() {
        let g = chain(-1);
        assert_eq!(g.validate(), Err(GraphError::LightVertexDegree(2)));
        let g = Graph::new(2, vec![-1], vec![(0, 2), (0, 2), (2, 1)]);
        assert!(g.is_valid());
        assert_eq!(g.total_weight(), 2);
    }

    #[test]
    fn rule_order_is_fixed() {
        // A graph violating several rules reports the earliest one.
        let g = Graph::new(2, vec![-2], vec![(2, 2)]);
        assert_eq!(g.validate(), Err(GraphError::Loop(2)));
        let g = Graph::new(2, vec![0, 0], vec![(0, 2), (2, 3), (3, 2), (2, 1)]);
        assert!(matches!(g.validate(), Err(GraphError::Cycle(_))));
        let g = Graph::new(2, vec![], vec![(1, 0)]);
        assert_eq!(g.validate(), Err(GraphError::FirstExternalIncoming));
        let g = Graph::new(3, vec![], vec![(0, 2), (2, 1)]);
        assert_eq!(g.validate(), Err(GraphError::LastExternalOutgoing));
        let g = Graph::new(2, vec![-2], vec![(0, 2), (0, 2), (2, 1)]);
        assert_eq!(
            g.validate(),
            Err(GraphError::WeightBelowFloor { vertex: 2, weight: -2 })
        );
    }

    #[test]
    fn internal_needs_flow_through() {
        let g = Graph::new(2, vec![0], vec![(0, 1)]);
        assert_eq!(g.validate(), Err(GraphError::InternalNoIncoming(2)));
        let g = Graph::new(2, vec![0], vec![(0, 2), (0, 1)]);
        assert_eq!(g.validate(), Err(GraphError::InternalNoOutgoing(2)));
    }

    #[test]
    fn middle_external_may_do_anything() {
        // ext1 (id 1) both receives and emits.
        let g = Graph::new(3, vec![], vec![(0, 1), (1, 2)]);
        assert!(g.is_valid());
        // Isolated middle external is fine too.
        let g = Graph::new(3, vec![], vec![(0, 2)]);
        assert!(g.is_valid());
    }

    #[test]
    fn empty_graph_is_the_weight_zero_class() {
        let g = Graph::new(2, vec![], vec![]);
        assert!(g.is_valid());
        assert_eq!(g.total_weight(), 0);
    }

    #[test]
    fn successors_follow_directed_paths() {
        let g = Graph::new(2, vec![0, 0], vec![(0, 2), (2, 3), (3, 1)]);
        let s = g.successors(2);
        assert!(!s[0] && !s[2]);
        assert!(s[3] && s[1]);
    }

    #[test]
    fn topological_order_respects_edges() {
        let g = Graph::new(2, vec![0, 0], vec![(0, 3), (3, 2), (2, 1)]);
        let order = g.internal_topological_order();
        assert_eq!(order, vec![3, 2]);
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::new(2, vec![-1, 1], vec![(0, 2), (0, 2), (2, 3), (3, 1)]);
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn degrees_match_edge_scan() {
        let g = Graph::new(2, vec![-1], vec![(0, 2), (0, 2), (2, 1)]);
        assert_eq!(g.degrees(), vec![(0, 2), (1, 0), (2, 1)]);
        assert_eq!(g.in_degree(2), 2);
        assert_eq!(g.out_degree(2), 1);
        assert_eq!(g.in_edges(2), vec![0, 1]);
        assert_eq!(g.out_edges(2), vec![2]);
    }
}
