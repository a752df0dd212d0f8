//! Shared helpers for integration tests.
//!
//! The oracle here enumerates graph classes by a deliberately different
//! route than the library: degree sequences first, then all edge multisets
//! realizing them, then validation, then deduplication by minimizing over
//! internal permutations. Slow but straightforward; the two
//! implementations share no search logic, so agreement is meaningful.

#![allow(dead_code)]

use std::collections::BTreeSet;

use graphstar::Graph;

/// Class representative: internal weights in id order plus the sorted edges.
pub type Rep = (Vec<i32>, Vec<(u32, u32)>);

/// Minimal representative over all internal relabellings.
pub fn min_rep(n_ext: usize, weights: &[i32], edges: &[(u32, u32)]) -> Rep {
    let t = weights.len();
    let mut best: Option<Rep> = None;
    for perm in permutations(t) {
        // perm[i] = new position of internal i
        let mut new_weights = vec![0i32; t];
        for (i, &w) in weights.iter().enumerate() {
            new_weights[perm[i]] = w;
        }
        let map = |v: u32| -> u32 {
            if (v as usize) < n_ext {
                v
            } else {
                (n_ext + perm[v as usize - n_ext]) as u32
            }
        };
        let mut new_edges: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (map(a), map(b))).collect();
        new_edges.sort_unstable();
        let cand = (new_weights, new_edges);
        if best.as_ref().map_or(true, |b| cand < *b) {
            best = Some(cand);
        }
    }
    best.expect("at least the identity permutation")
}

pub fn permutations(t: usize) -> Vec<Vec<usize>> {
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

/// All valid classes with the given externals and total weight, as minimal
/// representatives.
pub fn oracle_classes(n_ext: usize, k: i64) -> BTreeSet<Rep> {
    let mut classes = BTreeSet::new();
    if k < 0 {
        return classes;
    }
    let max_t = (2 * k) as usize;
    for t in 0..=max_t {
        for weights in sorted_weight_vectors(t, k) {
            let weight_sum: i64 = weights.iter().map(|&w| w as i64).sum();
            let e = k - weight_sum;
            if e < 0 {
                continue;
            }
            collect_for_degrees(n_ext, &weights, e as usize, &mut classes);
        }
    }
    classes
}

/// Sorted vectors of t weights from -1..k-1 (every internal weight is at
/// least -1, and a single weight above k-1 already overshoots the order).
fn sorted_weight_vectors(t: usize, k: i64) -> Vec<Vec<i32>> {
    let choices: Vec<i32> = (-1..k as i32).collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn go(choices: &[i32], idx: usize, left: usize, cur: &mut Vec<i32>, out: &mut Vec<Vec<i32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for j in idx..choices.len() {
            cur.push(choices[j]);
            go(choices, j, left - 1, cur, out);
            cur.pop();
        }
    }
    go(&choices, 0, t, &mut cur, &mut out);
    out
}

fn collect_for_degrees(n_ext: usize, weights: &[i32], e: usize, classes: &mut BTreeSet<Rep>) {
    let t = weights.len();
    let v_count = n_ext + t;
    // In-degrees: ext 0 gets none, internals at least one each.
    let in_mins: Vec<usize> = (0..v_count)
        .map(|v| if v == 0 { 0 } else if v < n_ext { 0 } else { 1 })
        .collect();
    let in_maxs: Vec<usize> = (0..v_count).map(|v| if v == 0 { 0 } else { e }).collect();
    // Out-degrees: last external gets none, internals at least one each.
    let sink = n_ext - 1;
    let out_mins: Vec<usize> = (0..v_count)
        .map(|v| if v == sink { 0 } else if v < n_ext { 0 } else { 1 })
        .collect();
    let out_maxs: Vec<usize> = (0..v_count).map(|v| if v == sink { 0 } else { e }).collect();

    for ins in bounded_compositions(e, &in_mins, &in_maxs) {
        'outs: for outs in bounded_compositions(e, &out_mins, &out_maxs) {
            for (i, &w) in weights.iter().enumerate() {
                let v = n_ext + i;
                if w == -1 && ins[v] + outs[v] < 3 {
                    continue 'outs;
                }
            }
            let mut edges = Vec::new();
            assign_edges(0, &outs, &mut ins.clone(), v_count, &mut edges, &mut |edges| {
                let g = Graph::new(n_ext, weights.to_vec(), edges.to_vec());
                if g.validate().is_ok() {
                    classes.insert(min_rep(n_ext, weights, g.edges()));
                }
            });
        }
    }
}

/// Vectors x with sum(x) = total and mins[i] <= x[i] <= maxs[i].
fn bounded_compositions(total: usize, mins: &[usize], maxs: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(mins.len());
    fn go(
        total: usize,
        mins: &[usize],
        maxs: &[usize],
        idx: usize,
        left: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if idx == mins.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest_min: usize = mins[idx + 1..].iter().sum();
        let hi = maxs[idx].min(left.saturating_sub(rest_min));
        for x in mins[idx]..=hi {
            cur.push(x);
            go(total, mins, maxs, idx + 1, left - x, cur, out);
            cur.pop();
        }
    }
    go(total, mins, maxs, 0, total, &mut cur, &mut out);
    out
}

/// Distributes each tail's out-degree over heads with remaining in-capacity,
/// skipping loops; calls `emit` with every complete edge multiset.
fn assign_edges(
    tail: usize,
    outs: &[usize],
    in_left: &mut Vec<usize>,
    v_count: usize,
    edges: &mut Vec<(u32, u32)>,
    emit: &mut dyn FnMut(&Vec<(u32, u32)>),
) {
    if tail == v_count {
        emit(edges);
        return;
    }
    distribute(tail, 0, outs[tail], in_left, v_count, edges, outs, emit);
}

fn distribute(
    tail: usize,
    head: usize,
    left: usize,
    in_left: &mut Vec<usize>,
    v_count: usize,
    edges: &mut Vec<(u32, u32)>,
    outs: &[usize],
    emit: &mut dyn FnMut(&Vec<(u32, u32)>),
) {
    if left == 0 {
        assign_edges(tail + 1, outs, in_left, v_count, edges, emit);
        return;
    }
    if head == v_count {
        return;
    }
    if head == tail {
        distribute(tail, head + 1, left, in_left, v_count, edges, outs, emit);
        return;
    }
    let cap = in_left[head].min(left);
    for m in (0..=cap).rev() {
        in_left[head] -= m;
        for _ in 0..m {
            edges.push((tail as u32, head as u32));
        }
        distribute(tail, head + 1, left - m, in_left, v_count, edges, outs, emit);
        for _ in 0..m {
            edges.pop();
        }
        in_left[head] += m;
    }
}
