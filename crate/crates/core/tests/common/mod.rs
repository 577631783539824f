//! Independent oracles and instance generators shared by the integration and
//! acceptance tests. Nothing here calls the routines it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use qdissect::circuit::{prepare, Ansatz, Statevector};
use qdissect::graph::{coarsen, grid_graph, random_geometric_graph, ring_graph};
use qdissect::qubo::{Bitstring, Partition, QuboProblem, ZHamiltonian};
use qdissect::WeightedGraph;
use rand::Rng;

/// Erdos-Renyi graph with edge weights in `[0.5, 3)` and vertex weights
/// in `1..=vmax`.
pub fn random_graph(n: usize, p: f64, vmax: u64, seed: u64) -> WeightedGraph {
    let mut rng = qdissect::rng::seeded(seed);
    let weights: Vec<u64> = (0..n).map(|_| rng.gen_range(1..=vmax)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(0.5..3.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, Some(weights), edges).unwrap()
}

/// Connected variant: a random spanning path plus Erdos-Renyi edges.
pub fn random_connected_graph(n: usize, p: f64, seed: u64) -> WeightedGraph {
    let mut rng = qdissect::rng::seeded(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || rng.gen_bool(p) {
                edges.push((i, j, rng.gen_range(0.5..3.0)));
            }
        }
    }
    WeightedGraph::from_edges(n, None, edges).unwrap()
}

/// Direct evaluation of the penalty QUBO from its definition.
pub fn qubo_oracle(g: &WeightedGraph, lambda: f64, x: &[u8]) -> f64 {
    let mut cut = 0.0;
    for (i, j, w) in g.edges() {
        let (a, b) = (x[i] as f64, x[j] as f64);
        cut += w * (a + b - 2.0 * a * b);
    }
    let omega: u64 = g.vertex_weights().iter().sum();
    let side: u64 = (0..g.n()).filter(|&i| x[i] == 1).map(|i| g.vertex_weight(i)).sum();
    let d = side as f64 - omega as f64 / 2.0;
    cut + lambda * d * d
}

/// `<P_a>` by summing probabilities with the parity sign of each basis state.
pub fn dense_expectations(sv: &Statevector, h: &ZHamiltonian) -> Vec<f64> {
    let probs: Vec<f64> = sv.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    h.terms
        .iter()
        .map(|t| {
            let mask = t.mask();
            probs
                .iter()
                .enumerate()
                .map(|(i, p)| if (i as u64 & mask).count_ones() % 2 == 0 { *p } else { -*p })
                .sum()
        })
        .collect()
}

/// Half the central finite-difference derivative of every `<P_a>`, as a
/// `terms x params` table.
pub fn finite_difference_g(ans: &Ansatz, theta: &[f64], h: &ZHamiltonian, step: f64) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; ans.n_params()]; h.terms.len()];
    for j in 0..ans.n_params() {
        let mut tp = theta.to_vec();
        let mut tm = theta.to_vec();
        tp[j] += step;
        tm[j] -= step;
        let ep = dense_expectations(&prepare(ans, &tp).unwrap(), h);
        let em = dense_expectations(&prepare(ans, &tm).unwrap(), h);
        for a in 0..h.terms.len() {
            g[a][j] = (ep[a] - em[a]) / (4.0 * step);
        }
    }
    g
}

/// Eliminates vertices in `order` on an explicit graph, adding fill edges
/// among the remaining neighbors. Returns `(nnz_factor, ops)` with
/// diagonal entries counted: column count is 1 + remaining neighbors.
pub fn brute_force_fill(adjacency: &[BTreeSet<usize>], order: &[usize]) -> (u64, u64) {
    let mut adj: Vec<BTreeSet<usize>> = adjacency.to_vec();
    let mut eliminated = vec![false; adj.len()];
    let (mut nnz, mut ops) = (0u64, 0u64);
    for &v in order {
        let nbrs: Vec<usize> = adj[v].iter().copied().filter(|&u| !eliminated[u] && u != v).collect();
        let c = nbrs.len() as u64 + 1;
        nnz += c;
        ops += c * c;
        for &a in &nbrs {
            for &b in &nbrs {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
        eliminated[v] = true;
    }
    (nnz, ops)
}

/// Minimum energy over strings balanced within `nu`, by enumeration.
pub fn best_balanced_energy(q: &QuboProblem) -> f64 {
    let g = q.graph();
    let mut best = f64::INFINITY;
    for i in 0..1u64 << g.n() {
        let b = Bitstring::from_index(i, g.n());
        if Partition::new(g, b.clone()).unwrap().is_balanced(q.nu()) {
            best = best.min(qubo_oracle(g, q.lambda(), b.as_slice()));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Ring,
    Grid,
    Geometric,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Ring, Family::Grid, Family::Geometric];

    pub fn name(self) -> &'static str {
        match self {
            Family::Ring => "ring",
            Family::Grid => "grid",
            Family::Geometric => "rgg",
        }
    }
}

/// Seeded fine instance of `family` coarsened to `target` vertices.
pub fn desk_instance(family: Family, target: usize, seed: u64) -> WeightedGraph {
    let fine = match family {
        Family::Ring => ring_graph(2 * target + seed as usize).unwrap(),
        Family::Grid => grid_graph(5 + seed as usize % 3, 6).unwrap(),
        Family::Geometric => random_geometric_graph(3 * target, 0.35, seed).unwrap(),
    };
    coarsen(&fine, target, seed).unwrap().coarsest().clone()
}
