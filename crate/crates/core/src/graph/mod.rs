//! Undirected vertex- and edge-weighted graphs.
//!
//! Vertex weights are positive integers, edge weights positive `f64`.
//! Adjacency lists are kept sorted by neighbor index and are symmetric.

mod coarsen;
mod ego;
pub mod io;
mod separator;

pub use coarsen::{coarsen, project_partition, CoarseLevel, CoarseningMap};
pub use ego::{ego_ranking, ego_weight, EgoRanking};
pub use io::{load_graph, parse_graph, GraphFormat};
pub use separator::edge_cut_to_vertex_separator;

use std::collections::BTreeMap;
use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    vertex_weights: Vec<u64>,
    adjacency: Vec<Vec<(usize, f64)>>,
    total_vertex_weight: u64,
}

impl WeightedGraph {
    /// Builds a graph from an edge list. Repeated edges (in either
    /// orientation) are merged keeping the larger weight.
    pub fn from_edges<I>(n: usize, vertex_weights: Option<Vec<u64>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let vertex_weights = vertex_weights.unwrap_or_else(|| vec![1; n]);
        if vertex_weights.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: vertex_weights.len(),
            });
        }
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop on vertex {u}")));
            }
            let key = (u.min(v), u.max(v));
            let slot = merged.entry(key).or_insert(w);
            if w > *slot {
                *slot = w;
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for ((u, v), w) in merged {
            adjacency[u].push((v, w));
            adjacency[v].push((u, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Self::from_parts(vertex_weights, adjacency)
    }

    /// Assembles a graph from already-symmetric adjacency lists and checks
    /// every invariant.
    pub fn from_parts(vertex_weights: Vec<u64>, adjacency: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = vertex_weights.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        if adjacency.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                got: adjacency.len(),
            });
        }
        if let Some(i) = vertex_weights.iter().position(|&w| w == 0) {
            return Err(invalid(format!("vertex {i} has zero weight")));
        }
        let g = Self {
            total_vertex_weight: vertex_weights.iter().sum(),
            vertex_weights,
            adjacency,
        };
        g.check()?;
        Ok(g)
    }

    fn check(&self) -> Result<()> {
        let n = self.n();
        for (u, list) in self.adjacency.iter().enumerate() {
            for (k, &(v, w)) in list.iter().enumerate() {
                if v >= n || v == u {
                    return Err(invalid(format!("bad neighbor {v} of vertex {u}")));
                }
                if !(w > 0.0) || !w.is_finite() {
                    return Err(invalid(format!("edge ({u}, {v}) has non-positive weight {w}")));
                }
                if k > 0 && list[k - 1].0 >= v {
                    return Err(invalid(format!("adjacency of vertex {u} is not strictly sorted")));
                }
                if self.edge_weight(v, u) != Some(w) {
                    return Err(invalid(format!("edge ({u}, {v}) is not symmetric")));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn vertex_weight(&self, v: usize) -> u64 {
        self.vertex_weights[v]
    }

    pub fn vertex_weights(&self) -> &[u64] {
        &self.vertex_weights
    }

    pub fn total_vertex_weight(&self) -> u64 {
        self.total_vertex_weight
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn edge_weight(&self, u: usize, v: usize) -> Option<f64> {
        let list = &self.adjacency[u];
        list.binary_search_by_key(&v, |&(x, _)| x).ok().map(|k| list[k].1)
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v, w)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .filter(move |&&(v, _)| v > u)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    pub fn total_edge_weight(&self) -> f64 {
        self.edges().map(|(_, _, w)| w).sum()
    }

    pub fn max_edge_weight(&self) -> Option<f64> {
        self.edges().map(|(_, _, w)| w).reduce(f64::max)
    }

    pub fn min_vertex_weight(&self) -> u64 {
        self.vertex_weights.iter().copied().min().unwrap_or(0)
    }

    /// Subgraph induced on `vertices`. Returns the subgraph and the map from
    /// subgraph index to original index (the order of `vertices`).
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<(WeightedGraph, Vec<usize>)> {
        let mut local = vec![usize::MAX; self.n()];
        for (k, &v) in vertices.iter().enumerate() {
            if local[v] != usize::MAX {
                return Err(invalid(format!("vertex {v} listed twice")));
            }
            local[v] = k;
        }
        let weights = vertices.iter().map(|&v| self.vertex_weights[v]).collect();
        let adjacency = vertices
            .iter()
            .map(|&v| {
                let mut list: Vec<(usize, f64)> = self.adjacency[v]
                    .iter()
                    .filter(|&&(u, _)| local[u] != usize::MAX)
                    .map(|&(u, w)| (local[u], w))
                    .collect();
                list.sort_by_key(|&(u, _)| u);
                list
            })
            .collect();
        Ok((Self::from_parts(weights, adjacency)?, vertices.to_vec()))
    }

    /// Hop distances from `source`; unreachable vertices get `usize::MAX`.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected component id per vertex, numbered in order of first vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n()];
        let mut next = 0;
        for s in 0..self.n() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Canonical METIS text. The `fmt` field is omitted for unit weights,
    /// otherwise `011` (vertex and edge weights) is written.
    pub fn to_metis(&self) -> String {
        let unit = self.vertex_weights.iter().all(|&w| w == 1) && self.edges().all(|(_, _, w)| w == 1.0);
        let mut out = if unit {
            format!("{} {}\n", self.n(), self.n_edges())
        } else {
            format!("{} {} 011\n", self.n(), self.n_edges())
        };
        for (u, list) in self.adjacency.iter().enumerate() {
            let mut fields: Vec<String> = Vec::with_capacity(2 * list.len() + 1);
            if !unit {
                fields.push(self.vertex_weights[u].to_string());
            }
            for &(v, w) in list {
                fields.push((v + 1).to_string());
                if !unit {
                    fields.push(w.to_string());
                }
            }
            out.push_str(&fields.join(" "));
            out.push('\n');
        }
        out
    }

    /// Total weight of edges crossing the bipartition `bits`.
    pub fn cut_weight(&self, bits: &[u8]) -> f64 {
        self.edges()
            .filter(|&(u, v, _)| bits[u] != bits[v])
            .map(|(_, _, w)| w)
            .sum()
    }
}

/// `rows x cols` grid graph with unit weights, vertices numbered row-major.
pub fn grid_graph(rows: usize, cols: usize) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1, 1.0));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(rows * cols, None, edges)
}

/// Cycle on `n` vertices with unit weights.
pub fn ring_graph(n: usize) -> Result<WeightedGraph> {
    WeightedGraph::from_edges(n, None, (0..n).map(|i| (i, (i + 1) % n, 1.0)))
}

/// Path on `n` vertices with unit weights.
pub fn path_graph(n: usize) -> Result<WeightedGraph> {
    WeightedGraph::from_edges(n, None, (1..n).map(|i| (i - 1, i, 1.0)))
}

/// Complete graph on `n` vertices with unit weights.
pub fn complete_graph(n: usize) -> Result<WeightedGraph> {
    let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j, 1.0)));
    WeightedGraph::from_edges(n, None, edges)
}

/// Random geometric graph: `n` uniform points in the unit square joined
/// when closer than `radius`. Isolated points are linked to their nearest
/// neighbor so the result has no isolated vertices.
pub fn random_geometric_graph(n: usize, radius: f64, seed: u64) -> Result<WeightedGraph> {
    use rand::Rng;
    let mut rng = crate::rng::seeded(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let d2 = |a: usize, b: usize| {
        let (dx, dy) = (pts[a].0 - pts[b].0, pts[a].1 - pts[b].1);
        dx * dx + dy * dy
    };
    let mut edges = Vec::new();
    for i in 0..n {
        let mut linked = false;
        for j in 0..n {
            if i != j && d2(i, j) < radius * radius {
                linked = true;
                if i < j {
                    edges.push((i, j, 1.0));
                }
            }
        }
        if !linked && n > 1 {
            let j = (0..n)
                .filter(|&j| j != i)
                .min_by(|&a, &b| d2(i, a).total_cmp(&d2(i, b)))
                .unwrap();
            edges.push((i, j, 1.0));
        }
    }
    WeightedGraph::from_edges(n, None, edges)
}
