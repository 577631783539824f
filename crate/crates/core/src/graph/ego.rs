use std::collections::VecDeque;

use super::WeightedGraph;
use crate::error::{invalid, Result};

/// Vertices sorted by the total edge weight of their radius-`k` ego graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EgoRanking {
    pub radius: usize,
    /// Vertex indices, heaviest ego graph first; ties by ascending index.
    pub order: Vec<usize>,
    /// Ego-graph weight per vertex (indexed by vertex, not by rank).
    pub weights: Vec<f64>,
}

/// Edge weight of the subgraph induced on all vertices within `radius` hops
/// of `center`.
pub fn ego_weight(g: &WeightedGraph, center: usize, radius: usize) -> f64 {
    let mut dist = vec![usize::MAX; g.n()];
    ego_weight_with(g, center, radius, &mut dist, &mut VecDeque::new(), &mut Vec::new())
}

fn ego_weight_with(
    g: &WeightedGraph,
    center: usize,
    radius: usize,
    dist: &mut [usize],
    queue: &mut VecDeque<usize>,
    ball: &mut Vec<usize>,
) -> f64 {
    ball.clear();
    queue.clear();
    dist[center] = 0;
    ball.push(center);
    queue.push_back(center);
    while let Some(u) = queue.pop_front() {
        if dist[u] == radius {
            continue;
        }
        for &(v, _) in g.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                ball.push(v);
                queue.push_back(v);
            }
        }
    }
    let mut total = 0.0;
    for &u in ball.iter() {
        for &(v, w) in g.neighbors(u) {
            if v > u && dist[v] != usize::MAX {
                total += w;
            }
        }
    }
    for &u in ball.iter() {
        dist[u] = usize::MAX;
    }
    total
}

pub fn ego_ranking(g: &WeightedGraph, radius: usize) -> Result<EgoRanking> {
    if radius == 0 {
        return Err(invalid("ego ranking radius must be at least 1"));
    }
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = VecDeque::new();
    let mut ball = Vec::new();
    let weights: Vec<f64> = (0..g.n())
        .map(|v| ego_weight_with(g, v, radius, &mut dist, &mut queue, &mut ball))
        .collect();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    Ok(EgoRanking { radius, order, weights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, random_geometric_graph};

    #[test]
    fn path_of_three() {
        let g = path_graph(3).unwrap();
        let r = ego_ranking(&g, 1).unwrap();
        assert_eq!(r.weights, vec![1.0, 2.0, 1.0]);
        assert_eq!(r.order, vec![1, 0, 2]);
    }

    #[test]
    fn large_radius_sees_whole_component() {
        let g = random_geometric_graph(15, 0.5, 11).unwrap();
        let total = g.total_edge_weight();
        if g.components().iter().all(|&c| c == 0) {
            let r = ego_ranking(&g, g.n()).unwrap();
            assert!(r.weights.iter().all(|&w| (w - total).abs() < 1e-12));
            assert_eq!(r.order, (0..g.n()).collect::<Vec<_>>());
        }
    }

    #[test]
    fn isolated_vertex_ranks_last() {
        let g = WeightedGraph::from_edges(4, None, [(1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let r = ego_ranking(&g, 1).unwrap();
        assert_eq!(r.weights[0], 0.0);
        assert_eq!(*r.order.last().unwrap(), 0);
    }

    #[test]
    fn radius_zero_is_rejected() {
        assert!(ego_ranking(&path_graph(2).unwrap(), 0).is_err());
    }
}
