use std::cmp::Reverse;
use std::collections::BTreeSet;

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::qubo::Partition;

/// Greedy vertex cover of the cut edges of `p`.
///
/// Repeatedly takes the vertex covering the most uncovered cut edges
/// (ties: lighter vertex, then lower index). Removing the returned set
/// leaves no edge between the two sides. The result is sorted.
pub fn edge_cut_to_vertex_separator(g: &WeightedGraph, p: &Partition) -> Result<Vec<usize>> {
    let bits = p.bits();
    if bits.len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: bits.len(),
        });
    }
    let crosses = |u: usize, v: usize| bits[u] != bits[v];
    let mut uncovered: Vec<usize> = (0..g.n())
        .map(|u| g.neighbors(u).iter().filter(|&&(v, _)| crosses(u, v)).count())
        .collect();
    let mut queue: BTreeSet<(Reverse<usize>, u64, usize)> = (0..g.n())
        .filter(|&u| uncovered[u] > 0)
        .map(|u| (Reverse(uncovered[u]), g.vertex_weight(u), u))
        .collect();
    let mut taken = vec![false; g.n()];
    let mut separator = Vec::new();
    while let Some((_, _, u)) = queue.pop_first() {
        taken[u] = true;
        separator.push(u);
        for &(v, _) in g.neighbors(u) {
            if taken[v] || !crosses(u, v) {
                continue;
            }
            queue.remove(&(Reverse(uncovered[v]), g.vertex_weight(v), v));
            uncovered[v] -= 1;
            if uncovered[v] > 0 {
                queue.insert((Reverse(uncovered[v]), g.vertex_weight(v), v));
            }
        }
        uncovered[u] = 0;
    }
    separator.sort_unstable();
    Ok(separator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::path_graph;
    use crate::qubo::Bitstring;

    fn part(g: &WeightedGraph, s: &str) -> Partition {
        Partition::new(g, s.parse::<Bitstring>().unwrap()).unwrap()
    }

    #[test]
    fn empty_cut_gives_empty_separator() {
        let g = path_graph(4).unwrap();
        assert!(edge_cut_to_vertex_separator(&g, &part(&g, "0000")).unwrap().is_empty());
    }

    #[test]
    fn single_cut_edge_takes_lower_index() {
        let g = path_graph(4).unwrap();
        assert_eq!(edge_cut_to_vertex_separator(&g, &part(&g, "0011")).unwrap(), vec![1]);
    }

    #[test]
    fn lighter_endpoint_wins_ties() {
        let g = WeightedGraph::from_edges(2, Some(vec![3, 1]), [(0, 1, 1.0)]).unwrap();
        assert_eq!(edge_cut_to_vertex_separator(&g, &part(&g, "01")).unwrap(), vec![1]);
    }

    #[test]
    fn k23_takes_the_two_side() {
        let edges = (0..2).flat_map(|a| (2..5).map(move |b| (a, b, 1.0)));
        let g = WeightedGraph::from_edges(5, None, edges).unwrap();
        assert_eq!(edge_cut_to_vertex_separator(&g, &part(&g, "00111")).unwrap(), vec![0, 1]);
    }
}
