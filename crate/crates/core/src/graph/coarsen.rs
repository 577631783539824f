//! Multilevel coarsening by heavy-edge matching.

use rand::seq::SliceRandom;

use super::WeightedGraph;
use crate::error::{invalid, Error, Result};
use crate::qubo::{Bitstring, Partition};

#[derive(Debug, Clone)]
pub struct CoarseLevel {
    /// Graph produced at this level.
    pub graph: WeightedGraph,
    /// Vertex of the previous (finer) level -> vertex of `graph`.
    pub map: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct CoarseningMap {
    fine: WeightedGraph,
    /// Ordered from the first contraction to the coarsest graph.
    pub levels: Vec<CoarseLevel>,
    /// Composite map from the original vertices to the coarsest graph.
    pub fine_to_coarse: Vec<usize>,
    /// False when matching stalled above the target (e.g. isolated vertices).
    pub reached_target: bool,
}

impl CoarseningMap {
    pub fn identity(g: &WeightedGraph) -> Self {
        Self {
            fine: g.clone(),
            levels: Vec::new(),
            fine_to_coarse: (0..g.n()).collect(),
            reached_target: true,
        }
    }

    pub fn fine(&self) -> &WeightedGraph {
        &self.fine
    }

    pub fn coarsest(&self) -> &WeightedGraph {
        self.levels.last().map_or(&self.fine, |l| &l.graph)
    }
}

/// Contracts `g` with repeated heavy-edge matching until it has at most
/// `target_vertices` vertices or no further match is possible.
///
/// Within a round vertices are visited in a seeded random order and each
/// unmatched vertex takes its heaviest unmatched neighbor (ties: lower
/// index). A round stops pairing once the target count is hit.
pub fn coarsen(g: &WeightedGraph, target_vertices: usize, seed: u64) -> Result<CoarseningMap> {
    if target_vertices < 2 || target_vertices > g.n() {
        return Err(invalid(format!(
            "coarsening target {target_vertices} outside 2..={}",
            g.n()
        )));
    }
    let mut out = CoarseningMap::identity(g);
    let mut rng = crate::rng::seeded(seed);
    let mut round = 0u64;
    while out.coarsest().n() > target_vertices {
        let current = out.coarsest();
        let matching = heavy_edge_matching(current, target_vertices, &mut rng);
        let Some(level) = contract(current, &matching)? else {
            log::warn!(
                "coarsening stalled at {} vertices (target {target_vertices})",
                current.n()
            );
            out.reached_target = false;
            break;
        };
        for c in out.fine_to_coarse.iter_mut() {
            *c = level.map[*c];
        }
        out.levels.push(level);
        round += 1;
    }
    log::debug!("coarsened {} -> {} vertices in {round} rounds", g.n(), out.coarsest().n());
    Ok(out)
}

fn heavy_edge_matching(g: &WeightedGraph, target: usize, rng: &mut crate::rng::Rng) -> Vec<usize> {
    let n = g.n();
    let mut mate: Vec<usize> = (0..n).collect();
    let mut matched = vec![false; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut count = n;
    for &u in &order {
        if count <= target {
            break;
        }
        if matched[u] {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for &(v, w) in g.neighbors(u) {
            if matched[v] {
                continue;
            }
            // neighbors are sorted, so strict > keeps the lowest index on ties
            if best.map_or(true, |(_, bw)| w > bw) {
                best = Some((v, w));
            }
        }
        if let Some((v, _)) = best {
            matched[u] = true;
            matched[v] = true;
            mate[u] = v;
            mate[v] = u;
            count -= 1;
        }
    }
    mate
}

fn contract(g: &WeightedGraph, mate: &[usize]) -> Result<Option<CoarseLevel>> {
    let n = g.n();
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for u in 0..n {
        if map[u] == usize::MAX {
            map[u] = next;
            map[mate[u]] = next;
            next += 1;
        }
    }
    if next == n {
        return Ok(None);
    }
    let mut weights = vec![0u64; next];
    for u in 0..n {
        weights[map[u]] += g.vertex_weight(u);
    }
    let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); next];
    let mut slot = vec![usize::MAX; next];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); next];
    for u in 0..n {
        members[map[u]].push(u);
    }
    for (c, group) in members.iter().enumerate() {
        let list = &mut adjacency[c];
        for &u in group {
            for &(v, w) in g.neighbors(u) {
                let cv = map[v];
                if cv == c {
                    continue;
                }
                if slot[cv] == usize::MAX {
                    slot[cv] = list.len();
                    list.push((cv, w));
                } else {
                    list[slot[cv]].1 += w;
                }
            }
        }
        for &(cv, _) in list.iter() {
            slot[cv] = usize::MAX;
        }
        list.sort_by_key(|&(v, _)| v);
    }
    // Both endpoints summed the same weights in different orders; mirror the
    // lower endpoint's value so the result is exactly symmetric.
    for c in 0..next {
        let (lower, upper) = adjacency.split_at_mut(c);
        for e in upper[0].iter_mut().filter(|e| e.0 < c) {
            let peer = &lower[e.0];
            let k = peer.binary_search_by_key(&c, |&(v, _)| v).expect("adjacency is symmetric");
            e.1 = peer[k].1;
        }
    }
    let graph = WeightedGraph::from_parts(weights, adjacency)?;
    Ok(Some(CoarseLevel { graph, map }))
}

/// Lifts a partition of the coarsest graph back to the original vertices.
pub fn project_partition(map: &CoarseningMap, coarse: &Partition) -> Result<Partition> {
    let coarse_n = map.coarsest().n();
    if coarse.bits().len() != coarse_n {
        return Err(Error::SizeMismatch {
            expected: coarse_n,
            got: coarse.bits().len(),
        });
    }
    let bits: Bitstring = map.fine_to_coarse.iter().map(|&c| coarse.bits()[c]).collect();
    Partition::new(map.fine(), bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{grid_graph, ring_graph};

    #[test]
    fn target_equal_to_n_is_identity() {
        let g = ring_graph(6).unwrap();
        let m = coarsen(&g, 6, 1).unwrap();
        assert!(m.levels.is_empty());
        assert_eq!(m.fine_to_coarse, (0..6).collect::<Vec<_>>());
        assert!(m.reached_target);
    }

    #[test]
    fn eight_cycle_to_four_cycle() {
        let g = ring_graph(8).unwrap();
        // seed 2 gives a perfect matching in one round
        let m = coarsen(&g, 4, 2).unwrap();
        let c = m.coarsest();
        assert_eq!(m.levels.len(), 1);
        assert_eq!(c.n(), 4);
        assert!(c.vertex_weights().iter().all(|&w| w == 2));
        assert!((0..4).all(|v| c.degree(v) == 2));
        assert_eq!(c.n_edges(), 4);
    }

    #[test]
    fn star_absorbs_one_leaf_per_round() {
        let g = WeightedGraph::from_edges(7, None, (1..7).map(|i| (0, i, 1.0))).unwrap();
        let m = coarsen(&g, 2, 5).unwrap();
        assert_eq!(m.levels.len(), 5);
        assert_eq!(m.coarsest().n(), 2);
        assert_eq!(m.coarsest().total_vertex_weight(), 7);
    }

    #[test]
    fn stall_on_isolated_vertices_is_flagged() {
        let g = WeightedGraph::from_edges(6, None, [(0, 1, 1.0)]).unwrap();
        let m = coarsen(&g, 2, 0).unwrap();
        assert!(!m.reached_target);
        assert_eq!(m.coarsest().n(), 5);
    }

    #[test]
    fn invalid_target() {
        let g = ring_graph(5).unwrap();
        assert!(coarsen(&g, 1, 0).is_err());
        assert!(coarsen(&g, 6, 0).is_err());
    }

    #[test]
    fn projection_follows_the_map() {
        let g = grid_graph(4, 4).unwrap();
        let m = coarsen(&g, 5, 3).unwrap();
        let c = m.coarsest();
        let bits: Bitstring = (0..c.n()).map(|i| (i % 2) as u8).collect();
        let cp = Partition::new(c, bits).unwrap();
        let fp = project_partition(&m, &cp).unwrap();
        for v in 0..16 {
            assert_eq!(fp.bits()[v], cp.bits()[m.fine_to_coarse[v]]);
        }
        assert_eq!(fp.side_weights(), cp.side_weights());
        assert!((fp.cut_weight() - cp.cut_weight()).abs() < 1e-12);
        let wrong = Partition::new(&g, Bitstring::zeros(16)).unwrap();
        assert!(project_partition(&m, &wrong).is_err());
    }
}
