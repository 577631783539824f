use std::collections::BTreeSet;

/// Minimum-degree elimination order on an explicit elimination graph.
/// `adjacency` uses local indices; ties go to the lower index.
pub fn minimum_degree_order(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let mut nbrs: Vec<BTreeSet<usize>> = adjacency
        .iter()
        .enumerate()
        .map(|(v, a)| a.iter().copied().filter(|&u| u != v).collect())
        .collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (nbrs[v].len(), v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let clique: Vec<usize> = std::mem::take(&mut nbrs[v]).into_iter().collect();
        for &u in &clique {
            queue.remove(&(nbrs[u].len(), u));
            nbrs[u].remove(&v);
            for &w in &clique {
                if w != u {
                    nbrs[u].insert(w);
                }
            }
            queue.insert((nbrs[u].len(), u));
        }
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_hub_ties_break_low() {
        let adj = vec![vec![1, 2, 3], vec![0], vec![0], vec![0]];
        // the hub drops to degree 1 and wins the tie with leaf 3
        assert_eq!(minimum_degree_order(&adj), vec![1, 2, 0, 3]);
    }

    #[test]
    fn path_from_the_ends() {
        let adj = vec![vec![1], vec![0, 2], vec![1, 3], vec![2]];
        assert_eq!(minimum_degree_order(&adj), vec![0, 1, 2, 3]);
    }

    #[test]
    fn every_vertex_once() {
        let adj = vec![vec![1, 2], vec![0, 2], vec![0, 1], vec![]];
        let mut o = minimum_degree_order(&adj);
        assert_eq!(o[0], 3);
        o.sort();
        assert_eq!(o, vec![0, 1, 2, 3]);
    }
}
