use serde::{Deserialize, Serialize};

use super::Permutation;
use crate::error::{invalid, Error, Result};
use crate::graph::WeightedGraph;

/// Nonzero pattern of a symmetric matrix: off-diagonal neighbor lists plus
/// a record of which diagonal entries were stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPattern {
    adjacency: Vec<Vec<usize>>,
    diagonal: Vec<bool>,
}

impl SymmetricPattern {
    /// Pattern from `(row, col)` entries; each off-diagonal entry is mirrored.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        let mut diagonal = vec![false; n];
        for (i, j) in entries {
            if i >= n || j >= n {
                return Err(invalid(format!("entry ({i}, {j}) outside a {n} x {n} pattern")));
            }
            if i == j {
                diagonal[i] = true;
            } else {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        for a in &mut adjacency {
            a.sort_unstable();
            a.dedup();
        }
        Ok(Self { adjacency, diagonal })
    }

    /// Graph adjacency with a full diagonal.
    pub fn from_graph(g: &WeightedGraph) -> Self {
        Self {
            adjacency: (0..g.n()).map(|v| g.neighbors(v).iter().map(|&(u, _)| u).collect()).collect(),
            diagonal: vec![true; g.n()],
        }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_full_diagonal(&self) -> bool {
        self.diagonal.iter().all(|&d| d)
    }

    /// Entries in the lower triangle, diagonal included.
    pub fn nnz_lower(&self) -> u64 {
        let off: usize = self.adjacency.iter().map(Vec::len).sum();
        (off / 2 + self.n()) as u64
    }
}

/// Symbolic Cholesky merit factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeritFactors {
    /// Nonzeros of the lower factor, diagonal and fill included.
    pub nnz_factor: u64,
    /// `sum_j c_j^2` over factor column counts `c_j`.
    pub ops: u64,
}

/// Elimination tree of `pattern` ordered by `perm`, in new indices.
/// `parent[j] == None` marks a root.
pub fn elimination_tree(pattern: &SymmetricPattern, perm: &Permutation) -> Result<Vec<Option<usize>>> {
    let adj = permuted(pattern, perm)?;
    Ok(etree(&adj))
}

fn permuted(pattern: &SymmetricPattern, perm: &Permutation) -> Result<Vec<Vec<usize>>> {
    let n = pattern.n();
    if perm.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: perm.len(),
        });
    }
    let mut adj = vec![Vec::new(); n];
    for (old, nbrs) in pattern.adjacency.iter().enumerate() {
        adj[perm.new_index(old)] = nbrs.iter().map(|&u| perm.new_index(u)).collect();
    }
    Ok(adj)
}

// Liu's algorithm with path compression through `ancestor`.
fn etree(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n = adj.len();
    let mut parent = vec![None; n];
    let mut ancestor: Vec<Option<usize>> = vec![None; n];
    for j in 0..n {
        for &i0 in &adj[j] {
            if i0 >= j {
                continue;
            }
            let mut i = i0;
            loop {
                let next = ancestor[i];
                ancestor[i] = Some(j);
                match next {
                    Some(a) if a == j => break,
                    Some(a) => i = a,
                    None => {
                        parent[i] = Some(j);
                        break;
                    }
                }
            }
        }
    }
    parent
}

/// Factor column counts of the permuted pattern, each including the
/// diagonal. Row `i` of the factor is the union of etree paths from the
/// lower neighbors of `i` up to `i`.
pub fn column_counts(pattern: &SymmetricPattern, perm: &Permutation) -> Result<Vec<u64>> {
    let adj = permuted(pattern, perm)?;
    let parent = etree(&adj);
    let n = adj.len();
    let mut counts = vec![1u64; n];
    let mut mark = vec![usize::MAX; n];
    for i in 0..n {
        mark[i] = i;
        for &k in &adj[i] {
            if k >= i {
                continue;
            }
            let mut j = k;
            while mark[j] != i {
                mark[j] = i;
                counts[j] += 1;
                j = parent[j].expect("lower neighbor lies below row in the etree");
            }
        }
    }
    Ok(counts)
}

/// Merit factors of `pattern` under `perm`. Missing diagonal entries are
/// treated as present.
pub fn symbolic_factorize(pattern: &SymmetricPattern, perm: &Permutation) -> Result<MeritFactors> {
    if !pattern.has_full_diagonal() {
        log::warn!("pattern is missing diagonal entries; treating them as structurally nonzero");
    }
    let counts = column_counts(pattern, perm)?;
    Ok(MeritFactors {
        nnz_factor: counts.iter().sum(),
        ops: counts.iter().map(|c| c * c).sum(),
    })
}
