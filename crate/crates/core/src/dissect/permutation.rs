use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Bijection from original to new indices, with its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    perm: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    /// `perm[old] = new`; fails unless `perm` is a bijection on `0..n`.
    pub fn new(perm: Vec<usize>) -> Result<Self> {
        let n = perm.len();
        let mut inverse = vec![usize::MAX; n];
        for (old, &new) in perm.iter().enumerate() {
            if new >= n || inverse[new] != usize::MAX {
                return Err(invalid(format!("not a permutation: index {new} at position {old}")));
            }
            inverse[new] = old;
        }
        Ok(Self { perm, inverse })
    }

    /// From an elimination order: `order[k]` is the original index placed `k`-th.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let inv = Self::new(order)?;
        Ok(Self {
            perm: inv.inverse,
            inverse: inv.perm,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            inverse: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn new_index(&self, old: usize) -> usize {
        self.perm[old]
    }

    pub fn old_index(&self, new: usize) -> usize {
        self.inverse[new]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.perm
    }

    /// Original indices in new order.
    pub fn order(&self) -> &[usize] {
        &self.inverse
    }

    pub fn inverse(&self) -> Self {
        Self {
            perm: self.inverse.clone(),
            inverse: self.perm.clone(),
        }
    }

    /// Line `i` holds the new index of original vertex `i`.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.len() * 4);
        for &p in &self.perm {
            s.push_str(&p.to_string());
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perm = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.parse::<usize>().map_err(|e| crate::Error::Parse {
                    line: i + 1,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(perm)
    }

    /// Permutation matrix `P` with `P[new, old] = 1`, in Matrix Market
    /// coordinate pattern format, so `P A P^T` is the reordered matrix.
    pub fn to_matrix_market(&self) -> String {
        let n = self.len();
        let mut s = format!("%%MatrixMarket matrix coordinate pattern general\n{n} {n} {n}\n");
        for (old, &new) in self.perm.iter().enumerate() {
            s.push_str(&format!("{} {}\n", new + 1, old + 1));
        }
        s
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = crate::Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Vec<usize> {
        p.perm
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bijection_checks() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(p.old_index(2), 0);
        assert_eq!(p.order(), &[1, 2, 0]);
        assert_eq!(Permutation::from_order(vec![1, 2, 0]).unwrap(), p);
    }

    #[test]
    fn round_trip() {
        let p = Permutation::new(vec![3, 1, 0, 2]).unwrap();
        let inv = p.inverse();
        for i in 0..4 {
            assert_eq!(inv.new_index(p.new_index(i)), i);
        }
        assert_eq!(Permutation::from_text(&p.to_text()).unwrap(), p);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[3,1,0,2]");
        assert_eq!(serde_json::from_str::<Permutation>(&json).unwrap(), p);
    }

    #[test]
    fn matrix_market_shape() {
        let mm = Permutation::new(vec![1, 0]).unwrap().to_matrix_market();
        assert_eq!(mm.lines().nth(1), Some("2 2 2"));
        assert_eq!(mm.lines().nth(2), Some("2 1"));
    }
}
