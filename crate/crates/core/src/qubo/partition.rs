use serde::Serialize;

use super::Bitstring;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// A bipartition with its cut weight and side weights. Side 0 holds the
/// vertices with bit 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    bits: Bitstring,
    cut_weight: f64,
    side_weights: [u64; 2],
}

impl Partition {
    pub fn new(g: &WeightedGraph, bits: Bitstring) -> Result<Self> {
        if bits.len() != g.n() {
            return Err(Error::SizeMismatch {
                expected: g.n(),
                got: bits.len(),
            });
        }
        let mut side_weights = [0u64; 2];
        for v in 0..g.n() {
            side_weights[bits[v] as usize] += g.vertex_weight(v);
        }
        let cut_weight = g.cut_weight(bits.as_slice());
        Ok(Self {
            bits,
            cut_weight,
            side_weights,
        })
    }

    pub fn bits(&self) -> &Bitstring {
        &self.bits
    }

    pub fn into_bits(self) -> Bitstring {
        self.bits
    }

    pub fn cut_weight(&self) -> f64 {
        self.cut_weight
    }

    pub fn side_weights(&self) -> [u64; 2] {
        self.side_weights
    }

    pub fn total_weight(&self) -> u64 {
        self.side_weights[0] + self.side_weights[1]
    }

    /// Signed weight difference `side0 - side1`.
    pub fn weight_difference(&self) -> i64 {
        self.side_weights[0] as i64 - self.side_weights[1] as i64
    }

    /// `|side0 - side1| / total`.
    pub fn imbalance(&self) -> f64 {
        self.weight_difference().unsigned_abs() as f64 / self.total_weight() as f64
    }

    /// True when neither side exceeds `(1/2 + nu)` of the total weight.
    pub fn is_balanced(&self, nu: f64) -> bool {
        let heavy = self.side_weights[0].max(self.side_weights[1]) as f64;
        heavy <= (0.5 + nu) * self.total_weight() as f64 + 1e-9
    }
}
