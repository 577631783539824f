//! Balance-aware Fiduccia-Mattheyses refinement.
//!
//! Each pass moves vertices one at a time out of the heavier side, always
//! taking the untouched vertex of largest gain, then rolls back to the best
//! prefix of the move sequence that satisfies the imbalance tolerance.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::circuit::SampleSet;
use crate::error::{invalid, Error, Result};
use crate::graph::WeightedGraph;
use crate::qubo::{Bitstring, Partition};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FmConfig {
    /// Outer iteration limit `M`.
    pub max_iterations: usize,
    /// Accepted relative imbalance `|w0 - w1| / total`.
    pub epsilon: f64,
    /// Seed for random initializations.
    pub seed: u64,
}

impl Default for FmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20,
            epsilon: 0.05,
            seed: 0,
        }
    }
}

impl FmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(invalid("FM needs at least one iteration"));
        }
        if !(self.epsilon >= 0.0) {
            return Err(invalid("FM tolerance must be non-negative"));
        }
        Ok(())
    }
}

/// `sum_u w(v,u) (-1)^[same side]`: the cut reduction from moving `v`.
pub fn gain(g: &WeightedGraph, bits: &[u8], v: usize) -> f64 {
    g.neighbors(v)
        .iter()
        .map(|&(u, w)| if bits[u] == bits[v] { -w } else { w })
        .sum()
}

/// Side 0 when `w0 >= w1`, else side 1.
pub fn heavier_side(p: &Partition) -> u8 {
    side_of(p.side_weights())
}

fn side_of(w: [u64; 2]) -> u8 {
    u8::from(w[0] < w[1])
}

/// Max-gain key: larger gain first, then lower vertex index.
#[derive(Debug, Clone, Copy)]
struct Key(f64, usize);

impl PartialEq for Key {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Key {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0).then(o.1.cmp(&self.1))
    }
}

/// Per-vertex gains with an ordered index of untouched vertices per side.
#[derive(Debug, Clone)]
pub struct GainTable {
    gains: Vec<f64>,
    touched: Vec<bool>,
    free: [BTreeSet<Key>; 2],
}

impl GainTable {
    pub fn new(g: &WeightedGraph, bits: &[u8]) -> Self {
        let gains: Vec<f64> = (0..g.n()).map(|v| gain(g, bits, v)).collect();
        let mut free = [BTreeSet::new(), BTreeSet::new()];
        for (v, &d) in gains.iter().enumerate() {
            free[bits[v] as usize].insert(Key(d, v));
        }
        Self {
            gains,
            touched: vec![false; g.n()],
            free,
        }
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn is_touched(&self, v: usize) -> bool {
        self.touched[v]
    }

    /// Untouched vertex of largest gain on `side`.
    pub fn best(&self, side: u8) -> Option<usize> {
        self.free[side as usize].last().map(|k| k.1)
    }

    /// Moves `v` across, marks it touched and updates neighbor gains.
    pub fn apply_move(&mut self, g: &WeightedGraph, bits: &mut [u8], v: usize) {
        let from = bits[v];
        self.free[from as usize].remove(&Key(self.gains[v], v));
        self.touched[v] = true;
        bits[v] ^= 1;
        self.gains[v] = -self.gains[v];
        for &(u, w) in g.neighbors(v) {
            // same side before the move: the edge becomes cut
            let delta = if bits[u] == from { 2.0 * w } else { -2.0 * w };
            if !self.touched[u] {
                let side = bits[u] as usize;
                self.free[side].remove(&Key(self.gains[u], u));
                self.gains[u] += delta;
                self.free[side].insert(Key(self.gains[u], u));
            } else {
                self.gains[u] += delta;
            }
        }
    }
}

fn imbalance(w: [u64; 2]) -> f64 {
    let total = w[0] + w[1];
    if total == 0 {
        return 0.0;
    }
    w[0].abs_diff(w[1]) as f64 / total as f64
}

/// Modified FM on `init`.
///
/// A pass stops when the heavier side has no untouched vertex. The pass is
/// kept up to the prefix of largest cumulative gain among prefixes within
/// `epsilon`; a pass without positive balanced gain ends the search. When
/// the starting point is itself out of tolerance, the best balanced prefix
/// is accepted regardless of gain, or failing that the least imbalanced
/// prefix if it improves on the start.
pub fn fm_refine(g: &WeightedGraph, init: &Partition, cfg: &FmConfig) -> Result<Partition> {
    cfg.validate()?;
    if init.bits().len() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: init.bits().len(),
        });
    }
    let mut bits = init.bits().as_slice().to_vec();
    let mut weights = init.side_weights();
    let tol = 1e-9 * g.total_edge_weight().max(1.0);

    for _ in 0..cfg.max_iterations {
        let start_imbalance = imbalance(weights);
        let mut table = GainTable::new(g, &bits);
        let mut moves = Vec::with_capacity(g.n());
        // (cumulative gain, imbalance) after each move
        let mut prefixes: Vec<(f64, f64)> = Vec::with_capacity(g.n());
        let mut gsum = 0.0;
        while let Some(v) = table.best(side_of(weights)) {
            gsum += table.gains()[v];
            let from = bits[v] as usize;
            table.apply_move(g, &mut bits, v);
            weights[from] -= g.vertex_weight(v);
            weights[1 - from] += g.vertex_weight(v);
            moves.push(v);
            prefixes.push((gsum, imbalance(weights)));
        }

        let best_balanced = prefixes
            .iter()
            .enumerate()
            .filter(|(_, p)| p.1 <= cfg.epsilon + 1e-12)
            .fold(None::<(usize, f64)>, |acc, (k, p)| match acc {
                Some((_, g0)) if g0 >= p.0 - tol => acc,
                _ => Some((k, p.0)),
            });
        let keep = if start_imbalance <= cfg.epsilon + 1e-12 {
            best_balanced.filter(|&(_, gstar)| gstar > tol).map(|(k, _)| k)
        } else if let Some((k, _)) = best_balanced {
            Some(k)
        } else {
            prefixes
                .iter()
                .enumerate()
                .filter(|(_, p)| p.1 < start_imbalance)
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(b.1 .0.total_cmp(&a.1 .0)))
                .map(|(k, _)| k)
        };

        // undo moves past the kept prefix
        let undo_from = keep.map_or(0, |k| k + 1);
        for &v in moves[undo_from..].iter().rev() {
            let from = bits[v] as usize;
            bits[v] ^= 1;
            weights[from] -= g.vertex_weight(v);
            weights[1 - from] += g.vertex_weight(v);
        }
        if keep.is_none() {
            break;
        }
    }
    Partition::new(g, Bitstring::new(bits)?)
}

/// Refines every distinct string of `samples` once and carries its
/// multiplicity over to the refined string.
pub fn fm_plus_varqite(g: &WeightedGraph, samples: &SampleSet, cfg: &FmConfig) -> Result<SampleSet> {
    if samples.n != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: samples.n,
        });
    }
    let mut counts: BTreeMap<Bitstring, u64> = BTreeMap::new();
    for (bits, c) in samples.iter() {
        let refined = fm_refine(g, &Partition::new(g, bits.clone())?, cfg)?;
        *counts.entry(refined.into_bits()).or_default() += c;
    }
    Ok(SampleSet {
        n: samples.n,
        shots: samples.shots,
        counts,
    })
}

/// Uniform random string with `floor(n/2)` ones.
pub fn random_equal_cardinality(n: usize, rng: &mut rng::Rng) -> Bitstring {
    let mut bits: Vec<u8> = (0..n).map(|i| u8::from(i < n / 2)).collect();
    bits.shuffle(rng);
    Bitstring::new(bits).expect("0/1 entries")
}

/// FM from `count` random equal-cardinality starts; start `i` draws from
/// stream `i` of `cfg.seed`.
pub fn fm_random(g: &WeightedGraph, count: u64, cfg: &FmConfig) -> Result<SampleSet> {
    if count == 0 {
        return Err(invalid("need at least one start"));
    }
    let mut counts: BTreeMap<Bitstring, u64> = BTreeMap::new();
    for i in 0..count {
        let mut r = rng::stream(cfg.seed, i);
        let start = random_equal_cardinality(g.n(), &mut r);
        let refined = fm_refine(g, &Partition::new(g, start)?, cfg)?;
        *counts.entry(refined.into_bits()).or_default() += 1;
    }
    Ok(SampleSet {
        n: g.n(),
        shots: count,
        counts,
    })
}

/// Minimum cut among strings balanced within `nu`, and how many shots land
/// on it. `None` when nothing is balanced.
pub fn balanced_min_cut(g: &WeightedGraph, samples: &SampleSet, nu: f64) -> Result<Option<(f64, u64)>> {
    let tol = 1e-9 * g.total_edge_weight().max(1.0);
    let mut best: Option<(f64, u64)> = None;
    for (bits, c) in samples.iter() {
        let p = Partition::new(g, bits.clone())?;
        if !p.is_balanced(nu) {
            continue;
        }
        let cut = p.cut_weight();
        best = match best {
            Some((b, k)) if (cut - b).abs() <= tol => Some((b.min(cut), k + c)),
            Some((b, _)) if cut < b => Some((cut, c)),
            Some(x) => Some(x),
            None => Some((cut, c)),
        };
    }
    Ok(best)
}

/// Shots landing on balanced strings whose cut is within tolerance of `cut`.
pub fn count_balanced_at_cut(g: &WeightedGraph, samples: &SampleSet, nu: f64, cut: f64) -> Result<u64> {
    let tol = 1e-9 * g.total_edge_weight().max(1.0);
    let mut total = 0;
    for (bits, c) in samples.iter() {
        let p = Partition::new(g, bits.clone())?;
        if p.is_balanced(nu) && (p.cut_weight() - cut).abs() <= tol {
            total += c;
        }
    }
    Ok(total)
}
