//! Balanced bipartitioning as a penalty QUBO and its diagonal Pauli-Z
//! Hamiltonian.
//!
//! The objective for a bitstring `x` is
//!
//! ```text
//! C(x) = sum_(i,j) w_ij (x_i + x_j - 2 x_i x_j) + lambda (sum_i v_i x_i - Omega/2)^2
//! ```
//!
//! and substituting `x_i = (1 - Z_i)/2` yields a Hamiltonian with only
//! `Z_i Z_j` terms plus a constant.

mod bits;
mod partition;

pub use bits::Bitstring;
pub use partition::Partition;

use serde::{Deserialize, Serialize};

use crate::circuit::walsh_hadamard;
use crate::error::{invalid, Error, Result};
use crate::graph::WeightedGraph;

/// Default balance tolerance.
pub const DEFAULT_NU: f64 = 0.05;

/// Largest instance [`exact_solve`] will enumerate.
pub const EXACT_MAX_VERTICES: usize = 30;

#[derive(Debug, Clone)]
pub struct QuboProblem {
    graph: WeightedGraph,
    lambda: f64,
    nu: f64,
}

/// Penalty weight used when none is given: `(w_max + 1) / max(1, v_min^2)`.
///
/// A unit shift of side weight then costs at least as much as cutting the
/// heaviest edge.
pub fn default_lambda(g: &WeightedGraph) -> f64 {
    let w_max = g.max_edge_weight().unwrap_or(0.0);
    let v_min = g.min_vertex_weight() as f64;
    (w_max + 1.0) / (v_min * v_min).max(1.0)
}

pub fn build_qubo(g: &WeightedGraph, lambda: f64, nu: f64) -> Result<QuboProblem> {
    QuboProblem::new(g.clone(), lambda, nu)
}

impl QuboProblem {
    /// `lambda = 0` is accepted (pure min-cut); negative or non-finite
    /// values are not.
    pub fn new(graph: WeightedGraph, lambda: f64, nu: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(invalid(format!("penalty weight must be >= 0, got {lambda}")));
        }
        if !(0.0..0.5).contains(&nu) {
            return Err(invalid(format!("balance tolerance must be in [0, 0.5), got {nu}")));
        }
        Ok(Self { graph, lambda, nu })
    }

    pub fn with_default_lambda(graph: WeightedGraph, nu: f64) -> Result<Self> {
        let lambda = default_lambda(&graph);
        Self::new(graph, lambda, nu)
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn omega(&self) -> u64 {
        self.graph.total_vertex_weight()
    }

    fn check_len(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::SizeMismatch {
                expected: self.n(),
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `(sum_i v_i x_i - Omega/2)^2`, unscaled.
    pub fn penalty(&self, x: &Bitstring) -> Result<f64> {
        self.check_len(x.as_slice())?;
        let ones: u64 = (0..self.n())
            .filter(|&i| x[i] == 1)
            .map(|i| self.graph.vertex_weight(i))
            .sum();
        Ok(self.penalty_from_weight(ones))
    }

    fn penalty_from_weight(&self, ones: u64) -> f64 {
        let twice = 2.0 * ones as f64 - self.omega() as f64;
        twice * twice / 4.0
    }

    /// Exact value of `C(x)`.
    pub fn energy(&self, x: &Bitstring) -> Result<f64> {
        self.check_len(x.as_slice())?;
        let cut = self.graph.cut_weight(x.as_slice());
        Ok(cut + self.lambda * self.penalty(x)?)
    }

    /// Diagonal Hamiltonian with `H |x> = C(x) |x>`.
    pub fn to_hamiltonian(&self) -> ZHamiltonian {
        let n = self.n();
        let g = &self.graph;
        let lambda = self.lambda;
        // cut: w/2 (1 - Z_i Z_j); penalty: lambda/4 (sum_i v_i Z_i)^2
        let mut constant = g.total_edge_weight() / 2.0;
        let sum_sq: f64 = g.vertex_weights().iter().map(|&v| (v as f64) * (v as f64)).sum();
        constant += lambda / 4.0 * sum_sq;
        let mut terms = Vec::new();
        for i in 0..n {
            let neighbors = g.neighbors(i);
            let mut k = 0;
            for j in i + 1..n {
                let mut coeff = 0.0;
                while k < neighbors.len() && neighbors[k].0 < j {
                    k += 1;
                }
                if k < neighbors.len() && neighbors[k].0 == j {
                    coeff -= neighbors[k].1 / 2.0;
                }
                coeff += lambda / 2.0 * g.vertex_weight(i) as f64 * g.vertex_weight(j) as f64;
                if coeff != 0.0 {
                    terms.push(ZTerm {
                        coeff,
                        qubits: vec![i, j],
                    });
                }
            }
        }
        ZHamiltonian { n, constant, terms }
    }

    /// `C(x)` for every basis index (qubit `i` in bit `i`), by Gray-code
    /// walk. Requires `n <= 30`.
    pub fn energy_table(&self) -> Result<Vec<f64>> {
        let n = self.n();
        if n > EXACT_MAX_VERTICES {
            return Err(Error::TooLarge {
                what: "vertex count",
                n,
                max: EXACT_MAX_VERTICES,
            });
        }
        let mut table = vec![0.0; 1usize << n];
        let mut walk = GrayWalk::new(self);
        table[0] = walk.energy();
        for k in 1usize..(1 << n) {
            let bit = k.trailing_zeros() as usize;
            walk.flip(bit);
            table[k ^ (k >> 1)] = walk.energy();
        }
        Ok(table)
    }
}

/// Incremental evaluation of `C(x)` under single-bit flips.
struct GrayWalk<'a> {
    q: &'a QuboProblem,
    x: Vec<u8>,
    cut: f64,
    ones: u64,
}

impl<'a> GrayWalk<'a> {
    fn new(q: &'a QuboProblem) -> Self {
        Self {
            q,
            x: vec![0; q.n()],
            cut: 0.0,
            ones: 0,
        }
    }

    fn flip(&mut self, i: usize) {
        let g = self.q.graph();
        let xi = self.x[i];
        for &(j, w) in g.neighbors(i) {
            if self.x[j] == xi {
                self.cut += w;
            } else {
                self.cut -= w;
            }
        }
        self.x[i] ^= 1;
        if xi == 0 {
            self.ones += g.vertex_weight(i);
        } else {
            self.ones -= g.vertex_weight(i);
        }
    }

    fn energy(&self) -> f64 {
        self.cut + self.q.lambda * self.q.penalty_from_weight(self.ones)
    }
}

/// Global minimum of `C` and every bitstring attaining it, sorted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactSolution {
    pub c_star: f64,
    pub optima: Vec<Bitstring>,
}

/// Exhaustive minimization. Vertex 0 is pinned to side 0 and optima are
/// completed with their complements, since `C(x) = C(1 - x)`.
pub fn exact_solve(q: &QuboProblem) -> Result<ExactSolution> {
    let n = q.n();
    if n > EXACT_MAX_VERTICES {
        return Err(Error::TooLarge {
            what: "vertex count",
            n,
            max: EXACT_MAX_VERTICES,
        });
    }
    let tol = |e: f64| 1e-9 * e.abs().max(1.0);
    let mut walk = GrayWalk::new(q);
    let mut best = walk.energy();
    let mut candidates: Vec<Vec<u8>> = vec![walk.x.clone()];
    let free = n - 1;
    for k in 1u64..(1u64 << free) {
        let bit = k.trailing_zeros() as usize + 1;
        walk.flip(bit);
        let e = walk.energy();
        if e < best - tol(best) {
            best = e;
            candidates.clear();
            candidates.push(walk.x.clone());
        } else if e <= best + tol(best) {
            best = best.min(e);
            candidates.push(walk.x.clone());
        }
    }
    // re-evaluate exactly to discard drift in the incremental cut
    let scored: Vec<(f64, Bitstring)> = candidates
        .into_iter()
        .map(|x| {
            let b = Bitstring::new(x).expect("0/1 entries");
            (q.energy(&b).expect("length matches"), b)
        })
        .collect();
    let c_star = scored.iter().map(|(e, _)| *e).fold(f64::INFINITY, f64::min);
    let mut optima = Vec::with_capacity(2 * scored.len());
    for (e, b) in scored {
        if e <= c_star + tol(c_star) {
            optima.push(b.complement());
            optima.push(b);
        }
    }
    optima.sort();
    optima.dedup();
    Ok(ExactSolution { c_star, optima })
}

/// Relative excess energy `(C(x) - C*) / C*`, or the absolute excess when
/// `C* <= 0`. Zero exactly at an optimum.
pub fn approximation_error(q: &QuboProblem, x: &Bitstring, c_star: f64) -> Result<f64> {
    Ok(relative_error(q.energy(x)?, c_star))
}

pub fn relative_error(energy: f64, c_star: f64) -> f64 {
    if c_star > 0.0 {
        (energy - c_star) / c_star
    } else {
        energy - c_star
    }
}

/// One `Z_i` or `Z_i Z_j` term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZTerm {
    pub coeff: f64,
    pub qubits: Vec<usize>,
}

impl ZTerm {
    pub fn mask(&self) -> u64 {
        self.qubits.iter().fold(0, |m, &q| m | (1u64 << q))
    }
}

/// `constant + sum_a coeff_a P_a` with each `P_a` a product of one or two
/// Pauli-Z operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZHamiltonian {
    pub n: usize,
    pub constant: f64,
    pub terms: Vec<ZTerm>,
}

impl ZHamiltonian {
    pub fn new(n: usize, constant: f64, terms: Vec<ZTerm>) -> Result<Self> {
        for t in &terms {
            let ok = matches!(t.qubits.len(), 1 | 2)
                && t.qubits.iter().all(|&q| q < n)
                && (t.qubits.len() == 1 || t.qubits[0] != t.qubits[1]);
            if !ok {
                return Err(invalid(format!("bad term support {:?}", t.qubits)));
            }
        }
        Ok(Self { n, constant, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of `Z_i Z_j` (0 when absent).
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        let mask = (1u64 << i) | (1u64 << j);
        self.terms.iter().filter(|t| t.mask() == mask).map(|t| t.coeff).sum()
    }

    pub fn masks(&self) -> Vec<u64> {
        self.terms.iter().map(ZTerm::mask).collect()
    }

    /// `<x| H |x>` by sign flips.
    pub fn energy(&self, x: &Bitstring) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::SizeMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut e = self.constant;
        for t in &self.terms {
            let parity = t.qubits.iter().fold(0u8, |p, &q| p ^ x[q]);
            e += if parity == 0 { t.coeff } else { -t.coeff };
        }
        Ok(e)
    }

    /// Diagonal of `H` over all `2^n` basis indices.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut spectrum = vec![0.0; 1usize << self.n];
        spectrum[0] = self.constant;
        for t in &self.terms {
            spectrum[t.mask() as usize] += t.coeff;
        }
        walsh_hadamard(&mut spectrum);
        spectrum
    }
}

pub fn ham_energy(h: &ZHamiltonian, x: &Bitstring) -> Result<f64> {
    h.energy(x)
}

pub fn qubo_energy(q: &QuboProblem, x: &Bitstring) -> Result<f64> {
    q.energy(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete_graph, path_graph};

    fn b(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    fn edge2() -> QuboProblem {
        QuboProblem::new(path_graph(2).unwrap(), 1.0, DEFAULT_NU).unwrap()
    }

    #[test]
    fn two_vertex_energies() {
        let q = edge2();
        assert_eq!(q.energy(&b("01")).unwrap(), 1.0);
        assert_eq!(q.energy(&b("00")).unwrap(), 1.0);
        assert!(q.energy(&b("0")).is_err());
    }

    #[test]
    fn triangle_energy() {
        let q = QuboProblem::new(complete_graph(3).unwrap(), 1.0, DEFAULT_NU).unwrap();
        assert_eq!(q.energy(&b("001")).unwrap(), 2.25);
    }

    #[test]
    fn path4_energy() {
        let q = QuboProblem::new(path_graph(4).unwrap(), 2.0, DEFAULT_NU).unwrap();
        assert_eq!(q.energy(&b("0011")).unwrap(), 1.0);
        assert_eq!(q.penalty(&b("0011")).unwrap(), 0.0);
    }

    #[test]
    fn empty_graph_balanced_split_is_free() {
        let g = WeightedGraph::from_edges(4, None, std::iter::empty()).unwrap();
        let q = QuboProblem::new(g, 3.0, DEFAULT_NU).unwrap();
        assert_eq!(q.energy(&b("0101")).unwrap(), 0.0);
    }

    #[test]
    fn hamiltonian_of_single_edge() {
        let h = edge2().to_hamiltonian();
        assert_eq!(h.constant, 1.0);
        assert_eq!(h.coefficient(0, 1), 0.0);
        for s in ["00", "01", "10", "11"] {
            assert_eq!(h.energy(&b(s)).unwrap(), edge2().energy(&b(s)).unwrap());
        }
    }

    #[test]
    fn hamiltonian_without_penalty() {
        let g = WeightedGraph::from_edges(3, None, [(0, 1, 2.0), (1, 2, 4.0)]).unwrap();
        let h = QuboProblem::new(g, 0.0, DEFAULT_NU).unwrap().to_hamiltonian();
        assert_eq!(h.constant, 3.0);
        assert_eq!(h.coefficient(0, 1), -1.0);
        assert_eq!(h.coefficient(1, 2), -2.0);
        assert_eq!(h.n_terms(), 2);
    }

    #[test]
    fn hamiltonian_of_pure_penalty() {
        let g = WeightedGraph::from_edges(3, None, std::iter::empty()).unwrap();
        let h = QuboProblem::new(g, 1.0, DEFAULT_NU).unwrap().to_hamiltonian();
        assert_eq!(h.constant, 0.75);
        assert_eq!(h.n_terms(), 3);
        assert!(h.terms.iter().all(|t| t.coeff == 0.5));
    }

    #[test]
    fn ham_energy_sign_rules() {
        let h = ZHamiltonian::new(2, 0.5, vec![ZTerm { coeff: 2.0, qubits: vec![0, 1] }]).unwrap();
        assert_eq!(h.energy(&b("00")).unwrap(), 2.5);
        assert_eq!(h.energy(&b("01")).unwrap(), -1.5);
        assert!(ZHamiltonian::new(2, 0.0, vec![ZTerm { coeff: 1.0, qubits: vec![1, 1] }]).is_err());
    }

    #[test]
    fn diagonal_matches_pointwise_energy() {
        let q = QuboProblem::new(complete_graph(4).unwrap(), 0.7, DEFAULT_NU).unwrap();
        let h = q.to_hamiltonian();
        let diag = h.diagonal();
        let table = q.energy_table().unwrap();
        for idx in 0..16u64 {
            let x = Bitstring::from_index(idx, 4);
            let e = q.energy(&x).unwrap();
            assert!((diag[idx as usize] - e).abs() < 1e-12);
            assert!((table[idx as usize] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_two_vertex() {
        // at lambda = 1 the empty and full sides pay exactly the cut weight
        let s = exact_solve(&edge2()).unwrap();
        assert_eq!(s.c_star, 1.0);
        assert_eq!(s.optima, vec![b("00"), b("01"), b("10"), b("11")]);
        let s = exact_solve(&QuboProblem::with_default_lambda(path_graph(2).unwrap(), DEFAULT_NU).unwrap()).unwrap();
        assert_eq!(s.c_star, 1.0);
        assert_eq!(s.optima, vec![b("01"), b("10")]);
    }

    #[test]
    fn exact_disconnected_pairs_without_penalty() {
        let g = WeightedGraph::from_edges(4, None, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let s = exact_solve(&QuboProblem::new(g, 0.0, DEFAULT_NU).unwrap()).unwrap();
        assert_eq!(s.c_star, 0.0);
        assert!(s.optima.contains(&b("0011")));
        assert!(s.optima.contains(&b("0000")));
    }

    #[test]
    fn exact_k4() {
        let s = exact_solve(&QuboProblem::new(complete_graph(4).unwrap(), 1.0, DEFAULT_NU).unwrap()).unwrap();
        assert_eq!(s.c_star, 4.0);
        // cut + (k - 2)^2 equals 4 for every k ones
        assert_eq!(s.optima.len(), 16);
        let s = exact_solve(&QuboProblem::new(complete_graph(4).unwrap(), 1.5, DEFAULT_NU).unwrap()).unwrap();
        assert_eq!(s.c_star, 4.0);
        assert_eq!(s.optima.len(), 6);
        assert!(s.optima.iter().all(|x| x.count_ones() == 2));
    }

    #[test]
    fn exact_refuses_large_instances() {
        let q = QuboProblem::new(path_graph(31).unwrap(), 1.0, DEFAULT_NU).unwrap();
        assert!(matches!(exact_solve(&q), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn approximation_error_cases() {
        let q = edge2();
        assert_eq!(approximation_error(&q, &b("01"), 1.0).unwrap(), 0.0);
        assert_eq!(relative_error(2.0, 1.0), 1.0);
        assert_eq!(relative_error(3.0, 0.0), 3.0);
    }

    #[test]
    fn invalid_parameters() {
        let g = path_graph(2).unwrap();
        assert!(QuboProblem::new(g.clone(), -1.0, 0.05).is_err());
        assert!(QuboProblem::new(g.clone(), f64::NAN, 0.05).is_err());
        assert!(QuboProblem::new(g, 1.0, 0.5).is_err());
    }

    #[test]
    fn default_lambda_formula() {
        let g = WeightedGraph::from_edges(3, Some(vec![2, 3, 4]), [(0, 1, 5.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(default_lambda(&g), 6.0 / 4.0);
        assert_eq!(default_lambda(&path_graph(3).unwrap()), 2.0);
    }

    #[test]
    fn hamiltonian_json_shape() {
        let v = serde_json::to_value(edge2().to_hamiltonian()).unwrap();
        assert_eq!(v["n"], 2);
        assert_eq!(v["constant"], 1.0);
        assert!(v["terms"].as_array().unwrap().is_empty());
    }
}
