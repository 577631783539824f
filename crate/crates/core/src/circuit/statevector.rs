use num_complex::Complex64;

use super::ansatz::{Ansatz, Gate};
use super::walsh_hadamard;
use crate::error::{invalid, Error, Result};
use crate::qubo::ZHamiltonian;

/// Largest register `initial_state` will allocate (1 GiB of amplitudes).
pub const DEFAULT_MAX_QUBITS: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|+>^n`, refusing registers above `max_qubits`.
    pub fn plus(n: usize, max_qubits: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("register needs at least one qubit"));
        }
        if n > max_qubits {
            return Err(Error::TooLarge {
                what: "qubits",
                n,
                max: max_qubits,
            });
        }
        let dim = 1usize << n;
        let a = Complex64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self { n, amps: vec![a; dim] })
    }

    /// Computational basis state with qubit `i` equal to bit `i` of `index`.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        let mut sv = Self::plus(n, DEFAULT_MAX_QUBITS)?;
        if index >= sv.amps.len() {
            return Err(invalid(format!("basis index {index} out of range")));
        }
        sv.amps.fill(Complex64::new(0.0, 0.0));
        sv.amps[index] = Complex64::new(1.0, 0.0);
        Ok(sv)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 || !amps.len().is_power_of_two() {
            return Err(invalid("amplitude count must be a power of two"));
        }
        let n = amps.len().trailing_zeros() as usize;
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies `exp(-i theta/2 Z_a Y_b)` in place.
    pub fn apply_rzy(&mut self, a: usize, b: usize, theta: f64) -> Result<()> {
        if a >= self.n || b >= self.n {
            return Err(invalid(format!("gate ({a}, {b}) outside a {}-qubit register", self.n)));
        }
        if a == b {
            return Err(invalid("R_ZY needs two distinct qubits"));
        }
        self.rzy_unchecked(a, b, theta);
        Ok(())
    }

    // Z_a Y_b maps |..0_b..> to  i z |..1_b..> and |..1_b..> to -i z |..0_b..>,
    // z = (-1)^{x_a}, so the exponential is a real rotation in each (0_b, 1_b) pair.
    fn rzy_unchecked(&mut self, a: usize, b: usize, theta: f64) {
        let (s, c) = (0.5 * theta).sin_cos();
        let am = 1usize << a;
        let bm = 1usize << b;
        for (blk, block) in self.amps.chunks_exact_mut(2 * bm).enumerate() {
            let base = blk * 2 * bm;
            let (lo, hi) = block.split_at_mut(bm);
            for (k, (x0, x1)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                let zs = if (base + k) & am == 0 { s } else { -s };
                let (a0, a1) = (*x0, *x1);
                *x0 = a0 * c - a1 * zs;
                *x1 = a1 * c + a0 * zs;
            }
        }
    }

    /// Applies `gates` in order with angles taken from `theta[gate.param]`.
    pub fn apply_gates(&mut self, gates: &[Gate], theta: &[f64]) -> Result<()> {
        for g in gates {
            let angle = *theta.get(g.param).ok_or(Error::SizeMismatch {
                expected: g.param + 1,
                got: theta.len(),
            })?;
            self.apply_rzy(g.a, g.b, angle)?;
        }
        Ok(())
    }
}

pub fn initial_state(n: usize) -> Result<Statevector> {
    Statevector::plus(n, DEFAULT_MAX_QUBITS)
}

/// `|+>^n` followed by every gate of `ans`.
pub fn prepare(ans: &Ansatz, theta: &[f64]) -> Result<Statevector> {
    if theta.len() != ans.n_params() {
        return Err(Error::SizeMismatch {
            expected: ans.n_params(),
            got: theta.len(),
        });
    }
    let mut sv = initial_state(ans.n_qubits)?;
    sv.apply_gates(&ans.gates, theta)?;
    Ok(sv)
}

/// Exact `<P_a>` for every term of `h`, and `<H>`.
pub fn expect_z_terms(sv: &Statevector, h: &ZHamiltonian) -> Result<(Vec<f64>, f64)> {
    if sv.n_qubits() != h.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: h.n_qubits(),
            got: sv.n_qubits(),
        });
    }
    let mut spectrum = sv.probabilities();
    walsh_hadamard(&mut spectrum);
    let exps: Vec<f64> = h.terms.iter().map(|t| spectrum[t.mask() as usize]).collect();
    let energy = h.constant + h.terms.iter().zip(&exps).map(|(t, e)| t.coeff * e).sum::<f64>();
    Ok((exps, energy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::build_heavy_neighbors_ansatz;
    use crate::graph::complete_graph;
    use crate::qubo::{Bitstring, QuboProblem};
    use rand::{Rng, SeedableRng};

    // exp(-i t/2 Z (x) Y) as a dense 4x4 matrix in basis index = x_a + 2 x_b.
    fn dense_rzy(theta: f64) -> [[Complex64; 4]; 4] {
        let i = Complex64::new(0.0, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        // Z_a (x) Y_b: Y = [[0, -i], [i, 0]] acting on the high bit
        let mut g = [[zero; 4]; 4];
        for xa in 0..2usize {
            let z = if xa == 0 { 1.0 } else { -1.0 };
            g[xa + 2][xa] = i * z;
            g[xa][xa + 2] = -i * z;
        }
        let (s, c) = (0.5 * theta).sin_cos();
        let mut u = [[zero; 4]; 4];
        for r in 0..4 {
            for col in 0..4 {
                let id = if r == col { Complex64::new(c, 0.0) } else { zero };
                u[r][col] = id - i * s * g[r][col];
            }
        }
        u
    }

    fn close(x: &Statevector, y: &Statevector, tol: f64) -> bool {
        x.amplitudes()
            .iter()
            .zip(y.amplitudes())
            .all(|(p, q)| (p - q).norm() < tol)
    }

    #[test]
    fn initial_states() {
        let sv = initial_state(1).unwrap();
        for a in sv.amplitudes() {
            assert!((a.re - 0.5f64.sqrt()).abs() < 1e-15 && a.im == 0.0);
        }
        let sv = initial_state(3).unwrap();
        assert_eq!(sv.amplitudes().len(), 8);
        for a in sv.amplitudes() {
            assert!((a.re - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        }
        assert!(matches!(initial_state(27), Err(Error::TooLarge { .. })));
        assert!(initial_state(0).is_err());
    }

    #[test]
    fn rzy_examples() {
        let mut sv = Statevector::basis(2, 0).unwrap();
        sv.apply_rzy(0, 1, 0.0).unwrap();
        assert_eq!(sv, Statevector::basis(2, 0).unwrap());

        let mut sv = Statevector::basis(2, 0).unwrap();
        sv.apply_rzy(0, 1, 2.0 * std::f64::consts::PI).unwrap();
        assert!((sv.amplitudes()[0] + 1.0).norm() < 1e-12);

        // "01": qubit 1 set, index 2
        let mut sv = Statevector::basis(2, 0).unwrap();
        sv.apply_rzy(0, 1, std::f64::consts::FRAC_PI_2).unwrap();
        let h = 0.5f64.sqrt();
        let want = [h, 0.0, h, 0.0];
        for (a, w) in sv.amplitudes().iter().zip(want) {
            assert!((a - Complex64::new(w, 0.0)).norm() < 1e-12);
        }
        assert_eq!(Bitstring::from_index(2, 2).to_string(), "01");
    }

    #[test]
    fn rzy_matches_dense_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let amps: Vec<Complex64> = (0..4)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let theta = rng.gen_range(-6.0..6.0);
            let u = dense_rzy(theta);
            let want: Vec<Complex64> = (0..4)
                .map(|r| (0..4).map(|c| u[r][c] * amps[c]).sum())
                .collect();
            let mut sv = Statevector::from_amplitudes(amps.clone()).unwrap();
            sv.apply_rzy(0, 1, theta).unwrap();
            assert!(close(&sv, &Statevector::from_amplitudes(want).unwrap(), 1e-12));

            // swapped roles: Z on qubit 1, Y on qubit 0 (permute the oracle basis)
            let perm = [0usize, 2, 1, 3];
            let want: Vec<Complex64> = (0..4)
                .map(|r| (0..4).map(|c| u[perm[r]][perm[c]] * amps[c]).sum())
                .collect();
            let mut sv = Statevector::from_amplitudes(amps).unwrap();
            sv.apply_rzy(1, 0, theta).unwrap();
            assert!(close(&sv, &Statevector::from_amplitudes(want).unwrap(), 1e-12));
        }
    }

    #[test]
    fn rzy_errors() {
        let mut sv = initial_state(3).unwrap();
        assert!(sv.apply_rzy(0, 3, 1.0).is_err());
        assert!(sv.apply_rzy(1, 1, 1.0).is_err());
    }

    #[test]
    fn prepare_cases() {
        let g = complete_graph(4).unwrap();
        let ans = build_heavy_neighbors_ansatz(&g, 2, &[3, 3]).unwrap();
        let sv = prepare(&ans, &vec![0.0; ans.n_params()]).unwrap();
        assert_eq!(sv, initial_state(4).unwrap());
        assert!(matches!(prepare(&ans, &[0.0]), Err(Error::SizeMismatch { .. })));

        let single = Ansatz::new(4, vec![(2, 0)]).unwrap();
        let mut direct = initial_state(4).unwrap();
        direct.apply_rzy(2, 0, 0.7).unwrap();
        assert_eq!(prepare(&single, &[0.7]).unwrap(), direct);
    }

    #[test]
    fn expectations() {
        let g = complete_graph(4).unwrap();
        let q = QuboProblem::with_default_lambda(g.clone(), 0.05).unwrap();
        let h = q.to_hamiltonian();
        let (exps, e) = expect_z_terms(&initial_state(4).unwrap(), &h).unwrap();
        assert!(exps.iter().all(|x| x.abs() < 1e-12));
        assert!((e - h.constant).abs() < 1e-12);

        for idx in 0..16 {
            let x = Bitstring::from_index(idx as u64, 4);
            let (_, e) = expect_z_terms(&Statevector::basis(4, idx).unwrap(), &h).unwrap();
            assert!((e - h.energy(&x).unwrap()).abs() < 1e-9);
        }

        // random state against an explicit sum over basis states
        let ans = build_heavy_neighbors_ansatz(&g, 2, &[6, 3]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let theta: Vec<f64> = (0..ans.n_params()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let sv = prepare(&ans, &theta).unwrap();
        let (exps, e) = expect_z_terms(&sv, &h).unwrap();
        let p = sv.probabilities();
        let mut e_oracle = 0.0;
        for (idx, pi) in p.iter().enumerate() {
            e_oracle += pi * q.energy(&Bitstring::from_index(idx as u64, 4)).unwrap();
        }
        assert!((e - e_oracle).abs() < 1e-9);
        for (t, got) in h.terms.iter().zip(exps) {
            let want: f64 = p
                .iter()
                .enumerate()
                .map(|(idx, pi)| {
                    let par = t.qubits.iter().map(|&k| (idx >> k) & 1).sum::<usize>() % 2;
                    if par == 0 { *pi } else { -pi }
                })
                .sum();
            assert!((got - want).abs() < 1e-9);
        }
        assert!(expect_z_terms(&initial_state(3).unwrap(), &h).is_err());
    }
}
