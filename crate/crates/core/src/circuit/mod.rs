//! Parametrized circuits built from `R_ZY` rotations and an exact
//! statevector simulator for them.
//!
//! Conventions: qubit `q` is bit `q` of a basis index, and bitstrings print
//! qubit 0 first. `R_ZY(theta) = exp(-i theta/2 Z_a Y_b)` with `Z` on the
//! first qubit of the gate and `Y` on the second.

mod ansatz;
mod sampling;
mod statevector;

pub use ansatz::{build_heavy_neighbors_ansatz, Ansatz, AnsatzPreset, Gate};
pub use sampling::{sample, sample_probabilities, SampleSet};
pub use statevector::{expect_z_terms, initial_state, prepare, Statevector, DEFAULT_MAX_QUBITS};

/// In-place unnormalized Walsh-Hadamard transform. Applied to a
/// probability vector `p`, entry `m` becomes `sum_x p(x) (-1)^popcount(x & m)`,
/// the expectation of the Z-string with support `m`.
pub fn walsh_hadamard(data: &mut [f64]) {
    let len = data.len();
    assert!(len.is_power_of_two(), "length must be a power of two");
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        half *= 2;
    }
}
