//! Variational imaginary-time evolution.
//!
//! Each step prepares `|psi(theta)>`, estimates the energy and the vector
//! `D`, builds `G` column by column with the parameter-shift rule, solves
//! the regularized least-squares system `G theta_dot = D` and takes a
//! forward Euler step `theta += d_tau * theta_dot`.
//!
//! All Hamiltonian terms are Z-diagonal, so every expectation needed from
//! one prepared state comes from a single Walsh-Hadamard transform of its
//! (exact or sampled) basis distribution.

mod linalg;

use serde::{Deserialize, Serialize};

use crate::circuit::{initial_state, sample_probabilities, walsh_hadamard, Ansatz, SampleSet, Statevector};
use crate::error::{invalid, Error, Result};
use crate::qubo::{relative_error, Bitstring, Partition, QuboProblem, ZHamiltonian};
use crate::rng::{self, step_stream};

pub use linalg::{solve_step, Matrix};

/// Circuit index used for the diagnostic sample of an exact-mode step.
/// Version tag written into every trace line.
pub const TRACE_SCHEMA: &str = "qdissect.trace/1";

const DIAGNOSTIC_CIRCUIT: usize = u32::MAX as usize;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VarqiteConfig {
    /// Imaginary-time step.
    pub d_tau: f64,
    pub max_steps: usize,
    /// Shots per circuit; 0 evaluates expectations exactly.
    pub shots: u64,
    /// Shots for diagnostics and the final sample when `shots == 0`.
    pub sample_shots: u64,
    /// Tikhonov regularization of the normal equations.
    pub ridge: f64,
    pub seed: u64,
    /// Trace stride; the last step is always recorded.
    pub record_every: usize,
    /// Optimal energy, when known, for relative-error columns.
    pub c_star: Option<f64>,
    /// Stop once a balanced sample reaches `c_star`.
    pub early_stop: bool,
    /// Measure imaginary time in units of the inverse RMS coupling
    /// `sqrt(mean_a coeff_a^2)`, so `d_tau` is comparable across instances.
    pub normalize: bool,
}

impl Default for VarqiteConfig {
    fn default() -> Self {
        Self {
            d_tau: 0.1,
            max_steps: 200,
            shots: 0,
            sample_shots: 2000,
            ridge: 1e-2,
            seed: 0,
            record_every: 1,
            c_star: None,
            early_stop: false,
            normalize: true,
        }
    }
}

impl VarqiteConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_tau >= 0.0 && self.d_tau.is_finite()) {
            return Err(invalid("d_tau must be finite and non-negative"));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(invalid("ridge must be finite and non-negative"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every must be at least 1"));
        }
        if self.shots == 0 && self.sample_shots == 0 {
            return Err(invalid("sample_shots must be at least 1 in exact mode"));
        }
        if self.early_stop && self.c_star.is_none() {
            return Err(invalid("early_stop needs c_star"));
        }
        Ok(())
    }

    fn final_shots(&self) -> u64 {
        if self.shots > 0 {
            self.shots
        } else {
            self.sample_shots
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarqiteState {
    pub theta: Vec<f64>,
    pub step: usize,
    pub energy: f64,
}

/// One recorded step. Sample statistics are over the step's histogram,
/// weighted by multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: usize,
    pub tau: f64,
    /// Energy estimate used by the update (sampled when `shots > 0`).
    pub energy: f64,
    /// `<H>` from the amplitudes.
    pub exact_energy: f64,
    pub best_sample: f64,
    pub mean_sample: f64,
    pub p10: f64,
    pub p90: f64,
    /// Lowest sampled energy over all steps so far.
    pub best_so_far: f64,
    pub best_so_far_bits: Bitstring,
    /// Lowest balanced sampled energy so far.
    pub best_balanced_so_far: Option<f64>,
    pub rel_error_best: Option<f64>,
    pub rel_error_mean: Option<f64>,
    pub theta_dot_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub records: Vec<TraceRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// One JSON object per line, each tagged with [`TRACE_SCHEMA`].
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            schema: &'static str,
            #[serde(flatten)]
            record: &'a TraceRecord,
        }
        let mut out = String::new();
        for record in &self.records {
            let line = Line {
                schema: TRACE_SCHEMA,
                record,
            };
            out.push_str(&serde_json::to_string(&line).expect("trace records serialize"));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct VarqiteOutcome {
    /// Histogram drawn from the final state.
    pub samples: SampleSet,
    pub trace: ConvergenceTrace,
    /// Lowest-energy balanced sample over the whole run, or the lowest
    /// unbalanced one when no balanced string was ever drawn.
    pub best: Partition,
    pub best_energy: f64,
    pub best_is_balanced: bool,
    pub state: VarqiteState,
    /// Divisor applied to `H` in the update.
    pub energy_scale: f64,
    /// Total state preparations, including the final one.
    pub preparations: u64,
}

/// Root-mean-square term coefficient; 1 for a constant Hamiltonian.
pub fn energy_scale(h: &ZHamiltonian) -> f64 {
    if h.terms.is_empty() {
        return 1.0;
    }
    let s = (h.terms.iter().map(|t| t.coeff * t.coeff).sum::<f64>() / h.terms.len() as f64).sqrt();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// `D_a = -(<P_a H> - E <P_a>)` and `E` for a basis distribution `p`, with
/// `diag` the diagonal of `H`.
fn d_from_distribution(p: &[f64], diag: &[f64], masks: &[usize]) -> (Vec<f64>, f64) {
    let mut spectrum = p.to_vec();
    walsh_hadamard(&mut spectrum);
    let mut weighted: Vec<f64> = p.iter().zip(diag).map(|(a, c)| a * c).collect();
    let energy: f64 = weighted.iter().sum();
    walsh_hadamard(&mut weighted);
    let d = masks.iter().map(|&m| -(weighted[m] - energy * spectrum[m])).collect();
    (d, energy)
}

fn check_dims(n: usize, h: &ZHamiltonian) -> Result<()> {
    if n != h.n_qubits() {
        return Err(Error::SizeMismatch {
            expected: h.n_qubits(),
            got: n,
        });
    }
    Ok(())
}

/// Exact `(D, E)` from amplitudes.
pub fn assemble_d(sv: &Statevector, h: &ZHamiltonian) -> Result<(Vec<f64>, f64)> {
    check_dims(sv.n_qubits(), h)?;
    let masks: Vec<usize> = h.masks().into_iter().map(|m| m as usize).collect();
    Ok(d_from_distribution(&sv.probabilities(), &h.diagonal(), &masks))
}

/// `(D, E)` estimated from one histogram, with `E` the sample-mean energy.
pub fn assemble_d_sampled(samples: &SampleSet, h: &ZHamiltonian) -> Result<(Vec<f64>, f64)> {
    check_dims(samples.n, h)?;
    let masks: Vec<usize> = h.masks().into_iter().map(|m| m as usize).collect();
    Ok(d_from_distribution(&samples.distribution(), &h.diagonal(), &masks))
}

/// Parameter-shift matrix `G` (terms x parameters) at step 0 of `seed`.
pub fn assemble_g(ans: &Ansatz, theta: &[f64], h: &ZHamiltonian, shots: u64, seed: u64) -> Result<Matrix> {
    check_dims(ans.n_qubits, h)?;
    let mut engine = Engine::new(ans, h, shots, seed)?;
    engine.gradient(theta, 0)
}

/// Evaluation machinery shared by the stepping loop and the free functions.
/// Counts every state preparation.
pub struct Engine<'a> {
    ans: &'a Ansatz,
    masks: Vec<usize>,
    diag: Vec<f64>,
    shots: u64,
    seed: u64,
    preparations: u64,
}

impl<'a> Engine<'a> {
    pub fn new(ans: &'a Ansatz, h: &ZHamiltonian, shots: u64, seed: u64) -> Result<Self> {
        check_dims(ans.n_qubits, h)?;
        ans.validate()?;
        Ok(Self {
            ans,
            masks: h.masks().into_iter().map(|m| m as usize).collect(),
            diag: h.diagonal(),
            shots,
            seed,
            preparations: 0,
        })
    }

    pub fn preparations(&self) -> u64 {
        self.preparations
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.ans.n_params() {
            return Err(Error::SizeMismatch {
                expected: self.ans.n_params(),
                got: theta.len(),
            });
        }
        Ok(())
    }

    pub fn prepare(&mut self, theta: &[f64]) -> Result<Statevector> {
        self.check_theta(theta)?;
        self.preparations += 1;
        let mut sv = initial_state(self.ans.n_qubits)?;
        sv.apply_gates(&self.ans.gates, theta)?;
        Ok(sv)
    }

    /// Term expectations of one prepared state, sampled or exact.
    fn term_expectations(&self, sv: &Statevector, step: usize, circuit: usize) -> Result<Vec<f64>> {
        let mut p = sv.probabilities();
        if self.shots > 0 {
            let mut r = rng::stream(self.seed, step_stream(step, circuit));
            p = sample_probabilities(&p, sv.n_qubits(), self.shots, &mut r)?.distribution();
        }
        walsh_hadamard(&mut p);
        Ok(self.masks.iter().map(|&m| p[m]).collect())
    }

    /// Column `j` is `(<P>(theta + pi/2 e_j) - <P>(theta - pi/2 e_j)) / 4`.
    /// Shifted circuits share the unshifted prefix state, but each still
    /// counts as one preparation.
    pub fn gradient(&mut self, theta: &[f64], step: usize) -> Result<Matrix> {
        self.check_theta(theta)?;
        let m = self.ans.n_params();
        let gates = &self.ans.gates;
        let mut g = Matrix::zeros(self.masks.len(), m);
        let mut prefix = initial_state(self.ans.n_qubits)?;
        let shift = std::f64::consts::FRAC_PI_2;
        for (j, gate) in gates.iter().enumerate() {
            let mut cols = [Vec::new(), Vec::new()];
            for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
                let mut sv = prefix.clone();
                sv.apply_rzy(gate.a, gate.b, theta[gate.param] + sign * shift)?;
                sv.apply_gates(&gates[j + 1..], theta)?;
                self.preparations += 1;
                cols[k] = self.term_expectations(&sv, step, 1 + 2 * j + k)?;
            }
            let col: Vec<f64> = cols[0].iter().zip(&cols[1]).map(|(p, q)| 0.25 * (p - q)).collect();
            g.set_column(j, &col);
            prefix.apply_rzy(gate.a, gate.b, theta[gate.param])?;
        }
        Ok(g)
    }
}

/// Running best-sample bookkeeping.
struct Best {
    any: Option<(f64, Bitstring)>,
    balanced: Option<(f64, Bitstring)>,
}

impl Best {
    fn update(&mut self, q: &QuboProblem, diag: &[f64], samples: &SampleSet) -> Result<()> {
        for (bits, _) in samples.iter() {
            let e = diag[bits.to_index() as usize];
            if self.any.as_ref().is_none_or(|(b, _)| e < *b) {
                self.any = Some((e, bits.clone()));
            }
            if self.balanced.as_ref().is_none_or(|(b, _)| e < *b)
                && Partition::new(q.graph(), bits.clone())?.is_balanced(q.nu())
            {
                self.balanced = Some((e, bits.clone()));
            }
        }
        Ok(())
    }
}

/// `(best, mean, p10, p90)` of the sampled energies.
fn sample_stats(diag: &[f64], samples: &SampleSet) -> (f64, f64, f64, f64) {
    let mut es: Vec<(f64, u64)> = samples
        .iter()
        .map(|(b, c)| (diag[b.to_index() as usize], c))
        .collect();
    es.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total = samples.shots as f64;
    let mean = es.iter().map(|(e, c)| e * *c as f64).sum::<f64>() / total;
    let quantile = |q: f64| {
        // nearest rank
        let rank = ((q * total).ceil() as u64).max(1);
        let mut seen = 0;
        for &(e, c) in &es {
            seen += c;
            if seen >= rank {
                return e;
            }
        }
        es.last().map_or(f64::NAN, |x| x.0)
    };
    (es[0].0, mean, quantile(0.1), quantile(0.9))
}

/// Runs the evolution from `theta = 0`.
pub fn run_varqite(q: &QuboProblem, ans: &Ansatz, cfg: &VarqiteConfig) -> Result<VarqiteOutcome> {
    cfg.validate()?;
    if ans.n_qubits != q.n() {
        return Err(Error::SizeMismatch {
            expected: q.n(),
            got: ans.n_qubits,
        });
    }
    let h = q.to_hamiltonian();
    let mut engine = Engine::new(ans, &h, cfg.shots, cfg.seed)?;
    let scale = if cfg.normalize { energy_scale(&h) } else { 1.0 };
    let n = q.n();
    let m = ans.n_params();
    let mut theta = vec![0.0; m];
    let mut trace = ConvergenceTrace::default();
    let mut best = Best { any: None, balanced: None };
    let mut energy = f64::NAN;
    let mut steps_done = 0;

    for step in 0..cfg.max_steps {
        let sv = engine.prepare(&theta)?;
        let probs = sv.probabilities();
        let (d, e, samples) = if cfg.shots > 0 {
            let mut r = rng::stream(cfg.seed, step_stream(step, 0));
            let samples = sample_probabilities(&probs, n, cfg.shots, &mut r)?;
            let (d, e) = d_from_distribution(&samples.distribution(), &engine.diag, &engine.masks);
            (d, e, samples)
        } else {
            let (d, e) = d_from_distribution(&probs, &engine.diag, &engine.masks);
            let mut r = rng::stream(cfg.seed, step_stream(step, DIAGNOSTIC_CIRCUIT));
            (d, e, sample_probabilities(&probs, n, cfg.sample_shots, &mut r)?)
        };
        energy = e;
        best.update(q, &engine.diag, &samples)?;

        let g = engine.gradient(&theta, step)?;
        let d_scaled: Vec<f64> = d.iter().map(|x| x / scale).collect();
        let theta_dot = solve_step(&g, &d_scaled, cfg.ridge)?;
        let theta_dot_norm = theta_dot.iter().map(|x| x * x).sum::<f64>().sqrt();

        let is_last = step + 1 == cfg.max_steps;
        let record = || {
            let exact_energy = probs.iter().zip(&engine.diag).map(|(p, c)| p * c).sum();
            let (best_sample, mean_sample, p10, p90) = sample_stats(&engine.diag, &samples);
            let (bsf, bsf_bits) = best.any.clone().expect("at least one sample");
            TraceRecord {
                step,
                tau: step as f64 * cfg.d_tau,
                energy: e,
                exact_energy,
                best_sample,
                mean_sample,
                p10,
                p90,
                best_so_far: bsf,
                best_so_far_bits: bsf_bits,
                best_balanced_so_far: best.balanced.as_ref().map(|b| b.0),
                rel_error_best: cfg.c_star.map(|c| relative_error(bsf, c)),
                rel_error_mean: cfg.c_star.map(|c| relative_error(mean_sample, c)),
                theta_dot_norm,
            }
        };
        let reached = cfg.early_stop
            && match (cfg.c_star, &best.balanced) {
                (Some(c), Some((b, _))) => *b <= c + 1e-9 * c.abs().max(1.0),
                _ => false,
            };

        if theta_dot.iter().any(|x| !x.is_finite()) {
            trace.records.push(record());
            return Err(Error::NonFinite {
                step,
                trace: Box::new(trace),
            });
        }
        if step % cfg.record_every == 0 || is_last || reached {
            trace.records.push(record());
        }
        steps_done = step + 1;
        if reached {
            break;
        }
        for (t, dt) in theta.iter_mut().zip(&theta_dot) {
            *t += cfg.d_tau * dt;
        }
    }

    let sv = engine.prepare(&theta)?;
    let probs = sv.probabilities();
    if steps_done == 0 {
        energy = probs.iter().zip(&engine.diag).map(|(p, c)| p * c).sum();
    }
    let mut r = rng::stream(cfg.seed, step_stream(cfg.max_steps, 0));
    let samples = sample_probabilities(&probs, n, cfg.final_shots(), &mut r)?;
    best.update(q, &engine.diag, &samples)?;

    let (best_energy, bits, best_is_balanced) = match (best.balanced, best.any) {
        (Some((e, b)), _) => (e, b, true),
        (None, Some((e, b))) => (e, b, false),
        (None, None) => unreachable!("final sample is never empty"),
    };
    Ok(VarqiteOutcome {
        samples,
        trace,
        best: Partition::new(q.graph(), bits)?,
        best_energy,
        best_is_balanced,
        state: VarqiteState {
            theta,
            step: steps_done,
            energy,
        },
        energy_scale: scale,
        preparations: engine.preparations(),
    })
}
