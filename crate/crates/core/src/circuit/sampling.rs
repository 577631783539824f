use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::statevector::Statevector;
use crate::error::{invalid, Result};
use crate::qubo::Bitstring;
use crate::rng::{self, Rng};

/// Measurement histogram. Serializes as `{n, shots, counts: {bitstring: count}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub n: usize,
    pub shots: u64,
    pub counts: BTreeMap<Bitstring, u64>,
}

impl SampleSet {
    /// Builds a histogram from per-basis-index counts.
    pub fn from_index_counts(n: usize, counts: &[u64]) -> Self {
        let mut map = BTreeMap::new();
        let mut shots = 0;
        for (idx, &c) in counts.iter().enumerate() {
            if c > 0 {
                map.insert(Bitstring::from_index(idx as u64, n), c);
                shots += c;
            }
        }
        Self { n, shots, counts: map }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Bitstring, u64)> {
        self.counts.iter().map(|(b, &c)| (b, c))
    }

    pub fn count(&self, x: &Bitstring) -> u64 {
        self.counts.get(x).copied().unwrap_or(0)
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Empirical distribution over all `2^n` basis indices.
    pub fn distribution(&self) -> Vec<f64> {
        let mut p = vec![0.0; 1usize << self.n];
        let total = self.shots.max(1) as f64;
        for (b, &c) in &self.counts {
            p[b.to_index() as usize] = c as f64 / total;
        }
        p
    }
}

/// Multinomial draw of `shots` outcomes from a probability vector of length `2^n`.
pub fn sample_probabilities(probs: &[f64], n: usize, shots: u64, rng: &mut Rng) -> Result<SampleSet> {
    if shots == 0 {
        return Err(invalid("shots must be at least 1"));
    }
    if probs.len() != 1usize << n {
        return Err(invalid("probability vector does not match the register size"));
    }
    let dist = WeightedIndex::new(probs).map_err(|e| invalid(format!("cannot sample: {e}")))?;
    let mut counts = vec![0u64; probs.len()];
    for _ in 0..shots {
        counts[dist.sample(rng)] += 1;
    }
    Ok(SampleSet::from_index_counts(n, &counts))
}

/// Seeded measurement of every qubit, `shots` times.
pub fn sample(sv: &Statevector, shots: u64, seed: u64) -> Result<SampleSet> {
    let mut rng = rng::seeded(seed);
    sample_probabilities(&sv.probabilities(), sv.n_qubits(), shots, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::initial_state;

    #[test]
    fn basis_state_is_deterministic() {
        let sv = Statevector::basis(3, 5).unwrap();
        let s = sample(&sv, 100, 1).unwrap();
        assert_eq!(s.shots, 100);
        assert_eq!(s.distinct(), 1);
        assert_eq!(s.count(&"101".parse().unwrap()), 100);
    }

    #[test]
    fn uniform_two_qubits_within_three_sigma() {
        let s = sample(&initial_state(2).unwrap(), 100_000, 42).unwrap();
        assert_eq!(s.counts.values().sum::<u64>(), 100_000);
        // binomial sd = sqrt(1e5 * 0.25 * 0.75) ~ 137
        for (_, c) in s.iter() {
            assert!((c as f64 - 25_000.0).abs() < 3.0 * 137.0, "count {c}");
        }
    }

    #[test]
    fn uniform_chi_square() {
        let n = 4;
        let shots = 10_000u64;
        let s = sample(&initial_state(n).unwrap(), shots, 7).unwrap();
        let expected = shots as f64 / 16.0;
        let chi2: f64 = (0..16u64)
            .map(|i| {
                let o = s.count(&Bitstring::from_index(i, n)) as f64;
                (o - expected).powi(2) / expected
            })
            .sum();
        // 15 degrees of freedom, 0.999 quantile is 37.7
        assert!(chi2 < 37.7, "chi2 = {chi2}");
    }

    #[test]
    fn seeded_repeatability() {
        let sv = initial_state(5).unwrap();
        assert_eq!(sample(&sv, 500, 3).unwrap(), sample(&sv, 500, 3).unwrap());
        assert_ne!(sample(&sv, 500, 3).unwrap(), sample(&sv, 500, 4).unwrap());
        assert!(sample(&sv, 0, 3).is_err());
    }

    #[test]
    fn json_round_trip() {
        let s = sample(&initial_state(3).unwrap(), 50, 0).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["shots"], 50);
        assert!(v["counts"].as_object().unwrap().keys().all(|k| k.len() == 3));
        let back: SampleSet = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
        let p = back.distribution();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
