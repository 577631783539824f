mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use qdissect::circuit::{build_heavy_neighbors_ansatz, prepare, sample, Ansatz, AnsatzPreset};
use qdissect::qubo::QuboProblem;
use qdissect::varqite::{assemble_g, run_varqite, Engine, VarqiteConfig, TRACE_SCHEMA};

use common::{dense_expectations, finite_difference_g, random_connected_graph};

fn random_ansatz(n: usize, seed: u64) -> (QuboProblem, Ansatz) {
    let g = random_connected_graph(n, 0.4, seed);
    let budgets = [g.n_edges().min(8), 6];
    let ans = build_heavy_neighbors_ansatz(&g, 2, &budgets).unwrap();
    (QuboProblem::with_default_lambda(g, 0.05).unwrap(), ans)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ansatz_pairs_are_distinct_and_within_budget(n in 3usize..10, seed: u64, g0 in 1usize..12, g1 in 1usize..12) {
        let g = random_connected_graph(n, 0.3, seed);
        let budgets = [g0, g1];
        match build_heavy_neighbors_ansatz(&g, 2, &budgets) {
            Ok(ans) => {
                ans.validate().unwrap();
                let counts = ans.layer_gate_counts();
                prop_assert!(counts[0] <= g0 && counts[1] <= g1);
                let pairs: BTreeSet<(usize, usize)> = ans.gates.iter().map(|gt| (gt.a.min(gt.b), gt.a.max(gt.b))).collect();
                prop_assert_eq!(pairs.len(), ans.gates.len());
                // layer 0 only uses graph edges
                for gt in ans.gates.iter().filter(|gt| gt.layer == 0) {
                    prop_assert!(g.edge_weight(gt.a, gt.b).is_some());
                }
            }
            Err(e) => prop_assert!(matches!(e, qdissect::Error::InvalidArgument(_)), "{e}"),
        }
    }

    #[test]
    fn evolution_preserves_norm(seed: u64, n in 2usize..9) {
        let g = random_connected_graph(n, 0.5, seed);
        let ans = AnsatzPreset::Full2Layer.build(&g).unwrap();
        let mut rng = qdissect::rng::seeded(seed);
        let theta: Vec<f64> = (0..ans.n_params()).map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0)).collect();
        let sv = prepare(&ans, &theta).unwrap();
        prop_assert!((sv.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sample_counts_add_up(seed: u64, shots in 1u64..3000) {
        let g = random_connected_graph(5, 0.5, seed);
        let ans = AnsatzPreset::Full2Layer.build(&g).unwrap();
        let theta = vec![0.3; ans.n_params()];
        let s = sample(&prepare(&ans, &theta).unwrap(), shots, seed).unwrap();
        prop_assert_eq!(s.iter().map(|(_, c)| c).sum::<u64>(), shots);
        prop_assert_eq!(s.shots, shots);
    }
}

#[test]
fn parameter_shift_matches_finite_differences() {
    for seed in 0..20 {
        let (q, ans) = random_ansatz(6, seed);
        let h = q.to_hamiltonian();
        let mut rng = qdissect::rng::seeded(seed + 100);
        let theta: Vec<f64> = (0..ans.n_params()).map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0)).collect();
        let g = assemble_g(&ans, &theta, &h, 0, 0).unwrap();
        let fd = finite_difference_g(&ans, &theta, &h, 1e-5);
        for (a, row) in fd.iter().enumerate() {
            for (j, want) in row.iter().enumerate() {
                assert!((g[(a, j)] - want).abs() <= 1e-6, "seed {seed} entry ({a},{j}): {} vs {want}", g[(a, j)]);
            }
        }
    }
}

#[test]
fn expectations_agree_with_dense_sum() {
    let (q, ans) = random_ansatz(7, 3);
    let h = q.to_hamiltonian();
    let theta: Vec<f64> = (0..ans.n_params()).map(|i| 0.1 * i as f64 - 0.4).collect();
    let sv = prepare(&ans, &theta).unwrap();
    let (fast, energy) = qdissect::circuit::expect_z_terms(&sv, &h).unwrap();
    let dense = dense_expectations(&sv, &h);
    for (a, b) in fast.iter().zip(&dense) {
        assert!((a - b).abs() < 1e-12);
    }
    let direct: f64 = h.constant + h.terms.iter().zip(&dense).map(|(t, e)| t.coeff * e).sum::<f64>();
    assert!((energy - direct).abs() < 1e-9);
}

#[test]
fn one_step_prepares_two_m_plus_one_states() {
    let (q, ans) = random_ansatz(6, 1);
    let h = q.to_hamiltonian();
    let m = ans.n_params() as u64;
    let mut engine = Engine::new(&ans, &h, 0, 0).unwrap();
    let theta = vec![0.2; ans.n_params()];
    engine.prepare(&theta).unwrap();
    engine.gradient(&theta, 0).unwrap();
    assert_eq!(engine.preparations(), 2 * m + 1);
}

#[test]
fn trace_lines_carry_the_schema() {
    let (q, ans) = random_ansatz(5, 2);
    let cfg = VarqiteConfig {
        max_steps: 5,
        ..Default::default()
    };
    let out = run_varqite(&q, &ans, &cfg).unwrap();
    let text = out.trace.to_jsonl();
    assert_eq!(text.lines().count(), 5);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["schema"], TRACE_SCHEMA);
        assert!(v["energy"].is_number());
    }
}

#[test]
fn ring8_finds_the_antipodal_cut_with_sampled_expectations() {
    let g = qdissect::graph::ring_graph(8).unwrap();
    let q = QuboProblem::with_default_lambda(g.clone(), 0.05).unwrap();
    let ans = AnsatzPreset::Full2Layer.build(&g).unwrap();
    let cfg = VarqiteConfig {
        shots: 2000,
        max_steps: 60,
        seed: 7,
        ..Default::default()
    };
    let out = run_varqite(&q, &ans, &cfg).unwrap();
    assert!(out.best_is_balanced);
    assert_eq!(out.best.cut_weight(), 2.0);
    for w in out.trace.records.windows(2) {
        assert!(w[1].best_so_far <= w[0].best_so_far);
    }
}
