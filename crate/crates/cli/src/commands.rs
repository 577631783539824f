//! The `partition`, `dissect`, `compare` and `exact` commands.

use std::fs;

use anyhow::{Context, Result};
use qdissect::circuit::SampleSet;
use qdissect::dissect::{
    evaluate_partition_merit, nested_dissection, symbolic_factorize, Bipartitioner, DissectionConfig, DissectionTree,
    ExactPartitioner, FmBaseline, MeritFactors, Permutation, SplitContext, SymmetricPattern, VarqitePartitioner,
};
use qdissect::graph::{coarsen, project_partition, CoarseningMap};
use qdissect::qubo::{exact_solve, Bitstring, Partition, QuboProblem};
use qdissect::refine::fm_refine;
use qdissect::varqite::{run_varqite, VarqiteConfig};
use qdissect::{rng, Error, WeightedGraph};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, PartitionerKind};
use crate::manifest::Run;

pub const PARTITION_SCHEMA: &str = "qdissect.partition/1";
pub const HISTOGRAM_SCHEMA: &str = "qdissect.histogram/1";
pub const TREE_SCHEMA: &str = "qdissect.tree/1";
pub const MERIT_SCHEMA: &str = "qdissect.merit/1";
pub const COMPARE_SCHEMA: &str = "qdissect.compare/1";
pub const EXACT_SCHEMA: &str = "qdissect.exact/1";

/// Largest coarse graph for which `partition` enumerates C* for the trace.
const TRACE_EXACT_MAX: usize = 20;

/// Runs `body` and writes the manifest whether or not it succeeds.
fn with_run(command: &str, cfg: &ExperimentConfig, body: impl FnOnce(&mut Run) -> Result<()>) -> Result<()> {
    let mut run = Run::new(command, cfg)?;
    let result = body(&mut run);
    run.finish()?;
    result
}

pub fn execute(command: &str, cfg: &ExperimentConfig) -> Result<()> {
    match command {
        "partition" => partition(cfg),
        "dissect" => dissect(cfg),
        "compare" => compare(cfg),
        "exact" => exact(cfg),
        other => Err(crate::config::usage(format!("unknown command '{other}'"))),
    }
}

fn load(run: &mut Run, cfg: &ExperimentConfig) -> Result<WeightedGraph> {
    let path = cfg.input()?.to_path_buf();
    let format = cfg.graph_format()?;
    run.stage("load", || {
        let g = qdissect::graph::load_graph(&path, format).with_context(|| format!("reading {}", path.display()))?;
        log::info!("loaded {} vertices, {} edges", g.n(), g.n_edges());
        Ok(g)
    })
    .and_then(|g| {
        run.record_input(&path)?;
        Ok(g)
    })
}

fn coarsen_to(g: &WeightedGraph, target: usize, seed: u64) -> Result<CoarseningMap> {
    if g.n() <= target {
        return Ok(CoarseningMap::identity(g));
    }
    let map = coarsen(g, target, seed)?;
    if !map.reached_target {
        log::warn!(
            "coarsening stalled at {} vertices above the target {target}",
            map.coarsest().n()
        );
    }
    Ok(map)
}

fn qubo_for(g: &WeightedGraph, cfg: &ExperimentConfig) -> Result<QuboProblem> {
    Ok(match cfg.lambda {
        Some(l) => QuboProblem::new(g.clone(), l, cfg.nu)?,
        None => QuboProblem::with_default_lambda(g.clone(), cfg.nu)?,
    })
}

#[derive(Serialize)]
struct PartitionSummary {
    bits: Bitstring,
    cut_weight: f64,
    side_weights: [u64; 2],
    imbalance: f64,
    balanced: bool,
}

impl PartitionSummary {
    fn new(p: &Partition, nu: f64) -> Self {
        Self {
            bits: p.bits().clone(),
            cut_weight: p.cut_weight(),
            side_weights: p.side_weights(),
            imbalance: p.imbalance(),
            balanced: p.is_balanced(nu),
        }
    }
}

#[derive(Serialize)]
struct CoarseSummary {
    n: usize,
    lambda: f64,
    c_star: Option<f64>,
    best_energy: f64,
    partition: PartitionSummary,
}

#[derive(Serialize)]
struct PartitionReport {
    schema: &'static str,
    n: usize,
    nu: f64,
    n_params: usize,
    steps: usize,
    preparations: u64,
    energy_scale: f64,
    coarse: CoarseSummary,
    projected: PartitionSummary,
    refined: Option<PartitionSummary>,
}

#[derive(Serialize)]
struct HistogramEntry {
    bits: Bitstring,
    count: u64,
    energy: f64,
    cut_weight: f64,
    balanced: bool,
}

#[derive(Serialize)]
struct Histogram {
    schema: &'static str,
    n: usize,
    shots: u64,
    entries: Vec<HistogramEntry>,
}

fn histogram(q: &QuboProblem, samples: &SampleSet) -> Result<Histogram> {
    let mut entries = Vec::with_capacity(samples.distinct());
    for (bits, count) in samples.iter() {
        let p = Partition::new(q.graph(), bits.clone())?;
        entries.push(HistogramEntry {
            bits: bits.clone(),
            count,
            energy: q.energy(bits)?,
            cut_weight: p.cut_weight(),
            balanced: p.is_balanced(q.nu()),
        });
    }
    entries.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.bits.cmp(&b.bits)));
    Ok(Histogram {
        schema: HISTOGRAM_SCHEMA,
        n: samples.n,
        shots: samples.shots,
        entries,
    })
}

pub fn partition(cfg: &ExperimentConfig) -> Result<()> {
    with_run("partition", cfg, |run| {
        let g = load(run, cfg)?;
        let map = run.stage("coarsen", || coarsen_to(&g, cfg.coarse_target, cfg.seed))?;
        let coarse = map.coarsest().clone();
        let q = run.stage("qubo", || qubo_for(&coarse, cfg))?;
        let c_star = if coarse.n() <= TRACE_EXACT_MAX {
            Some(run.stage("exact", || Ok(exact_solve(&q)?.c_star))?)
        } else {
            None
        };
        let preset = cfg.ansatz_for(&coarse);
        let ans = run.stage("ansatz", || Ok(preset.build(&coarse)?))?;
        let vcfg = VarqiteConfig {
            c_star,
            ..cfg.seeded_varqite()
        };
        let out = match run.stage("varqite", || Ok(run_varqite(&q, &ans, &vcfg)?)) {
            Ok(out) => out,
            Err(e) => {
                if let Some(Error::NonFinite { trace, .. }) = e.downcast_ref::<Error>() {
                    run.write("trace.jsonl", trace.to_jsonl().as_bytes())?;
                }
                return Err(e);
            }
        };
        let projected = run.stage("project", || Ok(project_partition(&map, &out.best)?))?;
        let refined = if cfg.refine {
            let fm = cfg.seeded_fm();
            Some(run.stage("refine", || Ok(fm_refine(&g, &projected, &fm)?))?)
        } else {
            None
        };
        let report = PartitionReport {
            schema: PARTITION_SCHEMA,
            n: g.n(),
            nu: cfg.nu,
            n_params: ans.n_params(),
            steps: out.state.step,
            preparations: out.preparations,
            energy_scale: out.energy_scale,
            coarse: CoarseSummary {
                n: coarse.n(),
                lambda: q.lambda(),
                c_star,
                best_energy: out.best_energy,
                partition: PartitionSummary::new(&out.best, cfg.nu),
            },
            projected: PartitionSummary::new(&projected, cfg.nu),
            refined: refined.as_ref().map(|p| PartitionSummary::new(p, cfg.nu)),
        };
        let hist = histogram(&q, &out.samples)?;
        run.write_json("partition.json", &report)?;
        run.write("trace.jsonl", out.trace.to_jsonl().as_bytes())?;
        run.write_json("histogram.json", &hist)
    })
}

/// VarQITE partitioner whose ansatz budgets are resolved per subgraph.
struct LayeredVarqite<'a> {
    cfg: &'a ExperimentConfig,
    refine: bool,
}

impl Bipartitioner for LayeredVarqite<'_> {
    fn name(&self) -> &'static str {
        if self.refine {
            "varqite-fm"
        } else {
            "varqite"
        }
    }

    fn bipartition(&self, g: &WeightedGraph, ctx: &SplitContext) -> qdissect::Result<Bitstring> {
        let inner = VarqitePartitioner {
            lambda: self.cfg.lambda,
            nu: self.cfg.nu,
            ansatz: self.cfg.ansatz_for(g),
            varqite: self.cfg.varqite.clone(),
            refine: self.refine.then(|| self.cfg.seeded_fm()),
        };
        inner.bipartition(g, ctx)
    }
}

fn partitioner(cfg: &ExperimentConfig) -> Box<dyn Bipartitioner + '_> {
    match cfg.partitioner {
        PartitionerKind::Varqite => Box::new(LayeredVarqite { cfg, refine: false }),
        PartitionerKind::VarqiteFm => Box::new(LayeredVarqite { cfg, refine: true }),
        PartitionerKind::Exact => Box::new(ExactPartitioner {
            lambda: cfg.lambda,
            nu: cfg.nu,
        }),
        PartitionerKind::FmBaseline | PartitionerKind::ExternalBitstring => Box::new(FmBaseline {
            nu: cfg.nu,
            fm: cfg.seeded_fm(),
        }),
    }
}

#[derive(Serialize)]
struct MeritRow<'a> {
    schema: &'static str,
    instance: &'a str,
    ordering: &'static str,
    partitioner: &'a str,
    levels: usize,
    coarse_target: usize,
    n: usize,
    nnz_factor: u64,
    ops: u64,
    /// Root split; empty for the natural ordering.
    cut_weight: Option<f64>,
    imbalance: Option<f64>,
}

#[derive(Serialize)]
struct TreeReport<'a> {
    schema: &'static str,
    partitioner: &'a str,
    #[serde(flatten)]
    tree: &'a DissectionTree,
}

fn read_root_split(cfg: &ExperimentConfig, n: usize) -> Result<Option<Bitstring>> {
    let Some(path) = &cfg.root_split else {
        return Ok(None);
    };
    let text = fs::read_to_string(path).with_context(|| format!("cannot read root split {}", path.display()))?;
    let bits: Bitstring = text.trim().parse().with_context(|| format!("invalid root split in {}", path.display()))?;
    if bits.len() != n {
        anyhow::bail!("root split has {} bits but the graph has {n} vertices", bits.len());
    }
    Ok(Some(bits))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

pub fn dissect(cfg: &ExperimentConfig) -> Result<()> {
    with_run("dissect", cfg, |run| {
        let g = load(run, cfg)?;
        let root_split = run.stage("root-split", || read_root_split(cfg, g.n()))?;
        if let Some(path) = &cfg.root_split {
            run.record_input(path)?;
        }
        let dcfg = DissectionConfig {
            coarse_target: cfg.coarse_target,
            seed: cfg.seed,
            root_split,
        };
        let part = partitioner(cfg);
        let (tree, perm) = run.stage("dissect", || {
            let (tree, perm) = nested_dissection(&g, cfg.levels, part.as_ref(), &dcfg)?;
            tree.verify(&g)?;
            Ok((tree, perm))
        })?;
        let pattern = SymmetricPattern::from_graph(&g);
        let (nd, natural) = run.stage("symbolic", || {
            Ok((
                symbolic_factorize(&pattern, &perm)?,
                symbolic_factorize(&pattern, &Permutation::identity(g.n()))?,
            ))
        })?;
        let name = match cfg.partitioner {
            PartitionerKind::ExternalBitstring => "external-bitstring",
            _ => part.name(),
        };
        let instance = cfg
            .input()?
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let root = tree.root();
        let split = root.children.is_some().then_some((root.cut_weight, root.imbalance));
        let row = |ordering, m: MeritFactors, split: Option<(f64, f64)>| MeritRow {
            schema: MERIT_SCHEMA,
            instance: &instance,
            ordering,
            partitioner: name,
            levels: cfg.levels,
            coarse_target: cfg.coarse_target,
            n: g.n(),
            nnz_factor: m.nnz_factor,
            ops: m.ops,
            cut_weight: split.map(|s| s.0),
            imbalance: split.map(|s| s.1),
        };
        let rows = [row("nested-dissection", nd, split), row("natural", natural, None)];
        log::info!("nested dissection ops {} (natural {})", nd.ops, natural.ops);
        run.write("permutation.txt", perm.to_text().as_bytes())?;
        run.write("permutation.mtx", perm.to_matrix_market().as_bytes())?;
        run.write("merit.csv", &csv_bytes(&rows)?)?;
        run.write_json(
            "tree.json",
            &TreeReport {
                schema: TREE_SCHEMA,
                partitioner: name,
                tree: &tree,
            },
        )
    })
}

#[derive(Debug, Clone, Serialize)]
struct CompareRow {
    schema: &'static str,
    coarse_target: usize,
    coarse_n: usize,
    seed: u64,
    method: &'static str,
    rank: usize,
    ops: u64,
    nnz_factor: u64,
    cut_weight: f64,
    imbalance: f64,
    balanced: bool,
    /// Unbalanced candidates are reported, not dropped.
    flagged: bool,
}

#[derive(Serialize)]
struct Spread {
    mean: f64,
    variance: f64,
}

impl Spread {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
        Some(Self { mean, variance })
    }
}

#[derive(Serialize)]
struct ComparePoint {
    coarse_target: usize,
    seeds: u64,
    /// Ops of the top-ranked VarQITE candidate across seeds.
    varqite_best_ops: Option<Spread>,
    baseline_ops: Option<Spread>,
    /// Seeds whose VarQITE candidates were all unbalanced.
    unbalanced_seeds: u64,
}

#[derive(Serialize)]
struct CompareReport {
    schema: &'static str,
    n: usize,
    levels: usize,
    points: Vec<ComparePoint>,
}

fn compare_point(
    g: &WeightedGraph,
    pattern: &SymmetricPattern,
    cfg: &ExperimentConfig,
    target: usize,
    seed: u64,
) -> Result<Vec<CompareRow>> {
    let map = coarsen_to(g, target, seed)?;
    let coarse = map.coarsest();
    let point = ExperimentConfig {
        seed,
        ..cfg.clone()
    };
    let q = qubo_for(coarse, &point)?;
    let ans = point.ansatz_for(coarse).build(coarse)?;
    let out = run_varqite(&q, &ans, &point.seeded_varqite())?;

    let mut scored: Vec<(f64, &Bitstring)> = out
        .samples
        .iter()
        .map(|(b, _)| Ok((q.energy(b)?, b)))
        .collect::<qdissect::Result<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let mut candidates: Vec<Bitstring> = Vec::new();
    for (_, b) in scored.into_iter().take(cfg.compare.pool) {
        let fine = project_partition(&map, &Partition::new(coarse, b.clone())?)?.into_bits();
        if !candidates.contains(&fine) {
            candidates.push(fine);
        }
    }
    let dcfg = DissectionConfig {
        coarse_target: target,
        seed,
        root_split: None,
    };
    let ranked = evaluate_partition_merit(g, pattern, &candidates, cfg.levels, cfg.nu, &dcfg)?;
    let row = |method, rank, m: MeritFactors, cut, imbalance, balanced| CompareRow {
        schema: COMPARE_SCHEMA,
        coarse_target: target,
        coarse_n: coarse.n(),
        seed,
        method,
        rank,
        ops: m.ops,
        nnz_factor: m.nnz_factor,
        cut_weight: cut,
        imbalance,
        balanced,
        flagged: !balanced,
    };
    let mut rows: Vec<CompareRow> = ranked
        .iter()
        .take(cfg.compare.candidates)
        .enumerate()
        .map(|(i, c)| row("varqite", i + 1, c.merit, c.cut_weight, c.imbalance, c.balanced))
        .collect();

    let baseline = FmBaseline {
        nu: cfg.nu,
        fm: point.seeded_fm(),
    };
    let (tree, perm) = nested_dissection(g, cfg.levels, &baseline, &dcfg)?;
    let merit = symbolic_factorize(pattern, &perm)?;
    let root = tree.root();
    let (cut, imbalance) = (root.cut_weight, root.imbalance);
    // heavier side <= (1/2 + nu) of the total
    let balanced = root.split.is_none() || imbalance <= 2.0 * cfg.nu + 1e-9;
    rows.push(row("baseline", 1, merit, cut, imbalance, balanced));
    Ok(rows)
}

pub fn compare(cfg: &ExperimentConfig) -> Result<()> {
    with_run("compare", cfg, |run| {
        let g = load(run, cfg)?;
        let pattern = SymmetricPattern::from_graph(&g);
        let points: Vec<(usize, u64)> = cfg
            .compare
            .targets
            .iter()
            .flat_map(|&t| (0..cfg.compare.seeds).map(move |s| (t, rng::derive(cfg.seed, s))))
            .collect();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.jobs).build()?;
        let rows: Vec<CompareRow> = run.stage("sweep", || {
            let per_point: Vec<Vec<CompareRow>> = pool.install(|| {
                points
                    .par_iter()
                    .map(|&(t, s)| {
                        compare_point(&g, &pattern, cfg, t, s).with_context(|| format!("coarse target {t}, seed {s}"))
                    })
                    .collect::<Result<_>>()
            })?;
            Ok(per_point.into_iter().flatten().collect())
        })?;

        let mut summary = Vec::new();
        for &t in &cfg.compare.targets {
            let at: Vec<&CompareRow> = rows.iter().filter(|r| r.coarse_target == t).collect();
            let ops = |method: &str| -> Vec<f64> {
                at.iter()
                    .filter(|r| r.method == method && r.rank == 1)
                    .map(|r| r.ops as f64)
                    .collect()
            };
            let unbalanced = at
                .iter()
                .filter(|r| r.method == "varqite" && r.rank == 1 && r.flagged)
                .count() as u64;
            summary.push(ComparePoint {
                coarse_target: t,
                seeds: cfg.compare.seeds,
                varqite_best_ops: Spread::of(&ops("varqite")),
                baseline_ops: Spread::of(&ops("baseline")),
                unbalanced_seeds: unbalanced,
            });
        }
        run.write("compare.csv", &csv_bytes(&rows)?)?;
        run.write_json(
            "compare.json",
            &CompareReport {
                schema: COMPARE_SCHEMA,
                n: g.n(),
                levels: cfg.levels,
                points: summary,
            },
        )
    })
}

#[derive(Serialize)]
struct ExactReport {
    schema: &'static str,
    n: usize,
    coarse_n: usize,
    lambda: f64,
    nu: f64,
    c_star: f64,
    optima: Vec<PartitionSummary>,
}

pub fn exact(cfg: &ExperimentConfig) -> Result<()> {
    with_run("exact", cfg, |run| {
        let g = load(run, cfg)?;
        let map = run.stage("coarsen", || coarsen_to(&g, cfg.coarse_target, cfg.seed))?;
        let coarse = map.coarsest();
        let q = run.stage("qubo", || qubo_for(coarse, cfg))?;
        let sol = run.stage("exact", || Ok(exact_solve(&q)?))?;
        let optima = sol
            .optima
            .iter()
            .map(|b| Ok(PartitionSummary::new(&Partition::new(coarse, b.clone())?, cfg.nu)))
            .collect::<qdissect::Result<_>>()?;
        run.write_json(
            "exact.json",
            &ExactReport {
                schema: EXACT_SCHEMA,
                n: g.n(),
                coarse_n: coarse.n(),
                lambda: q.lambda(),
                nu: cfg.nu,
                c_star: sol.c_star,
                optima,
            },
        )
    })
}
