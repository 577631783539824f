//! `qdissect`: balanced bipartitioning and nested-dissection orderings from
//! simulated imaginary-time evolution.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use qdissect::circuit::AnsatzPreset;
use qdissect::graph::GraphFormat;

use crate::config::{parse_shots, usage, ExperimentConfig, PartitionerKind, UsageError};
use crate::manifest::{diff_outputs, hash_file, RunManifest};

#[derive(Parser)]
#[command(name = "qdissect", version, about = "Graph bipartitioning and fill-reducing orderings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coarsen, evolve, project and refine one balanced bipartition.
    Partition(RunArgs),
    /// Nested-dissection ordering with merit factors.
    Dissect(RunArgs),
    /// Sweep coarse sizes and compare VarQITE candidates to the FM baseline.
    Compare(CompareArgs),
    /// Enumerate the optimum of the coarse QUBO.
    Exact(RunArgs),
    /// Repeat a run from its manifest and check the outputs match.
    Rerun(RerunArgs),
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input graph or matrix.
    #[arg(long)]
    input: Option<PathBuf>,
    /// metis, edge-list or matrix-market; inferred from the extension otherwise.
    #[arg(long)]
    format: Option<GraphFormat>,
    /// Vertex count the graph is coarsened to before solving.
    #[arg(long)]
    coarse_target: Option<usize>,
    /// Balance penalty weight; default derives it from the graph.
    #[arg(long)]
    lambda: Option<f64>,
    /// Relative balance tolerance.
    #[arg(long)]
    nu: Option<f64>,
    /// Keep only the first LAYERS ansatz layers.
    #[arg(long)]
    layers: Option<usize>,
    /// Ansatz preset: full-2layer, truncated:<g0,g1,...> or a gate list.
    #[arg(long)]
    gates: Option<AnsatzPreset>,
    /// Imaginary-time step.
    #[arg(long)]
    dtau: Option<f64>,
    /// Maximum number of time steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Shots per circuit: exact, hardware (128) or a count.
    #[arg(long, value_parser = parse_shots)]
    shots: Option<u64>,
    /// Shots drawn from the final state in exact mode.
    #[arg(long)]
    sample_shots: Option<u64>,
    /// Tikhonov regularization of the linear solve.
    #[arg(long)]
    ridge: Option<f64>,
    /// Nested-dissection depth.
    #[arg(long)]
    levels: Option<usize>,
    /// varqite, varqite-fm, fm-baseline, exact or external-bitstring.
    #[arg(long)]
    partitioner: Option<PartitionerKind>,
    /// File holding the root split for external-bitstring.
    #[arg(long)]
    root_split: Option<PathBuf>,
    /// FM outer iteration limit.
    #[arg(long)]
    fm_iterations: Option<usize>,
    /// FM balance tolerance.
    #[arg(long)]
    fm_epsilon: Option<f64>,
    /// Skip FM refinement of the projected partition.
    #[arg(long)]
    no_refine: bool,
    #[arg(long, env = "QDISSECT_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma-separated coarse sizes, e.g. 10,12,14.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<usize>>,
    /// Seeds per coarse size.
    #[arg(long)]
    seeds: Option<u64>,
    /// VarQITE candidates reported per point.
    #[arg(long)]
    candidates: Option<usize>,
}

#[derive(Args)]
struct RerunArgs {
    /// Manifest written by an earlier run.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for the repeated run.
    #[arg(long)]
    out: PathBuf,
}

impl RunArgs {
    fn resolve(self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_toml_file(path)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($flag:expr => $field:expr) => {
                if let Some(v) = $flag {
                    $field = v;
                }
            };
        }
        if self.input.is_some() {
            cfg.input = self.input;
        }
        if self.format.is_some() {
            cfg.format = self.format;
        }
        if self.lambda.is_some() {
            cfg.lambda = self.lambda;
        }
        if self.layers.is_some() {
            cfg.layers = self.layers;
        }
        if self.root_split.is_some() {
            cfg.root_split = self.root_split;
        }
        set!(self.coarse_target => cfg.coarse_target);
        set!(self.nu => cfg.nu);
        set!(self.gates => cfg.ansatz);
        set!(self.dtau => cfg.varqite.d_tau);
        set!(self.steps => cfg.varqite.max_steps);
        set!(self.shots => cfg.varqite.shots);
        set!(self.sample_shots => cfg.varqite.sample_shots);
        set!(self.ridge => cfg.varqite.ridge);
        set!(self.levels => cfg.levels);
        set!(self.partitioner => cfg.partitioner);
        set!(self.fm_iterations => cfg.fm.max_iterations);
        set!(self.fm_epsilon => cfg.fm.epsilon);
        set!(self.seed => cfg.seed);
        set!(self.out => cfg.out);
        set!(self.jobs => cfg.jobs);
        if self.no_refine {
            cfg.refine = false;
        }
        // absolute paths keep the manifest valid from any working directory
        for path in [&mut cfg.input, &mut cfg.root_split].into_iter().flatten() {
            if let Ok(abs) = path.canonicalize() {
                *path = abs;
            }
        }
        Ok(cfg)
    }
}

fn run_command(name: &str, cfg: ExperimentConfig) -> Result<()> {
    cfg.validate()?;
    commands::execute(name, &cfg)
}

fn rerun(args: RerunArgs) -> Result<()> {
    let manifest = RunManifest::load(&args.manifest)?;
    for input in &manifest.inputs {
        if hash_file(&input.path)? != input.sha256 {
            bail!("input {} changed since the recorded run", input.path.display());
        }
    }
    let recorded_dir = args.manifest.parent().map(|p| p.canonicalize()).transpose()?;
    if recorded_dir.is_some() && args.out.canonicalize().ok() == recorded_dir {
        return Err(usage("rerun --out must differ from the recorded output directory"));
    }
    let out = args.out.clone();
    let cfg = ExperimentConfig {
        out: args.out,
        ..manifest.config.clone()
    };
    run_command(&manifest.command, cfg)?;
    let repeated = RunManifest::load(&out.join(manifest::MANIFEST_FILE))?;
    let diff = diff_outputs(&manifest.outputs, &repeated.outputs);
    if !diff.is_empty() {
        bail!("outputs do not match the manifest: {}", diff.join(", "));
    }
    log::info!("all {} outputs match", manifest.outputs.len());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Partition(a) => a.resolve().and_then(|c| run_command("partition", c)),
        Command::Dissect(a) => a.resolve().and_then(|c| run_command("dissect", c)),
        Command::Exact(a) => a.resolve().and_then(|c| run_command("exact", c)),
        Command::Compare(a) => a.run.resolve().and_then(|mut c| {
            if let Some(t) = a.targets {
                c.compare.targets = t;
            }
            if let Some(s) = a.seeds {
                c.compare.seeds = s;
            }
            if let Some(k) = a.candidates {
                c.compare.candidates = k;
            }
            run_command("compare", c)
        }),
        Command::Rerun(a) => rerun(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<UsageError>()) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
