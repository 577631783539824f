//! Experiment configuration: TOML file, then command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qdissect::circuit::AnsatzPreset;
use qdissect::graph::GraphFormat;
use qdissect::qubo::DEFAULT_NU;
use qdissect::refine::FmConfig;
use qdissect::varqite::VarqiteConfig;
use qdissect::WeightedGraph;
use serde::{Deserialize, Serialize};

/// Shots per circuit for the hardware-like preset.
pub const HARDWARE_SHOTS: u64 = 128;

/// Invalid flags or configuration values; maps to exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionerKind {
    Varqite,
    /// VarQITE followed by FM refinement of the projected split.
    VarqiteFm,
    FmBaseline,
    Exact,
    /// Root split read from `root_split`; deeper levels use the FM baseline.
    ExternalBitstring,
}

impl FromStr for PartitionerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "varqite" => Ok(Self::Varqite),
            "varqite-fm" => Ok(Self::VarqiteFm),
            "fm-baseline" => Ok(Self::FmBaseline),
            "exact" => Ok(Self::Exact),
            "external-bitstring" => Ok(Self::ExternalBitstring),
            other => Err(format!(
                "unknown partitioner '{other}' (expected varqite, varqite-fm, fm-baseline, exact or external-bitstring)"
            )),
        }
    }
}

/// `exact`, `hardware` (128) or a shot count; 0 means exact expectations.
pub fn parse_shots(s: &str) -> Result<u64, String> {
    match s {
        "exact" => Ok(0),
        "hardware" => Ok(HARDWARE_SHOTS),
        n => n
            .parse()
            .map_err(|_| format!("invalid shot count '{n}' (expected exact, hardware or an integer)")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    /// Coarse vertex counts to sweep.
    pub targets: Vec<usize>,
    /// Seeds per target.
    pub seeds: u64,
    /// Best balanced VarQITE candidates reported per point.
    pub candidates: usize,
    /// Lowest-energy distinct samples scored per point.
    pub pool: usize,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            targets: vec![8, 12, 16],
            seeds: 1,
            candidates: 4,
            pool: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub input: Option<PathBuf>,
    /// Inferred from the file extension when absent.
    pub format: Option<GraphFormat>,
    pub coarse_target: usize,
    /// `None` selects the default penalty weight.
    pub lambda: Option<f64>,
    pub nu: f64,
    pub ansatz: AnsatzPreset,
    /// Keeps only the first `layers` layers of `ansatz`.
    pub layers: Option<usize>,
    pub varqite: VarqiteConfig,
    pub fm: FmConfig,
    /// FM refinement of the projected partition in `partition`.
    pub refine: bool,
    pub levels: usize,
    pub partitioner: PartitionerKind,
    pub root_split: Option<PathBuf>,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
    pub compare: CompareConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            input: None,
            format: None,
            coarse_target: 16,
            lambda: None,
            nu: DEFAULT_NU,
            ansatz: AnsatzPreset::Full2Layer,
            layers: None,
            varqite: VarqiteConfig::default(),
            fm: FmConfig::default(),
            refine: true,
            levels: 2,
            partitioner: PartitionerKind::Varqite,
            root_split: None,
            seed: 0,
            out: PathBuf::from("qdissect-out"),
            jobs: 1,
            compare: CompareConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn input(&self) -> anyhow::Result<&Path> {
        self.input.as_deref().ok_or_else(|| usage("no input graph (use --input)"))
    }

    pub fn graph_format(&self) -> anyhow::Result<GraphFormat> {
        if let Some(f) = self.format {
            return Ok(f);
        }
        let ext = self.input()?.extension().and_then(|e| e.to_str()).unwrap_or("");
        match ext {
            "graph" | "metis" => Ok(GraphFormat::Metis),
            "mtx" => Ok(GraphFormat::MatrixMarket),
            "edges" | "txt" | "el" => Ok(GraphFormat::EdgeList),
            _ => Err(usage(format!("cannot infer the format of '.{ext}' files (use --format)"))),
        }
    }

    /// Copies the top-level seed into the stage configs.
    pub fn seeded_varqite(&self) -> VarqiteConfig {
        VarqiteConfig {
            seed: self.seed,
            ..self.varqite.clone()
        }
    }

    pub fn seeded_fm(&self) -> FmConfig {
        FmConfig {
            seed: self.seed,
            ..self.fm.clone()
        }
    }

    /// Ansatz preset with the `layers` cut applied for graph `g`.
    pub fn ansatz_for(&self, g: &WeightedGraph) -> AnsatzPreset {
        match self.layers {
            Some(l) => {
                let mut budgets = self.ansatz.gates_per_layer(g);
                budgets.truncate(l);
                AnsatzPreset::Truncated(budgets)
            }
            None => self.ansatz.clone(),
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let bad = |msg: String| Err(usage(msg));
        if self.coarse_target < 2 {
            return bad(format!("coarse_target must be at least 2, got {}", self.coarse_target));
        }
        if let Some(l) = self.lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return bad(format!("lambda must be finite and non-negative, got {l}"));
            }
        }
        if !(0.0..0.5).contains(&self.nu) {
            return bad(format!("nu must lie in [0, 0.5), got {}", self.nu));
        }
        let available = match &self.ansatz {
            AnsatzPreset::Full2Layer => 2,
            AnsatzPreset::Truncated(b) => b.len(),
        };
        if let Some(l) = self.layers {
            if l == 0 || l > available {
                return bad(format!("layers must lie in 1..={available} for this ansatz, got {l}"));
            }
        }
        if self.levels == 0 {
            return bad("levels must be at least 1".into());
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1".into());
        }
        if self.partitioner == PartitionerKind::ExternalBitstring && self.root_split.is_none() {
            return bad("partitioner external-bitstring needs --root-split".into());
        }
        if self.compare.targets.is_empty() || self.compare.targets.iter().any(|&t| t < 2) {
            return bad("compare targets must be a non-empty list of values >= 2".into());
        }
        if self.compare.seeds == 0 || self.compare.candidates == 0 || self.compare.pool < self.compare.candidates {
            return bad("compare needs seeds >= 1 and pool >= candidates >= 1".into());
        }
        self.varqite.validate().map_err(|e| usage(e.to_string()))?;
        self.fm.validate().map_err(|e| usage(e.to_string()))?;
        Ok(())
    }
}
