//! Nested dissection orderings and symbolic-factorization merit factors.
//!
//! Every internal node of the dissection tree coarsens its subgraph,
//! bipartitions the coarse graph with a pluggable [`Bipartitioner`],
//! projects the split back, turns the edge cut into a vertex separator and
//! recurses on the two remaining parts. Leaves are ordered by minimum
//! degree; the final order lists each node's children before its
//! separator.

mod ordering;
mod permutation;
mod symbolic;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::circuit::AnsatzPreset;
use crate::error::{invalid, Error, Result};
use crate::graph::{coarsen, edge_cut_to_vertex_separator, project_partition, WeightedGraph};
use crate::qubo::{exact_solve, Bitstring, Partition, QuboProblem};
use crate::refine::{fm_refine, FmConfig};
use crate::rng;
use crate::varqite::{run_varqite, VarqiteConfig};

pub use ordering::minimum_degree_order;
pub use permutation::Permutation;
pub use symbolic::{column_counts, elimination_tree, symbolic_factorize, MeritFactors, SymmetricPattern};

/// Where in the dissection tree a split is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitContext {
    /// Heap-style node id: root 1, children `2k` and `2k + 1`.
    pub node: usize,
    pub depth: usize,
    pub seed: u64,
}

pub trait Bipartitioner {
    fn name(&self) -> &'static str;

    /// Side assignment for every vertex of `g`.
    fn bipartition(&self, g: &WeightedGraph, ctx: &SplitContext) -> Result<Bitstring>;
}

/// Region growing followed by FM.
#[derive(Debug, Clone, PartialEq)]
pub struct FmBaseline {
    pub nu: f64,
    pub fm: FmConfig,
}

impl Default for FmBaseline {
    fn default() -> Self {
        Self {
            nu: crate::qubo::DEFAULT_NU,
            fm: FmConfig::default(),
        }
    }
}

impl Bipartitioner for FmBaseline {
    fn name(&self) -> &'static str {
        "fm-baseline"
    }

    fn bipartition(&self, g: &WeightedGraph, ctx: &SplitContext) -> Result<Bitstring> {
        let fm = FmConfig {
            epsilon: self.nu,
            ..self.fm.clone()
        };
        Ok(baseline_partition_with(g, ctx.seed, &fm)?.into_bits())
    }
}

/// Lexicographically first QUBO optimum by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPartitioner {
    /// `None` selects the default penalty weight.
    pub lambda: Option<f64>,
    pub nu: f64,
}

impl Bipartitioner for ExactPartitioner {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn bipartition(&self, g: &WeightedGraph, _ctx: &SplitContext) -> Result<Bitstring> {
        let q = qubo_for(g, self.lambda, self.nu)?;
        let sol = exact_solve(&q)?;
        Ok(sol.optima.into_iter().next().expect("at least one optimum"))
    }
}

/// Imaginary-time evolution on the coarse graph, optionally followed by FM.
#[derive(Debug, Clone, PartialEq)]
pub struct VarqitePartitioner {
    pub lambda: Option<f64>,
    pub nu: f64,
    pub ansatz: AnsatzPreset,
    pub varqite: VarqiteConfig,
    pub refine: Option<FmConfig>,
}

impl Bipartitioner for VarqitePartitioner {
    fn name(&self) -> &'static str {
        "varqite"
    }

    fn bipartition(&self, g: &WeightedGraph, ctx: &SplitContext) -> Result<Bitstring> {
        let q = qubo_for(g, self.lambda, self.nu)?;
        let ans = self.ansatz.build(g)?;
        let cfg = VarqiteConfig {
            seed: ctx.seed,
            ..self.varqite.clone()
        };
        let out = run_varqite(&q, &ans, &cfg)?;
        if !out.best_is_balanced {
            log::warn!("node {}: no balanced sample, using the best unbalanced one", ctx.node);
        }
        match &self.refine {
            Some(fm) => Ok(fm_refine(g, &out.best, fm)?.into_bits()),
            None => Ok(out.best.into_bits()),
        }
    }
}

fn qubo_for(g: &WeightedGraph, lambda: Option<f64>, nu: f64) -> Result<QuboProblem> {
    match lambda {
        Some(l) => QuboProblem::new(g.clone(), l, nu),
        None => QuboProblem::with_default_lambda(g.clone(), nu),
    }
}

/// BFS from a pseudo-peripheral vertex, then FM with tolerance `nu`.
pub fn baseline_partition(g: &WeightedGraph, nu: f64, seed: u64) -> Result<Partition> {
    let fm = FmConfig {
        epsilon: nu,
        seed,
        ..FmConfig::default()
    };
    baseline_partition_with(g, seed, &fm)
}

fn baseline_partition_with(g: &WeightedGraph, seed: u64, fm: &FmConfig) -> Result<Partition> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    use rand::Rng;
    let mut r = rng::seeded(seed);
    let start = pseudo_peripheral(g, r.gen_range(0..n));

    // grow side 1 in BFS order while that moves its weight toward half
    let half = g.total_vertex_weight() as f64 / 2.0;
    let mut bits = vec![0u8; n];
    let mut grown = 0.0;
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    let mut next_root = 0;
    let mut root = Some(start);
    'grow: while let Some(s) = root.take() {
        seen[s] = true;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            let w = g.vertex_weight(v) as f64;
            if (grown + w - half).abs() >= (grown - half).abs() {
                break 'grow;
            }
            bits[v] = 1;
            grown += w;
            for &(u, _) in g.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        while next_root < n && seen[next_root] {
            next_root += 1;
        }
        if next_root < n {
            root = Some(next_root);
        }
    }
    let init = Partition::new(g, Bitstring::new(bits)?)?;
    fm_refine(g, &init, fm)
}

/// Repeated farthest-vertex BFS from `start`, ties to the lower index.
fn pseudo_peripheral(g: &WeightedGraph, start: usize) -> usize {
    let mut v = start;
    let mut ecc = 0;
    for _ in 0..g.n() {
        let dist = g.bfs_distances(v);
        let (far, d) = dist
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != usize::MAX)
            .fold((v, 0), |best, (u, &d)| if d > best.1 { (u, d) } else { best });
        if d <= ecc {
            break;
        }
        v = far;
        ecc = d;
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DissectionConfig {
    /// Vertex count each node's subgraph is coarsened to before splitting.
    pub coarse_target: usize,
    pub seed: u64,
    /// Fixed split of the root, one bit per original vertex.
    pub root_split: Option<Bitstring>,
}

impl Default for DissectionConfig {
    fn default() -> Self {
        Self {
            coarse_target: 32,
            seed: 0,
            root_split: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissectionNode {
    pub depth: usize,
    /// Original vertex indices, ascending.
    pub vertices: Vec<usize>,
    pub separator: Vec<usize>,
    pub parts: [Vec<usize>; 2],
    /// Indices into [`DissectionTree::nodes`]; `None` for leaves.
    pub children: Option<[usize; 2]>,
    /// Side of each entry of `vertices` before the separator was taken out;
    /// `None` for leaves.
    pub split: Option<Bitstring>,
    /// Edge cut of `split`; 0 for leaves.
    pub cut_weight: f64,
    /// Relative weight imbalance of `split`; 0 for leaves.
    pub imbalance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissectionTree {
    pub levels: usize,
    /// Root first.
    pub nodes: Vec<DissectionNode>,
}

impl DissectionTree {
    pub fn root(&self) -> &DissectionNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &DissectionNode> {
        self.nodes.iter().filter(|n| n.children.is_none())
    }

    /// Checks at every internal node that the separator and parts cover the
    /// vertex set disjointly and that no edge joins the two parts.
    pub fn verify(&self, g: &WeightedGraph) -> Result<()> {
        let mut side = vec![u8::MAX; g.n()];
        for (k, node) in self.nodes.iter().enumerate() {
            if node.children.is_none() {
                continue;
            }
            let mut all: Vec<usize> = node
                .separator
                .iter()
                .chain(&node.parts[0])
                .chain(&node.parts[1])
                .copied()
                .collect();
            all.sort_unstable();
            if all != node.vertices {
                return Err(invalid(format!("node {k}: separator and parts do not cover the vertex set")));
            }
            for (s, part) in node.parts.iter().enumerate() {
                for &v in part {
                    side[v] = s as u8;
                }
            }
            for &v in &node.parts[0] {
                if g.neighbors(v).iter().any(|&(u, _)| side[u] == 1) {
                    return Err(invalid(format!("node {k}: edge crosses the separator")));
                }
            }
            for part in &node.parts {
                for &v in part {
                    side[v] = u8::MAX;
                }
            }
        }
        Ok(())
    }
}

struct Dissector<'a> {
    g: &'a WeightedGraph,
    levels: usize,
    partitioner: &'a dyn Bipartitioner,
    cfg: &'a DissectionConfig,
    nodes: Vec<DissectionNode>,
    order: Vec<usize>,
}

impl Dissector<'_> {
    fn leaf(&mut self, vertices: Vec<usize>, depth: usize) -> Result<usize> {
        if vertices.len() > 1 {
            let (sub, map) = self.g.induced_subgraph(&vertices)?;
            let adj: Vec<Vec<usize>> = (0..sub.n())
                .map(|v| sub.neighbors(v).iter().map(|&(u, _)| u).collect())
                .collect();
            self.order.extend(minimum_degree_order(&adj).into_iter().map(|v| map[v]));
        } else {
            self.order.extend(&vertices);
        }
        self.nodes.push(DissectionNode {
            depth,
            vertices,
            separator: Vec::new(),
            parts: [Vec::new(), Vec::new()],
            children: None,
            split: None,
            cut_weight: 0.0,
            imbalance: 0.0,
        });
        Ok(self.nodes.len() - 1)
    }

    fn split_bits(&self, sub: &WeightedGraph, vertices: &[usize], ctx: &SplitContext) -> Result<Bitstring> {
        if ctx.depth == 0 {
            if let Some(root) = &self.cfg.root_split {
                return Ok(vertices.iter().map(|&v| root[v]).collect());
            }
        }
        let target = self.cfg.coarse_target.clamp(2, sub.n());
        let map = coarsen(sub, target, rng::derive(ctx.seed, 0))?;
        let coarse = map.coarsest();
        let bits = if coarse.n_edges() == 0 {
            log::debug!("node {}: coarse graph has no edges, splitting by region growth", ctx.node);
            baseline_partition(coarse, crate::qubo::DEFAULT_NU, ctx.seed)?.into_bits()
        } else {
            self.partitioner.bipartition(coarse, ctx)?
        };
        Ok(project_partition(&map, &Partition::new(coarse, bits)?)?.into_bits())
    }

    fn node(&mut self, vertices: Vec<usize>, depth: usize, id: usize) -> Result<usize> {
        if depth >= self.levels || vertices.len() < 2 {
            return self.leaf(vertices, depth);
        }
        let (sub, map) = self.g.induced_subgraph(&vertices)?;
        if sub.n_edges() == 0 {
            return self.leaf(vertices, depth);
        }
        let ctx = SplitContext {
            node: id,
            depth,
            seed: rng::derive(self.cfg.seed, id as u64),
        };
        let bits = self.split_bits(&sub, &vertices, &ctx)?;
        let split = Partition::new(&sub, bits)?;
        let sep_local = edge_cut_to_vertex_separator(&sub, &split)?;
        let mut in_sep = vec![false; sub.n()];
        for &v in &sep_local {
            in_sep[v] = true;
        }
        let mut parts = [Vec::new(), Vec::new()];
        for v in 0..sub.n() {
            if !in_sep[v] {
                parts[split.bits()[v] as usize].push(map[v]);
            }
        }
        let mut separator: Vec<usize> = sep_local.iter().map(|&v| map[v]).collect();
        separator.sort_unstable();

        let slot = self.nodes.len();
        self.nodes.push(DissectionNode {
            depth,
            vertices,
            separator: separator.clone(),
            parts: parts.clone(),
            children: None,
            cut_weight: split.cut_weight(),
            imbalance: split.imbalance(),
            split: Some(split.into_bits()),
        });
        let [p0, p1] = parts;
        let c0 = self.node(p0, depth + 1, 2 * id)?;
        let c1 = self.node(p1, depth + 1, 2 * id + 1)?;
        self.nodes[slot].children = Some([c0, c1]);
        self.order.extend(separator);
        Ok(slot)
    }
}

/// `levels`-deep nested dissection of `g`.
pub fn nested_dissection(
    g: &WeightedGraph,
    levels: usize,
    partitioner: &dyn Bipartitioner,
    cfg: &DissectionConfig,
) -> Result<(DissectionTree, Permutation)> {
    if levels == 0 {
        return Err(invalid("nested dissection needs at least one level"));
    }
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if let Some(root) = &cfg.root_split {
        if root.len() != g.n() {
            return Err(Error::SizeMismatch {
                expected: g.n(),
                got: root.len(),
            });
        }
    }
    let mut d = Dissector {
        g,
        levels,
        partitioner,
        cfg,
        nodes: Vec::new(),
        order: Vec::with_capacity(g.n()),
    };
    d.node((0..g.n()).collect(), 0, 1)?;
    let perm = Permutation::from_order(d.order)?;
    Ok((DissectionTree { levels, nodes: d.nodes }, perm))
}

/// A root split scored by the merit of the dissection it induces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub bits: Bitstring,
    pub merit: MeritFactors,
    pub cut_weight: f64,
    pub imbalance: f64,
    pub balanced: bool,
}

/// Scores each candidate root split: the remaining levels use the FM
/// baseline, and the ranking puts balanced candidates first, then orders by
/// `(ops, nnz_factor, cut_weight)`. Unbalanced candidates are kept and
/// flagged.
pub fn evaluate_partition_merit(
    g: &WeightedGraph,
    pattern: &SymmetricPattern,
    candidates: &[Bitstring],
    levels: usize,
    nu: f64,
    cfg: &DissectionConfig,
) -> Result<Vec<RankedCandidate>> {
    if candidates.is_empty() {
        return Err(invalid("no candidate partitions"));
    }
    if pattern.n() != g.n() {
        return Err(Error::SizeMismatch {
            expected: g.n(),
            got: pattern.n(),
        });
    }
    let baseline = FmBaseline {
        nu,
        fm: FmConfig::default(),
    };
    let mut ranked = Vec::with_capacity(candidates.len());
    for bits in candidates {
        let p = Partition::new(g, bits.clone())?;
        let run = DissectionConfig {
            root_split: Some(bits.clone()),
            ..cfg.clone()
        };
        let (_, perm) = nested_dissection(g, levels, &baseline, &run)?;
        ranked.push(RankedCandidate {
            bits: bits.clone(),
            merit: symbolic_factorize(pattern, &perm)?,
            cut_weight: p.cut_weight(),
            imbalance: p.imbalance(),
            balanced: p.is_balanced(nu),
        });
    }
    ranked.sort_by(|a, b| {
        b.balanced
            .cmp(&a.balanced)
            .then(a.merit.ops.cmp(&b.merit.ops))
            .then(a.merit.nnz_factor.cmp(&b.merit.nnz_factor))
            .then(a.cut_weight.total_cmp(&b.cut_weight))
    });
    Ok(ranked)
}
