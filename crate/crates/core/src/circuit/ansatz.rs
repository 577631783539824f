use std::collections::HashSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::{ego_ranking, WeightedGraph};

/// One `R_ZY` gate: `Z` on `a`, `Y` on `b`, angle `theta[param]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub a: usize,
    pub b: usize,
    pub param: usize,
    pub layer: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    #[serde(rename = "n")]
    pub n_qubits: usize,
    pub layers: usize,
    /// Requested gate budget per layer.
    pub gates_per_layer: Vec<usize>,
    pub gates: Vec<Gate>,
}

impl Ansatz {
    pub fn new(n_qubits: usize, gates: Vec<(usize, usize)>) -> Result<Self> {
        let gates: Vec<Gate> = gates
            .into_iter()
            .enumerate()
            .map(|(param, (a, b))| Gate { a, b, param, layer: 0 })
            .collect();
        let ans = Self {
            n_qubits,
            layers: 1,
            gates_per_layer: vec![gates.len()],
            gates,
        };
        ans.validate()?;
        Ok(ans)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, g) in self.gates.iter().enumerate() {
            if g.a == g.b || g.a >= self.n_qubits || g.b >= self.n_qubits {
                return Err(invalid(format!("gate {k} acts on invalid qubits ({}, {})", g.a, g.b)));
            }
            if g.param != k {
                return Err(invalid(format!("gate {k} uses parameter {}", g.param)));
            }
            if g.layer >= self.layers {
                return Err(invalid(format!("gate {k} in layer {} of {}", g.layer, self.layers)));
            }
        }
        for layer in 0..self.layers {
            let count = self.gates.iter().filter(|g| g.layer == layer).count();
            if count > self.gates_per_layer.get(layer).copied().unwrap_or(0) {
                return Err(invalid(format!("layer {layer} exceeds its gate budget")));
            }
        }
        Ok(())
    }

    pub fn n_params(&self) -> usize {
        self.gates.len()
    }

    pub fn layer_gate_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.layers];
        for g in &self.gates {
            counts[g.layer] += 1;
        }
        counts
    }
}

/// Gate-budget presets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AnsatzPreset {
    /// Layer 0 on every edge, layer 1 on every remaining vertex pair:
    /// `n(n-1)/2` gates in total.
    Full2Layer,
    /// Explicit per-layer budgets.
    Truncated(Vec<usize>),
}

impl AnsatzPreset {
    pub fn gates_per_layer(&self, g: &WeightedGraph) -> Vec<usize> {
        match self {
            Self::Full2Layer => {
                let n = g.n();
                vec![g.n_edges(), n * (n - 1) / 2]
            }
            Self::Truncated(v) => v.clone(),
        }
    }

    pub fn build(&self, g: &WeightedGraph) -> Result<Ansatz> {
        let budget = self.gates_per_layer(g);
        build_heavy_neighbors_ansatz(g, budget.len(), &budget)
    }
}

impl FromStr for AnsatzPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "full-2layer" {
            return Ok(Self::Full2Layer);
        }
        let list = s.strip_prefix("truncated:").unwrap_or(s);
        let budget = list
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| invalid(format!("bad gate count '{t}'"))))
            .collect::<Result<Vec<_>>>()?;
        if budget.is_empty() || budget.contains(&0) {
            return Err(invalid("every layer needs at least one gate"));
        }
        Ok(Self::Truncated(budget))
    }
}

impl From<AnsatzPreset> for String {
    fn from(p: AnsatzPreset) -> String {
        match p {
            AnsatzPreset::Full2Layer => "full-2layer".into(),
            AnsatzPreset::Truncated(v) => {
                let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
                format!("truncated:{}", parts.join(","))
            }
        }
    }
}

impl TryFrom<String> for AnsatzPreset {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Layered heavy-neighbors ansatz.
///
/// Layer 0 places gates on the `gates_per_layer[0]` heaviest edges (ties in
/// lexicographic pair order). Layer `k > 0` ranks vertices by radius-`k`
/// ego-graph weight into `s_1, s_2, ...` and walks the pairs
/// `(s_1, s_2), (s_1, s_3), ..., (s_2, s_3), ...`, skipping pairs already
/// used by an earlier layer, until the layer budget is met.
pub fn build_heavy_neighbors_ansatz(g: &WeightedGraph, layers: usize, gates_per_layer: &[usize]) -> Result<Ansatz> {
    if layers == 0 {
        return Err(invalid("ansatz needs at least one layer"));
    }
    if gates_per_layer.len() != layers {
        return Err(Error::SizeMismatch {
            expected: layers,
            got: gates_per_layer.len(),
        });
    }
    if gates_per_layer.contains(&0) {
        return Err(invalid("every layer needs at least one gate"));
    }
    if g.n_edges() == 0 {
        return Err(Error::NoEdges);
    }

    let mut used: HashSet<(usize, usize)> = HashSet::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut push = |a: usize, b: usize, layer: usize| {
        let param = gates.len();
        gates.push(Gate { a, b, param, layer });
    };

    let mut edges: Vec<(usize, usize, f64)> = g.edges().collect();
    edges.sort_by(|x, y| y.2.total_cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    for &(a, b, _) in edges.iter().take(gates_per_layer[0]) {
        used.insert((a, b));
        push(a, b, 0);
    }

    for (layer, &budget) in gates_per_layer.iter().enumerate().skip(1) {
        let s = ego_ranking(g, layer)?.order;
        let mut placed = 0;
        'scan: for i in 0..s.len() {
            for j in i + 1..s.len() {
                if placed == budget {
                    break 'scan;
                }
                if used.insert((s[i].min(s[j]), s[i].max(s[j]))) {
                    push(s[i], s[j], layer);
                    placed += 1;
                }
            }
        }
    }

    let ans = Ansatz {
        n_qubits: g.n(),
        layers,
        gates_per_layer: gates_per_layer.to_vec(),
        gates,
    };
    ans.validate()?;
    Ok(ans)
}
