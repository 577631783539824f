//! Graph readers for METIS, plain edge lists and Matrix Market coordinate
//! files.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::WeightedGraph;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    Metis,
    EdgeList,
    MatrixMarket,
}

impl FromStr for GraphFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "metis" => Ok(Self::Metis),
            "edge-list" => Ok(Self::EdgeList),
            "matrix-market" | "mtx" => Ok(Self::MatrixMarket),
            other => Err(Error::InvalidArgument(format!("unknown graph format '{other}'"))),
        }
    }
}

pub fn load_graph(path: impl AsRef<Path>, format: GraphFormat) -> Result<WeightedGraph> {
    let file = File::open(path)?;
    parse_graph(BufReader::new(file), format)
}

pub fn parse_graph<R: Read>(reader: R, format: GraphFormat) -> Result<WeightedGraph> {
    let mut lines = Vec::new();
    for line in BufReader::new(reader).lines() {
        lines.push(line?);
    }
    match format {
        GraphFormat::Metis => parse_metis(&lines),
        GraphFormat::EdgeList => parse_edge_list(&lines),
        GraphFormat::MatrixMarket => parse_matrix_market(&lines),
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn num<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| perr(line, format!("invalid {what} '{tok}'")))
}

fn parse_metis(lines: &[String]) -> Result<WeightedGraph> {
    // Comment lines are skipped; blank lines after the header are vertices
    // with no neighbors.
    let mut body = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.starts_with('%'));
    let (hline, header) = loop {
        match body.next() {
            Some((_, "")) => continue,
            Some(x) => break x,
            None => return Err(Error::EmptyGraph),
        }
    };
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() < 2 || head.len() > 4 {
        return Err(perr(hline, "header must be 'n m [fmt [ncon]]'"));
    }
    let n: usize = num(head[0], hline, "vertex count")?;
    let m: usize = num(head[1], hline, "edge count")?;
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let fmt = head.get(2).copied().unwrap_or("0");
    if fmt.len() > 3 || !fmt.chars().all(|c| c == '0' || c == '1') {
        return Err(perr(hline, format!("invalid fmt '{fmt}'")));
    }
    let fmt = format!("{fmt:0>3}");
    let fmt = fmt.as_bytes();
    let (has_size, has_vwgt, has_ewgt) = (fmt[0] == b'1', fmt[1] == b'1', fmt[2] == b'1');
    let ncon: usize = match head.get(3) {
        Some(t) => num(t, hline, "ncon")?,
        None => usize::from(has_vwgt),
    };
    if has_vwgt && ncon == 0 {
        return Err(perr(hline, "ncon must be positive when vertex weights are present"));
    }

    let mut weights = vec![1u64; n];
    let mut edges = Vec::new();
    for v in 0..n {
        let Some((lno, line)) = body.next() else {
            return Err(perr(lines.len(), format!("expected {n} vertex lines, found {v}")));
        };
        let mut toks = line.split_whitespace();
        if has_size {
            toks.next().ok_or_else(|| perr(lno, "missing vertex size"))?;
        }
        if has_vwgt {
            for c in 0..ncon {
                let t = toks.next().ok_or_else(|| perr(lno, "missing vertex weight"))?;
                let w: u64 = num(t, lno, "vertex weight")?;
                if c == 0 {
                    if w == 0 {
                        return Err(perr(lno, "vertex weight must be positive"));
                    }
                    weights[v] = w;
                }
            }
        }
        while let Some(t) = toks.next() {
            let u: usize = num(t, lno, "neighbor")?;
            if u == 0 || u > n {
                return Err(perr(lno, format!("neighbor {u} out of range 1..={n}")));
            }
            let w = if has_ewgt {
                let t = toks.next().ok_or_else(|| perr(lno, "missing edge weight"))?;
                let w: f64 = num(t, lno, "edge weight")?;
                if !(w > 0.0) {
                    return Err(perr(lno, "edge weight must be positive"));
                }
                w
            } else {
                1.0
            };
            if u - 1 == v {
                return Err(perr(lno, "self-loop"));
            }
            edges.push((v, u - 1, w));
        }
    }
    if let Some((lno, _)) = body.find(|(_, l)| !l.is_empty()) {
        return Err(perr(lno, "trailing data after the last vertex line"));
    }
    let g = WeightedGraph::from_edges(n, Some(weights), edges)?;
    if g.n_edges() != m {
        return Err(perr(hline, format!("header declares {m} edges, adjacency has {}", g.n_edges())));
    }
    Ok(g)
}

fn parse_edge_list(lines: &[String]) -> Result<WeightedGraph> {
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (i, raw) in lines.iter().enumerate() {
        let lno = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 2 || toks.len() > 3 {
            return Err(perr(lno, "expected 'u v [w]'"));
        }
        let u: usize = num(toks[0], lno, "vertex")?;
        let v: usize = num(toks[1], lno, "vertex")?;
        let w: f64 = match toks.get(2) {
            Some(t) => num(t, lno, "weight")?,
            None => 1.0,
        };
        if !(w > 0.0) || !w.is_finite() {
            return Err(perr(lno, "edge weight must be positive"));
        }
        n = n.max(u + 1).max(v + 1);
        if u != v {
            edges.push((u, v, w));
        }
    }
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    WeightedGraph::from_edges(n, None, edges)
}

fn parse_matrix_market(lines: &[String]) -> Result<WeightedGraph> {
    let mut it = lines.iter().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, banner) = it.next().ok_or(Error::EmptyGraph)?;
    let banner_toks: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if banner_toks.len() != 5 || banner_toks[0] != "%%matrixmarket" || banner_toks[1] != "matrix" {
        return Err(perr(1, "missing '%%MatrixMarket matrix' banner"));
    }
    if banner_toks[2] != "coordinate" {
        return Err(perr(1, "only coordinate format is supported"));
    }
    let field = banner_toks[3].as_str();
    if !matches!(field, "real" | "integer" | "pattern" | "complex") {
        return Err(perr(1, format!("unsupported field '{field}'")));
    }
    if !matches!(banner_toks[4].as_str(), "general" | "symmetric" | "skew-symmetric" | "hermitian") {
        return Err(perr(1, format!("unsupported symmetry '{}'", banner_toks[4])));
    }

    let mut body = it.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (sline, size) = body.next().ok_or_else(|| perr(lines.len(), "missing size line"))?;
    let st: Vec<&str> = size.split_whitespace().collect();
    if st.len() != 3 {
        return Err(perr(sline, "size line must be 'rows cols nnz'"));
    }
    let rows: usize = num(st[0], sline, "row count")?;
    let cols: usize = num(st[1], sline, "column count")?;
    let nnz: usize = num(st[2], sline, "entry count")?;
    if rows != cols {
        return Err(Error::NonSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyGraph);
    }

    let mut edges = Vec::new();
    let mut seen = 0usize;
    for (lno, line) in body {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let want = match field {
            "pattern" => 2,
            "complex" => 4,
            _ => 3,
        };
        if toks.len() != want {
            return Err(perr(lno, format!("expected {want} fields")));
        }
        let i: usize = num(toks[0], lno, "row index")?;
        let j: usize = num(toks[1], lno, "column index")?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(perr(lno, format!("index ({i}, {j}) out of range")));
        }
        let mag = match field {
            "pattern" => 1.0,
            "complex" => {
                let re: f64 = num(toks[2], lno, "value")?;
                let im: f64 = num(toks[3], lno, "value")?;
                re.hypot(im)
            }
            _ => num::<f64>(toks[2], lno, "value")?.abs(),
        };
        if !mag.is_finite() {
            return Err(perr(lno, "non-finite value"));
        }
        // explicit zeros are structural entries
        let w = if mag > 0.0 { mag } else { 1.0 };
        seen += 1;
        if i != j {
            edges.push((i - 1, j - 1, w));
        }
    }
    if seen != nnz {
        return Err(perr(sline, format!("size line declares {nnz} entries, found {seen}")));
    }
    WeightedGraph::from_edges(rows, None, edges)
}
