//! Text formats: edge lists, block files, parameter files and tabulated probes.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::equivariance::{tabulated_probe, ParametrizationProbe};
use crate::error::{Error, Result};
use crate::graph::{dyad_count, BlockAssignment, Graph};
use crate::models::{LogitMatrix, ModelSpec};

/// A parsed edge list. `labels[i]` is the external token of node `i` when the
/// file used non-numeric tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeList {
    pub graph: Graph,
    pub labels: Option<Vec<String>>,
}

impl EdgeList {
    /// Node id of an external token.
    pub fn node(&self, token: &str) -> Option<usize> {
        match &self.labels {
            Some(labels) => labels.iter().position(|l| l == token),
            None => token.parse().ok().filter(|&i| i < self.graph.n()),
        }
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses an edge list.
///
/// Lines hold two whitespace-separated node tokens. `#directed` or
/// `#undirected` sets the kind (undirected when absent), `#nodes N` declares
/// the node count, `#node TOKEN` declares a node that may have no edges, and
/// any other `#` line is a comment. When every token is a non-negative
/// integer the tokens are the node ids; otherwise the distinct tokens are
/// numbered in sorted order, so the result does not depend on the order of
/// the lines.
pub fn parse_edge_list(text: &str) -> Result<EdgeList> {
    let mut directed = None;
    let mut declared = None;
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    let mut named: Vec<&str> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let mut words = rest.split_whitespace();
            match words.next() {
                Some(kind @ ("directed" | "undirected")) => {
                    let d = kind == "directed";
                    if directed.is_some_and(|prev| prev != d) {
                        return Err(parse_err(line_no, "conflicting #directed / #undirected headers"));
                    }
                    directed = Some(d);
                }
                Some("nodes") => {
                    let n = words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .ok_or_else(|| parse_err(line_no, "#nodes needs a non-negative integer"))?;
                    declared = Some(n);
                }
                Some("node") => {
                    let token = words.next().ok_or_else(|| parse_err(line_no, "#node needs a token"))?;
                    named.push(token);
                }
                _ => {}
            }
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [u, v] = tokens[..] else {
            return Err(parse_err(line_no, format!("expected two node tokens, found {}", tokens.len())));
        };
        pairs.push((line_no, u, v));
    }
    let directed = directed.unwrap_or(false);

    let numeric = pairs
        .iter()
        .flat_map(|&(_, u, v)| [u, v])
        .chain(named.iter().copied())
        .all(|t| t.parse::<usize>().is_ok());
    let (ids, labels): (Vec<(usize, usize, usize)>, Option<Vec<String>>) = if numeric {
        let ids = pairs
            .iter()
            .map(|&(l, u, v)| (l, u.parse().unwrap(), v.parse().unwrap()))
            .collect();
        (ids, None)
    } else {
        let tokens: BTreeSet<&str> = pairs.iter().flat_map(|&(_, u, v)| [u, v]).chain(named.iter().copied()).collect();
        let index: HashMap<&str, usize> = tokens.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let ids = pairs.iter().map(|&(l, u, v)| (l, index[u], index[v])).collect();
        (ids, Some(tokens.into_iter().map(String::from).collect()))
    };

    let used = match &labels {
        Some(l) => l.len(),
        None => ids
            .iter()
            .map(|&(_, u, v)| u.max(v) + 1)
            .chain(named.iter().map(|t| t.parse::<usize>().unwrap() + 1))
            .max()
            .unwrap_or(0),
    };
    let n = match declared {
        Some(n) if n < used => {
            return Err(Error::InvalidGraph(format!("#nodes {n} but edges reference {used} nodes")));
        }
        Some(n) => n,
        None => used,
    };
    let mut labels = labels;
    if let Some(l) = labels.as_mut() {
        // declared isolated nodes get synthetic labels after the named ones
        for extra in l.len()..n {
            l.push(format!("_{extra}"));
        }
    }

    let mut bits = vec![false; dyad_count(n, directed)];
    for (line_no, u, v) in ids {
        if u == v {
            return Err(parse_err(line_no, "self-loop"));
        }
        let d = crate::graph::dyad_index(n, directed, u, v).expect("distinct nodes below n");
        if bits[d] {
            return Err(parse_err(line_no, "duplicate edge"));
        }
        bits[d] = true;
    }
    Ok(EdgeList {
        graph: Graph::from_dyad_bits(n, directed, bits)?,
        labels,
    })
}

/// Writes `g` in the edge-list format, edges in canonical dyad order.
pub fn write_edge_list(g: &Graph, labels: Option<&[String]>) -> String {
    let mut out = String::new();
    out.push_str(if g.is_directed() { "#directed\n" } else { "#undirected\n" });
    out.push_str(&format!("#nodes {}\n", g.n()));
    if let Some(l) = labels {
        for label in l {
            out.push_str(&format!("#node {label}\n"));
        }
    }
    for (u, v) in g.edges() {
        match labels {
            Some(l) => out.push_str(&format!("{} {}\n", l[u], l[v])),
            None => out.push_str(&format!("{u} {v}\n")),
        }
    }
    out
}

/// Parses a block file: one `node block` pair per line, `#` comments allowed.
/// Node tokens are resolved through `edges`; block tokens are numbered in
/// numeric order when all are integers and in sorted order otherwise.
pub fn parse_blocks(text: &str, edges: &EdgeList) -> Result<BlockAssignment> {
    let n = edges.graph.n();
    let mut assigned: Vec<Option<&str>> = vec![None; n];
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let [node, block] = tokens[..] else {
            return Err(parse_err(k + 1, "expected `node block`"));
        };
        let i = edges
            .node(node)
            .ok_or_else(|| parse_err(k + 1, format!("unknown node {node:?}")))?;
        if assigned[i].replace(block).is_some() {
            return Err(parse_err(k + 1, format!("node {node:?} assigned twice")));
        }
    }
    let blocks: Vec<&str> = assigned
        .iter()
        .enumerate()
        .map(|(i, b)| b.ok_or_else(|| Error::InvalidBlocks(format!("node {i} has no block"))))
        .collect::<Result<_>>()?;
    let numbers: Option<Vec<usize>> = blocks.iter().map(|b| b.parse().ok()).collect();
    let raw = match numbers {
        Some(v) => v,
        None => {
            let sorted: BTreeSet<&str> = blocks.iter().copied().collect();
            let index: HashMap<&str, usize> = sorted.into_iter().enumerate().map(|(i, t)| (t, i)).collect();
            blocks.iter().map(|b| index[b]).collect()
        }
    };
    BlockAssignment::compacted(&raw)
}

/// The parameter file, serialized as JSON. Only the fields of the named model
/// are present.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logits: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_diag: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node_labels: Option<Vec<String>>,
}

fn field<T>(value: Option<T>, name: &str, model: &str) -> Result<T> {
    value.ok_or_else(|| Error::Precondition(format!("{model} parameters need a `{name}` field")))
}

impl ParamsFile {
    pub fn from_model(m: &ModelSpec, node_labels: Option<Vec<String>>) -> Self {
        let mut f = ParamsFile {
            model: m.family().name().to_string(),
            node_labels,
            ..Default::default()
        };
        match m {
            ModelSpec::Saturated(l) => {
                f.n = Some(l.n());
                f.directed = Some(l.is_directed());
                f.logits = Some(l.values().to_vec());
            }
            ModelSpec::ErdosRenyi { theta, directed } => {
                f.theta = Some(*theta);
                f.directed = Some(*directed);
            }
            ModelSpec::Beta { beta } => f.beta = Some(beta.clone()),
            ModelSpec::Sbm { blocks, eta } => {
                f.blocks = Some(blocks.labels().to_vec());
                f.eta = Some(eta.clone());
            }
            ModelSpec::AdditiveSbm {
                blocks,
                delta,
                eta_diag,
            } => {
                f.blocks = Some(blocks.labels().to_vec());
                f.delta = Some(delta.clone());
                f.eta_diag = Some(eta_diag.clone());
            }
            ModelSpec::P1Config { alpha, beta } => {
                f.alpha = Some(alpha.clone());
                f.beta = Some(beta.clone());
            }
            ModelSpec::DirectedAdditiveSbm {
                blocks,
                delta,
                lambda,
                eta_diag,
            } => {
                f.blocks = Some(blocks.labels().to_vec());
                f.delta = Some(delta.clone());
                f.lambda = Some(lambda.clone());
                f.eta_diag = Some(eta_diag.clone());
            }
        }
        f
    }

    /// The model described by the file, validated. Stored values are used as
    /// they are, without renormalizing the gauge.
    pub fn to_model(&self) -> Result<ModelSpec> {
        let name = self.model.as_str();
        let family: crate::models::Family = name.parse()?;
        let blocks = || -> Result<BlockAssignment> { BlockAssignment::new(field(self.blocks.clone(), "blocks", name)?) };
        let m = match family {
            crate::models::Family::Saturated => ModelSpec::Saturated(LogitMatrix::new(
                field(self.n, "n", name)?,
                field(self.directed, "directed", name)?,
                field(self.logits.clone(), "logits", name)?,
            )?),
            crate::models::Family::ErdosRenyi => ModelSpec::ErdosRenyi {
                theta: field(self.theta, "theta", name)?,
                directed: field(self.directed, "directed", name)?,
            },
            crate::models::Family::Beta => ModelSpec::Beta {
                beta: field(self.beta.clone(), "beta", name)?,
            },
            crate::models::Family::Sbm => ModelSpec::Sbm {
                blocks: blocks()?,
                eta: field(self.eta.clone(), "eta", name)?,
            },
            crate::models::Family::AdditiveSbm => ModelSpec::AdditiveSbm {
                blocks: blocks()?,
                delta: field(self.delta.clone(), "delta", name)?,
                eta_diag: field(self.eta_diag.clone(), "eta_diag", name)?,
            },
            crate::models::Family::P1Config => ModelSpec::P1Config {
                alpha: field(self.alpha.clone(), "alpha", name)?,
                beta: field(self.beta.clone(), "beta", name)?,
            },
            crate::models::Family::DirectedAdditiveSbm => ModelSpec::DirectedAdditiveSbm {
                blocks: blocks()?,
                delta: field(self.delta.clone(), "delta", name)?,
                lambda: field(self.lambda.clone(), "lambda", name)?,
                eta_diag: field(self.eta_diag.clone(), "eta_diag", name)?,
            },
        };
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter files hold only finite numbers") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Parses a tabulated probe: a header `n rows cols lo hi` followed by
/// `rows × cols` row-major values for each dyad function in canonical dyad
/// order. The probe is directed when the file holds `n(n-1)` tables and
/// undirected when it holds `n(n-1)/2`.
pub fn parse_tabulated_probe(name: &str, text: &str) -> Result<ParametrizationProbe> {
    let mut words = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'))
        .flat_map(|(k, l)| l.split_whitespace().map(move |w| (k + 1, w)));
    let mut header = |what: &str| -> Result<(usize, &str)> {
        words.next().ok_or_else(|| parse_err(1, format!("missing {what} in header")))
    };
    let int = |(line, w): (usize, &str)| w.parse::<usize>().map_err(|_| parse_err(line, format!("expected an integer, got {w:?}")));
    let real = |(line, w): (usize, &str)| w.parse::<f64>().map_err(|_| parse_err(line, format!("expected a number, got {w:?}")));
    let n = int(header("n")?)?;
    let rows = int(header("rows")?)?;
    let cols = int(header("cols")?)?;
    let lo = real(header("lo")?)?;
    let hi = real(header("hi")?)?;
    let values: Vec<f64> = words.map(real).collect::<Result<_>>()?;
    let per = rows * cols;
    if per == 0 || !values.len().is_multiple_of(per) {
        return Err(parse_err(1, format!("{} values do not split into {rows}×{cols} tables", values.len())));
    }
    let count = values.len() / per;
    let directed = if count == dyad_count(n, false) {
        false
    } else if count == dyad_count(n, true) {
        true
    } else {
        return Err(Error::DimensionMismatch {
            what: "dyad tables",
            expected: dyad_count(n, false),
            found: count,
        });
    };
    let tables = values.chunks(per).map(<[f64]>::to_vec).collect();
    tabulated_probe(name, n, directed, (lo, hi), rows, cols, tables)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_edge_list() {
        let e = parse_edge_list("#undirected\n0 1\n1 2\n# a comment\n2 3\n3 0\n").unwrap();
        assert_eq!(e.graph, Graph::from_edges(4, false, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap());
        assert!(e.labels.is_none());
    }

    #[test]
    fn declared_isolated_nodes() {
        let e = parse_edge_list("#directed\n#nodes 5\n0 1\n").unwrap();
        assert_eq!(e.graph.n(), 5);
        assert!(e.graph.is_directed() && e.graph.has_edge(0, 1) && !e.graph.has_edge(1, 0));
        assert!(parse_edge_list("#nodes 1\n0 1\n").is_err());
    }

    #[test]
    fn string_tokens_map_in_sorted_order() {
        let a = parse_edge_list("carol bob\nalice bob\n").unwrap();
        let b = parse_edge_list("alice bob\ncarol bob\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.labels.as_deref().unwrap(), ["alice", "bob", "carol"]);
        assert_eq!(a.node("carol"), Some(2));
    }

    #[test]
    fn rejects_loops_duplicates_and_garbage() {
        assert!(matches!(parse_edge_list("0 0\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("0 1\n1 0\n"), Err(Error::Parse { line: 2, .. })));
        assert!(parse_edge_list("#directed\n0 1\n1 0\n").is_ok());
        assert!(parse_edge_list("0 1 2\n").is_err());
        assert!(parse_edge_list("#directed\n#undirected\n").is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(5, true, [(4, 0), (1, 3), (3, 1)]).unwrap();
        assert_eq!(parse_edge_list(&write_edge_list(&g, None)).unwrap().graph, g);
        let labels: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
        let back = parse_edge_list(&write_edge_list(&g, Some(&labels))).unwrap();
        assert_eq!(back.graph, g);
    }

    #[test]
    fn blocks_file() {
        let e = parse_edge_list("x y\ny z\nz w\n").unwrap();
        let b = parse_blocks("w red\nx blue\ny blue\nz red\n", &e).unwrap();
        // nodes w x y z; blocks blue=0, red=1
        assert_eq!(b.labels(), [1, 0, 0, 1]);
        assert!(parse_blocks("w red\n", &e).is_err());
        assert!(parse_blocks("q red\n", &e).is_err());
        let numeric = parse_edge_list("0 1\n1 2\n").unwrap();
        assert_eq!(parse_blocks("0 5\n1 5\n2 9\n", &numeric).unwrap().labels(), [0, 0, 1]);
    }

    #[test]
    fn params_round_trip_bit_exact() {
        let blocks = BlockAssignment::new(vec![0, 1, 2, 0, 1]).unwrap();
        let models = [
            ModelSpec::beta(vec![0.1, -1.0 / 3.0, std::f64::consts::PI, 1e-300, -7.25e12]).unwrap(),
            ModelSpec::erdos_renyi(0.1 + 0.2, true).unwrap(),
            ModelSpec::additive_sbm(blocks.clone(), vec![0.3, -0.7, 1.0 / 7.0], vec![0.0, 2.0f64.sqrt(), -1.5]).unwrap(),
            ModelSpec::directed_additive_sbm(blocks, vec![0.1, 0.2, 0.3], vec![1.0, 2.0, 4.0], vec![0.5; 3]).unwrap(),
            ModelSpec::p1_config(vec![0.25, 1.0 / 3.0, -2.0], vec![0.6, -0.1, 0.9]).unwrap(),
            ModelSpec::saturated(LogitMatrix::from_fn(3, true, |i, j| (i as f64 + 0.1) / (j as f64 + 0.7)).unwrap()),
        ];
        for m in models {
            let text = ParamsFile::from_model(&m, None).to_json();
            let back = ParamsFile::from_json(&text).unwrap().to_model().unwrap();
            assert_eq!(back.params().iter().map(|x| x.to_bits()).collect::<Vec<_>>(), m.params().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
            assert_eq!(back, m);
        }
    }

    #[test]
    fn params_validation() {
        assert!(ParamsFile::from_json(r#"{"model": "beta"}"#).unwrap().to_model().is_err());
        assert!(ParamsFile::from_json(r#"{"model": "nope", "beta": [0]}"#).unwrap().to_model().is_err());
        assert!(ParamsFile::from_json(r#"{"model": "beta", "beta": [0], "colour": 1}"#).is_err());
        assert!(ParamsFile::from_json("not json").is_err());
    }

    #[test]
    fn tabulated_probe_file() {
        // u + v on a 2×2 grid over [0, 1], three undirected dyads
        let text = "3 2 2 0 1\n0 1 1 2\n0 1 1 2\n0 1 1 2\n";
        let p = parse_tabulated_probe("t", text).unwrap();
        assert!(!p.directed);
        assert!((p.eval(0, 2, 0.25, 0.5).unwrap() - 0.75).abs() < 1e-15);
        let directed = format!("3 2 2 0 1\n{}", "0 1 1 2\n".repeat(6));
        assert!(parse_tabulated_probe("t", &directed).unwrap().directed);
        assert!(parse_tabulated_probe("t", "3 2 2 0 1\n0 1 1 2\n").is_err());
    }
}
