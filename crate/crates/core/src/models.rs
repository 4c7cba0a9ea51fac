//! The seven dyadic-independent model families.
//!
//! Every family is a parametrization of the saturated dyad-logit space: it
//! maps its parameters to one logit per canonical dyad, and the density is
//!
//! ```text
//! P(x) = exp{ Σ_dyads x_ij θ_ij − ψ(θ) },   ψ(θ) = Σ_dyads log(1 + e^θ_ij)
//! ```
//!
//! Each family also has a low-dimensional sufficient statistic (degree
//! sequence, block edge counts, …) that pairs linearly with its parameters,
//! so the same likelihood can be computed either through the dyads or
//! through the statistics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{dyad_count, dyads, BlockAssignment, BlockDegrees, Graph};
use crate::numeric::{log1p_exp, sigmoid};

/// One logit per canonical dyad (see [`crate::graph`] for the order).
#[derive(Debug, Clone, PartialEq)]
pub struct LogitMatrix {
    n: usize,
    directed: bool,
    values: Vec<f64>,
}

impl LogitMatrix {
    pub fn new(n: usize, directed: bool, values: Vec<f64>) -> Result<Self> {
        let expected = dyad_count(n, directed);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                what: "logits",
                expected,
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteParameter("logits"));
        }
        Ok(Self { n, directed, values })
    }

    /// Builds the matrix by evaluating `f(i, j)` on every canonical dyad.
    pub fn from_fn(n: usize, directed: bool, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        Self::new(n, directed, dyads(n, directed).map(|(i, j)| f(i, j)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        crate::graph::dyad_index(self.n, self.directed, i, j).map(|d| self.values[d])
    }

    /// Edge probabilities `sigmoid(θ_ij)` in canonical order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.values.iter().map(|&t| sigmoid(t)).collect()
    }

    pub fn log_partition(&self) -> f64 {
        self.values.iter().map(|&t| log1p_exp(t)).sum()
    }

    /// `Σ x_ij θ_ij − ψ(θ)`.
    pub fn log_likelihood(&self, g: &Graph) -> Result<f64> {
        self.check_graph(g)?;
        let linear: f64 = g
            .dyad_bits()
            .iter()
            .zip(&self.values)
            .filter(|(&x, _)| x)
            .map(|(_, &t)| t)
            .sum();
        Ok(linear - self.log_partition())
    }

    fn check_graph(&self, g: &Graph) -> Result<()> {
        g.expect_directed(self.directed)?;
        if g.n() != self.n {
            return Err(Error::DimensionMismatch {
                what: "graph nodes",
                expected: self.n,
                found: g.n(),
            });
        }
        Ok(())
    }
}

/// Names of the model families, as used in parameter files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Saturated,
    ErdosRenyi,
    Beta,
    Sbm,
    AdditiveSbm,
    P1Config,
    DirectedAdditiveSbm,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Saturated,
        Family::ErdosRenyi,
        Family::Beta,
        Family::Sbm,
        Family::AdditiveSbm,
        Family::P1Config,
        Family::DirectedAdditiveSbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Saturated => "saturated",
            Family::ErdosRenyi => "erdos-renyi",
            Family::Beta => "beta",
            Family::Sbm => "sbm",
            Family::AdditiveSbm => "additive-sbm",
            Family::P1Config => "p1-config",
            Family::DirectedAdditiveSbm => "directed-additive-sbm",
        }
    }

    /// Fixed directedness, or `None` for families that support both.
    pub fn directedness(self) -> Option<bool> {
        match self {
            Family::Saturated | Family::ErdosRenyi => None,
            Family::Beta | Family::Sbm | Family::AdditiveSbm => Some(false),
            Family::P1Config | Family::DirectedAdditiveSbm => Some(true),
        }
    }

    pub fn uses_blocks(self) -> bool {
        matches!(
            self,
            Family::Sbm | Family::AdditiveSbm | Family::DirectedAdditiveSbm
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown model family '{s}'")))
    }
}

/// A model family together with its parameters.
///
/// The constructors validate dimensions and finiteness and put the directed
/// families into their normalized gauge (`Σβ = 0` for p1, `Σλ = 0` for the
/// directed additive SBM). The variants are public so un-normalized values
/// can still be expressed; every operation validates before use.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Saturated(LogitMatrix),
    ErdosRenyi {
        theta: f64,
        directed: bool,
    },
    Beta {
        beta: Vec<f64>,
    },
    /// `eta` is a symmetric `r × r` matrix of block-pair logits.
    Sbm {
        blocks: BlockAssignment,
        eta: Vec<Vec<f64>>,
    },
    AdditiveSbm {
        blocks: BlockAssignment,
        delta: Vec<f64>,
        eta_diag: Vec<f64>,
    },
    P1Config {
        alpha: Vec<f64>,
        beta: Vec<f64>,
    },
    DirectedAdditiveSbm {
        blocks: BlockAssignment,
        delta: Vec<f64>,
        lambda: Vec<f64>,
        eta_diag: Vec<f64>,
    },
}

/// Sufficient statistics for each family, real-valued so that observed and
/// expected statistics share one type.
#[derive(Debug, Clone, PartialEq)]
pub enum SufficientStats {
    /// All dyad indicators in canonical order.
    Dyads(Vec<f64>),
    EdgeCount(f64),
    Degrees(Vec<f64>),
    /// `e_kl` for `k <= l`, row-major over the upper triangle.
    BlockPairs(Vec<f64>),
    AdditiveBlocks {
        degree: Vec<f64>,
        within: Vec<f64>,
    },
    OutIn {
        out_degree: Vec<f64>,
        in_degree: Vec<f64>,
    },
    DirectedAdditiveBlocks {
        out_degree: Vec<f64>,
        in_degree: Vec<f64>,
        within: Vec<f64>,
    },
}

impl SufficientStats {
    /// Flattens in the same order as [`ModelSpec::params`], so that
    /// `log P(x) = ⟨stats, params⟩ − ψ`.
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            SufficientStats::Dyads(v) | SufficientStats::Degrees(v) | SufficientStats::BlockPairs(v) => {
                v.clone()
            }
            SufficientStats::EdgeCount(e) => vec![*e],
            SufficientStats::AdditiveBlocks { degree, within } => [degree.as_slice(), within].concat(),
            SufficientStats::OutIn {
                out_degree,
                in_degree,
            } => [out_degree.as_slice(), in_degree].concat(),
            SufficientStats::DirectedAdditiveBlocks {
                out_degree,
                in_degree,
                within,
            } => [out_degree.as_slice(), in_degree, within].concat(),
        }
    }

    /// ∞-norm distance between two statistics of the same shape.
    pub fn max_abs_diff(&self, other: &SufficientStats) -> Result<f64> {
        let (a, b) = (self.to_vec(), other.to_vec());
        if a.len() != b.len() || std::mem::discriminant(self) != std::mem::discriminant(other) {
            return Err(Error::DimensionMismatch {
                what: "sufficient statistics",
                expected: a.len(),
                found: b.len(),
            });
        }
        Ok(a.iter().zip(&b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs())))
    }
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteParameter(what))
    }
}

fn check_len(values: &[f64], expected: usize, what: &'static str) -> Result<()> {
    if values.len() != expected {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            found: values.len(),
        });
    }
    check_finite(values, what)
}

/// Canonical `k <= l` block pairs, in the order used for SBM parameters.
pub(crate) fn upper_pairs(r: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..r).flat_map(move |k| (k..r).map(move |l| (k, l)))
}

fn subtract_mean(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let c = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= c);
    c
}

impl ModelSpec {
    pub fn saturated(logits: LogitMatrix) -> Self {
        ModelSpec::Saturated(logits)
    }

    pub fn erdos_renyi(theta: f64, directed: bool) -> Result<Self> {
        check_finite(&[theta], "theta")?;
        Ok(ModelSpec::ErdosRenyi { theta, directed })
    }

    pub fn beta(beta: Vec<f64>) -> Result<Self> {
        check_finite(&beta, "beta")?;
        Ok(ModelSpec::Beta { beta })
    }

    pub fn sbm(blocks: BlockAssignment, eta: Vec<Vec<f64>>) -> Result<Self> {
        let m = ModelSpec::Sbm { blocks, eta };
        m.validate()?;
        Ok(m)
    }

    /// Builds an SBM from the upper-triangle parameters `η_kl, k <= l`.
    pub fn sbm_from_upper(blocks: BlockAssignment, upper: &[f64]) -> Result<Self> {
        let r = blocks.r();
        check_len(upper, r * (r + 1) / 2, "eta")?;
        let mut eta = vec![vec![0.0; r]; r];
        for ((k, l), &v) in upper_pairs(r).zip(upper) {
            eta[k][l] = v;
            eta[l][k] = v;
        }
        Self::sbm(blocks, eta)
    }

    pub fn additive_sbm(blocks: BlockAssignment, delta: Vec<f64>, eta_diag: Vec<f64>) -> Result<Self> {
        let m = ModelSpec::AdditiveSbm {
            blocks,
            delta,
            eta_diag,
        };
        m.validate()?;
        Ok(m)
    }

    /// p1/configuration model, normalized to `Σβ = 0`.
    pub fn p1_config(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let m = ModelSpec::P1Config { alpha, beta };
        m.validate()?;
        Ok(m.normalized())
    }

    /// Directed additive SBM, normalized to `Σλ = 0`.
    pub fn directed_additive_sbm(
        blocks: BlockAssignment,
        delta: Vec<f64>,
        lambda: Vec<f64>,
        eta_diag: Vec<f64>,
    ) -> Result<Self> {
        let m = ModelSpec::DirectedAdditiveSbm {
            blocks,
            delta,
            lambda,
            eta_diag,
        };
        m.validate()?;
        Ok(m.normalized())
    }

    pub fn family(&self) -> Family {
        match self {
            ModelSpec::Saturated(_) => Family::Saturated,
            ModelSpec::ErdosRenyi { .. } => Family::ErdosRenyi,
            ModelSpec::Beta { .. } => Family::Beta,
            ModelSpec::Sbm { .. } => Family::Sbm,
            ModelSpec::AdditiveSbm { .. } => Family::AdditiveSbm,
            ModelSpec::P1Config { .. } => Family::P1Config,
            ModelSpec::DirectedAdditiveSbm { .. } => Family::DirectedAdditiveSbm,
        }
    }

    pub fn is_directed(&self) -> bool {
        match self {
            ModelSpec::Saturated(l) => l.is_directed(),
            ModelSpec::ErdosRenyi { directed, .. } => *directed,
            other => other.family().directedness().unwrap_or(false),
        }
    }

    pub fn blocks(&self) -> Option<&BlockAssignment> {
        match self {
            ModelSpec::Sbm { blocks, .. }
            | ModelSpec::AdditiveSbm { blocks, .. }
            | ModelSpec::DirectedAdditiveSbm { blocks, .. } => Some(blocks),
            _ => None,
        }
    }

    /// Node count fixed by the parameters; `None` for Erdős–Rényi.
    pub fn implied_n(&self) -> Option<usize> {
        match self {
            ModelSpec::Saturated(l) => Some(l.n()),
            ModelSpec::ErdosRenyi { .. } => None,
            ModelSpec::Beta { beta } => Some(beta.len()),
            ModelSpec::P1Config { alpha, .. } => Some(alpha.len()),
            other => other.blocks().map(BlockAssignment::n),
        }
    }

    /// Resolves the node count from an optional request, checking consistency.
    pub fn resolve_n(&self, requested: Option<usize>) -> Result<usize> {
        match (self.implied_n(), requested) {
            (Some(k), Some(n)) if k != n => Err(Error::DimensionMismatch {
                what: "node count",
                expected: k,
                found: n,
            }),
            (Some(k), _) => Ok(k),
            (None, Some(n)) => Ok(n),
            (None, None) => Err(Error::Precondition(
                "node count required for erdos-renyi".into(),
            )),
        }
    }

    /// Checks parameter lengths and finiteness.
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Saturated(l) => check_finite(l.values(), "logits"),
            ModelSpec::ErdosRenyi { theta, .. } => check_finite(&[*theta], "theta"),
            ModelSpec::Beta { beta } => check_finite(beta, "beta"),
            ModelSpec::Sbm { blocks, eta } => {
                let r = blocks.r();
                if eta.len() != r {
                    return Err(Error::DimensionMismatch {
                        what: "eta rows",
                        expected: r,
                        found: eta.len(),
                    });
                }
                for row in eta {
                    check_len(row, r, "eta")?;
                }
                for (k, l) in upper_pairs(r) {
                    if eta[k][l] != eta[l][k] {
                        return Err(Error::Precondition(format!(
                            "eta must be symmetric: eta[{k}][{l}] != eta[{l}][{k}]"
                        )));
                    }
                }
                Ok(())
            }
            ModelSpec::AdditiveSbm {
                blocks,
                delta,
                eta_diag,
            } => {
                check_len(delta, blocks.r(), "delta")?;
                check_len(eta_diag, blocks.r(), "eta_diag")
            }
            ModelSpec::P1Config { alpha, beta } => {
                check_finite(alpha, "alpha")?;
                check_len(beta, alpha.len(), "beta")
            }
            ModelSpec::DirectedAdditiveSbm {
                blocks,
                delta,
                lambda,
                eta_diag,
            } => {
                check_len(delta, blocks.r(), "delta")?;
                check_len(lambda, blocks.r(), "lambda")?;
                check_len(eta_diag, blocks.r(), "eta_diag")
            }
        }
    }

    /// Moves the directed families into their normalized gauge; other families
    /// are returned unchanged. Logits are unaffected.
    pub fn normalized(mut self) -> Self {
        match &mut self {
            ModelSpec::P1Config { alpha, beta } => {
                let c = subtract_mean(beta);
                alpha.iter_mut().for_each(|a| *a += c);
            }
            ModelSpec::DirectedAdditiveSbm { delta, lambda, .. } => {
                let c = subtract_mean(lambda);
                delta.iter_mut().for_each(|d| *d += c);
            }
            _ => {}
        }
        self
    }

    /// Dyad logits of the model on `n` nodes.
    pub fn logits(&self, n: usize) -> Result<LogitMatrix> {
        self.validate()?;
        let n = self.resolve_n(Some(n))?;
        match self {
            ModelSpec::Saturated(l) => Ok(l.clone()),
            ModelSpec::ErdosRenyi { theta, directed } => LogitMatrix::from_fn(n, *directed, |_, _| *theta),
            ModelSpec::Beta { beta } => LogitMatrix::from_fn(n, false, |i, j| beta[i] + beta[j]),
            ModelSpec::Sbm { blocks, eta } => {
                LogitMatrix::from_fn(n, false, |i, j| eta[blocks.block_of(i)][blocks.block_of(j)])
            }
            ModelSpec::AdditiveSbm {
                blocks,
                delta,
                eta_diag,
            } => LogitMatrix::from_fn(n, false, |i, j| {
                let (k, l) = (blocks.block_of(i), blocks.block_of(j));
                if k == l {
                    eta_diag[k]
                } else {
                    delta[k] + delta[l]
                }
            }),
            ModelSpec::P1Config { alpha, beta } => LogitMatrix::from_fn(n, true, |i, j| alpha[i] + beta[j]),
            ModelSpec::DirectedAdditiveSbm {
                blocks,
                delta,
                lambda,
                eta_diag,
            } => LogitMatrix::from_fn(n, true, |i, j| {
                let (k, l) = (blocks.block_of(i), blocks.block_of(j));
                if k == l {
                    eta_diag[k]
                } else {
                    delta[k] + lambda[l]
                }
            }),
        }
    }

    pub fn log_partition(&self, n: usize) -> Result<f64> {
        Ok(self.logits(n)?.log_partition())
    }

    pub fn dyad_probabilities(&self, n: usize) -> Result<Vec<f64>> {
        Ok(self.logits(n)?.probabilities())
    }

    /// Log-likelihood through the dyad form `Σ x_ij θ_ij − ψ`.
    pub fn log_likelihood(&self, g: &Graph) -> Result<f64> {
        self.check_graph_kind(g)?;
        self.logits(g.n())?.log_likelihood(g)
    }

    /// Log-likelihood through the statistic form `⟨s(x), params⟩ − ψ`.
    pub fn log_likelihood_from_stats(&self, g: &Graph) -> Result<f64> {
        let stats = self.sufficient_stats(g)?.to_vec();
        let params = self.params();
        let linear: f64 = stats.iter().zip(&params).map(|(s, p)| s * p).sum();
        Ok(linear - self.log_partition(g.n())?)
    }

    fn check_graph_kind(&self, g: &Graph) -> Result<()> {
        g.expect_directed(self.is_directed())
    }

    /// Sufficient statistics of `g`, computed from the graph's own degree and
    /// block counters.
    pub fn sufficient_stats(&self, g: &Graph) -> Result<SufficientStats> {
        self.validate()?;
        self.check_graph_kind(g)?;
        self.resolve_n(Some(g.n()))?;
        let f = |v: Vec<usize>| v.into_iter().map(|x| x as f64).collect::<Vec<_>>();
        Ok(match self {
            ModelSpec::Saturated(_) => {
                SufficientStats::Dyads(g.dyad_bits().iter().map(|&b| f64::from(u8::from(b))).collect())
            }
            ModelSpec::ErdosRenyi { .. } => SufficientStats::EdgeCount(g.edge_count() as f64),
            ModelSpec::Beta { .. } => SufficientStats::Degrees(f(g.degree_sequence()?)),
            ModelSpec::Sbm { blocks, .. } => {
                let e = g.block_edge_counts(blocks)?;
                SufficientStats::BlockPairs(upper_pairs(blocks.r()).map(|(k, l)| e.get(k, l) as f64).collect())
            }
            ModelSpec::AdditiveSbm { blocks, .. } => match g.block_degrees(blocks)? {
                BlockDegrees::Undirected { degree, within } => SufficientStats::AdditiveBlocks {
                    degree: f(degree),
                    within: f(within),
                },
                BlockDegrees::Directed { .. } => unreachable!("kind checked above"),
            },
            ModelSpec::P1Config { .. } => {
                let (a, b) = g.out_in_degrees()?;
                SufficientStats::OutIn {
                    out_degree: f(a),
                    in_degree: f(b),
                }
            }
            ModelSpec::DirectedAdditiveSbm { blocks, .. } => match g.block_degrees(blocks)? {
                BlockDegrees::Directed {
                    out_degree,
                    in_degree,
                    within,
                } => SufficientStats::DirectedAdditiveBlocks {
                    out_degree: f(out_degree),
                    in_degree: f(in_degree),
                    within: f(within),
                },
                BlockDegrees::Undirected { .. } => unreachable!("kind checked above"),
            },
        })
    }

    /// Expected sufficient statistics: dyad probabilities pushed through the
    /// family's aggregation.
    pub fn expected_stats(&self, n: usize) -> Result<SufficientStats> {
        let p = self.dyad_probabilities(n)?;
        Ok(self.aggregate(n, &p))
    }

    /// Linear aggregation of dyad-indexed weights into the family's statistic.
    /// With 0/1 weights this is the observed statistic; with probabilities it
    /// is the expectation.
    pub(crate) fn aggregate(&self, n: usize, w: &[f64]) -> SufficientStats {
        let directed = self.is_directed();
        let pairs = || dyads(n, directed).zip(w.iter().copied());
        match self {
            ModelSpec::Saturated(_) => SufficientStats::Dyads(w.to_vec()),
            ModelSpec::ErdosRenyi { .. } => SufficientStats::EdgeCount(w.iter().sum()),
            ModelSpec::Beta { .. } => {
                let mut d = vec![0.0; n];
                for ((i, j), x) in pairs() {
                    d[i] += x;
                    d[j] += x;
                }
                SufficientStats::Degrees(d)
            }
            ModelSpec::Sbm { blocks, .. } => {
                let r = blocks.r();
                let mut e = vec![vec![0.0; r]; r];
                for ((i, j), x) in pairs() {
                    let (k, l) = (blocks.block_of(i), blocks.block_of(j));
                    e[k.min(l)][k.max(l)] += x;
                }
                SufficientStats::BlockPairs(upper_pairs(r).map(|(k, l)| e[k][l]).collect())
            }
            ModelSpec::AdditiveSbm { blocks, .. } => {
                let r = blocks.r();
                let (mut degree, mut within) = (vec![0.0; r], vec![0.0; r]);
                for ((i, j), x) in pairs() {
                    let (k, l) = (blocks.block_of(i), blocks.block_of(j));
                    if k == l {
                        within[k] += x;
                    } else {
                        degree[k] += x;
                        degree[l] += x;
                    }
                }
                SufficientStats::AdditiveBlocks { degree, within }
            }
            ModelSpec::P1Config { .. } => {
                let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
                for ((i, j), x) in pairs() {
                    a[i] += x;
                    b[j] += x;
                }
                SufficientStats::OutIn {
                    out_degree: a,
                    in_degree: b,
                }
            }
            ModelSpec::DirectedAdditiveSbm { blocks, .. } => {
                let r = blocks.r();
                let (mut a, mut b, mut within) = (vec![0.0; r], vec![0.0; r], vec![0.0; r]);
                for ((i, j), x) in pairs() {
                    let (k, l) = (blocks.block_of(i), blocks.block_of(j));
                    if k == l {
                        within[k] += x;
                    } else {
                        a[k] += x;
                        b[l] += x;
                    }
                }
                SufficientStats::DirectedAdditiveBlocks {
                    out_degree: a,
                    in_degree: b,
                    within,
                }
            }
        }
    }

    /// Flat parameter vector, ordered to pair with [`SufficientStats::to_vec`].
    pub fn params(&self) -> Vec<f64> {
        match self {
            ModelSpec::Saturated(l) => l.values().to_vec(),
            ModelSpec::ErdosRenyi { theta, .. } => vec![*theta],
            ModelSpec::Beta { beta } => beta.clone(),
            ModelSpec::Sbm { blocks, eta } => upper_pairs(blocks.r()).map(|(k, l)| eta[k][l]).collect(),
            ModelSpec::AdditiveSbm { delta, eta_diag, .. } => [delta.as_slice(), eta_diag].concat(),
            ModelSpec::P1Config { alpha, beta } => [alpha.as_slice(), beta].concat(),
            ModelSpec::DirectedAdditiveSbm {
                delta,
                lambda,
                eta_diag,
                ..
            } => [delta.as_slice(), lambda, eta_diag].concat(),
        }
    }

    /// Human-readable names matching [`ModelSpec::params`].
    pub fn param_names(&self) -> Vec<String> {
        let named = |p: &str, k: usize| (0..k).map(|i| format!("{p}[{i}]")).collect::<Vec<_>>();
        match self {
            ModelSpec::Saturated(l) => dyads(l.n(), l.is_directed())
                .map(|(i, j)| format!("theta[{i},{j}]"))
                .collect(),
            ModelSpec::ErdosRenyi { .. } => vec!["theta".into()],
            ModelSpec::Beta { beta } => named("beta", beta.len()),
            ModelSpec::Sbm { blocks, .. } => upper_pairs(blocks.r())
                .map(|(k, l)| format!("eta[{k},{l}]"))
                .collect(),
            ModelSpec::AdditiveSbm { blocks, .. } => {
                [named("delta", blocks.r()), named("eta_diag", blocks.r())].concat()
            }
            ModelSpec::P1Config { alpha, .. } => [named("alpha", alpha.len()), named("beta", alpha.len())].concat(),
            ModelSpec::DirectedAdditiveSbm { blocks, .. } => [
                named("delta", blocks.r()),
                named("lambda", blocks.r()),
                named("eta_diag", blocks.r()),
            ]
            .concat(),
        }
    }

    /// Same family and structure with a new flat parameter vector. The gauge
    /// is left as given.
    pub fn with_params(&self, p: &[f64]) -> Result<ModelSpec> {
        let expected = self.params().len();
        check_len(p, expected, "parameter vector")?;
        let m = match self {
            ModelSpec::Saturated(l) => ModelSpec::Saturated(LogitMatrix::new(l.n(), l.is_directed(), p.to_vec())?),
            ModelSpec::ErdosRenyi { directed, .. } => ModelSpec::ErdosRenyi {
                theta: p[0],
                directed: *directed,
            },
            ModelSpec::Beta { .. } => ModelSpec::Beta { beta: p.to_vec() },
            ModelSpec::Sbm { blocks, .. } => ModelSpec::sbm_from_upper(blocks.clone(), p)?,
            ModelSpec::AdditiveSbm { blocks, .. } => {
                let r = blocks.r();
                ModelSpec::AdditiveSbm {
                    blocks: blocks.clone(),
                    delta: p[..r].to_vec(),
                    eta_diag: p[r..].to_vec(),
                }
            }
            ModelSpec::P1Config { alpha, .. } => {
                let n = alpha.len();
                ModelSpec::P1Config {
                    alpha: p[..n].to_vec(),
                    beta: p[n..].to_vec(),
                }
            }
            ModelSpec::DirectedAdditiveSbm { blocks, .. } => {
                let r = blocks.r();
                ModelSpec::DirectedAdditiveSbm {
                    blocks: blocks.clone(),
                    delta: p[..r].to_vec(),
                    lambda: p[r..2 * r].to_vec(),
                    eta_diag: p[2 * r..].to_vec(),
                }
            }
        };
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const LN2: f64 = std::f64::consts::LN_2;

    fn triangle() -> Graph {
        Graph::from_edges(3, false, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn beta_logits_are_pairwise_sums() {
        let m = ModelSpec::beta(vec![1.0, 2.0, 3.0]).unwrap();
        let l = m.logits(3).unwrap();
        assert_eq!(l.values(), &[3.0, 4.0, 5.0]);
        assert_eq!(l.get(2, 1), Some(5.0));
    }

    #[test]
    fn erdos_renyi_logits_and_probabilities() {
        let m = ModelSpec::erdos_renyi(0.0, false).unwrap();
        assert_eq!(m.logits(3).unwrap().values(), &[0.0; 3]);
        assert_eq!(m.dyad_probabilities(3).unwrap(), vec![0.5; 3]);
    }

    #[test]
    fn p1_logits() {
        let m = ModelSpec::p1_config(vec![1.0, 0.0], vec![0.5, -0.5]).unwrap();
        let l = m.logits(2).unwrap();
        assert_eq!(l.get(0, 1), Some(0.5));
        assert_eq!(l.get(1, 0), Some(0.5));
    }

    #[test]
    fn block_family_logits() {
        let blocks = BlockAssignment::new(vec![0, 0, 1]).unwrap();
        let m = ModelSpec::additive_sbm(blocks.clone(), vec![0.5, -1.0], vec![2.0, 7.0]).unwrap();
        let l = m.logits(3).unwrap();
        assert_eq!(l.get(0, 1), Some(2.0));
        assert_eq!(l.get(0, 2), Some(-0.5));
        let d = ModelSpec::directed_additive_sbm(blocks, vec![0.0, 0.0], vec![1.0, -1.0], vec![3.0, 0.0]).unwrap();
        let l = d.logits(3).unwrap();
        assert_eq!(l.get(0, 2), Some(-1.0));
        assert_eq!(l.get(2, 0), Some(1.0));
        assert_eq!(l.get(1, 0), Some(3.0));
    }

    #[test]
    fn dimension_errors() {
        let m = ModelSpec::beta(vec![0.0; 3]).unwrap();
        assert!(matches!(m.logits(4), Err(Error::DimensionMismatch { .. })));
        assert!(ModelSpec::beta(vec![f64::NAN]).is_err());
        let blocks = BlockAssignment::new(vec![0, 1]).unwrap();
        assert!(ModelSpec::additive_sbm(blocks.clone(), vec![0.0], vec![0.0, 0.0]).is_err());
        assert!(ModelSpec::sbm(blocks, vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn log_partition_examples() {
        let er = ModelSpec::erdos_renyi(0.0, false).unwrap();
        assert_abs_diff_eq!(er.log_partition(3).unwrap(), 3.0 * LN2, epsilon = 1e-15);
        let er = ModelSpec::erdos_renyi(0.0, true).unwrap();
        assert_abs_diff_eq!(er.log_partition(2).unwrap(), 2.0 * LN2, epsilon = 1e-15);
        // two graphs on two nodes: 1 + e^{log 3} = 4
        let h = 3f64.ln() / 2.0;
        let b = ModelSpec::beta(vec![h, h]).unwrap();
        assert_abs_diff_eq!(b.log_partition(2).unwrap(), 4f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn log_likelihood_examples() {
        let er = ModelSpec::erdos_renyi(0.0, false).unwrap();
        for g in [Graph::empty(3, false), triangle()] {
            assert_abs_diff_eq!(er.log_likelihood(&g).unwrap(), -3.0 * LN2, epsilon = 1e-15);
        }
        let b = ModelSpec::beta(vec![0.0; 3]).unwrap();
        assert_abs_diff_eq!(
            b.log_likelihood(&Graph::empty(3, false)).unwrap(),
            -3.0 * LN2,
            epsilon = 1e-15
        );
        let b = ModelSpec::beta(vec![1.0, 1.0]).unwrap();
        let g = Graph::from_edges(2, false, [(0, 1)]).unwrap();
        let expected = 2.0 - (1.0 + 2f64.exp()).ln();
        assert_abs_diff_eq!(b.log_likelihood(&g).unwrap(), expected, epsilon = 1e-15);
        assert!(b.log_likelihood(&Graph::empty(2, true)).is_err());
    }

    #[test]
    fn sufficient_stats_examples() {
        let b = ModelSpec::beta(vec![0.0; 3]).unwrap();
        assert_eq!(
            b.sufficient_stats(&triangle()).unwrap(),
            SufficientStats::Degrees(vec![2.0; 3])
        );
        let blocks = BlockAssignment::new(vec![0, 0, 1, 1]).unwrap();
        let sbm = ModelSpec::sbm_from_upper(blocks, &[0.0; 3]).unwrap();
        assert_eq!(
            sbm.sufficient_stats(&Graph::complete(4, false)).unwrap(),
            SufficientStats::BlockPairs(vec![1.0, 4.0, 1.0])
        );
        let cyc = Graph::from_edges(3, true, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let d = ModelSpec::directed_additive_sbm(BlockAssignment::singletons(3), vec![0.0; 3], vec![0.0; 3], vec![0.0; 3])
            .unwrap();
        assert_eq!(
            d.sufficient_stats(&cyc).unwrap(),
            SufficientStats::DirectedAdditiveBlocks {
                out_degree: vec![1.0; 3],
                in_degree: vec![1.0; 3],
                within: vec![0.0; 3]
            }
        );
        assert!(b.sufficient_stats(&cyc).is_err());
    }

    #[test]
    fn expected_stats_examples() {
        let b = ModelSpec::beta(vec![0.0; 4]).unwrap();
        assert_eq!(b.expected_stats(4).unwrap(), SufficientStats::Degrees(vec![1.5; 4]));
        let b = ModelSpec::beta(vec![0.0; 3]).unwrap();
        assert_eq!(b.expected_stats(3).unwrap(), SufficientStats::Degrees(vec![1.0; 3]));
        let er = ModelSpec::erdos_renyi(0.0, false).unwrap();
        assert_eq!(er.expected_stats(4).unwrap(), SufficientStats::EdgeCount(3.0));
    }

    #[test]
    fn aggregation_of_bits_matches_graph_counters() {
        let blocks = BlockAssignment::new(vec![0, 1, 1, 2, 0]).unwrap();
        let g = Graph::from_edges(5, false, [(0, 1), (1, 2), (3, 4), (0, 4), (2, 3)]).unwrap();
        let bits: Vec<f64> = g.dyad_bits().iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
        let models = [
            ModelSpec::beta(vec![0.0; 5]).unwrap(),
            ModelSpec::sbm_from_upper(blocks.clone(), &[0.0; 6]).unwrap(),
            ModelSpec::additive_sbm(blocks, vec![0.0; 3], vec![0.0; 3]).unwrap(),
        ];
        for m in models {
            assert_eq!(m.aggregate(5, &bits), m.sufficient_stats(&g).unwrap());
        }
    }

    #[test]
    fn p1_gauge_is_normalized_and_logit_invariant() {
        let raw = ModelSpec::P1Config {
            alpha: vec![0.3, -0.1, 0.4],
            beta: vec![1.0, 2.0, 0.0],
        };
        let norm = raw.clone().normalized();
        if let ModelSpec::P1Config { beta, .. } = &norm {
            assert_abs_diff_eq!(beta.iter().sum::<f64>(), 0.0, epsilon = 1e-15);
        }
        let (a, b) = (raw.logits(3).unwrap(), norm.logits(3).unwrap());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-14);
        }
    }

    #[test]
    fn params_round_trip_through_with_params() {
        let blocks = BlockAssignment::new(vec![0, 1, 2, 1]).unwrap();
        let m = ModelSpec::directed_additive_sbm(blocks, vec![1.0, 2.0, 3.0], vec![0.5, -0.5, 0.0], vec![4.0, 5.0, 6.0])
            .unwrap();
        let p = m.params();
        assert_eq!(m.param_names().len(), p.len());
        assert_eq!(m.with_params(&p).unwrap(), m);
        assert!(m.with_params(&p[1..]).is_err());
    }

    #[test]
    fn family_names_parse() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("p2".parse::<Family>().is_err());
    }
}
