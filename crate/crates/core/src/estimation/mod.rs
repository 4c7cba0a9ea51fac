//! Maximum-likelihood estimation for every family.
//!
//! * β model: fixed-point iteration on the degree moment equations.
//! * SBM and Erdős–Rényi: closed form, one logit per dyad group.
//! * p1/configuration and the additive SBMs: damped Newton ascent on the
//!   concave log-likelihood, after a rank screen on the statistic design.
//!
//! Every fit re-checks moment matching with an independent evaluation of
//! expected minus observed statistics; `converged` is only set when that gap
//! is within tolerance. Boundary statistics are screened before fitting, but
//! the screen is a necessary condition only: passing it does not guarantee
//! that the estimate exists.

mod beta;
mod families;
mod newton;

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{BlockAssignment, Graph};
use crate::models::{upper_pairs, Family, ModelSpec, SufficientStats};

pub use beta::fit_beta;
pub use families::{
    fit_additive_sbm, fit_directed_additive_sbm, fit_erdos_renyi, fit_p1_config, fit_saturated, fit_sbm,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Tolerance on the ∞-norm moment gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Any parameter beyond this magnitude is treated as escaping to infinity.
    pub divergence_bound: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 5000,
            divergence_bound: 50.0,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter == 0 || !(self.divergence_bound > 0.0) {
            return Err(Error::Precondition(format!(
                "invalid fit options: tol={}, max_iter={}, divergence_bound={}",
                self.tol, self.max_iter, self.divergence_bound
            )));
        }
        Ok(())
    }
}

/// A sufficient statistic component, named by what it counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Dyad(usize, usize),
    EdgeCount,
    Degree(usize),
    OutDegree(usize),
    InDegree(usize),
    BlockPair(usize, usize),
    BlockDegree(usize),
    BlockOutDegree(usize),
    BlockInDegree(usize),
    WithinBlock(usize),
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Dyad(i, j) => write!(f, "dyad ({i},{j})"),
            Statistic::EdgeCount => write!(f, "edge count"),
            Statistic::Degree(i) => write!(f, "degree of node {i}"),
            Statistic::OutDegree(i) => write!(f, "out-degree of node {i}"),
            Statistic::InDegree(i) => write!(f, "in-degree of node {i}"),
            Statistic::BlockPair(k, l) => write!(f, "edges between blocks {k} and {l}"),
            Statistic::BlockDegree(k) => write!(f, "between-block degree of block {k}"),
            Statistic::BlockOutDegree(k) => write!(f, "between-block out-degree of block {k}"),
            Statistic::BlockInDegree(k) => write!(f, "between-block in-degree of block {k}"),
            Statistic::WithinBlock(k) => write!(f, "edges within block {k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    /// The statistic sits at its minimum achievable value.
    Lower,
    /// The statistic sits at its maximum achievable value.
    Upper,
}

/// A statistic observed at the edge of its achievable range.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryViolation {
    pub statistic: Statistic,
    pub value: f64,
    pub bound: Bound,
}

impl BoundaryViolation {
    /// Node (or block) the statistic belongs to, if any.
    pub fn subject(&self) -> Option<usize> {
        match self.statistic {
            Statistic::Degree(i)
            | Statistic::OutDegree(i)
            | Statistic::InDegree(i)
            | Statistic::BlockDegree(i)
            | Statistic::BlockOutDegree(i)
            | Statistic::BlockInDegree(i)
            | Statistic::WithinBlock(i) => Some(i),
            _ => None,
        }
    }
}

impl fmt::Display for BoundaryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.bound {
            Bound::Lower => "minimum",
            Bound::Upper => "maximum",
        };
        write!(f, "{} = {} is at its {side}", self.statistic, self.value)
    }
}

/// Structured notes attached to a fit.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// Gauge convention the reported parameters satisfy.
    Gauge(&'static str),
    /// A parameter with no dyads behind it; reported as 0.
    EmptyDyadGroup { parameter: String },
    /// Single-block additive SBM: no between-block parameters to estimate.
    NoBetweenBlockDyads,
    NotConverged { iterations: usize, moment_gap: f64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Gauge(g) => write!(f, "gauge: {g}"),
            Diagnostic::EmptyDyadGroup { parameter } => {
                write!(f, "{parameter} has no dyads and is reported as 0")
            }
            Diagnostic::NoBetweenBlockDyads => {
                write!(f, "single block: between-block parameters are not estimated")
            }
            Diagnostic::NotConverged {
                iterations,
                moment_gap,
            } => write!(f, "not converged after {iterations} iterations (moment gap {moment_gap:e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: ModelSpec,
    pub iterations: usize,
    pub converged: bool,
    /// ∞-norm of expected minus observed sufficient statistics at `params`.
    pub max_moment_gap: f64,
    pub diagnostics: Vec<Diagnostic>,
    /// Log-likelihood at the start and after every accepted iteration; empty
    /// for closed-form fits.
    pub log_likelihood_trace: Vec<f64>,
}

/// Independent moment-gap evaluation through the models module.
pub fn moment_gap(m: &ModelSpec, g: &Graph) -> Result<f64> {
    m.expected_stats(g.n())?.max_abs_diff(&m.sufficient_stats(g)?)
}

pub(crate) fn finish(
    params: ModelSpec,
    g: &Graph,
    iterations: usize,
    solver_converged: bool,
    opts: &FitOptions,
    mut diagnostics: Vec<Diagnostic>,
    log_likelihood_trace: Vec<f64>,
) -> Result<FitResult> {
    let gap = moment_gap(&params, g)?;
    let converged = solver_converged && gap <= opts.tol;
    if !converged {
        diagnostics.push(Diagnostic::NotConverged {
            iterations,
            moment_gap: gap,
        });
    }
    Ok(FitResult {
        params,
        iterations,
        converged,
        max_moment_gap: gap,
        diagnostics,
        log_likelihood_trace,
    })
}

fn flag(out: &mut Vec<BoundaryViolation>, statistic: Statistic, value: f64, max: f64) {
    if value <= 0.0 {
        out.push(BoundaryViolation {
            statistic,
            value,
            bound: Bound::Lower,
        });
    } else if value >= max {
        out.push(BoundaryViolation {
            statistic,
            value,
            bound: Bound::Upper,
        });
    }
}

/// Lists every statistic at its minimum or maximum achievable value.
///
/// Groups with no dyads at all (a singleton block's within-block count) are
/// skipped. An empty list means the screen passed, which is necessary but not
/// sufficient for the estimate to exist.
pub fn existence_screen(
    stats: &SufficientStats,
    family: Family,
    n: usize,
    directed: bool,
    blocks: Option<&BlockAssignment>,
) -> Result<Vec<BoundaryViolation>> {
    let mut out = Vec::new();
    let need_blocks = || {
        blocks.ok_or_else(|| Error::Precondition(format!("{family} screen needs a block assignment")))
    };
    let shape = || Error::Precondition(format!("statistics do not belong to the {family} family"));
    let top = (n.saturating_sub(1)) as f64;
    match (family, stats) {
        (Family::Saturated, SufficientStats::Dyads(x)) => {
            for ((i, j), &v) in crate::graph::dyads(n, directed).zip(x) {
                flag(&mut out, Statistic::Dyad(i, j), v, 1.0);
            }
        }
        (Family::ErdosRenyi, SufficientStats::EdgeCount(e)) => {
            let total = crate::graph::dyad_count(n, directed);
            if total > 0 {
                flag(&mut out, Statistic::EdgeCount, *e, total as f64);
            }
        }
        (Family::Beta, SufficientStats::Degrees(d)) => {
            for (i, &v) in d.iter().enumerate() {
                flag(&mut out, Statistic::Degree(i), v, top);
            }
        }
        (Family::P1Config, SufficientStats::OutIn { out_degree, in_degree }) => {
            for (i, &v) in out_degree.iter().enumerate() {
                flag(&mut out, Statistic::OutDegree(i), v, top);
            }
            for (i, &v) in in_degree.iter().enumerate() {
                flag(&mut out, Statistic::InDegree(i), v, top);
            }
        }
        (Family::Sbm, SufficientStats::BlockPairs(e)) => {
            let b = need_blocks()?;
            for ((k, l), &v) in upper_pairs(b.r()).zip(e) {
                let total = b.pair_dyads(k, l, false);
                if total > 0 {
                    flag(&mut out, Statistic::BlockPair(k, l), v, total as f64);
                }
            }
        }
        (Family::AdditiveSbm, SufficientStats::AdditiveBlocks { degree, within }) => {
            let b = need_blocks()?;
            let r = b.r();
            for k in 0..r {
                let between: usize = (0..r).filter(|&l| l != k).map(|l| b.pair_dyads(k, l, false)).sum();
                if between > 0 {
                    flag(&mut out, Statistic::BlockDegree(k), degree[k], between as f64);
                }
                let inside = b.pair_dyads(k, k, false);
                if inside > 0 {
                    flag(&mut out, Statistic::WithinBlock(k), within[k], inside as f64);
                }
            }
        }
        (
            Family::DirectedAdditiveSbm,
            SufficientStats::DirectedAdditiveBlocks {
                out_degree,
                in_degree,
                within,
            },
        ) => {
            let b = need_blocks()?;
            let r = b.r();
            for k in 0..r {
                let between: usize = (0..r).filter(|&l| l != k).map(|l| b.pair_dyads(k, l, true)).sum();
                if between > 0 {
                    flag(&mut out, Statistic::BlockOutDegree(k), out_degree[k], between as f64);
                    flag(&mut out, Statistic::BlockInDegree(k), in_degree[k], between as f64);
                }
                let inside = b.pair_dyads(k, k, true);
                if inside > 0 {
                    flag(&mut out, Statistic::WithinBlock(k), within[k], inside as f64);
                }
            }
        }
        _ => return Err(shape()),
    }
    Ok(out)
}

pub(crate) fn nonexistent(reason: impl Into<String>, violations: Vec<BoundaryViolation>) -> Error {
    let mut diverging: Vec<usize> = violations.iter().filter_map(BoundaryViolation::subject).collect();
    diverging.sort_unstable();
    diverging.dedup();
    Error::NonexistentMle {
        reason: reason.into(),
        violations,
        diverging,
    }
}

/// Fits `family` to `g`, dispatching to the family's estimator.
pub fn fit(family: Family, g: &Graph, blocks: Option<&BlockAssignment>, opts: &FitOptions) -> Result<FitResult> {
    let blocks = || blocks.ok_or_else(|| Error::Precondition(format!("{family} needs a block assignment")));
    match family {
        Family::Saturated => fit_saturated(g, opts),
        Family::ErdosRenyi => fit_erdos_renyi(g, opts),
        Family::Beta => fit_beta(g, opts),
        Family::Sbm => fit_sbm(g, blocks()?, opts),
        Family::AdditiveSbm => fit_additive_sbm(g, blocks()?, opts),
        Family::P1Config => fit_p1_config(g, opts),
        Family::DirectedAdditiveSbm => fit_directed_additive_sbm(g, blocks()?, opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn screen_examples() {
        let k4 = Graph::complete(4, false).degree_sequence().unwrap();
        let stats = SufficientStats::Degrees(k4.iter().map(|&d| d as f64).collect());
        let v = existence_screen(&stats, Family::Beta, 4, false, None).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|x| x.bound == Bound::Upper));

        let path = SufficientStats::Degrees(vec![1.0, 2.0, 2.0, 1.0]);
        assert!(existence_screen(&path, Family::Beta, 4, false, None).unwrap().is_empty());

        let isolated = SufficientStats::Degrees(vec![0.0, 1.0, 1.0]);
        let v = existence_screen(&isolated, Family::Beta, 3, false, None).unwrap();
        assert_eq!(
            v,
            vec![BoundaryViolation {
                statistic: Statistic::Degree(0),
                value: 0.0,
                bound: Bound::Lower
            }]
        );
    }

    #[test]
    fn screen_needs_blocks_and_matching_shape() {
        let s = SufficientStats::BlockPairs(vec![1.0]);
        assert!(existence_screen(&s, Family::Sbm, 2, false, None).is_err());
        assert!(existence_screen(&s, Family::Beta, 2, false, None).is_err());
    }

    #[test]
    fn options_validate() {
        assert!(FitOptions::default().validate().is_ok());
        let bad = FitOptions {
            tol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
