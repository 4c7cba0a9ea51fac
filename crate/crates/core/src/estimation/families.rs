use crate::error::{Error, Result};
use crate::graph::{BlockAssignment, BlockDegrees, Graph};
use crate::models::{upper_pairs, Family, ModelSpec, SufficientStats};
use crate::numeric::logit;

use super::newton::{DyadGroup, LinearDesign, NewtonFailure};
use super::{existence_screen, finish, nonexistent, Diagnostic, FitOptions, FitResult};

fn as_f64(v: Vec<usize>) -> Vec<f64> {
    v.into_iter().map(|x| x as f64).collect()
}

/// Every dyad is its own group, so the saturated estimate never exists for a
/// graph with at least one dyad.
pub fn fit_saturated(g: &Graph, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let bits: Vec<f64> = g.dyad_bits().iter().map(|&b| f64::from(u8::from(b))).collect();
    let violations = existence_screen(&SufficientStats::Dyads(bits), Family::Saturated, g.n(), g.is_directed(), None)?;
    if !violations.is_empty() {
        return Err(nonexistent("every dyad of the saturated model is on the boundary", violations));
    }
    let logits = crate::models::LogitMatrix::new(g.n(), g.is_directed(), Vec::new())?;
    finish(ModelSpec::Saturated(logits), g, 0, true, opts, Vec::new(), Vec::new())
}

/// Closed form `θ̂ = logit(edges / dyads)`.
pub fn fit_erdos_renyi(g: &Graph, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let edges = g.edge_count() as f64;
    let violations = existence_screen(
        &SufficientStats::EdgeCount(edges),
        Family::ErdosRenyi,
        g.n(),
        g.is_directed(),
        None,
    )?;
    if !violations.is_empty() || g.dyad_count() == 0 {
        return Err(nonexistent("edge count on the boundary", violations));
    }
    let theta = logit(edges / g.dyad_count() as f64);
    finish(ModelSpec::erdos_renyi(theta, g.is_directed())?, g, 0, true, opts, Vec::new(), Vec::new())
}

/// Closed form `η̂_kl = logit(e_kl / N_kl)`: the SBM likelihood separates over
/// block pairs.
pub fn fit_sbm(g: &Graph, blocks: &BlockAssignment, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    g.expect_directed(false)?;
    let counts = g.block_edge_counts(blocks)?;
    let r = blocks.r();
    let stats = SufficientStats::BlockPairs(upper_pairs(r).map(|(k, l)| counts.get(k, l) as f64).collect());
    let violations = existence_screen(&stats, Family::Sbm, g.n(), false, Some(blocks))?;
    if !violations.is_empty() {
        return Err(nonexistent("block pairs with no edges or all edges", violations));
    }
    let mut diagnostics = Vec::new();
    let mut upper = Vec::with_capacity(r * (r + 1) / 2);
    for (k, l) in upper_pairs(r) {
        let total = blocks.pair_dyads(k, l, false);
        if total == 0 {
            diagnostics.push(Diagnostic::EmptyDyadGroup {
                parameter: format!("eta[{k},{l}]"),
            });
            upper.push(0.0);
        } else {
            upper.push(logit(counts.get(k, l) as f64 / total as f64));
        }
    }
    let params = ModelSpec::sbm_from_upper(blocks.clone(), &upper)?;
    finish(params, g, 0, true, opts, diagnostics, Vec::new())
}

/// Parameter bookkeeping for the Newton-fitted families: which model
/// coordinates are free, and what they are called.
struct Layout {
    names: Vec<String>,
    /// Node or block each free parameter belongs to.
    subjects: Vec<usize>,
}

impl Layout {
    fn new() -> Self {
        Self {
            names: Vec::new(),
            subjects: Vec::new(),
        }
    }

    fn push(&mut self, name: String, subject: usize) -> usize {
        self.names.push(name);
        self.subjects.push(subject);
        self.names.len() - 1
    }
}

struct NewtonRun {
    params: Vec<f64>,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn check_identifiable(design: &LinearDesign, layout: &Layout) -> Result<()> {
    if let Some(direction) = design.null_direction() {
        let (names, direction) = layout
            .names
            .iter()
            .zip(direction)
            .filter(|(_, v)| *v != 0.0)
            .map(|(n, v)| (n.clone(), v))
            .unzip();
        return Err(Error::UnidentifiableParameters { names, direction });
    }
    Ok(())
}

fn run_newton(design: &LinearDesign, start: Vec<f64>, layout: &Layout, opts: &FitOptions) -> Result<NewtonRun> {
    match design.maximize(start, opts.tol, opts.max_iter, opts.divergence_bound) {
        Ok(out) => Ok(NewtonRun {
            params: out.params,
            iterations: out.iterations,
            converged: out.converged,
            trace: out.path,
        }),
        Err(NewtonFailure::Diverged(idx)) => {
            let mut diverging: Vec<usize> = idx.iter().map(|&k| layout.subjects[k]).collect();
            diverging.sort_unstable();
            diverging.dedup();
            Err(Error::NonexistentMle {
                reason: format!(
                    "parameters {} exceeded the divergence bound {}",
                    idx.iter().map(|&k| layout.names[k].as_str()).collect::<Vec<_>>().join(", "),
                    opts.divergence_bound
                ),
                violations: Vec::new(),
                diverging,
            })
        }
        Err(NewtonFailure::LineSearch { iteration, gradient }) => Err(Error::NonexistentMle {
            reason: format!("no ascent step at iteration {iteration} (gradient {gradient:e}); treating as divergence"),
            violations: Vec::new(),
            diverging: Vec::new(),
        }),
        Err(NewtonFailure::SingularHessian { iteration }) => Err(Error::NonexistentMle {
            reason: format!("information matrix became singular at iteration {iteration}"),
            violations: Vec::new(),
            diverging: Vec::new(),
        }),
    }
}

/// p1/configuration model `θ_ij = α_i + β_j`, reported with `Σβ = 0`.
pub fn fit_p1_config(g: &Graph, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let (a, b) = g.out_in_degrees()?;
    let n = g.n();
    let stats = SufficientStats::OutIn {
        out_degree: as_f64(a),
        in_degree: as_f64(b),
    };
    let violations = existence_screen(&stats, Family::P1Config, n, true, None)?;
    if !violations.is_empty() {
        return Err(nonexistent("in- or out-degrees on the boundary", violations));
    }

    // β_0 is pinned to 0 while fitting; the gauge is restored afterwards.
    let mut layout = Layout::new();
    let alpha_idx: Vec<usize> = (0..n).map(|i| layout.push(format!("alpha[{i}]"), i)).collect();
    let beta_idx: Vec<Option<usize>> = (0..n)
        .map(|j| (j > 0).then(|| layout.push(format!("beta[{j}]"), j)))
        .collect();
    let groups = crate::graph::dyads(n, true)
        .map(|(i, j)| {
            let mut coeffs = vec![(alpha_idx[i], 1.0)];
            if let Some(bj) = beta_idx[j] {
                coeffs.push((bj, 1.0));
            }
            DyadGroup {
                coeffs,
                dyads: 1.0,
                edges: f64::from(u8::from(g.has_edge(i, j))),
            }
        })
        .collect();
    let design = LinearDesign {
        n_params: layout.names.len(),
        groups,
    };
    check_identifiable(&design, &layout)?;
    let NewtonRun {
        params: phi,
        iterations,
        converged,
        trace,
    } = run_newton(&design, vec![0.0; design.n_params], &layout, opts)?;
    let alpha = alpha_idx.iter().map(|&k| phi[k]).collect();
    let beta = beta_idx.iter().map(|k| k.map_or(0.0, |k| phi[k])).collect();
    let params = ModelSpec::p1_config(alpha, beta)?;
    finish(params, g, iterations, converged, opts, vec![Diagnostic::Gauge("sum(beta) = 0")], trace)
}

/// Within-block parameters, one per block that has at least one dyad.
fn within_params(
    layout: &mut Layout,
    blocks: &BlockAssignment,
    directed: bool,
    within: &[usize],
    groups: &mut Vec<DyadGroup>,
    start: &mut Vec<f64>,
    diagnostics: &mut Vec<Diagnostic>,
) -> Vec<Option<usize>> {
    (0..blocks.r())
        .map(|k| {
            let total = blocks.pair_dyads(k, k, directed);
            let name = format!("eta_diag[{k}]");
            if total == 0 {
                diagnostics.push(Diagnostic::EmptyDyadGroup { parameter: name });
                return None;
            }
            let idx = layout.push(name, k);
            groups.push(DyadGroup {
                coeffs: vec![(idx, 1.0)],
                dyads: total as f64,
                edges: within[k] as f64,
            });
            start.push(logit(within[k] as f64 / total as f64));
            Some(idx)
        })
        .collect()
}

/// Undirected additive SBM: `θ_ij = δ_b(i) + δ_b(j)` between blocks, a free
/// `η_kk` within block `k`.
pub fn fit_additive_sbm(g: &Graph, blocks: &BlockAssignment, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    g.expect_directed(false)?;
    let BlockDegrees::Undirected { degree, within } = g.block_degrees(blocks)? else {
        unreachable!("undirected graph")
    };
    let r = blocks.r();
    let stats = SufficientStats::AdditiveBlocks {
        degree: as_f64(degree),
        within: as_f64(within.clone()),
    };
    let counts = g.block_edge_counts(blocks)?;

    let mut layout = Layout::new();
    let mut diagnostics = Vec::new();
    let mut groups = Vec::new();
    let mut start = Vec::new();
    let delta_idx: Vec<Option<usize>> = (0..r)
        .map(|k| (r > 1).then(|| layout.push(format!("delta[{k}]"), k)))
        .collect();
    start.extend(delta_idx.iter().flatten().map(|_| 0.0));
    if r == 1 {
        diagnostics.push(Diagnostic::NoBetweenBlockDyads);
    }
    for k in 0..r {
        for l in (k + 1)..r {
            groups.push(DyadGroup {
                coeffs: vec![(delta_idx[k].unwrap(), 1.0), (delta_idx[l].unwrap(), 1.0)],
                dyads: blocks.pair_dyads(k, l, false) as f64,
                edges: counts.get(k, l) as f64,
            });
        }
    }
    let eta_idx = within_params(&mut layout, blocks, false, &within, &mut groups, &mut start, &mut diagnostics);
    let design = LinearDesign {
        n_params: layout.names.len(),
        groups,
    };
    check_identifiable(&design, &layout)?;
    let violations = existence_screen(&stats, Family::AdditiveSbm, g.n(), false, Some(blocks))?;
    if !violations.is_empty() {
        return Err(nonexistent("block statistics on the boundary", violations));
    }
    let NewtonRun {
        params: phi,
        iterations,
        converged,
        trace,
    } = run_newton(&design, start, &layout, opts)?;
    let pick = |idx: &[Option<usize>]| idx.iter().map(|k| k.map_or(0.0, |k| phi[k])).collect::<Vec<_>>();
    let params = ModelSpec::additive_sbm(blocks.clone(), pick(&delta_idx), pick(&eta_idx))?;
    finish(params, g, iterations, converged, opts, diagnostics, trace)
}

/// Directed additive SBM: `θ_ij = δ_b(i) + λ_b(j)` between blocks, a free
/// `η_kk` within block `k`; reported with `Σλ = 0`.
pub fn fit_directed_additive_sbm(g: &Graph, blocks: &BlockAssignment, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    g.expect_directed(true)?;
    let BlockDegrees::Directed {
        out_degree,
        in_degree,
        within,
    } = g.block_degrees(blocks)?
    else {
        unreachable!("directed graph")
    };
    let r = blocks.r();
    let stats = SufficientStats::DirectedAdditiveBlocks {
        out_degree: as_f64(out_degree),
        in_degree: as_f64(in_degree),
        within: as_f64(within.clone()),
    };
    let counts = g.block_edge_counts(blocks)?;

    let mut layout = Layout::new();
    let mut diagnostics = vec![Diagnostic::Gauge("sum(lambda) = 0")];
    let mut groups = Vec::new();
    let delta_idx: Vec<Option<usize>> = (0..r)
        .map(|k| (r > 1).then(|| layout.push(format!("delta[{k}]"), k)))
        .collect();
    // λ_0 pinned to 0 while fitting.
    let lambda_idx: Vec<Option<usize>> = (0..r)
        .map(|l| (r > 1 && l > 0).then(|| layout.push(format!("lambda[{l}]"), l)))
        .collect();
    let mut start = vec![0.0; layout.names.len()];
    if r == 1 {
        diagnostics.push(Diagnostic::NoBetweenBlockDyads);
    }
    for k in 0..r {
        for l in 0..r {
            if k == l {
                continue;
            }
            let mut coeffs = vec![(delta_idx[k].unwrap(), 1.0)];
            if let Some(li) = lambda_idx[l] {
                coeffs.push((li, 1.0));
            }
            groups.push(DyadGroup {
                coeffs,
                dyads: blocks.pair_dyads(k, l, true) as f64,
                edges: counts.get(k, l) as f64,
            });
        }
    }
    let eta_idx = within_params(&mut layout, blocks, true, &within, &mut groups, &mut start, &mut diagnostics);
    let design = LinearDesign {
        n_params: layout.names.len(),
        groups,
    };
    check_identifiable(&design, &layout)?;
    let violations = existence_screen(&stats, Family::DirectedAdditiveSbm, g.n(), true, Some(blocks))?;
    if !violations.is_empty() {
        return Err(nonexistent("block statistics on the boundary", violations));
    }
    let NewtonRun {
        params: phi,
        iterations,
        converged,
        trace,
    } = run_newton(&design, start, &layout, opts)?;
    let pick = |idx: &[Option<usize>]| idx.iter().map(|k| k.map_or(0.0, |k| phi[k])).collect::<Vec<_>>();
    let params = ModelSpec::directed_additive_sbm(blocks.clone(), pick(&delta_idx), pick(&lambda_idx), pick(&eta_idx))?;
    finish(params, g, iterations, converged, opts, diagnostics, trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> FitOptions {
        FitOptions::default()
    }

    fn two_pairs() -> BlockAssignment {
        BlockAssignment::new(vec![0, 0, 1, 1]).unwrap()
    }

    #[test]
    fn sbm_on_k4_is_saturated() {
        let err = fit_sbm(&Graph::complete(4, false), &two_pairs(), &opts()).unwrap_err();
        let Error::NonexistentMle { violations, .. } = err else { panic!() };
        assert_eq!(violations.len(), 3);
    }

    #[test]
    fn sbm_reports_saturated_within_pair() {
        let g = Graph::from_edges(4, false, [(0, 2), (0, 1)]).unwrap();
        let Error::NonexistentMle { violations, .. } = fit_sbm(&g, &two_pairs(), &opts()).unwrap_err() else {
            panic!()
        };
        use super::super::{Bound, Statistic};
        assert!(violations
            .iter()
            .any(|v| v.statistic == Statistic::BlockPair(0, 0) && v.bound == Bound::Upper));
        assert!(!violations.iter().any(|v| v.statistic == Statistic::BlockPair(0, 1)));
    }

    #[test]
    fn sbm_closed_form_block_logits() {
        // blocks {0,1,2},{3,4,5}: 3 dyads within each block, 9 between
        let blocks = BlockAssignment::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let g = Graph::from_edges(6, false, [(0, 1), (3, 4), (0, 3), (0, 4), (1, 5)]).unwrap();
        let fit = fit_sbm(&g, &blocks, &opts()).unwrap();
        let ModelSpec::Sbm { eta, .. } = &fit.params else { panic!() };
        assert!((eta[0][1] - logit(3.0 / 9.0)).abs() < 1e-15);
        assert!((eta[0][0] - logit(1.0 / 3.0)).abs() < 1e-15);
        assert!((eta[1][1] - logit(1.0 / 3.0)).abs() < 1e-15);
        assert!(fit.max_moment_gap < 1e-12);
    }

    #[test]
    fn sbm_full_block_has_no_mle() {
        // the single dyad inside {0,1} is an edge
        let g = Graph::from_edges(4, false, [(0, 1), (0, 2), (1, 3)]).unwrap();
        assert!(matches!(fit_sbm(&g, &two_pairs(), &opts()), Err(Error::NonexistentMle { .. })));
    }

    #[test]
    fn erdos_renyi_closed_form() {
        let g = Graph::from_edges(4, false, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let fit = fit_erdos_renyi(&g, &opts()).unwrap();
        assert_eq!(fit.params, ModelSpec::erdos_renyi(0.0, false).unwrap());
        assert!(fit_erdos_renyi(&Graph::empty(3, false), &opts()).is_err());
    }

    #[test]
    fn saturated_never_exists() {
        let g = Graph::from_edges(3, false, [(0, 1)]).unwrap();
        assert!(matches!(fit_saturated(&g, &opts()), Err(Error::NonexistentMle { .. })));
    }

    #[test]
    fn p1_on_three_cycle() {
        let g = Graph::from_edges(3, true, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let fit = fit_p1_config(&g, &opts()).unwrap();
        assert!(fit.converged);
        let ModelSpec::P1Config { alpha, beta } = &fit.params else { panic!() };
        for v in alpha.iter().chain(beta) {
            assert!(v.abs() < 1e-10, "{v}");
        }
        assert!(fit.diagnostics.contains(&Diagnostic::Gauge("sum(beta) = 0")));
    }

    #[test]
    fn p1_boundary_lists_nodes() {
        let g = Graph::from_edges(3, true, [(0, 1), (0, 2), (1, 2)]).unwrap();
        let Error::NonexistentMle { diverging, .. } = fit_p1_config(&g, &opts()).unwrap_err() else {
            panic!()
        };
        assert!(diverging.contains(&0));
    }

    #[test]
    fn p1_bipartite_orientation_fails_screen() {
        // all edges from {0,1} to {2,3}: sources have in-degree 0, sinks out-degree 0
        let g = Graph::from_edges(4, true, [(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        let Error::NonexistentMle { diverging, violations, .. } = fit_p1_config(&g, &opts()).unwrap_err() else {
            panic!()
        };
        assert_eq!(diverging, vec![0, 1, 2, 3]);
        assert_eq!(violations.len(), 4);
    }

    #[test]
    fn additive_sbm_two_blocks_unidentifiable() {
        let g = Graph::from_edges(4, false, [(0, 2), (1, 3), (0, 1)]).unwrap();
        let b = BlockAssignment::new(vec![0, 0, 1, 1]).unwrap();
        // e_00 = 1 = N_00 would trip the screen first; use blocks of three
        let b3 = BlockAssignment::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let g3 = Graph::from_edges(6, false, [(0, 1), (3, 4), (0, 3), (1, 4), (2, 5)]).unwrap();
        match fit_additive_sbm(&g3, &b3, &opts()).unwrap_err() {
            Error::UnidentifiableParameters { names, direction } => {
                assert_eq!(names, vec!["delta[0]", "delta[1]"]);
                assert_eq!(direction, vec![1.0, -1.0]);
            }
            other => panic!("{other:?}"),
        }
        assert!(fit_additive_sbm(&g, &b, &opts()).is_err());
    }

    #[test]
    fn additive_sbm_single_block_reduces_to_within() {
        let b = BlockAssignment::new(vec![0; 4]).unwrap();
        let g = Graph::from_edges(4, false, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let fit = fit_additive_sbm(&g, &b, &opts()).unwrap();
        let ModelSpec::AdditiveSbm { eta_diag, .. } = &fit.params else { panic!() };
        assert!(eta_diag[0].abs() < 1e-12);
        assert!(fit.diagnostics.contains(&Diagnostic::NoBetweenBlockDyads));
    }

    #[test]
    fn directed_additive_two_blocks_unidentifiable() {
        let b = BlockAssignment::new(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let g = Graph::from_edges(
            6,
            true,
            [(0, 1), (1, 0), (3, 4), (5, 3), (0, 3), (1, 4), (4, 2)],
        )
        .unwrap();
        assert!(matches!(
            fit_directed_additive_sbm(&g, &b, &opts()),
            Err(Error::UnidentifiableParameters { .. })
        ));
    }
}
