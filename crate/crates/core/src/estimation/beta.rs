//! Fixed-point estimation for the β model.
//!
//! The likelihood equations are `d_i = Σ_{j≠i} sigmoid(β_i + β_j)`. Solving
//! each one for `exp(β_i)` with the other coordinates held fixed gives
//!
//! ```text
//! β_i ← log d_i − log Σ_{j≠i} 1 / (exp(−β_j) + exp(β_i))
//! ```
//!
//! which is iterated (Jacobi style) until the moment gap is below tolerance.

use crate::error::Result;
use crate::graph::Graph;
use crate::models::{Family, ModelSpec, SufficientStats};
use crate::numeric::{log1p_exp, logit, max_abs, sigmoid};

use super::{existence_screen, finish, nonexistent, FitOptions, FitResult};
use crate::error::Error;

/// Iterations between checks for steadily growing parameters once the
/// iteration budget runs out.
const GROWTH_WINDOW: usize = 100;

fn expected_degrees(beta: &[f64]) -> Vec<f64> {
    let n = beta.len();
    let mut e = vec![0.0; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let p = sigmoid(beta[i] + beta[j]);
            e[i] += p;
            e[j] += p;
        }
    }
    e
}

fn gap(beta: &[f64], degrees: &[f64]) -> f64 {
    expected_degrees(beta)
        .iter()
        .zip(degrees)
        .fold(0.0, |m, (e, d)| f64::max(m, (e - d).abs()))
}

fn update(beta: &[f64], degrees: &[f64]) -> Vec<f64> {
    (0..beta.len())
        .map(|i| {
            let s: f64 = (0..beta.len())
                .filter(|&j| j != i)
                .map(|j| 1.0 / ((-beta[j]).exp() + beta[i].exp()))
                .sum();
            degrees[i].ln() - s.ln()
        })
        .collect()
}

/// Maximum-likelihood fit of the β model to an undirected graph.
pub fn fit_beta(g: &Graph, opts: &FitOptions) -> Result<FitResult> {
    opts.validate()?;
    let degrees: Vec<f64> = g.degree_sequence()?.into_iter().map(|d| d as f64).collect();
    let n = g.n();
    let violations = existence_screen(&SufficientStats::Degrees(degrees.clone()), Family::Beta, n, false, None)?;
    if !violations.is_empty() {
        return Err(nonexistent("degree sequence on the boundary", violations));
    }

    let half = opts.divergence_bound / 2.0;
    let top = (n - 1) as f64;
    let mut beta: Vec<f64> = degrees.iter().map(|&d| logit(d / top).clamp(-half, half)).collect();
    let mut history = Vec::new();
    let mut trace = vec![log_likelihood(&beta, &degrees)];
    let mut iterations = 0;
    let mut converged = gap(&beta, &degrees) <= opts.tol * 0.5;
    while !converged && iterations < opts.max_iter {
        beta = update(&beta, &degrees);
        iterations += 1;
        let diverging: Vec<usize> = beta
            .iter()
            .enumerate()
            .filter(|(_, b)| !b.is_finite() || b.abs() > opts.divergence_bound)
            .map(|(i, _)| i)
            .collect();
        if !diverging.is_empty() {
            return Err(Error::NonexistentMle {
                reason: format!("parameters exceeded the divergence bound {}", opts.divergence_bound),
                violations: Vec::new(),
                diverging,
            });
        }
        history.push(max_abs(&beta));
        trace.push(log_likelihood(&beta, &degrees));
        converged = gap(&beta, &degrees) <= opts.tol * 0.5;
    }
    if !converged && history.len() > GROWTH_WINDOW {
        let recent = &history[history.len() - GROWTH_WINDOW..];
        if recent.windows(2).all(|w| w[1] > w[0]) {
            let largest = max_abs(&beta);
            let diverging = (0..n).filter(|&i| beta[i].abs() >= largest - 1.0).collect();
            return Err(Error::NonexistentMle {
                reason: format!("parameters still growing after {} iterations", opts.max_iter),
                violations: Vec::new(),
                diverging,
            });
        }
    }
    finish(ModelSpec::Beta { beta }, g, iterations, true, opts, Vec::new(), trace)
}

fn log_likelihood(beta: &[f64], degrees: &[f64]) -> f64 {
    let n = beta.len();
    let linear: f64 = beta.iter().zip(degrees).map(|(b, d)| b * d).sum();
    let psi: f64 = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .map(|(i, j)| log1p_exp(beta[i] + beta[j]))
        .sum();
    linear - psi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Permutation;

    #[test]
    fn four_cycle_has_analytic_solution() {
        let g = Graph::from_edges(4, false, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let fit = fit_beta(&g, &FitOptions::default()).unwrap();
        assert!(fit.converged);
        let ModelSpec::Beta { beta } = &fit.params else { panic!() };
        // (n-1)·sigmoid(2β) = 2  ⇒  sigmoid(2β) = 2/3  ⇒  β = ½·log 2
        for b in beta {
            assert!((b - 0.5 * 2f64.ln()).abs() < 1e-8);
        }
    }

    #[test]
    fn complete_graph_has_no_mle() {
        let err = fit_beta(&Graph::complete(4, false), &FitOptions::default()).unwrap_err();
        match err {
            Error::NonexistentMle { violations, diverging, .. } => {
                assert_eq!(violations.len(), 4);
                assert_eq!(diverging, vec![0, 1, 2, 3]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chorded_cycle_is_symmetric_and_matches_moments() {
        let g = Graph::from_edges(5, false, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let fit = fit_beta(&g, &FitOptions::default()).unwrap();
        assert!(fit.converged && fit.max_moment_gap <= 1e-10);
        assert!(fit.log_likelihood_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let ModelSpec::Beta { beta } = &fit.params else { panic!() };
        assert!((beta[0] - beta[2]).abs() < 1e-9);
        assert!((beta[3] - beta[4]).abs() < 1e-9);
        let e = expected_degrees(beta);
        for (x, d) in e.iter().zip([3.0, 2.0, 3.0, 2.0, 2.0]) {
            assert!((x - d).abs() < 1e-10);
        }
    }

    #[test]
    fn path_degrees_sit_on_the_polytope_boundary() {
        // the two middle nodes saturate their joint degree bound, so the
        // iterates drift off without any single node hitting 0 or n-1
        let g = Graph::from_edges(4, false, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(matches!(
            fit_beta(&g, &FitOptions::default()),
            Err(Error::NonexistentMle { .. })
        ));
    }

    #[test]
    fn directed_input_rejected() {
        assert!(matches!(
            fit_beta(&Graph::empty(3, true), &FitOptions::default()),
            Err(Error::WrongGraphKind { .. })
        ));
    }

    #[test]
    fn fit_commutes_with_relabeling() {
        let g = Graph::from_edges(6, false, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (1, 5), (0, 4)]).unwrap();
        let pi = Permutation::new(vec![3, 5, 0, 1, 4, 2]).unwrap();
        let a = fit_beta(&g, &FitOptions::default()).unwrap();
        let b = fit_beta(&g.permute(&pi).unwrap(), &FitOptions::default()).unwrap();
        let (ModelSpec::Beta { beta: ba }, ModelSpec::Beta { beta: bb }) = (&a.params, &b.params) else {
            panic!()
        };
        let moved = pi.permute_values(ba);
        for (x, y) in moved.iter().zip(bb) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
