//! Damped Newton ascent for families whose logits are linear in their
//! parameters, plus the pivoted-elimination rank screen on the design.

use nalgebra::{DMatrix, DVector};

use crate::numeric::{log1p_exp, max_abs, sigmoid};

/// Dyads sharing one logit `Σ coeff·φ`, with their dyad and edge counts.
#[derive(Debug, Clone)]
pub(crate) struct DyadGroup {
    pub coeffs: Vec<(usize, f64)>,
    pub dyads: f64,
    pub edges: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct LinearDesign {
    pub n_params: usize,
    pub groups: Vec<DyadGroup>,
}

const MAX_HALVINGS: usize = 40;
const RANK_THRESHOLD: f64 = 1e-9;

#[derive(Debug)]
pub(crate) struct NewtonOutcome {
    pub params: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted step, starting point first.
    pub path: Vec<f64>,
}

#[derive(Debug)]
pub(crate) enum NewtonFailure {
    /// Parameters (by index) whose magnitude crossed the divergence bound.
    Diverged(Vec<usize>),
    /// No acceptable step after the maximum number of halvings.
    LineSearch { iteration: usize, gradient: f64 },
    SingularHessian { iteration: usize },
}

impl LinearDesign {
    fn logit(&self, g: &DyadGroup, phi: &[f64]) -> f64 {
        g.coeffs.iter().map(|&(k, c)| c * phi[k]).sum()
    }

    pub fn log_likelihood(&self, phi: &[f64]) -> f64 {
        self.groups
            .iter()
            .map(|g| {
                let t = self.logit(g, phi);
                g.edges * t - g.dyads * log1p_exp(t)
            })
            .sum()
    }

    pub fn gradient(&self, phi: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.n_params];
        for g in &self.groups {
            let resid = g.edges - g.dyads * sigmoid(self.logit(g, phi));
            for &(k, c) in &g.coeffs {
                grad[k] += c * resid;
            }
        }
        grad
    }

    /// Fisher information `Σ N p (1-p) c cᵀ` (the negated Hessian).
    fn information(&self, phi: &[f64]) -> DMatrix<f64> {
        let mut info = DMatrix::zeros(self.n_params, self.n_params);
        for g in &self.groups {
            let p = sigmoid(self.logit(g, phi));
            let w = g.dyads * p * (1.0 - p);
            for &(a, ca) in &g.coeffs {
                for &(b, cb) in &g.coeffs {
                    info[(a, b)] += w * ca * cb;
                }
            }
        }
        info
    }

    /// Returns a null direction of the group-by-parameter design matrix, or
    /// `None` when it has full column rank.
    ///
    /// Gaussian elimination with partial pivoting; a pivot counts when it
    /// exceeds `1e-9` times the largest entry. The direction comes from the
    /// first free column, scaled to unit max-norm with its first non-zero
    /// entry positive.
    pub fn null_direction(&self) -> Option<Vec<f64>> {
        let cols = self.n_params;
        let mut a: Vec<Vec<f64>> = self
            .groups
            .iter()
            .map(|g| {
                let mut row = vec![0.0; cols];
                for &(k, c) in &g.coeffs {
                    row[k] += c;
                }
                row
            })
            .collect();
        let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return (cols > 0).then(|| {
                let mut v = vec![0.0; cols];
                v[0] = 1.0;
                v
            });
        }
        let threshold = RANK_THRESHOLD * scale;
        let mut pivot_cols = Vec::new();
        let mut row = 0;
        let mut free = None;
        for col in 0..cols {
            let best = (row..a.len()).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()));
            match best {
                Some(p) if a[p][col].abs() > threshold => {
                    a.swap(row, p);
                    let pivot = a[row][col];
                    a[row].iter_mut().for_each(|v| *v /= pivot);
                    let pivot_row = a[row].clone();
                    for (r, other) in a.iter_mut().enumerate() {
                        if r != row && other[col] != 0.0 {
                            let f = other[col];
                            other.iter_mut().zip(&pivot_row).for_each(|(v, p)| *v -= f * p);
                        }
                    }
                    pivot_cols.push(col);
                    row += 1;
                }
                _ => {
                    free = Some(col);
                    break;
                }
            }
        }
        let free = free?;
        let mut v = vec![0.0; cols];
        v[free] = 1.0;
        for (r, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -a[r][free];
        }
        let norm = max_abs(&v);
        v.iter_mut().for_each(|x| *x /= norm);
        if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        v.iter_mut().for_each(|x| {
            if x.abs() <= 1e-12 {
                *x = 0.0
            }
        });
        Some(v)
    }

    /// Maximizes the concave log-likelihood from `start`.
    ///
    /// Each Newton step is halved until the log-likelihood does not decrease
    /// (at most 40 halvings). Below the rounding floor of the objective a step
    /// that leaves the log-likelihood unchanged is still accepted if it shrinks
    /// the gradient. Iteration stops once the gradient ∞-norm is below
    /// `tol / 100`, or below `tol` when no further step can improve it.
    pub fn maximize(
        &self,
        start: Vec<f64>,
        tol: f64,
        max_iter: usize,
        bound: f64,
    ) -> Result<NewtonOutcome, NewtonFailure> {
        let mut phi = start;
        let mut ll = self.log_likelihood(&phi);
        let mut path = vec![ll];
        let mut grad = self.gradient(&phi);
        let mut gap = max_abs(&grad);
        for iteration in 0..max_iter {
            if gap <= tol * 1e-2 {
                return Ok(NewtonOutcome {
                    params: phi,
                    iterations: iteration,
                    converged: true,
                    path,
                });
            }
            let info = self.information(&phi);
            let rhs = DVector::from_column_slice(&grad);
            let step = match info.clone().cholesky() {
                Some(ch) => ch.solve(&rhs),
                None => match info.lu().solve(&rhs) {
                    Some(s) => s,
                    None => return Err(NewtonFailure::SingularHessian { iteration }),
                },
            };
            let slack = 1e-13 * (1.0 + ll.abs());
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..=MAX_HALVINGS {
                let cand: Vec<f64> = phi.iter().zip(step.iter()).map(|(p, s)| p + t * s).collect();
                let cand_ll = self.log_likelihood(&cand);
                if cand_ll.is_finite() {
                    let cand_grad = self.gradient(&cand);
                    let cand_gap = max_abs(&cand_grad);
                    if cand_ll > ll || (cand_ll >= ll - slack && cand_gap < gap) {
                        accepted = Some((cand, cand_ll, cand_grad, cand_gap));
                        break;
                    }
                }
                t *= 0.5;
            }
            let Some((cand, cand_ll, cand_grad, cand_gap)) = accepted else {
                if gap <= tol {
                    return Ok(NewtonOutcome {
                        params: phi,
                        iterations: iteration,
                        converged: true,
                        path,
                    });
                }
                return Err(NewtonFailure::LineSearch {
                    iteration,
                    gradient: gap,
                });
            };
            phi = cand;
            ll = cand_ll.max(ll);
            path.push(cand_ll);
            grad = cand_grad;
            gap = cand_gap;
            let diverging: Vec<usize> = phi
                .iter()
                .enumerate()
                .filter(|(_, v)| v.abs() > bound)
                .map(|(k, _)| k)
                .collect();
            if !diverging.is_empty() {
                return Err(NewtonFailure::Diverged(diverging));
            }
        }
        Ok(NewtonOutcome {
            converged: gap <= tol,
            params: phi,
            iterations: max_iter,
            path,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn group(coeffs: &[(usize, f64)], dyads: f64, edges: f64) -> DyadGroup {
        DyadGroup {
            coeffs: coeffs.to_vec(),
            dyads,
            edges,
        }
    }

    #[test]
    fn single_binomial_group_hits_logit() {
        let d = LinearDesign {
            n_params: 1,
            groups: vec![group(&[(0, 1.0)], 4.0, 1.0)],
        };
        let out = d.maximize(vec![0.0], 1e-12, 100, 50.0).unwrap();
        assert!(out.converged);
        assert!((out.params[0] + 3f64.ln()).abs() < 1e-10);
        assert!(out.path.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn boundary_data_diverges() {
        let d = LinearDesign {
            n_params: 1,
            groups: vec![group(&[(0, 1.0)], 4.0, 4.0)],
        };
        assert!(matches!(
            d.maximize(vec![0.0], 1e-10, 5000, 20.0),
            Err(NewtonFailure::Diverged(v)) if v == vec![0]
        ));
    }

    #[test]
    fn null_direction_of_two_block_design() {
        let d = LinearDesign {
            n_params: 4,
            groups: vec![
                group(&[(0, 1.0), (1, 1.0)], 4.0, 2.0),
                group(&[(2, 1.0)], 1.0, 0.0),
                group(&[(3, 1.0)], 1.0, 0.0),
            ],
        };
        assert_eq!(d.null_direction(), Some(vec![1.0, -1.0, 0.0, 0.0]));
    }

    #[test]
    fn full_rank_triangle_design() {
        let d = LinearDesign {
            n_params: 3,
            groups: vec![
                group(&[(0, 1.0), (1, 1.0)], 1.0, 0.0),
                group(&[(0, 1.0), (2, 1.0)], 1.0, 0.0),
                group(&[(1, 1.0), (2, 1.0)], 1.0, 0.0),
            ],
        };
        assert_eq!(d.null_direction(), None);
    }
}
