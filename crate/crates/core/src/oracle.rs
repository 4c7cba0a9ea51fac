//! Exhaustive-enumeration ground truth for small graphs.
//!
//! Everything here is computed the slow way, by visiting every labelled graph
//! on `n` nodes. Nothing in this module may use the closed-form partition
//! function or expected statistics from [`crate::models`]; it exists to check
//! them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{dyad_count, Graph};
use crate::models::{ModelSpec, SufficientStats};
use crate::numeric::log_sum_exp;

/// Largest node counts the oracle will enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationLimit {
    pub max_undirected_n: usize,
    pub max_directed_n: usize,
}

impl Default for EnumerationLimit {
    fn default() -> Self {
        Self {
            max_undirected_n: 6,
            max_directed_n: 4,
        }
    }
}

impl EnumerationLimit {
    pub fn check(&self, n: usize, directed: bool) -> Result<()> {
        let max = if directed {
            self.max_directed_n
        } else {
            self.max_undirected_n
        };
        if n > max {
            return Err(Error::EnumerationLimit {
                n,
                kind: if directed { "directed" } else { "undirected" },
                max,
            });
        }
        Ok(())
    }
}

/// All graphs on `n` nodes in bitmask order: graph number `m` has dyad `d`
/// present iff bit `d` of `m` is set (little-endian over canonical dyads).
#[derive(Debug, Clone)]
pub struct GraphEnumeration {
    n: usize,
    directed: bool,
    dyads: usize,
    next: u64,
    end: u64,
}

impl Iterator for GraphEnumeration {
    type Item = Graph;

    fn next(&mut self) -> Option<Graph> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        let bits = (0..self.dyads).map(|d| mask >> d & 1 == 1).collect();
        Some(Graph::from_dyad_bits(self.n, self.directed, bits).expect("dyad count matches"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for GraphEnumeration {}

pub fn enumerate_graphs(n: usize, directed: bool) -> Result<GraphEnumeration> {
    EnumerationLimit::default().check(n, directed)?;
    let dyads = dyad_count(n, directed);
    Ok(GraphEnumeration {
        n,
        directed,
        dyads,
        next: 0,
        end: 1u64 << dyads,
    })
}

fn linear_term(theta: &[f64], g: &Graph) -> f64 {
    g.dyad_bits()
        .iter()
        .zip(theta)
        .map(|(&x, &t)| if x { t } else { 0.0 })
        .sum()
}

fn model_kind(m: &ModelSpec, n: usize) -> Result<(Vec<f64>, bool)> {
    let logits = m.logits(n)?;
    EnumerationLimit::default().check(n, logits.is_directed())?;
    Ok((logits.values().to_vec(), logits.is_directed()))
}

/// `log Σ_x exp(Σ_dyads x_ij θ_ij)` over every graph.
pub fn brute_log_partition(m: &ModelSpec, n: usize) -> Result<f64> {
    let (theta, directed) = model_kind(m, n)?;
    Ok(log_sum_exp(
        enumerate_graphs(n, directed)?.map(|g| linear_term(&theta, &g)),
    ))
}

/// Exact log-likelihood of every graph, in enumeration order.
pub fn log_likelihood_table(m: &ModelSpec, n: usize) -> Result<Vec<f64>> {
    let (theta, directed) = model_kind(m, n)?;
    let log_z = brute_log_partition(m, n)?;
    Ok(enumerate_graphs(n, directed)?
        .map(|g| linear_term(&theta, &g) - log_z)
        .collect())
}

/// `Σ_x exp(log_likelihood(m, x))`, using the model's own likelihood.
pub fn total_probability(m: &ModelSpec, n: usize) -> Result<f64> {
    let directed = m.is_directed();
    EnumerationLimit::default().check(n, directed)?;
    let mut total = 0.0;
    for g in enumerate_graphs(n, directed)? {
        total += m.log_likelihood(&g)?.exp();
    }
    Ok(total)
}

/// `Σ_x P(x) s(x)` by enumeration.
pub fn brute_expected_stats(m: &ModelSpec, n: usize) -> Result<SufficientStats> {
    let (theta, directed) = model_kind(m, n)?;
    let log_z = brute_log_partition(m, n)?;
    let mut acc: Option<SufficientStats> = None;
    for g in enumerate_graphs(n, directed)? {
        let w = (linear_term(&theta, &g) - log_z).exp();
        let s = m.sufficient_stats(&g)?;
        acc = Some(match acc {
            None => scale(&s, w),
            Some(a) => axpy(a, &s, w),
        });
    }
    Ok(acc.expect("at least one graph"))
}

fn map2(a: &SufficientStats, b: &SufficientStats, f: impl Fn(f64, f64) -> f64) -> SufficientStats {
    let zip = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(&p, &q)| f(p, q)).collect::<Vec<_>>();
    use SufficientStats::*;
    match (a, b) {
        (Dyads(x), Dyads(y)) => Dyads(zip(x, y)),
        (EdgeCount(x), EdgeCount(y)) => EdgeCount(f(*x, *y)),
        (Degrees(x), Degrees(y)) => Degrees(zip(x, y)),
        (BlockPairs(x), BlockPairs(y)) => BlockPairs(zip(x, y)),
        (
            AdditiveBlocks { degree, within },
            AdditiveBlocks {
                degree: d2,
                within: w2,
            },
        ) => AdditiveBlocks {
            degree: zip(degree, d2),
            within: zip(within, w2),
        },
        (
            OutIn {
                out_degree,
                in_degree,
            },
            OutIn {
                out_degree: o2,
                in_degree: i2,
            },
        ) => OutIn {
            out_degree: zip(out_degree, o2),
            in_degree: zip(in_degree, i2),
        },
        (
            DirectedAdditiveBlocks {
                out_degree,
                in_degree,
                within,
            },
            DirectedAdditiveBlocks {
                out_degree: o2,
                in_degree: i2,
                within: w2,
            },
        ) => DirectedAdditiveBlocks {
            out_degree: zip(out_degree, o2),
            in_degree: zip(in_degree, i2),
            within: zip(within, w2),
        },
        _ => unreachable!("statistics of one model share a shape"),
    }
}

fn scale(s: &SufficientStats, w: f64) -> SufficientStats {
    map2(s, s, |x, _| w * x)
}

fn axpy(acc: SufficientStats, s: &SufficientStats, w: f64) -> SufficientStats {
    map2(&acc, s, |a, x| a + w * x)
}

/// Outcome of [`certify_mle`].
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub certified: bool,
    pub fitted_log_likelihood: f64,
    /// Highest log-likelihood found among the competitors.
    pub best_competitor: f64,
    pub competitors_checked: usize,
}

const CERTIFY_SLACK: f64 = 1e-9;
const PERTURBATION: f64 = 0.01;

/// Checks that `fitted` is at least as likely for `g` as `trials` random
/// parameter points (uniform in `[-3, 3]` per coordinate) and every ±0.01
/// coordinate perturbation of itself, up to `1e-9` slack. Likelihoods are
/// evaluated through enumeration.
pub fn certify_mle(g: &Graph, fitted: &ModelSpec, trials: usize, seed: u64) -> Result<Certificate> {
    EnumerationLimit::default().check(g.n(), g.is_directed())?;
    g.expect_directed(fitted.is_directed())?;
    let n = g.n();
    let loglik = |m: &ModelSpec| -> Result<f64> {
        let theta = m.logits(n)?;
        Ok(linear_term(theta.values(), g) - brute_log_partition(m, n)?)
    };
    let fitted_ll = loglik(fitted)?;
    let base = fitted.params();
    let mut best = f64::NEG_INFINITY;
    let mut checked = 0;

    for k in 0..base.len() {
        for sign in [-1.0, 1.0] {
            let mut p = base.clone();
            p[k] += sign * PERTURBATION;
            best = best.max(loglik(&fitted.with_params(&p)?)?);
            checked += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let p: Vec<f64> = (0..base.len()).map(|_| rng.random_range(-3.0..=3.0)).collect();
        best = best.max(loglik(&fitted.with_params(&p)?)?);
        checked += 1;
    }
    Ok(Certificate {
        certified: fitted_ll >= best - CERTIFY_SLACK,
        fitted_log_likelihood: fitted_ll,
        best_competitor: best,
        competitors_checked: checked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BlockAssignment;
    use approx::assert_abs_diff_eq;
    use std::collections::HashSet;

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_graphs(2, false).unwrap().count(), 2);
        assert_eq!(enumerate_graphs(3, false).unwrap().count(), 8);
        assert_eq!(enumerate_graphs(3, true).unwrap().count(), 64);
        let all: HashSet<Graph> = enumerate_graphs(4, false).unwrap().collect();
        assert_eq!(all.len(), 64);
    }

    #[test]
    fn enumeration_order_is_bitmask_order() {
        let gs: Vec<Graph> = enumerate_graphs(3, false).unwrap().collect();
        assert_eq!(gs[0].edge_count(), 0);
        assert_eq!(gs[1].edges().collect::<Vec<_>>(), vec![(0, 1)]);
        assert_eq!(gs[4].edges().collect::<Vec<_>>(), vec![(1, 2)]);
        assert_eq!(gs[7].edge_count(), 3);
    }

    #[test]
    fn limits_enforced() {
        assert!(matches!(
            enumerate_graphs(7, false),
            Err(Error::EnumerationLimit { .. })
        ));
        assert!(enumerate_graphs(5, true).is_err());
        assert!(enumerate_graphs(6, false).is_ok());
    }

    #[test]
    fn brute_partition_examples() {
        let er = ModelSpec::erdos_renyi(0.0, false).unwrap();
        assert_abs_diff_eq!(
            brute_log_partition(&er, 3).unwrap(),
            3.0 * std::f64::consts::LN_2,
            epsilon = 1e-14
        );
        let h = 3f64.ln() / 2.0;
        let b = ModelSpec::beta(vec![h, h]).unwrap();
        assert_abs_diff_eq!(brute_log_partition(&b, 2).unwrap(), 4f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn brute_expected_degrees() {
        let b = ModelSpec::beta(vec![0.0; 4]).unwrap();
        let s = brute_expected_stats(&b, 4).unwrap();
        if let SufficientStats::Degrees(d) = s {
            for x in d {
                assert_abs_diff_eq!(x, 1.5, epsilon = 1e-12);
            }
        } else {
            panic!("wrong shape");
        }
    }

    #[test]
    fn extreme_beta_expected_degree() {
        // E[d_1] = sigmoid(β_1+β_0) + sigmoid(β_1+β_2) = sigmoid(0) + sigmoid(-5)
        let b = ModelSpec::beta(vec![5.0, -5.0, 0.0]).unwrap();
        let SufficientStats::Degrees(d) = brute_expected_stats(&b, 3).unwrap() else {
            panic!()
        };
        let expected = 0.5 + 1.0 / (1.0 + 5f64.exp());
        assert_abs_diff_eq!(d[1], expected, epsilon = 1e-12);
    }

    #[test]
    fn normalization_for_block_models() {
        let blocks = BlockAssignment::new(vec![0, 1, 0, 1]).unwrap();
        let m = ModelSpec::additive_sbm(blocks, vec![0.3, -1.2], vec![1.5, -0.4]).unwrap();
        assert_abs_diff_eq!(total_probability(&m, 4).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn erdos_renyi_closed_form_is_certified() {
        // 3 of 6 dyads present: θ̂ = logit(1/2) = 0
        let g = Graph::from_edges(4, false, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let m = ModelSpec::erdos_renyi(0.0, false).unwrap();
        assert!(certify_mle(&g, &m, 200, 1).unwrap().certified);
        let off = ModelSpec::erdos_renyi(0.1, false).unwrap();
        assert!(!certify_mle(&g, &off, 200, 1).unwrap().certified);
    }
}
