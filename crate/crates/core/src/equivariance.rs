//! Numerical checks on nodal and block parametrizations `θ_ij = f_(ij)(θ_i, θ_j)`.
//!
//! A [`ParametrizationProbe`] is a black box: one function per dyad of a
//! `size`-node (or `size`-block) index set. The checker tests whether the
//! family is permutation equivariant, whether the shared function is additive
//! `f(u, v) = g(u) + h(v)`, and whether the induced dyadic model coincides with
//! the β, p1/config or additive block model built from the recovered `g` and `h`.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{dyads, BlockAssignment, Permutation};
use crate::models::{LogitMatrix, ModelSpec};
use crate::oracle::{log_likelihood_table, EnumerationLimit};

/// Largest admissible equivariance discrepancy, relative to `max(1, |outputs|)`.
pub const EQUIVARIANCE_TOLERANCE: f64 = 1e-9;

/// Default tolerance for the mixed-partial test, scaled by the probe magnitude.
pub const DEFAULT_ADDITIVITY_TOLERANCE: f64 = 1e-6;

const SWEEP_POINTS: usize = 5;

pub type DyadFunction = dyn Fn(usize, usize, f64, f64) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    /// Indices are nodes; reductions target β or p1/config.
    Nodal,
    /// Indices are blocks; reductions target the (directed) additive SBM.
    Block,
}

#[derive(Clone)]
pub struct ParametrizationProbe {
    pub name: String,
    pub kind: ProbeKind,
    pub size: usize,
    pub directed: bool,
    pub lo: f64,
    pub hi: f64,
    eval: Arc<DyadFunction>,
}

impl fmt::Debug for ParametrizationProbe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParametrizationProbe")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("size", &self.size)
            .field("directed", &self.directed)
            .field("box", &(self.lo, self.hi))
            .finish_non_exhaustive()
    }
}

impl ParametrizationProbe {
    /// `eval(i, j, u, v)` is `f_(ij)(u, v)`. Undirected probes are only queried
    /// with `i < j`.
    pub fn new(
        name: impl Into<String>,
        kind: ProbeKind,
        size: usize,
        directed: bool,
        (lo, hi): (f64, f64),
        eval: impl Fn(usize, usize, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Precondition(format!("invalid domain box [{lo}, {hi}]")));
        }
        Ok(Self {
            name: name.into(),
            kind,
            size,
            directed,
            lo,
            hi,
            eval: Arc::new(eval),
        })
    }

    /// A probe whose dyad functions are all `f`.
    pub fn shared(
        name: impl Into<String>,
        kind: ProbeKind,
        size: usize,
        directed: bool,
        domain: (f64, f64),
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(name, kind, size, directed, domain, move |_, _, u, v| f(u, v))
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Evaluates `f_(ij)(u, v)`, rejecting points outside the domain box and
    /// non-finite outputs.
    pub fn eval(&self, i: usize, j: usize, u: f64, v: f64) -> Result<f64> {
        let inside = |x: f64| x >= self.lo && x <= self.hi;
        if !(inside(u) && inside(v)) {
            return Err(Error::OutsideDomain { u, v });
        }
        if i == j || i >= self.size || j >= self.size || (!self.directed && i > j) {
            return Err(Error::Precondition(format!("({i}, {j}) is not a dyad of this probe")));
        }
        let y = (self.eval)(i, j, u, v);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Precondition(format!("probe is not finite at ({u}, {v}) on dyad ({i}, {j})")))
        }
    }

    /// `f_(π(i)π(j))` evaluated at the relabeled inputs, in canonical order.
    fn eval_moved(&self, pi: &Permutation, i: usize, j: usize, u: f64, v: f64) -> Result<f64> {
        let (a, b) = (pi.apply(i), pi.apply(j));
        if !self.directed && a > b {
            self.eval(b, a, v, u)
        } else {
            self.eval(a, b, u, v)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub permutation: Permutation,
    pub dyad: (usize, usize),
    pub u: f64,
    pub v: f64,
    /// `f_(ij)(u, v)` and `f_(π(i)π(j))(u, v)`.
    pub outputs: (f64, f64),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = self.dyad;
        write!(
            f,
            "permutation {:?}, dyad ({i}, {j}), (u, v) = ({}, {}): f_({i},{j}) = {} but f_({},{}) = {}",
            self.permutation.images(),
            self.u,
            self.v,
            self.outputs.0,
            self.permutation.apply(i),
            self.permutation.apply(j),
            self.outputs.1
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    pub equivariant: bool,
    pub witness: Option<Witness>,
    pub max_discrepancy: f64,
    pub cases_checked: usize,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Tests `f_(π(i)π(j)) = f_(ij)` by a deterministic sweep (the cyclic shift and
/// every transposition, on a 5×5 grid of values, over all dyads) followed by
/// `trials` random (permutation, dyad, values) triples.
pub fn check_equivariance(p: &ParametrizationProbe, trials: usize, seed: u64) -> Result<EquivarianceReport> {
    let n = p.size;
    if n < 3 {
        return Err(Error::Precondition(format!("equivariance needs at least 3 indices, got {n}")));
    }
    let mut report = EquivarianceReport {
        equivariant: true,
        witness: None,
        max_discrepancy: 0.0,
        cases_checked: 0,
    };
    let mut record = |pi: &Permutation, i: usize, j: usize, u: f64, v: f64| -> Result<()> {
        let a = p.eval(i, j, u, v)?;
        let b = p.eval_moved(pi, i, j, u, v)?;
        let gap = relative_gap(a, b);
        report.cases_checked += 1;
        report.max_discrepancy = report.max_discrepancy.max(gap);
        if gap > EQUIVARIANCE_TOLERANCE && report.witness.is_none() {
            report.witness = Some(Witness {
                permutation: pi.clone(),
                dyad: (i, j),
                u,
                v,
                outputs: (a, b),
            });
        }
        Ok(())
    };

    let step = p.width() / SWEEP_POINTS as f64;
    let grid: Vec<f64> = (0..SWEEP_POINTS).map(|k| p.lo + (k as f64 + 0.5) * step).collect();
    let mut sweep = vec![Permutation::cyclic_shift(n, 1)];
    for a in 0..n {
        for b in (a + 1)..n {
            sweep.push(Permutation::transposition(n, a, b));
        }
    }
    for pi in &sweep {
        for (i, j) in dyads(n, p.directed) {
            for &u in &grid {
                for &v in &grid {
                    record(pi, i, j, u, v)?;
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<(usize, usize)> = dyads(n, p.directed).collect();
    let mut images: Vec<usize> = (0..n).collect();
    for _ in 0..trials {
        images.shuffle(&mut rng);
        let pi = Permutation::new(images.clone())?;
        let (i, j) = all[rng.random_range(0..all.len())];
        let u = rng.random_range(p.lo..=p.hi);
        let v = rng.random_range(p.lo..=p.hi);
        record(&pi, i, j, u, v)?;
    }
    report.equivariant = report.max_discrepancy <= EQUIVARIANCE_TOLERANCE;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    /// False when the probe failed the equivariance check; the remaining
    /// fields are then left at their defaults.
    pub applicable: bool,
    pub additive: bool,
    pub symmetric_additive: bool,
    pub max_mixed_partial: f64,
    /// Grid abscissae shared by `recovered_g` and `recovered_h`.
    pub grid: Vec<f64>,
    pub recovered_g: Vec<f64>,
    pub recovered_h: Vec<f64>,
    /// `max |f(u, v) − g(u) − h(v)|` over the grid.
    pub residual: f64,
    /// `tol · max(1, max |f|)`.
    pub threshold: f64,
}

impl DecompositionReport {
    fn not_applicable() -> Self {
        Self {
            applicable: false,
            additive: false,
            symmetric_additive: false,
            max_mixed_partial: f64::NAN,
            grid: Vec::new(),
            recovered_g: Vec::new(),
            recovered_h: Vec::new(),
            residual: f64::NAN,
            threshold: f64::NAN,
        }
    }
}

/// Central mixed differences of the shared dyad function on a `grid × grid`
/// lattice of cell centers, plus the anchored recovery of `g` and `h`.
pub fn check_additivity(p: &ParametrizationProbe, grid: usize, tol: f64) -> Result<DecompositionReport> {
    if grid < 3 {
        return Err(Error::Precondition(format!("grid must be at least 3, got {grid}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    if !check_equivariance(p, 200, 0)?.equivariant {
        return Ok(DecompositionReport::not_applicable());
    }
    let f = |u: f64, v: f64| p.eval(0, 1, u, v);
    let cell = p.width() / grid as f64;
    let h = p.width() / (4.0 * grid as f64);
    let points: Vec<f64> = (0..grid).map(|k| p.lo + (k as f64 + 0.5) * cell).collect();

    let mut values = vec![vec![0.0; grid]; grid];
    let mut mixed: f64 = 0.0;
    for (a, &u) in points.iter().enumerate() {
        for (b, &v) in points.iter().enumerate() {
            values[a][b] = f(u, v)?;
            let d = (f(u + h, v + h)? - f(u + h, v - h)? - f(u - h, v + h)? + f(u - h, v - h)?) / (4.0 * h * h);
            mixed = mixed.max(d.abs());
        }
    }
    let magnitude = values.iter().flatten().fold(1.0_f64, |m, x| m.max(x.abs()));
    let threshold = tol * magnitude;

    let c = p.center();
    let anchor = f(c, c)?;
    let recovered_g = points.iter().map(|&u| Ok(f(u, c)? - anchor / 2.0)).collect::<Result<Vec<_>>>()?;
    let recovered_h = points.iter().map(|&v| Ok(f(c, v)? - anchor / 2.0)).collect::<Result<Vec<_>>>()?;
    let mut residual: f64 = 0.0;
    for a in 0..grid {
        for b in 0..grid {
            residual = residual.max((values[a][b] - recovered_g[a] - recovered_h[b]).abs());
        }
    }
    let additive = mixed <= threshold && residual <= 10.0 * threshold;
    let symmetric_additive =
        additive && recovered_g.iter().zip(&recovered_h).all(|(g, h)| (g - h).abs() <= threshold);
    Ok(DecompositionReport {
        applicable: true,
        additive,
        symmetric_additive,
        max_mixed_partial: mixed,
        grid: points,
        recovered_g,
        recovered_h,
        residual,
        threshold,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub matches: bool,
    /// Largest log-likelihood difference over all graphs.
    pub max_gap: f64,
    pub nodal_values: Vec<f64>,
    /// The β, p1/config or additive block model the probe reduces to.
    pub reduced: ModelSpec,
}

/// Builds the model induced by `p` at random nodal (or block) values on `n`
/// nodes and compares its full log-likelihood table with that of the reduced
/// model `g(θ_i) + h(θ_j)`.
///
/// For block probes node `i` sits in block `i mod size`, and within-block
/// dyads take the shared function on the diagonal `f(η_k, η_k)`.
pub fn verify_reduction(p: &ParametrizationProbe, n: usize, tol: f64, seed: u64) -> Result<ReductionReport> {
    EnumerationLimit::default().check(n, p.directed)?;
    if !check_equivariance(p, 200, seed)?.equivariant {
        return Err(Error::Precondition(format!("probe {} is not permutation equivariant", p.name)));
    }
    let decomposition = check_additivity(p, 9, DEFAULT_ADDITIVITY_TOLERANCE)?;
    if !decomposition.additive {
        return Err(Error::Precondition(format!("probe {} is not additive", p.name)));
    }
    let c = p.center();
    let anchor = p.eval(0, 1, c, c)?;
    let g = |u: f64| Ok::<f64, Error>(p.eval(0, 1, u, c)? - anchor / 2.0);
    let h = |v: f64| Ok::<f64, Error>(p.eval(0, 1, c, v)? - anchor / 2.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = 0.45 * p.width();
    let (induced, reduced, values) = match p.kind {
        ProbeKind::Nodal => {
            if n != p.size {
                return Err(Error::DimensionMismatch {
                    what: "nodal probe size",
                    expected: p.size,
                    found: n,
                });
            }
            let theta: Vec<f64> = (0..n).map(|_| c + rng.random_range(-spread..=spread)).collect();
            let logits = LogitMatrix::new(
                n,
                p.directed,
                dyads(n, p.directed)
                    .map(|(i, j)| p.eval(i, j, theta[i], theta[j]))
                    .collect::<Result<_>>()?,
            )?;
            let gs = theta.iter().map(|&t| g(t)).collect::<Result<Vec<_>>>()?;
            let reduced = if p.directed {
                let hs = theta.iter().map(|&t| h(t)).collect::<Result<Vec<_>>>()?;
                ModelSpec::p1_config(gs, hs)?
            } else {
                ModelSpec::beta(gs)?
            };
            (ModelSpec::saturated(logits), reduced, theta)
        }
        ProbeKind::Block => {
            let r = p.size;
            if n < r {
                return Err(Error::Precondition(format!("{n} nodes cannot fill {r} blocks")));
            }
            let blocks = BlockAssignment::new((0..n).map(|i| i % r).collect())?;
            let eta: Vec<f64> = (0..r).map(|_| c + rng.random_range(-spread..=spread)).collect();
            let diag = eta.iter().map(|&e| p.eval(0, 1, e, e)).collect::<Result<Vec<_>>>()?;
            let logits = LogitMatrix::new(
                n,
                p.directed,
                dyads(n, p.directed)
                    .map(|(i, j)| {
                        let (k, l) = (blocks.block_of(i), blocks.block_of(j));
                        if k == l {
                            Ok(diag[k])
                        } else if !p.directed && k > l {
                            p.eval(l, k, eta[l], eta[k])
                        } else {
                            p.eval(k, l, eta[k], eta[l])
                        }
                    })
                    .collect::<Result<_>>()?,
            )?;
            let gs = eta.iter().map(|&e| g(e)).collect::<Result<Vec<_>>>()?;
            let reduced = if p.directed {
                let hs = eta.iter().map(|&e| h(e)).collect::<Result<Vec<_>>>()?;
                ModelSpec::directed_additive_sbm(blocks, gs, hs, diag)?
            } else {
                ModelSpec::additive_sbm(blocks, gs, diag)?
            };
            (ModelSpec::saturated(logits), reduced, eta)
        }
    };
    let a = log_likelihood_table(&induced, n)?;
    let b = log_likelihood_table(&reduced, n)?;
    let max_gap = a.iter().zip(&b).fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
    Ok(ReductionReport {
        matches: max_gap <= tol,
        max_gap,
        nodal_values: values,
        reduced,
    })
}

/// Outcomes a built-in probe is known to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Expected {
    pub equivariant: bool,
    pub additive: bool,
    pub symmetric_additive: bool,
}

#[derive(Debug, Clone)]
pub struct BuiltinProbe {
    pub probe: ParametrizationProbe,
    pub expected: Expected,
}

pub const BUILTIN_NAMES: [&str; 9] = [
    "beta-additive",
    "beta-tanh",
    "p1-additive",
    "multiplicative",
    "max",
    "paper-counterexample",
    "block-additive",
    "block-directed-additive",
    "block-multiplicative",
];

/// The built-in catalog on `size` indices.
pub fn builtin_probes(size: usize) -> Result<Vec<BuiltinProbe>> {
    BUILTIN_NAMES.iter().map(|name| builtin_probe(name, size)).collect()
}

pub fn builtin_probe(name: &str, size: usize) -> Result<BuiltinProbe> {
    use ProbeKind::{Block, Nodal};
    let expect = |equivariant, additive, symmetric_additive| Expected {
        equivariant,
        additive,
        symmetric_additive,
    };
    let unit = (-2.0, 2.0);
    let (probe, expected) = match name {
        "beta-additive" => (ParametrizationProbe::shared(name, Nodal, size, false, unit, |u, v| u + v)?, expect(true, true, true)),
        "beta-tanh" => (
            ParametrizationProbe::shared(name, Nodal, size, false, unit, |u, v| u.tanh() + v.tanh())?,
            expect(true, true, true),
        ),
        "p1-additive" => (
            ParametrizationProbe::shared(name, Nodal, size, true, (-1.0, 1.0), |u, v| u.exp() + 2.0 * v)?,
            expect(true, true, false),
        ),
        "multiplicative" => (ParametrizationProbe::shared(name, Nodal, size, false, unit, |u, v| u * v)?, expect(true, false, false)),
        "max" => (ParametrizationProbe::shared(name, Nodal, size, false, unit, f64::max)?, expect(true, false, false)),
        "paper-counterexample" => (
            // θ_0j = θ_j, and θ_ij = θ_i for every other dyad
            ParametrizationProbe::new(name, Nodal, size, false, unit, |i, _, u, v| if i == 0 { v } else { u })?,
            expect(false, false, false),
        ),
        "block-additive" => (
            ParametrizationProbe::shared(name, Block, size, false, unit, |u, v| 0.5 * u + 0.5 * v)?,
            expect(true, true, true),
        ),
        "block-directed-additive" => (
            ParametrizationProbe::shared(name, Block, size, true, unit, |u, v| u - 0.3 * v * v)?,
            expect(true, true, false),
        ),
        "block-multiplicative" => (
            ParametrizationProbe::shared(name, Block, size, false, unit, |u, v| u * v)?,
            expect(true, false, false),
        ),
        other => return Err(Error::Precondition(format!("unknown probe {other:?}"))),
    };
    Ok(BuiltinProbe { probe, expected })
}

/// A probe given by one `rows × cols` table per dyad on the square
/// `[lo, hi]²`, evaluated by bilinear interpolation. Rows index `u`.
pub fn tabulated_probe(
    name: impl Into<String>,
    size: usize,
    directed: bool,
    (lo, hi): (f64, f64),
    rows: usize,
    cols: usize,
    tables: Vec<Vec<f64>>,
) -> Result<ParametrizationProbe> {
    if rows < 2 || cols < 2 {
        return Err(Error::Precondition("tables need at least 2 rows and 2 columns".into()));
    }
    let expected = crate::graph::dyad_count(size, directed);
    if tables.len() != expected {
        return Err(Error::DimensionMismatch {
            what: "dyad tables",
            expected,
            found: tables.len(),
        });
    }
    if let Some(bad) = tables.iter().find(|t| t.len() != rows * cols) {
        return Err(Error::DimensionMismatch {
            what: "table entries",
            expected: rows * cols,
            found: bad.len(),
        });
    }
    if tables.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteParameter("probe table"));
    }
    let locate = move |x: f64, m: usize| {
        let t = (x - lo) / (hi - lo) * (m - 1) as f64;
        let k = (t.floor() as usize).min(m - 2);
        (k, t - k as f64)
    };
    ParametrizationProbe::new(name, ProbeKind::Nodal, size, directed, (lo, hi), move |i, j, u, v| {
        let t = &tables[crate::graph::dyad_index(size, directed, i, j).expect("dyad within probe")];
        let (a, s) = locate(u, rows);
        let (b, w) = locate(v, cols);
        let at = |r: usize, c: usize| t[r * cols + c];
        (1.0 - s) * ((1.0 - w) * at(a, b) + w * at(a, b + 1)) + s * ((1.0 - w) * at(a + 1, b) + w * at(a + 1, b + 1))
    })
}
