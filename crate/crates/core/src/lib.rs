//! Dyadic-independent exponential random graph models.
//!
//! The crate covers the saturated model and six structured families (Erdős–Rényi,
//! β, stochastic block model, additive SBM, p1/configuration and directed
//! additive SBM) with exact likelihoods, exact sampling and maximum-likelihood
//! fitting. It also ships a numerical checker that tests whether a nodal
//! parametrization of the dyad logits is permutation-equivariant and additively
//! decomposable, and an enumeration oracle used to validate everything at small
//! sizes.
//!
//! ```
//! use dyadic_ergm::{estimation, FitOptions, Graph, ModelSpec};
//!
//! let cycle = Graph::from_edges(4, false, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
//! let fit = estimation::fit_beta(&cycle, &FitOptions::default()).unwrap();
//! let ModelSpec::Beta { beta } = &fit.params else { unreachable!() };
//! assert!((beta[0] - 0.5 * 2f64.ln()).abs() < 1e-8);
//! ```

pub mod cli;
pub mod equivariance;
pub mod error;
pub mod estimation;
pub mod graph;
pub mod io;
pub mod models;
pub mod numeric;
pub mod oracle;
pub mod sampling;

pub use error::{Error, Result};
pub use estimation::{FitOptions, FitResult};
pub use graph::{BlockAssignment, Graph, Permutation};
pub use models::{Family, LogitMatrix, ModelSpec, SufficientStats};
pub use sampling::SampleConfig;
