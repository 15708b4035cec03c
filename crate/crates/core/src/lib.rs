//! Riemannian gradient descent ascent for min-max problems of the form
//! `min_{x in M} max_{y in Y} f(x, y)` where `M` is a Riemannian manifold
//! (sphere, Stiefel, Euclidean or a product of these), `Y` is a closed convex
//! set and `f(x, .)` is strongly concave.
//!
//! The crate provides
//! - manifold primitives ([`manifold`]): tangent projection, retraction, vector transport;
//! - convex constraint sets with exact projections ([`constraint`]);
//! - the problem abstraction and three built-in instances ([`problems`]);
//! - the RGDA, RSGDA and MVR-RSGDA solvers ([`solvers`]);
//! - verification instruments ([`diagnostics`]);
//! - the experiment driver behind the `rminmax` binary ([`cli`]).

// `!(a <= b)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod constraint;
pub mod diagnostics;
pub mod error;
pub mod manifold;
pub mod problems;
pub mod rng;
pub mod solvers;

pub use constraint::ConvexSet;
pub use error::{Error, Result};
pub use manifold::{Manifold, ManifoldPoint, TangentVector};
pub use problems::{GradientPair, MinimaxProblem, ProblemConstants, SampleBatch};
pub use solvers::{Algorithm, EtaRule, RunResult, SolverConfig};

/// Dense real matrix used for points, tangent vectors and Euclidean gradients.
pub type Mat = nalgebra::DMatrix<f64>;
/// Dense real vector used for the maximization variable.
pub type Vector = nalgebra::DVector<f64>;
