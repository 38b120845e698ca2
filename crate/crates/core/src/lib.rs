//! Adaptive rational interpolation of arbitrary even order on uniform dyadic grids.
//!
//! The crate predicts point values on a grid of spacing `h/2` from samples on a
//! grid of spacing `h`. Even nodes are copied; every odd node (a midpoint
//! `x_{j-1/2}`) is interpolated by one of several schemes:
//!
//! * the classical `2r`-point Lagrange rule,
//! * WENO convex combinations of the `r + 1`-point sub-stencil polynomials,
//! * the order-2 and order-4 rational weights of Carrato–Ramponi type,
//! * general order-`2r` rational weights that converge to the optimal weights of
//!   the widest sub-stencil free of a discontinuity.
//!
//! Exact rational tables (midpoint rules, optimal weights, smoothness quadratic
//! forms) are generated once per order and cached.

pub mod cli;
pub mod error;
pub mod grid;
pub mod harness;
pub mod optimal;
pub mod predictor;
pub mod smoothness;
pub mod stencil;
pub mod weights;

mod exact;

pub use error::{Error, Result};
pub use grid::{SampledSignal, UniformGrid};
pub use harness::{BuiltinFunction, ConvergenceReport, StudyConfig};
pub use optimal::{OptimalWeightTable, WeightRow};
pub use predictor::{BoundaryPolicy, PredictionResult};
pub use smoothness::SmoothnessProfile;
pub use stencil::{MidpointRule, StencilSpec};
pub use weights::{SchemeConfig, SchemeKind, WeightVector};
