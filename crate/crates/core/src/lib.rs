//! Optimizer geometry as composable operators.
//!
//! This crate implements optimizer update rules as operators `(theta, g) -> d`
//! and studies what their composition does to the learned solution:
//!
//! - [`operator`]: the operator abstraction, composition, commutator and
//!   boundedness diagnostics.
//! - [`steepest`]: sign, coordinate, and general Lp steepest directions.
//! - [`mirror`]: separable mirror maps (quadratic, hyperbolic entropy, cosh
//!   entropy, log entropy), Bregman divergence, coercivity probes.
//! - [`optim`]: discrete optimizers, including the alternating multiplicative
//!   schemes HAM and HORST built on AdamW.
//! - [`flows`]: continuous-time steepest-mirror flows, an L1 max-margin LP
//!   oracle, and convergence certifications.
//! - [`problems`]: synthetic tasks with analytic gradients.
//! - [`sparsify`]: magnitude pruning, dense/sparse alternation, and weight
//!   distribution reports.
//!
//! The numeric kernels are generic over [`scalar::Scalar`] (f32 or f64);
//! the experiment-facing modules pin f64, re-exported through the aliases
//! below.

pub mod error;
pub mod flows;
pub mod gradcheck;
pub mod lp;
pub mod mirror;
pub mod operator;
pub mod optim;
pub mod param;
pub mod problems;
pub mod scalar;
pub mod sparsify;
pub mod steepest;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete f64 aliases for the generic core types.
pub type ParamVector = param::ParamVector<f64>;
pub type Operator = operator::Operator<f64>;
pub type BoundednessReport = operator::BoundednessReport<f64>;
pub type MirrorMap = mirror::MirrorMap<f64>;
pub type AdamState = optim::AdamState<f64>;
pub type Optimizer = optim::Optimizer<f64>;
pub type OptimizerKind = optim::OptimizerKind<f64>;
