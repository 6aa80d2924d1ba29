//! Inertial modified S-iteration for split monotone inclusion problems
//! combined with fixed-point problems in ℝᵈ.
//!
//! The crate is organized bottom-up:
//!
//! * [`hilbert`]: vectors, inner product, norm, affine combinations.
//! * [`operators`]: an operator expression algebra with closed-form
//!   resolvents (zero, linear PSD, ℓ₁ subdifferential, normal cones of boxes
//!   and balls) and spectral-norm estimation.
//! * [`analysis`]: sampling checks for nonexpansive, monotone, strongly
//!   monotone, inverse strongly monotone and firmly nonexpansive maps.
//! * [`smip`]: the split monotone inclusion problem and the composite
//!   `J′ = U(I + γA*(V − I)A)`.
//! * [`engines`]: parameter schedules and the iteration schemes
//!   (inertial modified S, modified S, Byrne, Ishikawa, Picard).
//! * [`diagnostics`]: checks run against finished traces.
//! * [`catalog`]: benchmark problems with known solutions.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the common `f64` instantiation.
//!
//! ```
//! use splitfix::{engines, OperatorF64, ProblemF64, VectorF64, LinearOp};
//!
//! let s = OperatorF64::affine_1d(0.25, 0.75);
//! let problem = ProblemF64::direct(
//!     OperatorF64::identity(1),
//!     OperatorF64::identity(1),
//!     LinearOp::identity(1),
//!     1.0,
//! )
//! .unwrap();
//! let config = engines::IterConfig::new(engines::Scheme::InertialModifiedS);
//! let x0 = VectorF64::new(vec![9.0]).unwrap();
//! let trace = engines::run(&config, &s, &problem, &x0, None).unwrap();
//! assert!((trace.final_point().unwrap()[0] - 1.0).abs() < 1e-9);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod catalog;
pub mod diagnostics;
pub mod engines;
mod error;
pub mod hilbert;
pub mod operators;
mod scalar;
pub mod smip;

pub use error::{Error, Result, Stage};
pub use hilbert::{combine, inner, norm, Vector};
pub use operators::{ConvexSet, LinearOp, MonotoneSpec, OperatorExpr, SingleValuedSpec};
pub use scalar::Scalar;
pub use smip::{Residuals, SmipProblem};

pub type VectorF64 = Vector<f64>;
pub type VectorF32 = Vector<f32>;
pub type OperatorF64 = OperatorExpr<f64>;
pub type OperatorF32 = OperatorExpr<f32>;
pub type LinearOpF64 = LinearOp<f64>;
pub type ProblemF64 = SmipProblem<f64>;
pub type ProblemF32 = SmipProblem<f32>;
pub type TraceF64 = engines::IterationTrace<f64>;
pub type ConfigF64 = engines::IterConfig<f64>;
