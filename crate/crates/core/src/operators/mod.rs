//! Composable operator algebra and the closed-form resolvent catalog.

mod expr;
mod linear;
mod monotone;
mod sets;

pub use expr::{evaluate, OperatorExpr, SingleValuedSpec};
pub use linear::{LinearOp, NormEstimate};
pub use monotone::{resolvent_apply, soft_threshold, MonotoneSpec};
pub use sets::ConvexSet;
