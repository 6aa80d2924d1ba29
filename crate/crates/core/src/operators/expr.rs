use serde::Serialize;

use super::linear::LinearOp;
use super::monotone::{resolvent_apply, MonotoneSpec};
use super::sets::ConvexSet;
use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::scalar::Scalar;

/// Single-valued forward operator `g` with optional inverse-strong-monotonicity
/// constant. The constant is metadata only; nothing relates it to λ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleValuedSpec<T> {
    pub op: OperatorExpr<T>,
    pub ism: Option<T>,
}

impl<T: Scalar> SingleValuedSpec<T> {
    pub fn new(op: OperatorExpr<T>) -> Self {
        Self { op, ism: None }
    }

    pub fn with_ism(op: OperatorExpr<T>, ism: T) -> Self {
        Self { op, ism: Some(ism) }
    }
}

/// Expression tree describing a single-valued mapping ℝⁿ → ℝᵐ.
///
/// Prefer the checked constructors; `evaluate` re-checks dimensions at every
/// node so hand-built trees fail cleanly rather than panic.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "node")]
pub enum OperatorExpr<T> {
    Identity {
        dim: usize,
    },
    /// x ↦ M·x + b (b omitted means zero).
    Affine {
        map: LinearOp<T>,
        offset: Option<Vector<T>>,
    },
    /// x ↦ c·x.
    Scale {
        dim: usize,
        factor: T,
    },
    Sum {
        left: Box<OperatorExpr<T>>,
        right: Box<OperatorExpr<T>>,
    },
    /// x ↦ outer(inner(x)).
    Compose {
        outer: Box<OperatorExpr<T>>,
        inner: Box<OperatorExpr<T>>,
    },
    Projection {
        set: ConvexSet<T>,
    },
    Resolvent {
        spec: MonotoneSpec<T>,
        lambda: T,
    },
    /// x ↦ (I + λB)⁻¹(x − λ·g(x)).
    ForwardBackward {
        spec: MonotoneSpec<T>,
        forward: Box<SingleValuedSpec<T>>,
        lambda: T,
    },
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive and finite, got {lambda}"),
        })
    }
}

impl<T: Scalar> OperatorExpr<T> {
    pub fn identity(dim: usize) -> Self {
        Self::Identity { dim }
    }

    pub fn affine(map: LinearOp<T>, offset: Vector<T>) -> Result<Self> {
        if offset.dim() != map.dim_out() {
            return Err(Error::DimensionMismatch {
                context: "affine offset vs matrix rows",
                left: map.dim_out(),
                right: offset.dim(),
            });
        }
        Ok(Self::Affine {
            map,
            offset: Some(offset),
        })
    }

    pub fn linear(map: LinearOp<T>) -> Self {
        Self::Affine { map, offset: None }
    }

    /// One-dimensional affine map x ↦ slope·x + intercept.
    pub fn affine_1d(slope: T, intercept: T) -> Self {
        Self::Affine {
            map: LinearOp::scalar(slope),
            offset: Some(Vector::from_raw(vec![intercept])),
        }
    }

    pub fn scale(dim: usize, factor: T) -> Self {
        Self::Scale { dim, factor }
    }

    pub fn sum(left: Self, right: Self) -> Result<Self> {
        if left.dim_in() != right.dim_in() || left.dim_out() != right.dim_out() {
            return Err(Error::DimensionMismatch {
                context: "sum operands",
                left: left.dim_in(),
                right: right.dim_in(),
            });
        }
        Ok(Self::Sum {
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    pub fn compose(outer: Self, inner: Self) -> Result<Self> {
        if outer.dim_in() != inner.dim_out() {
            return Err(Error::DimensionMismatch {
                context: "compose(outer, inner): outer input vs inner output",
                left: outer.dim_in(),
                right: inner.dim_out(),
            });
        }
        Ok(Self::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        })
    }

    pub fn projection(set: ConvexSet<T>) -> Self {
        Self::Projection { set }
    }

    pub fn resolvent(spec: MonotoneSpec<T>, lambda: T) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self::Resolvent { spec, lambda })
    }

    pub fn forward_backward(
        spec: MonotoneSpec<T>,
        forward: SingleValuedSpec<T>,
        lambda: T,
    ) -> Result<Self> {
        check_lambda(lambda)?;
        let d = spec.dim();
        if forward.op.dim_in() != d || forward.op.dim_out() != d {
            return Err(Error::DimensionMismatch {
                context: "forward operator vs monotone operator dimension",
                left: d,
                right: forward.op.dim_in(),
            });
        }
        Ok(Self::ForwardBackward {
            spec,
            forward: Box::new(forward),
            lambda,
        })
    }

    pub fn dim_in(&self) -> usize {
        match self {
            Self::Identity { dim } | Self::Scale { dim, .. } => *dim,
            Self::Affine { map, .. } => map.dim_in(),
            Self::Sum { left, .. } => left.dim_in(),
            Self::Compose { inner, .. } => inner.dim_in(),
            Self::Projection { set } => set.dim(),
            Self::Resolvent { spec, .. } | Self::ForwardBackward { spec, .. } => spec.dim(),
        }
    }

    pub fn dim_out(&self) -> usize {
        match self {
            Self::Affine { map, .. } => map.dim_out(),
            Self::Sum { left, .. } => left.dim_out(),
            Self::Compose { outer, .. } => outer.dim_out(),
            _ => self.dim_in(),
        }
    }

    /// Recursively checks dimension consistency and λ > 0 on every node.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Identity { .. } | Self::Scale { .. } | Self::Projection { .. } => Ok(()),
            Self::Affine { map, offset } => match offset {
                Some(b) if b.dim() != map.dim_out() => Err(Error::DimensionMismatch {
                    context: "affine offset vs matrix rows",
                    left: map.dim_out(),
                    right: b.dim(),
                }),
                _ => Ok(()),
            },
            Self::Sum { left, right } => {
                left.validate()?;
                right.validate()?;
                if left.dim_in() != right.dim_in() || left.dim_out() != right.dim_out() {
                    return Err(Error::DimensionMismatch {
                        context: "sum operands",
                        left: left.dim_in(),
                        right: right.dim_in(),
                    });
                }
                Ok(())
            }
            Self::Compose { outer, inner } => {
                outer.validate()?;
                inner.validate()?;
                if outer.dim_in() != inner.dim_out() {
                    return Err(Error::DimensionMismatch {
                        context: "compose(outer, inner): outer input vs inner output",
                        left: outer.dim_in(),
                        right: inner.dim_out(),
                    });
                }
                Ok(())
            }
            Self::Resolvent { lambda, .. } => check_lambda(*lambda),
            Self::ForwardBackward {
                spec,
                forward,
                lambda,
            } => {
                check_lambda(*lambda)?;
                forward.op.validate()?;
                if forward.op.dim_in() != spec.dim() || forward.op.dim_out() != spec.dim() {
                    return Err(Error::DimensionMismatch {
                        context: "forward operator vs monotone operator dimension",
                        left: spec.dim(),
                        right: forward.op.dim_in(),
                    });
                }
                Ok(())
            }
        }
    }

    /// Evaluates the expression at `x`. Pure and deterministic.
    pub fn evaluate(&self, x: &Vector<T>) -> Result<Vector<T>> {
        if x.dim() != self.dim_in() {
            return Err(Error::DimensionMismatch {
                context: "operator input",
                left: self.dim_in(),
                right: x.dim(),
            });
        }
        match self {
            Self::Identity { .. } => Ok(x.clone()),
            Self::Affine { map, offset } => {
                let mx = map.apply(x)?;
                match offset {
                    Some(b) => mx.add(b),
                    None => Ok(mx),
                }
            }
            Self::Scale { factor, .. } => Ok(x.scale(*factor)),
            Self::Sum { left, right } => left.evaluate(x)?.add(&right.evaluate(x)?),
            Self::Compose { outer, inner } => outer.evaluate(&inner.evaluate(x)?),
            Self::Projection { set } => set.project(x),
            Self::Resolvent { spec, lambda } => resolvent_apply(spec, *lambda, x),
            Self::ForwardBackward {
                spec,
                forward,
                lambda,
            } => {
                let gx = forward.op.evaluate(x)?;
                let l = *lambda;
                let shifted = x.zip_with(&gx, "forward step", |a, g| a - l * g)?;
                resolvent_apply(spec, l, &shifted)
            }
        }
    }
}

/// Free-function form of [`OperatorExpr::evaluate`].
pub fn evaluate<T: Scalar>(op: &OperatorExpr<T>, x: &Vector<T>) -> Result<Vector<T>> {
    op.evaluate(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector<f64> {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn identity_node() {
        let op = OperatorExpr::<f64>::identity(1);
        assert_eq!(op.evaluate(&v(&[7.0])).unwrap(), v(&[7.0]));
    }

    #[test]
    fn affine_fixed_point() {
        let u = OperatorExpr::affine_1d(4.5, -3.5);
        assert_eq!(u.evaluate(&v(&[1.0])).unwrap(), v(&[1.0]));
    }

    #[test]
    fn compose_applies_inner_first() {
        let s = OperatorExpr::affine_1d(0.25, 0.75);
        assert_eq!(s.evaluate(&v(&[5.0])).unwrap(), v(&[2.0]));
        let ss = OperatorExpr::compose(s.clone(), s).unwrap();
        // (5+3)/4 = 2 then (2+3)/4 = 1.25
        assert_eq!(ss.evaluate(&v(&[5.0])).unwrap(), v(&[1.25]));
        let sss = OperatorExpr::compose(ss, OperatorExpr::affine_1d(0.25, 0.75)).unwrap();
        assert_eq!(sss.evaluate(&v(&[5.0])).unwrap(), v(&[1.0625]));
    }

    #[test]
    fn compose_rejects_mismatched_dims() {
        let a = OperatorExpr::linear(LinearOp::<f64>::identity(2));
        let b = OperatorExpr::identity(3);
        assert!(OperatorExpr::compose(a.clone(), b.clone()).is_err());
        assert!(OperatorExpr::sum(a, b).is_err());
    }

    #[test]
    fn evaluate_rejects_wrong_input_dim() {
        let op = OperatorExpr::<f64>::identity(2);
        assert!(op.evaluate(&v(&[1.0])).is_err());
    }

    #[test]
    fn hand_built_tree_is_validated() {
        let bad = OperatorExpr::Compose {
            outer: Box::new(OperatorExpr::<f64>::identity(2)),
            inner: Box::new(OperatorExpr::identity(1)),
        };
        assert!(bad.validate().is_err());
        let bad_lambda = OperatorExpr::Resolvent {
            spec: MonotoneSpec::<f64>::zero(1),
            lambda: -1.0,
        };
        assert!(bad_lambda.validate().is_err());
        assert!(bad_lambda.evaluate(&v(&[1.0])).is_err());
    }

    #[test]
    fn forward_backward_matches_manual() {
        let spec = MonotoneSpec::subdifferential_abs(1, 1.0).unwrap();
        let g = SingleValuedSpec::new(OperatorExpr::identity(1));
        let fb = OperatorExpr::forward_backward(spec, g, 1.0).unwrap();
        assert_eq!(fb.evaluate(&v(&[3.0])).unwrap(), v(&[0.0]));
    }

    #[test]
    fn resolvent_requires_positive_lambda() {
        assert!(OperatorExpr::resolvent(MonotoneSpec::<f64>::zero(1), 0.0).is_err());
    }
}
