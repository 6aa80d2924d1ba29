use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::scalar::Scalar;

/// Closed convex set with a closed-form metric projection.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ConvexSet<T> {
    /// Axis-aligned box `lo ≤ x ≤ hi`.
    Box { lo: Vector<T>, hi: Vector<T> },
    /// Euclidean ball `‖x − center‖ ≤ radius`.
    Ball { center: Vector<T>, radius: T },
}

impl<T: Scalar> ConvexSet<T> {
    pub fn boxed(lo: Vector<T>, hi: Vector<T>) -> Result<Self> {
        lo.check_dim(&hi, "box bounds")?;
        if lo.coords().iter().zip(hi.coords()).any(|(l, h)| l > h) {
            return Err(Error::InvalidParameter {
                name: "box",
                reason: "lower bound exceeds upper bound".into(),
            });
        }
        Ok(Self::Box { lo, hi })
    }

    pub fn ball(center: Vector<T>, radius: T) -> Result<Self> {
        if !(radius >= T::zero()) || !radius.is_finite() {
            return Err(Error::InvalidParameter {
                name: "radius",
                reason: "radius must be finite and nonnegative".into(),
            });
        }
        Ok(Self::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lo, .. } => lo.dim(),
            Self::Ball { center, .. } => center.dim(),
        }
    }

    pub fn project(&self, x: &Vector<T>) -> Result<Vector<T>> {
        match self {
            Self::Box { lo, hi } => {
                lo.check_dim(x, "box projection")?;
                Ok(Vector::from_raw(
                    x.coords()
                        .iter()
                        .zip(lo.coords().iter().zip(hi.coords()))
                        .map(|(&v, (&l, &h))| v.max(l).min(h))
                        .collect(),
                ))
            }
            Self::Ball { center, radius } => {
                let d = x.sub(center)?;
                let r = d.norm();
                if r <= *radius {
                    Ok(x.clone())
                } else {
                    center.add(&d.scale(*radius / r))
                }
            }
        }
    }

    pub fn distance(&self, x: &Vector<T>) -> Result<T> {
        self.project(x)?.distance(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_projection_clamps() {
        let b = ConvexSet::<f64>::boxed(
            Vector::new(vec![0.0, 0.0]).unwrap(),
            Vector::new(vec![1.0, 1.0]).unwrap(),
        )
        .unwrap();
        let p = b.project(&Vector::new(vec![2.0, -0.5]).unwrap()).unwrap();
        assert_eq!(p.coords(), &[1.0, 0.0]);
    }

    #[test]
    fn ball_projection_radial() {
        let b = ConvexSet::<f64>::ball(Vector::new(vec![0.0, 0.0]).unwrap(), 1.0).unwrap();
        let p = b.project(&Vector::new(vec![3.0, 4.0]).unwrap()).unwrap();
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        let inside = Vector::new(vec![0.1, 0.2]).unwrap();
        assert_eq!(b.project(&inside).unwrap(), inside);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(ConvexSet::boxed(
            Vector::new(vec![1.0]).unwrap(),
            Vector::new(vec![0.0]).unwrap()
        )
        .is_err());
        assert!(ConvexSet::ball(Vector::new(vec![0.0]).unwrap(), -1.0).is_err());
    }
}
