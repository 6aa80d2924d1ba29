use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::linear::LinearOp;
use super::sets::ConvexSet;
use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::scalar::Scalar;

const PSD_SAMPLES: usize = 256;
const PSD_SEED: u64 = 0x9e37_79b9_7f4a_7c15;
const PSD_SLACK: f64 = 1e-10;

/// Maximal monotone (possibly set-valued) operator with a closed-form
/// resolvent.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum MonotoneSpec<T> {
    /// M ≡ 0.
    Zero { dim: usize },
    /// Linear map with ⟨Mx, x⟩ ≥ 0. Need not be symmetric.
    LinearPsd { matrix: LinearOp<T> },
    /// Subdifferential of x ↦ weight·‖x‖₁.
    SubdifferentialAbs { dim: usize, weight: T },
    /// Normal cone of a closed convex set.
    NormalCone { set: ConvexSet<T> },
}

impl<T: Scalar> MonotoneSpec<T> {
    pub fn zero(dim: usize) -> Self {
        Self::Zero { dim }
    }

    /// Accepts a square matrix after checking ⟨Mx, x⟩ ≥ −1e−10·‖x‖² on the
    /// standard basis, the all-ones vector and seeded random samples.
    pub fn linear_psd(matrix: LinearOp<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                context: "linear_psd requires a square matrix",
                left: matrix.dim_out(),
                right: matrix.dim_in(),
            });
        }
        let n = matrix.dim_in();
        let mut rng = ChaCha8Rng::seed_from_u64(PSD_SEED);
        let basis = (0..n).map(|j| {
            let mut e = vec![T::zero(); n];
            e[j] = T::one();
            Vector::from_raw(e)
        });
        let random = (0..PSD_SAMPLES)
            .map(|_| Vector::from_raw((0..n).map(|_| T::lit(rng.gen_range(-1.0..=1.0))).collect()));
        let probes: Vec<_> = basis
            .chain(std::iter::once(Vector::filled(n, T::one())))
            .chain(random)
            .collect();
        for x in &probes {
            let q = matrix.quadratic_form(x)?;
            if q < -T::lit(PSD_SLACK) * x.norm_squared() {
                return Err(Error::NotPositiveSemidefinite {
                    quadratic_form: q.to_f64_lossy(),
                });
            }
        }
        Ok(Self::LinearPsd { matrix })
    }

    pub fn subdifferential_abs(dim: usize, weight: T) -> Result<Self> {
        if !(weight >= T::zero()) || !weight.is_finite() {
            return Err(Error::InvalidParameter {
                name: "weight",
                reason: "weight must be finite and nonnegative".into(),
            });
        }
        Ok(Self::SubdifferentialAbs { dim, weight })
    }

    pub fn normal_cone(set: ConvexSet<T>) -> Self {
        Self::NormalCone { set }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Zero { dim } | Self::SubdifferentialAbs { dim, .. } => *dim,
            Self::LinearPsd { matrix } => matrix.dim_in(),
            Self::NormalCone { set } => set.dim(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Zero { .. } => "zero",
            Self::LinearPsd { .. } => "linear_psd",
            Self::SubdifferentialAbs { .. } => "subdifferential_abs",
            Self::NormalCone { .. } => "normal_cone",
        }
    }

    pub fn resolvent(&self, lambda: T, x: &Vector<T>) -> Result<Vector<T>> {
        resolvent_apply(self, lambda, x)
    }
}

/// Componentwise soft-thresholding sign(v)·max(|v| − t, 0).
pub fn soft_threshold<T: Scalar>(x: &Vector<T>, t: T) -> Vector<T> {
    x.map(|v| v.signum() * (v.abs() - t).max(T::zero()))
}

/// Resolvent (I + λM)⁻¹ evaluated at `x`: the unique z with x ∈ z + λ·M(z).
pub fn resolvent_apply<T: Scalar>(
    spec: &MonotoneSpec<T>,
    lambda: T,
    x: &Vector<T>,
) -> Result<Vector<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("resolvent parameter must be positive, got {lambda}"),
        });
    }
    if spec.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            context: "resolvent input",
            left: spec.dim(),
            right: x.dim(),
        });
    }
    match spec {
        MonotoneSpec::Zero { .. } => Ok(x.clone()),
        MonotoneSpec::LinearPsd { matrix } => matrix.solve_shifted(lambda, x),
        MonotoneSpec::SubdifferentialAbs { weight, .. } => Ok(soft_threshold(x, lambda * *weight)),
        MonotoneSpec::NormalCone { set } => set.project(x),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(c: &[f64]) -> Vector<f64> {
        Vector::new(c.to_vec()).unwrap()
    }

    #[test]
    fn linear_resolvent_closed_form() {
        let spec = MonotoneSpec::linear_psd(LinearOp::scalar(2.0)).unwrap();
        assert_eq!(resolvent_apply(&spec, 0.5, &v(&[4.0])).unwrap(), v(&[2.0]));
    }

    #[test]
    fn zero_resolvent_is_identity() {
        let spec = MonotoneSpec::zero(1);
        assert_eq!(resolvent_apply(&spec, 1.0, &v(&[3.7])).unwrap(), v(&[3.7]));
    }

    #[test]
    fn abs_resolvent_soft_thresholds() {
        let spec = MonotoneSpec::subdifferential_abs(1, 1.0).unwrap();
        assert_eq!(resolvent_apply(&spec, 1.0, &v(&[3.0])).unwrap(), v(&[2.0]));
        assert_eq!(resolvent_apply(&spec, 1.0, &v(&[-0.4])).unwrap()[0], 0.0);
        assert_eq!(
            resolvent_apply(&spec, 2.0, &v(&[-3.0])).unwrap(),
            v(&[-1.0])
        );
    }

    #[test]
    fn normal_cone_resolvent_projects() {
        let set = ConvexSet::boxed(v(&[0.0]), v(&[1.0])).unwrap();
        let spec = MonotoneSpec::normal_cone(set);
        assert_eq!(resolvent_apply(&spec, 7.0, &v(&[2.0])).unwrap(), v(&[1.0]));
    }

    #[test]
    fn rejects_nonpositive_lambda() {
        let spec = MonotoneSpec::<f64>::zero(1);
        assert!(resolvent_apply(&spec, 0.0, &v(&[1.0])).is_err());
        assert!(resolvent_apply(&spec, -1.0, &v(&[1.0])).is_err());
    }

    #[test]
    fn rejects_indefinite_matrix() {
        let m = LinearOp::from_f64_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
        assert!(matches!(
            MonotoneSpec::<f64>::linear_psd(m),
            Err(Error::NotPositiveSemidefinite { .. })
        ));
        // Skew part is allowed: <Mx, x> = x1^2 + x2^2.
        let skew = LinearOp::from_f64_rows(&[&[1.0, 3.0], &[-3.0, 1.0]]).unwrap();
        assert!(MonotoneSpec::<f64>::linear_psd(skew).is_ok());
    }

    #[test]
    fn linear_resolvent_satisfies_inclusion() {
        let m = LinearOp::from_f64_rows(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 0.5], &[0.0, 0.5, 1.0]])
            .unwrap();
        let spec = MonotoneSpec::linear_psd(m.clone()).unwrap();
        let x = v(&[1.0, -2.0, 5.0]);
        let lambda = 0.7;
        let z = resolvent_apply(&spec, lambda, &x).unwrap();
        let back = z.add(&m.apply(&z).unwrap().scale(lambda)).unwrap();
        assert!(back.distance(&x).unwrap() <= 1e-10 * (1.0 + x.norm()));
    }
}
