//! Sampling-based checks for operator classes: nonexpansive, monotone,
//! strongly monotone, inverse strongly monotone, firmly nonexpansive, and
//! adjoint consistency.
//!
//! A passing verdict means no counterexample was found among the sampled
//! pairs. Inner-product margins are normalized by ‖x − y‖² so one tolerance
//! works across scales.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::operators::{LinearOp, OperatorExpr};
use crate::scalar::Scalar;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 0x00c0_ffee;
pub const ADJOINT_TOLERANCE: f64 = 1e-10;
const MAX_RESAMPLES: usize = 64;

/// Deterministic source of sample points, uniform in `[lo, hi]` per coordinate.
#[derive(Debug, Clone)]
pub struct SeededSampler {
    rng: ChaCha8Rng,
    seed: u64,
    lo: f64,
    hi: f64,
}

impl SeededSampler {
    /// Coordinates uniform in [−10, 10].
    pub fn new(seed: u64) -> Self {
        Self::with_range(seed, -10.0, 10.0)
    }

    pub fn with_range(seed: u64, lo: f64, hi: f64) -> Self {
        assert!(lo < hi, "sampler range must be nonempty");
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            lo,
            hi,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn scalar<T: Scalar>(&mut self) -> T {
        T::lit(self.rng.gen_range(self.lo..=self.hi))
    }

    /// Uniform draw from an arbitrary interval, independent of the sampler range.
    pub fn uniform<T: Scalar>(&mut self, lo: f64, hi: f64) -> T {
        T::lit(self.rng.gen_range(lo..=hi))
    }

    pub fn vector<T: Scalar>(&mut self, dim: usize) -> Vector<T> {
        Vector::from_raw((0..dim.max(1)).map(|_| self.scalar()).collect())
    }

    /// Draws `(x, y)` with `x ≠ y`, resampling coincident pairs.
    pub fn distinct_pair<T: Scalar>(&mut self, dim: usize) -> Result<(Vector<T>, Vector<T>)> {
        for _ in 0..MAX_RESAMPLES {
            let x = self.vector(dim);
            let y = self.vector(dim);
            if x != y {
                return Ok((x, y));
            }
        }
        Err(Error::DegenerateSampling {
            attempts: MAX_RESAMPLES,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Operator property checked by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Property<T> {
    Nonexpansive,
    Monotone,
    StronglyMonotone { alpha: T },
    InverseStronglyMonotone { beta: T },
    FirmlyNonexpansive,
}

impl<T: Scalar> Property<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Nonexpansive => "nonexpansive",
            Self::Monotone => "monotone",
            Self::StronglyMonotone { .. } => "strongly_monotone",
            Self::InverseStronglyMonotone { .. } => "ism",
            Self::FirmlyNonexpansive => "firmly_nonexpansive",
        }
    }
}

/// Outcome of a sampling check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport<T> {
    pub property: String,
    pub n_samples: usize,
    /// Smallest slack of the defining inequality; negative means violated.
    pub worst_margin: T,
    /// Best constant supported by the samples: the Lipschitz ratio for
    /// nonexpansiveness, the strong-monotonicity modulus for (strong)
    /// monotonicity, the ism modulus for ism/firm nonexpansiveness, and the
    /// largest relative defect for adjoint checks.
    pub estimate: Option<T>,
    pub witness: Option<(Vector<T>, Vector<T>)>,
    pub tolerance: T,
    pub verdict: Verdict,
}

impl<T: Scalar> PropertyReport<T> {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

struct Tracker<T> {
    worst: Option<(T, Vector<T>, Vector<T>)>,
}

impl<T: Scalar> Tracker<T> {
    fn push(&mut self, margin: T, x: &Vector<T>, y: &Vector<T>) {
        let replace = match &self.worst {
            None => true,
            Some((m, _, _)) => margin < *m || margin.is_nan(),
        };
        if replace {
            self.worst = Some((margin, x.clone(), y.clone()));
        }
    }
}

fn finish<T: Scalar>(
    property: &str,
    n: usize,
    tracker: Tracker<T>,
    estimate: Option<T>,
    tolerance: T,
) -> PropertyReport<T> {
    let (worst_margin, witness) = match tracker.worst {
        Some((m, x, y)) => (m, Some((x, y))),
        None => (T::zero(), None),
    };
    // NaN margins count as violations.
    let verdict = if worst_margin >= -tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    PropertyReport {
        property: property.to_string(),
        n_samples: n,
        worst_margin,
        estimate,
        witness,
        tolerance,
        verdict,
    }
}

fn require_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "at least one sample pair is required".into(),
        });
    }
    Ok(())
}

/// Samples `n` distinct pairs and evaluates `property` with the given tolerance.
pub fn check_property<T: Scalar>(
    property: Property<T>,
    op: &OperatorExpr<T>,
    sampler: &mut SeededSampler,
    n: usize,
    tolerance: T,
) -> Result<PropertyReport<T>> {
    require_samples(n)?;
    let dim = op.dim_in();
    if op.dim_out() != dim {
        return Err(Error::DimensionMismatch {
            context: "property checks need an operator mapping a space into itself",
            left: dim,
            right: op.dim_out(),
        });
    }
    let mut tracker = Tracker { worst: None };
    let mut estimate: Option<T> = None;
    let mut keep = |e: T, larger: bool| {
        estimate = Some(match estimate {
            None => e,
            Some(cur) if larger => cur.max(e),
            Some(cur) => cur.min(e),
        });
    };
    for _ in 0..n {
        let (x, y) = sampler.distinct_pair::<T>(dim)?;
        let d = x.sub(&y)?;
        let td = op.evaluate(&x)?.sub(&op.evaluate(&y)?)?;
        let dd = d.norm_squared();
        let margin = match property {
            Property::Nonexpansive => {
                let ratio = td.norm() / d.norm();
                keep(ratio, true);
                T::one() - ratio
            }
            Property::Monotone => {
                let m = td.inner(&d)? / dd;
                keep(m, false);
                m
            }
            Property::StronglyMonotone { alpha } => {
                let m = td.inner(&d)? / dd;
                keep(m, false);
                m - alpha
            }
            Property::InverseStronglyMonotone { beta } => {
                let ip = td.inner(&d)?;
                let tt = td.norm_squared();
                if tt > T::zero() {
                    keep(ip / tt, false);
                }
                (ip - beta * tt) / dd
            }
            Property::FirmlyNonexpansive => {
                let ip = td.inner(&d)?;
                let tt = td.norm_squared();
                if tt > T::zero() {
                    keep(ip / tt, false);
                }
                (ip - tt) / dd
            }
        };
        tracker.push(margin, &x, &y);
    }
    Ok(finish(property.name(), n, tracker, estimate, tolerance))
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be positive".into(),
        })
    }
}

/// ‖Tx − Ty‖ ≤ ‖x − y‖; passes iff the largest sampled ratio is ≤ 1 + tol.
pub fn check_nonexpansive<T: Scalar>(
    op: &OperatorExpr<T>,
    sampler: &mut SeededSampler,
    n: usize,
) -> Result<PropertyReport<T>> {
    check_property(
        Property::Nonexpansive,
        op,
        sampler,
        n,
        T::lit(DEFAULT_TOLERANCE),
    )
}

/// ⟨Tx − Ty, x − y⟩ ≥ 0.
pub fn check_monotone<T: Scalar>(
    op: &OperatorExpr<T>,
    sampler: &mut SeededSampler,
    n: usize,
) -> Result<PropertyReport<T>> {
    check_property(
        Property::Monotone,
        op,
        sampler,
        n,
        T::lit(DEFAULT_TOLERANCE),
    )
}

/// ⟨Tx − Ty, x − y⟩ ≥ α‖x − y‖².
pub fn check_strongly_monotone<T: Scalar>(
    op: &OperatorExpr<T>,
    sampler: &mut SeededSampler,
    n: usize,
    alpha: T,
) -> Result<PropertyReport<T>> {
    positive("alpha", alpha)?;
    check_property(
        Property::StronglyMonotone { alpha },
        op,
        sampler,
        n,
        T::lit(DEFAULT_TOLERANCE),
    )
}

/// ⟨Tx − Ty, x − y⟩ ≥ β‖Tx − Ty‖².
pub fn check_ism<T: Scalar>(
    op: &OperatorExpr<T>,
    sampler: &mut SeededSampler,
    n: usize,
    beta: T,
) -> Result<PropertyReport<T>> {
    positive("beta", beta)?;
    check_property(
        Property::InverseStronglyMonotone { beta },
        op,
        sampler,
        n,
        T::lit(DEFAULT_TOLERANCE),
    )
}

/// ⟨Tx − Ty, x − y⟩ ≥ ‖Tx − Ty‖².
pub fn check_firmly_nonexpansive<T: Scalar>(
    op: &OperatorExpr<T>,
    sampler: &mut SeededSampler,
    n: usize,
) -> Result<PropertyReport<T>> {
    check_property(
        Property::FirmlyNonexpansive,
        op,
        sampler,
        n,
        T::lit(DEFAULT_TOLERANCE),
    )
}

/// Checks ⟨Ax, y⟩ = ⟨x, A*y⟩ for a claimed adjoint. The margin is the
/// negated defect relative to `1 + ‖Ax‖‖y‖ + ‖x‖‖A*y‖`.
pub fn check_adjoint<T: Scalar>(
    a: &LinearOp<T>,
    adjoint: &LinearOp<T>,
    sampler: &mut SeededSampler,
    n: usize,
) -> Result<PropertyReport<T>> {
    require_samples(n)?;
    if adjoint.dim_in() != a.dim_out() || adjoint.dim_out() != a.dim_in() {
        return Err(Error::DimensionMismatch {
            context: "claimed adjoint shape",
            left: a.dim_in(),
            right: adjoint.dim_out(),
        });
    }
    let mut tracker = Tracker { worst: None };
    let mut worst_defect = T::zero();
    for _ in 0..n {
        let x = sampler.vector::<T>(a.dim_in());
        let y = sampler.vector::<T>(a.dim_out());
        let ax = a.apply(&x)?;
        let ay = adjoint.apply(&y)?;
        let lhs = ax.inner(&y)?;
        let rhs = x.inner(&ay)?;
        let scale = T::one() + ax.norm() * y.norm() + x.norm() * ay.norm();
        let defect = (lhs - rhs).abs() / scale;
        worst_defect = worst_defect.max(defect);
        tracker.push(-defect, &x, &y);
    }
    Ok(finish(
        "adjoint",
        n,
        tracker,
        Some(worst_defect),
        T::lit(ADJOINT_TOLERANCE),
    ))
}

/// [`check_adjoint`] against the transpose.
pub fn check_transpose_adjoint<T: Scalar>(
    a: &LinearOp<T>,
    sampler: &mut SeededSampler,
    n: usize,
) -> Result<PropertyReport<T>> {
    check_adjoint(a, &a.transpose(), sampler, n)
}
