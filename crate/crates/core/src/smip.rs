//! Split monotone inclusion problem: find x* with 0 ∈ g₁(x*) + B₁(x*) such
//! that y* = Ax* solves 0 ∈ g₂(y*) + B₂(y*).
//!
//! The problem is reduced to the fixed points of
//! `J′ = U(I + γA*(V − I)A)` with `U = J_λ^{B₁}(I − λg₁)` and
//! `V = J_λ^{B₂}(I − λg₂)`.

use serde::Serialize;

use crate::analysis::{check_nonexpansive, SeededSampler};
use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::operators::{LinearOp, MonotoneSpec, OperatorExpr, SingleValuedSpec};
use crate::scalar::Scalar;

/// Default tolerance for declaring a point a member of Ω.
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
const NORM_TOL: f64 = 1e-13;
const NORM_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "form")]
pub enum SmipForm<T> {
    /// Operators given through (g₁, g₂, B₁, B₂, λ).
    Components {
        g1: SingleValuedSpec<T>,
        g2: SingleValuedSpec<T>,
        b1: MonotoneSpec<T>,
        b2: MonotoneSpec<T>,
        lambda: T,
    },
    /// U and V supplied directly.
    Direct {
        u: OperatorExpr<T>,
        v: OperatorExpr<T>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmipProblem<T> {
    form: SmipForm<T>,
    a: LinearOp<T>,
    gamma: T,
    #[serde(skip)]
    u: OperatorExpr<T>,
    #[serde(skip)]
    v: OperatorExpr<T>,
    #[serde(skip)]
    jprime: OperatorExpr<T>,
}

/// Membership residuals for Ω and for the fixed-point set of J′.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals<T> {
    /// ‖x − U(x)‖
    pub r_inclusion1: T,
    /// ‖Ax − V(Ax)‖
    pub r_inclusion2: T,
    /// ‖x − J′(x)‖
    pub r_jprime: T,
}

impl<T: Scalar> Residuals<T> {
    /// x ∈ Ω at tolerance `tol` iff both inclusion residuals are within it.
    pub fn in_omega(&self, tol: T) -> bool {
        self.r_inclusion1 <= tol && self.r_inclusion2 <= tol
    }
}

/// The admissible interval (0, 2/‖A*A‖) for γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRange<T> {
    pub lower: T,
    pub upper: T,
    pub norm_ata: T,
    pub gamma: T,
    pub admissible: bool,
}

/// Assumption that a run proceeds without.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Warning {
    GammaOutOfRange {
        gamma: f64,
        upper: f64,
    },
    NotNonexpansive {
        operator: String,
        lipschitz_estimate: f64,
    },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::GammaOutOfRange { gamma, upper } => {
                write!(f, "gamma = {gamma:e} lies outside (0, {upper:e})")
            }
            Self::NotNonexpansive {
                operator,
                lipschitz_estimate,
            } => write!(
                f,
                "{operator} is not nonexpansive (sampled Lipschitz ratio {lipschitz_estimate:.6})"
            ),
        }
    }
}

fn check_positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {v}"),
        })
    }
}

fn square_on<T: Scalar>(op: &OperatorExpr<T>, dim: usize, context: &'static str) -> Result<()> {
    if op.dim_in() != dim || op.dim_out() != dim {
        return Err(Error::DimensionMismatch {
            context,
            left: dim,
            right: op.dim_in(),
        });
    }
    Ok(())
}

/// x ↦ J_λ^B(x − λ·g(x)), built as compose(resolvent, I − λg).
fn forward_backward_composite<T: Scalar>(
    b: &MonotoneSpec<T>,
    g: &SingleValuedSpec<T>,
    lambda: T,
) -> Result<OperatorExpr<T>> {
    let d = b.dim();
    let forward = OperatorExpr::sum(
        OperatorExpr::identity(d),
        OperatorExpr::compose(OperatorExpr::scale(d, -lambda), g.op.clone())?,
    )?;
    OperatorExpr::compose(OperatorExpr::resolvent(b.clone(), lambda)?, forward)
}

/// x ↦ U(x + γ·A*(V(Ax) − Ax)).
fn jprime_composite<T: Scalar>(
    u: &OperatorExpr<T>,
    v: &OperatorExpr<T>,
    a: &LinearOp<T>,
    gamma: T,
) -> Result<OperatorExpr<T>> {
    let d1 = a.dim_in();
    let d2 = a.dim_out();
    let v_minus_i = OperatorExpr::sum(v.clone(), OperatorExpr::scale(d2, -T::one()))?;
    let correction = OperatorExpr::compose(
        OperatorExpr::scale(d1, gamma),
        OperatorExpr::compose(
            OperatorExpr::linear(a.transpose()),
            OperatorExpr::compose(v_minus_i, OperatorExpr::linear(a.clone()))?,
        )?,
    )?;
    let inner = OperatorExpr::sum(OperatorExpr::identity(d1), correction)?;
    OperatorExpr::compose(u.clone(), inner)
}

impl<T: Scalar> SmipProblem<T> {
    /// Component form; μ and ν live on `g1.ism` / `g2.ism`.
    pub fn components(
        g1: SingleValuedSpec<T>,
        g2: SingleValuedSpec<T>,
        b1: MonotoneSpec<T>,
        b2: MonotoneSpec<T>,
        a: LinearOp<T>,
        lambda: T,
        gamma: T,
    ) -> Result<Self> {
        check_positive("lambda", lambda)?;
        check_positive("gamma", gamma)?;
        for ism in [g1.ism, g2.ism].into_iter().flatten() {
            check_positive("ism constant", ism)?;
        }
        let (d1, d2) = (a.dim_in(), a.dim_out());
        if b1.dim() != d1 {
            return Err(Error::DimensionMismatch {
                context: "B1 must act on the domain of A",
                left: d1,
                right: b1.dim(),
            });
        }
        if b2.dim() != d2 {
            return Err(Error::DimensionMismatch {
                context: "B2 must act on the range of A",
                left: d2,
                right: b2.dim(),
            });
        }
        square_on(&g1.op, d1, "g1 must map H1 into H1")?;
        square_on(&g2.op, d2, "g2 must map H2 into H2")?;
        let u = forward_backward_composite(&b1, &g1, lambda)?;
        let v = forward_backward_composite(&b2, &g2, lambda)?;
        let jprime = jprime_composite(&u, &v, &a, gamma)?;
        Ok(Self {
            form: SmipForm::Components {
                g1,
                g2,
                b1,
                b2,
                lambda,
            },
            a,
            gamma,
            u,
            v,
            jprime,
        })
    }

    /// Direct form with U and V supplied as raw operators.
    pub fn direct(
        u: OperatorExpr<T>,
        v: OperatorExpr<T>,
        a: LinearOp<T>,
        gamma: T,
    ) -> Result<Self> {
        check_positive("gamma", gamma)?;
        u.validate()?;
        v.validate()?;
        square_on(&u, a.dim_in(), "U must map H1 into H1")?;
        square_on(&v, a.dim_out(), "V must map H2 into H2")?;
        let jprime = jprime_composite(&u, &v, &a, gamma)?;
        Ok(Self {
            form: SmipForm::Direct {
                u: u.clone(),
                v: v.clone(),
            },
            a,
            gamma,
            u,
            v,
            jprime,
        })
    }

    pub fn form(&self) -> &SmipForm<T> {
        &self.form
    }

    pub fn a(&self) -> &LinearOp<T> {
        &self.a
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn lambda(&self) -> Option<T> {
        match &self.form {
            SmipForm::Components { lambda, .. } => Some(*lambda),
            SmipForm::Direct { .. } => None,
        }
    }

    pub fn dim_h1(&self) -> usize {
        self.a.dim_in()
    }

    pub fn dim_h2(&self) -> usize {
        self.a.dim_out()
    }

    pub fn u(&self) -> &OperatorExpr<T> {
        &self.u
    }

    pub fn v(&self) -> &OperatorExpr<T> {
        &self.v
    }

    pub fn jprime(&self) -> &OperatorExpr<T> {
        &self.jprime
    }

    /// U = J_λ^{B₁}(I − λg₁); in direct form, the supplied U.
    pub fn build_u(&self) -> Result<OperatorExpr<T>> {
        match &self.form {
            SmipForm::Components { g1, b1, lambda, .. } => {
                forward_backward_composite(b1, g1, *lambda)
            }
            SmipForm::Direct { u, .. } => Ok(u.clone()),
        }
    }

    /// V = J_λ^{B₂}(I − λg₂); in direct form, the supplied V.
    pub fn build_v(&self) -> Result<OperatorExpr<T>> {
        match &self.form {
            SmipForm::Components { g2, b2, lambda, .. } => {
                forward_backward_composite(b2, g2, *lambda)
            }
            SmipForm::Direct { v, .. } => Ok(v.clone()),
        }
    }

    /// J′ = U(I + γA*(V − I)A), evaluated as: Ax, V(Ax), subtract, A*, scale
    /// by γ, add x, apply U.
    pub fn build_jprime(&self) -> Result<OperatorExpr<T>> {
        jprime_composite(&self.build_u()?, &self.build_v()?, &self.a, self.gamma)
    }

    pub fn residuals(&self, x: &Vector<T>) -> Result<Residuals<T>> {
        let ax = self.a.apply(x)?;
        Ok(Residuals {
            r_inclusion1: x.distance(&self.u.evaluate(x)?)?,
            r_inclusion2: ax.distance(&self.v.evaluate(&ax)?)?,
            r_jprime: x.distance(&self.jprime.evaluate(x)?)?,
        })
    }

    pub fn gamma_range(&self) -> Result<GammaRange<T>> {
        let est = self.a.operator_norm(T::lit(NORM_TOL), NORM_MAX_ITER)?;
        if est.zero {
            return Err(Error::ZeroOperator);
        }
        let norm_ata = est.value * est.value;
        let upper = T::two() / norm_ata;
        Ok(GammaRange {
            lower: T::zero(),
            upper,
            norm_ata,
            gamma: self.gamma,
            admissible: self.gamma > T::zero() && self.gamma < upper,
        })
    }

    /// Sampled checks of the standing assumptions: γ admissible and U, V, J′
    /// nonexpansive. Violations are warnings; runs proceed regardless.
    pub fn assumption_warnings(&self, seed: u64, n: usize) -> Result<Vec<Warning>> {
        let mut out = Vec::new();
        match self.gamma_range() {
            Ok(r) if !r.admissible => out.push(Warning::GammaOutOfRange {
                gamma: self.gamma.to_f64_lossy(),
                upper: r.upper.to_f64_lossy(),
            }),
            Ok(_) | Err(Error::ZeroOperator) => {}
            Err(e) => return Err(e),
        }
        for (name, op) in [("U", &self.u), ("V", &self.v), ("J'", &self.jprime)] {
            let report = check_nonexpansive(op, &mut SeededSampler::new(seed), n)?;
            if !report.passed() {
                out.push(Warning::NotNonexpansive {
                    operator: name.to_string(),
                    lipschitz_estimate: report.estimate.map_or(f64::NAN, Scalar::to_f64_lossy),
                });
            }
        }
        Ok(out)
    }
}
