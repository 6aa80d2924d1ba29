//! Benchmark problems with a known common solution x* ∈ F(S) ∩ Ω.
//!
//! Every catalog entry has nonexpansive S and J′ and a reference point whose
//! residuals vanish to rounding. [`reference_example`] is the one-dimensional
//! worked example with an expansive U; it is kept separate because it does
//! not satisfy those hypotheses.

use crate::engines::{IterConfig, Schedule, Scheme};
use crate::error::Result;
use crate::hilbert::Vector;
use crate::operators::{ConvexSet, LinearOp, MonotoneSpec, OperatorExpr, SingleValuedSpec};
use crate::scalar::Scalar;
use crate::smip::SmipProblem;

#[derive(Debug, Clone)]
pub struct CatalogProblem<T> {
    pub name: &'static str,
    pub s: OperatorExpr<T>,
    pub problem: SmipProblem<T>,
    pub x_star: Vector<T>,
    pub x0: Vector<T>,
}

fn vec_of<T: Scalar>(values: &[f64]) -> Vector<T> {
    Vector::from_f64(values).expect("catalog literals are finite and nonempty")
}

fn zero_forward<T: Scalar>(dim: usize) -> SingleValuedSpec<T> {
    SingleValuedSpec::new(OperatorExpr::scale(dim, T::zero()))
}

fn box_set<T: Scalar>(lo: f64, hi: f64, dim: usize) -> Result<ConvexSet<T>> {
    ConvexSet::boxed(vec_of(&vec![lo; dim]), vec_of(&vec![hi; dim]))
}

fn contraction_to_one<T: Scalar>() -> OperatorExpr<T> {
    OperatorExpr::affine_1d(T::lit(0.25), T::lit(0.75))
}

fn interval_cones<T: Scalar>() -> Result<CatalogProblem<T>> {
    let problem = SmipProblem::components(
        zero_forward(1),
        zero_forward(1),
        MonotoneSpec::normal_cone(box_set(0.0, 2.0, 1)?),
        MonotoneSpec::normal_cone(box_set(-1.0, 0.0, 1)?),
        LinearOp::scalar(T::lit(-0.5)),
        T::one(),
        T::two(),
    )?;
    Ok(CatalogProblem {
        name: "interval_cones",
        s: contraction_to_one(),
        problem,
        x_star: vec_of(&[1.0]),
        x0: vec_of(&[7.0]),
    })
}

fn psd_rotation<T: Scalar>() -> Result<CatalogProblem<T>> {
    let rotation = LinearOp::from_f64_rows(&[&[0.0, -0.5], &[0.5, 0.0]])?;
    let problem = SmipProblem::components(
        zero_forward(2),
        zero_forward(2),
        MonotoneSpec::linear_psd(LinearOp::diagonal(&[T::one(), T::two()]))?,
        MonotoneSpec::subdifferential_abs(2, T::one())?,
        LinearOp::from_f64_rows(&[&[1.0, 2.0], &[0.0, 1.0]])?,
        T::one(),
        T::lit(0.08),
    )?;
    Ok(CatalogProblem {
        name: "psd_rotation",
        s: OperatorExpr::linear(rotation),
        problem,
        x_star: vec_of(&[0.0, 0.0]),
        x0: vec_of(&[3.0, -4.0]),
    })
}

fn ball_shrinkage<T: Scalar>() -> Result<CatalogProblem<T>> {
    let problem = SmipProblem::components(
        zero_forward(3),
        zero_forward(3),
        MonotoneSpec::subdifferential_abs(3, T::half())?,
        MonotoneSpec::zero(3),
        LinearOp::identity(3),
        T::one(),
        T::half(),
    )?;
    Ok(CatalogProblem {
        name: "ball_shrinkage",
        s: OperatorExpr::projection(ConvexSet::ball(vec_of(&[0.0, 0.0, 0.0]), T::two())?),
        problem,
        x_star: vec_of(&[0.0, 0.0, 0.0]),
        x0: vec_of(&[5.0, -2.0, 1.5]),
    })
}

fn forward_backward_box<T: Scalar>() -> Result<CatalogProblem<T>> {
    let gradient = OperatorExpr::affine(LinearOp::identity(2), vec_of(&[-2.0, -2.0]))?;
    let problem = SmipProblem::components(
        SingleValuedSpec::with_ism(gradient, T::one()),
        zero_forward(3),
        MonotoneSpec::normal_cone(box_set(1.0, 3.0, 2)?),
        MonotoneSpec::normal_cone(box_set(0.0, 5.0, 3)?),
        LinearOp::from_f64_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]])?,
        T::half(),
        T::lit(1.0 / 6.0),
    )?;
    Ok(CatalogProblem {
        name: "forward_backward_box",
        s: OperatorExpr::affine(
            LinearOp::diagonal(&[T::half(), T::half()]),
            vec_of(&[1.0, 1.0]),
        )?,
        problem,
        x_star: vec_of(&[2.0, 2.0]),
        x0: vec_of(&[-3.0, 6.0]),
    })
}

fn split_feasibility<T: Scalar>() -> Result<CatalogProblem<T>> {
    let problem = SmipProblem::components(
        zero_forward(4),
        zero_forward(2),
        MonotoneSpec::zero(4),
        MonotoneSpec::normal_cone(ConvexSet::ball(vec_of(&[0.0, 0.0]), T::one())?),
        LinearOp::from_f64_rows(&[&[1.0, 0.0, 1.0, 0.0], &[0.0, 1.0, 0.0, 1.0]])?,
        T::one(),
        T::lit(0.25),
    )?;
    Ok(CatalogProblem {
        name: "split_feasibility",
        s: OperatorExpr::projection(box_set(-1.0, 1.0, 4)?),
        problem,
        x_star: vec_of(&[0.0, 0.0, 0.0, 0.0]),
        x0: vec_of(&[4.0, -3.0, 2.0, 1.0]),
    })
}

fn identity_split<T: Scalar>() -> Result<CatalogProblem<T>> {
    let problem = SmipProblem::direct(
        OperatorExpr::identity(1),
        OperatorExpr::identity(1),
        LinearOp::identity(1),
        T::half(),
    )?;
    Ok(CatalogProblem {
        name: "identity_split",
        s: contraction_to_one(),
        problem,
        x_star: vec_of(&[1.0]),
        x0: vec_of(&[9.0]),
    })
}

/// All catalog problems, in a fixed order.
pub fn catalog<T: Scalar>() -> Vec<CatalogProblem<T>> {
    [
        interval_cones::<T>(),
        psd_rotation(),
        ball_shrinkage(),
        forward_backward_box(),
        split_feasibility(),
        identity_split(),
    ]
    .into_iter()
    .map(|p| p.expect("catalog problems are well formed"))
    .collect()
}

/// The one-dimensional worked example: U(x) = (9x − 7)/2, V(x) = (5x − 2)/3,
/// A(x) = −x/2, γ = 0.000025 and S(x) = (x + 3)/4. U is expansive, so the
/// quasi-Fejér hypotheses fail; the iteration still settles near 1.
pub fn reference_example<T: Scalar>(x0: f64) -> CatalogProblem<T> {
    let problem = SmipProblem::direct(
        OperatorExpr::affine_1d(T::lit(4.5), T::lit(-3.5)),
        OperatorExpr::affine_1d(T::lit(5.0 / 3.0), T::lit(-2.0 / 3.0)),
        LinearOp::scalar(T::lit(-0.5)),
        T::lit(0.000025),
    )
    .expect("reference example is well formed");
    CatalogProblem {
        name: "reference_example",
        s: contraction_to_one(),
        problem,
        x_star: vec_of(&[1.0]),
        x0: vec_of(&[x0]),
    }
}

/// Schedules and stop rule of the worked example: θₙ = 0.98, αₙ = 1/(n+1),
/// βₙ = (n+1)/(n+2), at most 100 steps, step tolerance 1e−8.
pub fn reference_config<T: Scalar>() -> IterConfig<T> {
    IterConfig::new(Scheme::InertialModifiedS)
        .with_schedules(
            Schedule::constant(T::lit(0.98)).expect("valid constant"),
            Schedule::power(T::one()).expect("valid exponent"),
            Schedule::rational_shift(),
        )
        .with_stop(100, T::lit(1e-8), T::lit(1e-6))
}

/// Schedules satisfying (D1) and (D2): θ geometric(0.5, 0.5), α = β = 0.5.
pub fn well_posed_config<T: Scalar>(
    max_iter: usize,
    step_tol: T,
    residual_tol: T,
) -> IterConfig<T> {
    IterConfig::new(Scheme::InertialModifiedS)
        .with_schedules(
            Schedule::geometric(T::half(), T::half()).expect("valid geometric"),
            Schedule::constant(T::half()).expect("valid constant"),
            Schedule::constant(T::half()).expect("valid constant"),
        )
        .with_stop(max_iter, step_tol, residual_tol)
}
