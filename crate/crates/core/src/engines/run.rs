use std::time::Instant;

use serde::Serialize;

use super::config::{InitRule, IterConfig, Scheme};
use super::trace::{IterationTrace, StepRecord, Termination};
use crate::error::{Error, Result, Stage};
use crate::hilbert::Vector;
use crate::operators::OperatorExpr;
use crate::scalar::Scalar;
use crate::smip::SmipProblem;

/// Intermediate points of one inertial step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InertialStep<T> {
    pub w: Vector<T>,
    pub y: Vector<T>,
    pub x_next: Vector<T>,
}

fn finite_or<T: Scalar>(v: Vector<T>, stage: Stage) -> Result<Vector<T>> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Divergence { stage })
    }
}

fn in_unit_interval<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v < T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in (0, 1), got {v}"),
        })
    }
}

/// Returns the step together with S(w), which the driver reuses for the
/// ‖S(w) − w‖ guard.
fn inertial_step_full<T: Scalar>(
    x_n: &Vector<T>,
    x_prev: &Vector<T>,
    s: &OperatorExpr<T>,
    jp: &OperatorExpr<T>,
    theta: T,
    alpha: T,
    beta: T,
) -> Result<(InertialStep<T>, Vector<T>)> {
    let w = x_n.zip_with(x_prev, "inertial extrapolation", |x, xp| {
        x + theta * (x - xp)
    })?;
    let w = finite_or(w, Stage::W)?;
    let sw = s.evaluate(&w)?;
    let one_minus_beta = T::one() - beta;
    let y = w.zip_with(&sw, "y update", |wi, si| one_minus_beta * wi + beta * si)?;
    let y = finite_or(y, Stage::Y)?;
    let sy = s.evaluate(&y)?;
    let jy = jp.evaluate(&y)?;
    let one_minus_alpha = T::one() - alpha;
    let x_next = sy.zip_with(&jy, "x update", |si, ji| one_minus_alpha * si + alpha * ji)?;
    let x_next = finite_or(x_next, Stage::XNext)?;
    Ok((InertialStep { w, y, x_next }, sw))
}

/// One step of the inertial modified S-iteration:
///
/// ```text
/// w = xₙ + θₙ(xₙ − xₙ₋₁)
/// y = (1 − βₙ)w + βₙS(w)
/// xₙ₊₁ = (1 − αₙ)S(y) + αₙJ′(y)
/// ```
pub fn step_inertial_s<T: Scalar>(
    x_n: &Vector<T>,
    x_prev: &Vector<T>,
    s: &OperatorExpr<T>,
    jp: &OperatorExpr<T>,
    theta_n: T,
    alpha_n: T,
    beta_n: T,
) -> Result<InertialStep<T>> {
    if !(theta_n >= T::zero()) {
        return Err(Error::InvalidParameter {
            name: "theta_n",
            reason: format!("must be nonnegative, got {theta_n}"),
        });
    }
    in_unit_interval("alpha_n", alpha_n)?;
    in_unit_interval("beta_n", beta_n)?;
    inertial_step_full(x_n, x_prev, s, jp, theta_n, alpha_n, beta_n).map(|(step, _)| step)
}

struct Stepped<T> {
    w: Vector<T>,
    y: Option<Vector<T>>,
    x_next: Vector<T>,
    s_w: Option<Vector<T>>,
}

enum Outcome<T> {
    Ok(Stepped<T>),
    NonFinite(Stage),
}

fn lift<T>(r: Result<Stepped<T>>) -> Result<Outcome<T>> {
    match r {
        Ok(s) => Ok(Outcome::Ok(s)),
        Err(Error::Divergence { stage }) => Ok(Outcome::NonFinite(stage)),
        Err(e) => Err(e),
    }
}

fn advance<T: Scalar>(
    config: &IterConfig<T>,
    n: usize,
    x: &Vector<T>,
    x_prev: &Vector<T>,
    s: &OperatorExpr<T>,
    jp: &OperatorExpr<T>,
) -> Result<Outcome<T>> {
    let stepped = match config.scheme {
        Scheme::InertialModifiedS | Scheme::ModifiedS => {
            let theta = if config.scheme == Scheme::ModifiedS {
                T::zero()
            } else {
                config.theta.value(n)?
            };
            let alpha = config.alpha.value(n)?;
            let beta = config.beta.value(n)?;
            inertial_step_full(x, x_prev, s, jp, theta, alpha, beta).map(|(st, sw)| Stepped {
                w: st.w,
                y: Some(st.y),
                x_next: st.x_next,
                s_w: Some(sw),
            })
        }
        Scheme::Ishikawa => {
            let alpha = config.alpha.value(n)?;
            let beta = config.beta.value(n)?;
            let sx = s.evaluate(x)?;
            let omb = T::one() - beta;
            let oma = T::one() - alpha;
            (|| {
                let y = finite_or(
                    x.zip_with(&sx, "y update", |xi, si| omb * xi + beta * si)?,
                    Stage::Y,
                )?;
                let sy = s.evaluate(&y)?;
                let x_next = finite_or(
                    x.zip_with(&sy, "x update", |xi, si| oma * xi + alpha * si)?,
                    Stage::XNext,
                )?;
                Ok(Stepped {
                    w: x.clone(),
                    y: Some(y),
                    x_next,
                    s_w: Some(sx),
                })
            })()
        }
        Scheme::Byrne | Scheme::Picard => {
            let map = if config.scheme == Scheme::Byrne {
                jp
            } else {
                s
            };
            finite_or(map.evaluate(x)?, Stage::XNext).map(|x_next| Stepped {
                w: x.clone(),
                y: None,
                x_next,
                s_w: None,
            })
        }
    };
    lift(stepped)
}

/// Runs `config.scheme` from x₁ = x₀ until the first stop rule fires.
///
/// Stop rules are checked on each new iterate in the order: non-finite or
/// guard, both residuals ≤ `residual_tol`, step ≤ `step_tol`, `max_iter`
/// steps taken. Divergence is recorded in the trace's termination rather than
/// returned as an error; see [`IterationTrace::into_result`].
pub fn run<T: Scalar>(
    config: &IterConfig<T>,
    s: &OperatorExpr<T>,
    problem: &SmipProblem<T>,
    x0: &Vector<T>,
    x_star: Option<&Vector<T>>,
) -> Result<IterationTrace<T>> {
    config.validate()?;
    let d = problem.dim_h1();
    if s.dim_in() != d || s.dim_out() != d {
        return Err(Error::DimensionMismatch {
            context: "S must map H1 into H1",
            left: d,
            right: s.dim_in(),
        });
    }
    let dim_check = |v: &Vector<T>, context| {
        if v.dim() != d {
            Err(Error::DimensionMismatch {
                context,
                left: d,
                right: v.dim(),
            })
        } else {
            Ok(())
        }
    };
    dim_check(x0, "starting point")?;
    if let Some(xs) = x_star {
        dim_check(xs, "reference solution")?;
    }
    let mut x_prev = match &config.x_minus_one {
        InitRule::CopyX0 => x0.clone(),
        InitRule::Explicit(v) => {
            dim_check(v, "explicit previous iterate")?;
            v.clone()
        }
    };

    let jp = problem.jprime();
    let stop = config.stop;
    let guard = config.guard;
    let started = Instant::now();
    let mut records: Vec<StepRecord<T>> = Vec::new();
    let mut x = x0.clone();
    let mut n = 1usize;

    let termination = loop {
        let norm_x = x.norm();
        if norm_x > guard {
            break Termination::Guard {
                n,
                what: "norm(x_n)",
                value: norm_x.to_f64_lossy(),
            };
        }
        let res_s = x.distance(&s.evaluate(&x)?)?;
        let res_j = x.distance(&jp.evaluate(&x)?)?;
        let step = x.distance(&x_prev)?;
        let dist_opt = x_star.map(|xs| x.distance(xs)).transpose()?;
        records.push(StepRecord {
            n,
            x: x.clone(),
            w: None,
            y: None,
            res_s,
            res_j,
            step,
            dist_opt,
        });

        if res_s <= stop.residual_tol && res_j <= stop.residual_tol {
            break Termination::ResidualTol;
        }
        if n > 1 && step <= stop.step_tol {
            break Termination::StepTol;
        }
        if n > stop.max_iter {
            break Termination::MaxIter;
        }

        let stepped = match advance(config, n, &x, &x_prev, s, jp)? {
            Outcome::Ok(st) => st,
            Outcome::NonFinite(stage) => break Termination::NonFinite { n, stage },
        };
        if let Some(sw) = &stepped.s_w {
            let defect = sw.distance(&stepped.w)?;
            if !(defect <= guard) {
                break Termination::Guard {
                    n,
                    what: "norm(S(w_n) - w_n)",
                    value: defect.to_f64_lossy(),
                };
            }
        }
        let row = records.last_mut().expect("row pushed above");
        row.w = Some(stepped.w);
        row.y = stepped.y;
        x_prev = std::mem::replace(&mut x, stepped.x_next);
        n += 1;
    };

    Ok(IterationTrace {
        scheme: Some(config.scheme),
        records,
        termination,
        stop: Some(stop),
        guard: Some(guard),
        elapsed: started.elapsed(),
    })
}
