use splitfix::engines::{InitRule, IterConfig};
use splitfix::{
    ConvexSet, LinearOp, MonotoneSpec, OperatorExpr, SingleValuedSpec, SmipProblem, Vector,
};

use super::{Expr, Matrix, ProblemError, ProblemFile, SetExpr, SmipForm, SpecExpr};

type Result<T> = std::result::Result<T, ProblemError>;

/// A problem file resolved into solver objects.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub problem: SmipProblem<f64>,
    pub s: OperatorExpr<f64>,
    pub config: IterConfig<f64>,
    pub x0: Vector<f64>,
    pub x_star: Option<Vector<f64>>,
    /// Claimed adjoint of A; the transpose unless the file supplies one.
    pub a_adjoint: LinearOp<f64>,
}

/// What `check --operator NAME` resolves to.
#[derive(Debug, Clone)]
pub enum OperatorTarget {
    Map(OperatorExpr<f64>),
    Linear {
        a: LinearOp<f64>,
        adjoint: LinearOp<f64>,
    },
}

fn core_err(ctx: &str, e: splitfix::Error) -> ProblemError {
    ProblemError::general(format!("operator `{ctx}`: {e}"))
}

fn dim_err(ctx: &str, what: &str, got: usize, dim: usize) -> ProblemError {
    ProblemError::general(format!(
        "operator `{ctx}`: {what} has dimension {got} but `{ctx}` acts on a space of dimension {dim}"
    ))
}

fn vector(ctx: &str, what: &str, v: &[f64], dim: usize) -> Result<Vector<f64>> {
    if v.len() != dim {
        return Err(dim_err(ctx, what, v.len(), dim));
    }
    Vector::new(v.to_vec()).map_err(|e| core_err(ctx, e))
}

fn matrix(m: &Matrix) -> std::result::Result<LinearOp<f64>, splitfix::Error> {
    LinearOp::from_rows(m.rows.clone())
}

fn square(ctx: &str, m: &Matrix, dim: usize) -> Result<LinearOp<f64>> {
    let (r, c) = m.shape();
    if r != dim || c != dim {
        return Err(ProblemError::general(format!(
            "operator `{ctx}`: matrix is {r}×{c} but `{ctx}` acts on a space of dimension {dim}"
        )));
    }
    matrix(m).map_err(|e| core_err(ctx, e))
}

fn set(ctx: &str, s: &SetExpr, dim: usize) -> Result<ConvexSet<f64>> {
    match s {
        SetExpr::Box { lo, hi } => ConvexSet::boxed(
            vector(ctx, "box lower bound", lo, dim)?,
            vector(ctx, "box upper bound", hi, dim)?,
        ),
        SetExpr::Ball { center, radius } => {
            ConvexSet::ball(vector(ctx, "ball center", center, dim)?, *radius)
        }
    }
    .map_err(|e| core_err(ctx, e))
}

fn spec(ctx: &str, s: &SpecExpr, dim: usize) -> Result<MonotoneSpec<f64>> {
    match s {
        SpecExpr::Zero => Ok(MonotoneSpec::zero(dim)),
        SpecExpr::Psd(m) => {
            MonotoneSpec::linear_psd(square(ctx, m, dim)?).map_err(|e| core_err(ctx, e))
        }
        SpecExpr::Abs(w) => {
            MonotoneSpec::subdifferential_abs(dim, *w).map_err(|e| core_err(ctx, e))
        }
        SpecExpr::NormalCone(c) => Ok(MonotoneSpec::normal_cone(set(ctx, c, dim)?)),
    }
}

fn spec_dim(s: &SpecExpr) -> Option<usize> {
    match s {
        SpecExpr::Zero | SpecExpr::Abs(_) => None,
        SpecExpr::Psd(m) => Some(m.shape().0),
        SpecExpr::NormalCone(SetExpr::Box { lo, .. }) => Some(lo.len()),
        SpecExpr::NormalCone(SetExpr::Ball { center, .. }) => Some(center.len()),
    }
}

fn refers_to(e: &Expr, name: &str) -> bool {
    match e {
        Expr::Ref { name: n, .. } => n == name,
        Expr::Fb { g, .. } => refers_to(g, name),
        Expr::Compose(f, g) | Expr::Sum(f, g) => refers_to(f, name) || refers_to(g, name),
        _ => false,
    }
}

impl ProblemFile {
    /// Dimension fixed by the expression itself, if any.
    fn intrinsic_dim(&self, e: &Expr, depth: usize) -> Option<usize> {
        if depth > self.operators.len() + 1 {
            return None;
        }
        match e {
            Expr::Identity | Expr::Scale(_) => None,
            Expr::Affine { m, .. } | Expr::Linear(m) => Some(m.shape().0),
            Expr::ProjBox { lo, .. } => Some(lo.len()),
            Expr::ProjBall { center, .. } => Some(center.len()),
            Expr::Resolvent { spec, .. } => spec_dim(spec),
            Expr::Fb { spec, g, .. } => spec_dim(spec).or_else(|| self.intrinsic_dim(g, depth + 1)),
            Expr::Compose(f, g) | Expr::Sum(f, g) => self
                .intrinsic_dim(f, depth + 1)
                .or_else(|| self.intrinsic_dim(g, depth + 1)),
            Expr::Ref { name, .. } => self
                .operator(name)
                .and_then(|r| self.intrinsic_dim(r, depth + 1)),
        }
    }

    /// Dimension of a named operator: intrinsic if possible, otherwise the
    /// space it is used on (H₂ for V and g₂, H₁ elsewhere).
    fn dim_of_named(&self, name: &str) -> usize {
        if let Some(d) = self.operator(name).and_then(|e| self.intrinsic_dim(e, 0)) {
            return d;
        }
        let on_h2 = match &self.smip.form {
            SmipForm::Direct { v, .. } => refers_to(v, name),
            SmipForm::Components { g2, .. } => refers_to(g2, name),
        };
        if on_h2 {
            self.h2
        } else {
            self.h1
        }
    }

    fn expr(
        &self,
        ctx: &str,
        e: &Expr,
        dim: usize,
        stack: &mut Vec<String>,
    ) -> Result<OperatorExpr<f64>> {
        let wrap = |r: splitfix::Result<OperatorExpr<f64>>| r.map_err(|e| core_err(ctx, e));
        match e {
            Expr::Identity => Ok(OperatorExpr::identity(dim)),
            Expr::Scale(c) => Ok(OperatorExpr::scale(dim, *c)),
            Expr::Affine { m, b } => wrap(OperatorExpr::affine(
                square(ctx, m, dim)?,
                vector(ctx, "offset", b, dim)?,
            )),
            Expr::Linear(m) => Ok(OperatorExpr::linear(square(ctx, m, dim)?)),
            Expr::ProjBox { lo, hi } => Ok(OperatorExpr::projection(set(
                ctx,
                &SetExpr::Box {
                    lo: lo.clone(),
                    hi: hi.clone(),
                },
                dim,
            )?)),
            Expr::ProjBall { center, radius } => Ok(OperatorExpr::projection(set(
                ctx,
                &SetExpr::Ball {
                    center: center.clone(),
                    radius: *radius,
                },
                dim,
            )?)),
            Expr::Resolvent { spec: s, lambda } => {
                wrap(OperatorExpr::resolvent(spec(ctx, s, dim)?, *lambda))
            }
            Expr::Fb { spec: s, g, lambda } => {
                let g = self.expr(ctx, g, dim, stack)?;
                wrap(OperatorExpr::forward_backward(
                    spec(ctx, s, dim)?,
                    SingleValuedSpec::new(g),
                    *lambda,
                ))
            }
            Expr::Compose(f, g) => {
                let f = self.expr(ctx, f, dim, stack)?;
                let g = self.expr(ctx, g, dim, stack)?;
                wrap(OperatorExpr::compose(f, g))
            }
            Expr::Sum(f, g) => {
                let f = self.expr(ctx, f, dim, stack)?;
                let g = self.expr(ctx, g, dim, stack)?;
                wrap(OperatorExpr::sum(f, g))
            }
            Expr::Ref { name, pos } => {
                let target = self.operator(name).ok_or_else(|| {
                    ProblemError::at(*pos, format!("undefined operator `{name}`"))
                })?;
                if stack.contains(name) {
                    return Err(ProblemError::at(
                        *pos,
                        format!("operator `{name}` is defined in terms of itself"),
                    ));
                }
                stack.push(name.clone());
                let built = self.expr(name, target, dim, stack);
                stack.pop();
                built
            }
        }
    }

    fn top(&self, ctx: &str, e: &Expr, dim: usize) -> Result<OperatorExpr<f64>> {
        self.expr(ctx, e, dim, &mut Vec::new())
    }

    fn point(&self, what: &str, v: &[f64]) -> Result<Vector<f64>> {
        if v.len() != self.h1 {
            return Err(ProblemError::general(format!(
                "`{what}` has {} entries but h1 = {}",
                v.len(),
                self.h1
            )));
        }
        Vector::new(v.to_vec()).map_err(|e| ProblemError::general(format!("`{what}`: {e}")))
    }

    fn linear_a(&self) -> Result<(LinearOp<f64>, LinearOp<f64>)> {
        let (r, c) = self.smip.a.shape();
        if (r, c) != (self.h2, self.h1) {
            return Err(ProblemError::general(format!(
                "operator `A`: matrix is {r}×{c} but must be h2×h1 = {}×{}",
                self.h2, self.h1
            )));
        }
        let a = matrix(&self.smip.a).map_err(|e| core_err("A", e))?;
        let adjoint = match &self.smip.a_adjoint {
            None => a.transpose(),
            Some(m) => {
                let (r, c) = m.shape();
                if (r, c) != (self.h1, self.h2) {
                    return Err(ProblemError::general(format!(
                        "operator `A_adjoint`: matrix is {r}×{c} but must be h1×h2 = {}×{}",
                        self.h1, self.h2
                    )));
                }
                matrix(m).map_err(|e| core_err("A_adjoint", e))?
            }
        };
        Ok((a, adjoint))
    }

    /// Resolves names, checks dimensions and assembles the solver objects.
    pub fn build(&self) -> Result<BuiltProblem> {
        for (name, e) in &self.operators {
            self.top(name, e, self.dim_of_named(name))?;
        }
        let (a, a_adjoint) = self.linear_a()?;
        let problem = match &self.smip.form {
            SmipForm::Direct { u, v } => SmipProblem::direct(
                self.top("U", u, self.h1)?,
                self.top("V", v, self.h2)?,
                a,
                self.smip.gamma,
            ),
            SmipForm::Components {
                g1,
                g2,
                b1,
                b2,
                lambda,
                mu,
                nu,
            } => {
                let single = |op, ism: &Option<f64>| match ism {
                    Some(c) => SingleValuedSpec::with_ism(op, *c),
                    None => SingleValuedSpec::new(op),
                };
                SmipProblem::components(
                    single(self.top("g1", g1, self.h1)?, mu),
                    single(self.top("g2", g2, self.h2)?, nu),
                    spec("B1", b1, self.h1)?,
                    spec("B2", b2, self.h2)?,
                    a,
                    *lambda,
                    self.smip.gamma,
                )
            }
        }
        .map_err(|e| ProblemError::general(format!("[smip]: {e}")))?;
        let s = self.top("S", &self.s, self.h1)?;

        let sch = &self.scheme;
        let mut config = IterConfig::new(sch.scheme)
            .with_schedules(sch.theta.clone(), sch.alpha.clone(), sch.beta.clone())
            .with_stop(sch.max_iter, sch.step_tol, sch.residual_tol)
            .with_guard(sch.guard);
        config.delta = sch.delta;
        if let Some(xm) = &sch.x_minus_one {
            config = config.with_init(InitRule::Explicit(self.point("x_minus_one", xm)?));
        }
        config
            .validate()
            .map_err(|e| ProblemError::general(format!("[scheme]: {e}")))?;
        Ok(BuiltProblem {
            problem,
            s,
            config,
            x0: self.point("x0", &sch.x0)?,
            x_star: sch
                .x_star
                .as_ref()
                .map(|xs| self.point("x_star", xs))
                .transpose()?,
            a_adjoint,
        })
    }

    /// Looks up an operator for property checks. Names from [operators]
    /// take precedence; `S`, `U`, `V`, `J'` (or `jprime`) and `A` refer to
    /// the assembled problem.
    pub fn resolve_operator(&self, name: &str) -> Result<OperatorTarget> {
        if let Some(e) = self.operator(name) {
            return self
                .top(name, e, self.dim_of_named(name))
                .map(OperatorTarget::Map);
        }
        let built = self.build()?;
        match name {
            "S" => Ok(OperatorTarget::Map(built.s)),
            "U" => Ok(OperatorTarget::Map(built.problem.u().clone())),
            "V" => Ok(OperatorTarget::Map(built.problem.v().clone())),
            "J'" | "jprime" => Ok(OperatorTarget::Map(built.problem.jprime().clone())),
            "A" => Ok(OperatorTarget::Linear {
                a: built.problem.a().clone(),
                adjoint: built.a_adjoint,
            }),
            other => Err(ProblemError::general(format!(
                "unknown operator `{other}` (define it in [operators] or use S, U, V, J', A)"
            ))),
        }
    }
}
