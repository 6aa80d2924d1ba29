use std::fmt::Write;

use splitfix::engines::ScheduleKind;

use super::{Expr, Matrix, ProblemFile, SetExpr, SmipForm, SpecExpr};

/// Shortest text that parses back to the same `f64`.
pub(crate) fn num(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(int) => int.to_string(),
        None => s,
    }
}

fn vector(v: &[f64]) -> String {
    let body: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("[{}]", body.join(", "))
}

fn matrix(m: &Matrix) -> String {
    let rows: Vec<String> = m
        .rows
        .iter()
        .map(|r| r.iter().map(|&x| num(x)).collect::<Vec<_>>().join(", "))
        .collect();
    format!("[{}]", rows.join("; "))
}

fn set(s: &SetExpr) -> String {
    match s {
        SetExpr::Box { lo, hi } => format!("box({}; {})", vector(lo), vector(hi)),
        SetExpr::Ball { center, radius } => format!("ball({}; {})", vector(center), num(*radius)),
    }
}

fn spec(s: &SpecExpr) -> String {
    match s {
        SpecExpr::Zero => "zero".into(),
        SpecExpr::Psd(m) => format!("psd({})", matrix(m)),
        SpecExpr::Abs(w) => format!("abs({})", num(*w)),
        SpecExpr::NormalCone(c) => format!("normal_cone({})", set(c)),
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    match e {
        Expr::Identity => "identity".into(),
        Expr::Affine { m, b } => format!("affine({}; {})", matrix(m), vector(b)),
        Expr::Linear(m) => format!("linear({})", matrix(m)),
        Expr::Scale(c) => format!("scale({})", num(*c)),
        Expr::ProjBox { lo, hi } => format!("proj_box({}; {})", vector(lo), vector(hi)),
        Expr::ProjBall { center, radius } => {
            format!("proj_ball({}; {})", vector(center), num(*radius))
        }
        Expr::Resolvent { spec: s, lambda } => format!("resolvent({}; {})", spec(s), num(*lambda)),
        Expr::Fb { spec: s, g, lambda } => {
            format!("fb({}; {}; {})", spec(s), expr(g), num(*lambda))
        }
        Expr::Compose(f, g) => format!("compose({}; {})", expr(f), expr(g)),
        Expr::Sum(f, g) => format!("sum({}; {})", expr(f), expr(g)),
        Expr::Ref { name, .. } => name.clone(),
    }
}

fn schedule(s: &splitfix::engines::Schedule<f64>) -> String {
    match s.kind() {
        ScheduleKind::Constant { value } => format!("constant({})", num(*value)),
        ScheduleKind::Power { exponent } => format!("power({})", num(*exponent)),
        ScheduleKind::RationalShift => "rational_shift".into(),
        ScheduleKind::Geometric { ratio, initial } => {
            format!("geometric({}; {})", num(*ratio), num(*initial))
        }
        ScheduleKind::Table { values } => format!("table({})", vector(values)),
    }
}

/// Canonical text of a problem file: fixed section and key order, every
/// scheme key present, numbers in shortest round-trip form.
pub fn emit(p: &ProblemFile) -> String {
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "[space]\nh1 = {}\nh2 = {}", p.h1, p.h2);

    if !p.operators.is_empty() {
        let _ = writeln!(w, "\n[operators]");
        for (name, e) in &p.operators {
            let _ = writeln!(w, "{name} = {}", expr(e));
        }
    }

    let _ = writeln!(w, "\n[smip]");
    match &p.smip.form {
        SmipForm::Direct { u, v } => {
            let _ = writeln!(w, "U = {}\nV = {}", expr(u), expr(v));
        }
        SmipForm::Components {
            g1,
            g2,
            b1,
            b2,
            lambda,
            mu,
            nu,
        } => {
            let _ = writeln!(w, "g1 = {}\ng2 = {}", expr(g1), expr(g2));
            let _ = writeln!(w, "B1 = {}\nB2 = {}", spec(b1), spec(b2));
            let _ = writeln!(w, "lambda = {}", num(*lambda));
            if let Some(mu) = mu {
                let _ = writeln!(w, "mu = {}", num(*mu));
            }
            if let Some(nu) = nu {
                let _ = writeln!(w, "nu = {}", num(*nu));
            }
        }
    }
    let _ = writeln!(w, "A = {}", matrix(&p.smip.a));
    if let Some(adj) = &p.smip.a_adjoint {
        let _ = writeln!(w, "A_adjoint = {}", matrix(adj));
    }
    let _ = writeln!(w, "gamma = {}", num(p.smip.gamma));

    let _ = writeln!(w, "\n[fixedpoint]\nS = {}", expr(&p.s));

    let s = &p.scheme;
    let _ = writeln!(w, "\n[scheme]\nname = {}", s.scheme);
    let _ = writeln!(w, "theta = {}", schedule(&s.theta));
    let _ = writeln!(w, "alpha = {}", schedule(&s.alpha));
    let _ = writeln!(w, "beta = {}", schedule(&s.beta));
    let _ = writeln!(w, "max_iter = {}", s.max_iter);
    let _ = writeln!(w, "step_tol = {}", num(s.step_tol));
    let _ = writeln!(w, "residual_tol = {}", num(s.residual_tol));
    let _ = writeln!(w, "guard = {}", num(s.guard));
    let _ = writeln!(w, "delta = {}", num(s.delta));
    let _ = writeln!(w, "x0 = {}", vector(&s.x0));
    if let Some(xm) = &s.x_minus_one {
        let _ = writeln!(w, "x_minus_one = {}", vector(xm));
    }
    if let Some(xs) = &s.x_star {
        let _ = writeln!(w, "x_star = {}", vector(xs));
    }
    out
}
