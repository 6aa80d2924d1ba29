//! The line-oriented problem file.
//!
//! ```text
//! [space]
//! h1 = 1
//! h2 = 1
//!
//! [operators]
//! U = affine([4.5]; [-3.5])
//!
//! [smip]
//! U = U
//! V = identity
//! A = [-0.5]
//! gamma = 0.000025
//!
//! [fixedpoint]
//! S = affine([0.25]; [0.75])
//!
//! [scheme]
//! name = inertial_modified_s
//! x0 = [0.1]
//! ```
//!
//! Numbers may be written as fractions `a/b`. Matrices list rows separated by
//! `;`. `#` starts a comment.

mod build;
mod emit;
mod parse;

use std::fmt;

use splitfix::engines::{Schedule, Scheme};

pub use build::{BuiltProblem, OperatorTarget};
pub use emit::emit;
pub use parse::parse;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ProblemError {
    pub pos: Option<Pos>,
    pub message: String,
}

impl ProblemError {
    pub(crate) fn at(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            pos: Some(pos),
            message: message.into(),
        }
    }

    pub(crate) fn general(message: impl Into<String>) -> Self {
        Self {
            pos: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ProblemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "line {}, column {}: {}", p.line, p.column, self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Dense matrix literal, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: Vec<Vec<f64>>,
}

impl Matrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows.first().map_or(0, Vec::len))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SetExpr {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecExpr {
    Zero,
    Psd(Matrix),
    Abs(f64),
    NormalCone(SetExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Identity,
    Affine {
        m: Matrix,
        b: Vec<f64>,
    },
    Linear(Matrix),
    Scale(f64),
    ProjBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    ProjBall {
        center: Vec<f64>,
        radius: f64,
    },
    Resolvent {
        spec: SpecExpr,
        lambda: f64,
    },
    Fb {
        spec: SpecExpr,
        g: Box<Expr>,
        lambda: f64,
    },
    Compose(Box<Expr>, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Ref {
        name: String,
        pos: Pos,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SmipForm {
    Direct {
        u: Expr,
        v: Expr,
    },
    Components {
        g1: Expr,
        g2: Expr,
        b1: SpecExpr,
        b2: SpecExpr,
        lambda: f64,
        mu: Option<f64>,
        nu: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmipSection {
    pub form: SmipForm,
    pub a: Matrix,
    pub a_adjoint: Option<Matrix>,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeSection {
    pub scheme: Scheme,
    pub theta: Schedule<f64>,
    pub alpha: Schedule<f64>,
    pub beta: Schedule<f64>,
    pub max_iter: usize,
    pub step_tol: f64,
    pub residual_tol: f64,
    pub guard: f64,
    pub delta: f64,
    pub x0: Vec<f64>,
    pub x_minus_one: Option<Vec<f64>>,
    pub x_star: Option<Vec<f64>>,
}

/// Parsed problem file. Operator references are kept by name so that
/// re-emitting reproduces the document.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFile {
    pub h1: usize,
    pub h2: usize,
    pub operators: Vec<(String, Expr)>,
    pub smip: SmipSection,
    pub s: Expr,
    pub scheme: SchemeSection,
}

impl ProblemFile {
    pub fn operator(&self, name: &str) -> Option<&Expr> {
        self.operators
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = "\
# worked example
[space]
h1 = 1
h2 = 1

[operators]
U = affine([9/2]; [-7/2])
V = affine([5/3]; [-2/3])

[smip]
U = U
V = V
A = [-1/2]
gamma = 0.000025

[fixedpoint]
S = affine([1/4]; [3/4])

[scheme]
name = inertial_modified_s
theta = constant(0.98)
alpha = power(1)
beta = rational_shift
max_iter = 100
step_tol = 1e-8
residual_tol = 1e-6
x0 = [0.1]
x_star = [1]
";

    #[test]
    fn parse_emit_parse_is_stable() {
        let parsed = parse(SAMPLE).unwrap();
        let text = emit(&parsed);
        let again = parse(&text).unwrap();
        assert_eq!(emit(&again), text);
        assert_eq!(parse(&emit(&again)).unwrap(), again);
    }

    #[test]
    fn fractions_are_evaluated() {
        let parsed = parse(SAMPLE).unwrap();
        match parsed.operator("U").unwrap() {
            Expr::Affine { m, b } => {
                assert_eq!(m.rows, vec![vec![4.5]]);
                assert_eq!(b, &vec![-3.5]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parsed.smip.a.rows, vec![vec![-0.5]]);
    }

    #[test]
    fn undefined_name_reports_position() {
        let text = SAMPLE.replace("U = U", "U = W");
        let parsed = parse(&text).unwrap();
        let err = parsed.build().unwrap_err();
        let pos = err.pos.expect("position");
        assert_eq!(pos.line, 11);
        assert_eq!(pos.column, 5);
        assert!(err.message.contains("W"), "{err}");
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let text = SAMPLE.replace("gamma = 0.000025", "gamma = 0.000025 )");
        let err = parse(&text).unwrap_err();
        assert_eq!(
            err.pos,
            Some(Pos {
                line: 14,
                column: 18
            })
        );
        let err = parse("[space]\nh1 = 1\n[bogus]\n").unwrap_err();
        assert_eq!(err.pos.unwrap().line, 3);
        let err = parse("[space]\nh1 == 1\n").unwrap_err();
        assert_eq!(err.pos, Some(Pos { line: 2, column: 5 }));
    }

    #[test]
    fn duplicate_operator_rejected() {
        let text = SAMPLE.replace("V = affine([5/3]; [-2/3])", "U = identity");
        let err = parse(&text).unwrap_err();
        assert!(err.message.contains("defined more than once"), "{err}");
    }

    #[test]
    fn dimension_errors_name_the_operator() {
        let text = SAMPLE.replace(
            "U = affine([9/2]; [-7/2])",
            "U = affine([1, 0; 0, 1]; [0, 0])",
        );
        let err = parse(&text).unwrap().build().unwrap_err();
        assert!(err.message.contains("`U`"), "{err}");
    }

    #[test]
    fn component_form_round_trip() {
        let text = "\
[space]
h1 = 2
h2 = 3

[operators]
grad = affine([1, 0; 0, 1]; [-2, -2])

[smip]
g1 = grad
B1 = normal_cone(box([1, 1]; [3, 3]))
B2 = normal_cone(ball([0, 0, 0]; 10))
lambda = 0.5
mu = 1
A = [1, 0; 0, 1; 1, 1]
gamma = 1/6

[fixedpoint]
S = sum(scale(0.5); affine([0, 0; 0, 0]; [1, 1]))

[scheme]
name = picard
x0 = [-3, 6]
";
        let parsed = parse(text).unwrap();
        let emitted = emit(&parsed);
        assert_eq!(emit(&parse(&emitted).unwrap()), emitted);
        let built = parsed.build().unwrap();
        assert_eq!(built.problem.dim_h2(), 3);
        let x = splitfix::Vector::new(vec![2.0, 2.0]).unwrap();
        assert_eq!(built.s.evaluate(&x).unwrap(), x);
        assert!(built.problem.residuals(&x).unwrap().in_omega(1e-12));
    }
}
