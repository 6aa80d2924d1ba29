use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::schedule::Schedule;
use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::scalar::Scalar;

/// Iteration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// wₙ = xₙ + θₙ(xₙ − xₙ₋₁), yₙ = (1−βₙ)wₙ + βₙS(wₙ),
    /// xₙ₊₁ = (1−αₙ)S(yₙ) + αₙJ′(yₙ).
    InertialModifiedS,
    /// The inertial scheme with θₙ ≡ 0.
    ModifiedS,
    /// xₙ₊₁ = J′(xₙ).
    Byrne,
    /// yₙ = (1−βₙ)xₙ + βₙS(xₙ), xₙ₊₁ = (1−αₙ)xₙ + αₙS(yₙ).
    Ishikawa,
    /// xₙ₊₁ = S(xₙ).
    Picard,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::InertialModifiedS,
        Scheme::ModifiedS,
        Scheme::Byrne,
        Scheme::Ishikawa,
        Scheme::Picard,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::InertialModifiedS => "inertial_modified_s",
            Self::ModifiedS => "modified_s",
            Self::Byrne => "byrne",
            Self::Ishikawa => "ishikawa",
            Self::Picard => "picard",
        }
    }

    pub fn uses_theta(&self) -> bool {
        matches!(self, Self::InertialModifiedS)
    }

    pub fn uses_alpha_beta(&self) -> bool {
        matches!(
            self,
            Self::InertialModifiedS | Self::ModifiedS | Self::Ishikawa
        )
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "scheme",
                reason: format!(
                    "unknown scheme `{s}` (expected one of inertial_modified_s, modified_s, byrne, ishikawa, picard)"
                ),
            })
    }
}

/// How xₙ₋₁ is chosen for the first step.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRule<T> {
    /// x₀ = x₁, so the first inertial term vanishes.
    CopyX0,
    Explicit(Vector<T>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopRule<T> {
    pub max_iter: usize,
    /// Stop once ‖xₙ₊₁ − xₙ‖ ≤ step_tol.
    pub step_tol: T,
    /// Stop once both ‖xₙ − S(xₙ)‖ and ‖xₙ − J′(xₙ)‖ are ≤ residual_tol.
    pub residual_tol: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterConfig<T> {
    pub scheme: Scheme,
    pub theta: Schedule<T>,
    pub alpha: Schedule<T>,
    pub beta: Schedule<T>,
    pub stop: StopRule<T>,
    pub x_minus_one: InitRule<T>,
    /// Divergence guard on ‖xₙ‖ and ‖S(wₙ) − wₙ‖.
    pub guard: T,
    /// δ of the requirement αₙ, βₙ ∈ [δ, 1−δ].
    pub delta: T,
}

pub const DEFAULT_GUARD: f64 = 1e8;
pub const DEFAULT_DELTA: f64 = 0.25;

impl<T: Scalar> IterConfig<T> {
    /// θₙ = 0.5·0.5ⁿ, αₙ = βₙ = 0.5, 1000 iterations, step and residual
    /// tolerance 1e−12, guard 1e8, δ = 0.25.
    pub fn new(scheme: Scheme) -> Self {
        let half = T::half();
        Self {
            scheme,
            theta: Schedule::geometric(half, half).expect("valid"),
            alpha: Schedule::constant(half).expect("valid"),
            beta: Schedule::constant(half).expect("valid"),
            stop: StopRule {
                max_iter: 1000,
                step_tol: T::lit(1e-12),
                residual_tol: T::lit(1e-12),
            },
            x_minus_one: InitRule::CopyX0,
            guard: T::lit(DEFAULT_GUARD),
            delta: T::lit(DEFAULT_DELTA),
        }
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_schedules(
        mut self,
        theta: Schedule<T>,
        alpha: Schedule<T>,
        beta: Schedule<T>,
    ) -> Self {
        self.theta = theta;
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_stop(mut self, max_iter: usize, step_tol: T, residual_tol: T) -> Self {
        self.stop = StopRule {
            max_iter,
            step_tol,
            residual_tol,
        };
        self
    }

    pub fn with_guard(mut self, guard: T) -> Self {
        self.guard = guard;
        self
    }

    pub fn with_init(mut self, rule: InitRule<T>) -> Self {
        self.x_minus_one = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(Error::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if self.stop.max_iter < 1 {
            return bad("max_iter", "must be at least 1");
        }
        if !(self.stop.step_tol > T::zero()) {
            return bad("step_tol", "must be positive");
        }
        if !(self.stop.residual_tol > T::zero()) {
            return bad("residual_tol", "must be positive");
        }
        if !(self.guard > T::zero()) {
            return bad("guard", "must be positive");
        }
        if !(self.delta > T::zero() && self.delta < T::half()) {
            return bad("delta", "must lie in (0, 0.5)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Condition {
    D1,
    D2,
    D3,
    D4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingStatus {
    Satisfied,
    Violated,
    RuntimeMonitored,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub condition: Condition,
    pub status: FindingStatus,
    pub detail: String,
}

impl Finding {
    pub fn violated(&self) -> bool {
        self.status == FindingStatus::Violated
    }
}

fn range_label<T: Scalar>(s: &Schedule<T>) -> String {
    let (lo, hi) = s.declared_range();
    format!("{} with range [{lo}, {hi}]", s.label())
}

/// Symbolic check of the parameter conditions:
///
/// - D1: Σθₙ < ∞ and θₙ ∈ [0, θ̄] with θ̄ < 1;
/// - D2: αₙ, βₙ ∈ [δ, 1−δ];
/// - D3/D4: boundedness of the orbit, only observable at run time.
pub fn validate_conditions<T: Scalar>(config: &IterConfig<T>) -> Vec<Finding> {
    let mut out = Vec::with_capacity(4);

    let d1 = if config.scheme == Scheme::ModifiedS {
        Finding {
            condition: Condition::D1,
            status: FindingStatus::Satisfied,
            detail: "theta_n = 0 for modified_s".into(),
        }
    } else if !config.scheme.uses_theta() {
        Finding {
            condition: Condition::D1,
            status: FindingStatus::NotApplicable,
            detail: format!("{} has no inertial term", config.scheme),
        }
    } else {
        let (lo, hi) = config.theta.declared_range();
        let mut problems = Vec::new();
        if !config.theta.declared_summable() {
            problems.push("sum of theta_n diverges");
        }
        if lo < T::zero() {
            problems.push("theta_n takes negative values");
        }
        if hi >= T::one() {
            problems.push("sup theta_n is not below 1");
        }
        Finding {
            condition: Condition::D1,
            status: if problems.is_empty() {
                FindingStatus::Satisfied
            } else {
                FindingStatus::Violated
            },
            detail: if problems.is_empty() {
                format!("theta = {}", range_label(&config.theta))
            } else {
                format!(
                    "theta = {}: {}",
                    range_label(&config.theta),
                    problems.join("; ")
                )
            },
        }
    };
    out.push(d1);

    let d2 = if config.scheme.uses_alpha_beta() {
        let delta = config.delta;
        let inside = |s: &Schedule<T>| {
            let (lo, hi) = s.declared_range();
            lo >= delta && hi <= T::one() - delta
        };
        let offenders: Vec<String> = [("alpha", &config.alpha), ("beta", &config.beta)]
            .into_iter()
            .filter(|(_, s)| !inside(s))
            .map(|(name, s)| {
                format!(
                    "{name} = {} leaves [{delta}, {}]",
                    range_label(s),
                    T::one() - delta
                )
            })
            .collect();
        Finding {
            condition: Condition::D2,
            status: if offenders.is_empty() {
                FindingStatus::Satisfied
            } else {
                FindingStatus::Violated
            },
            detail: if offenders.is_empty() {
                format!(
                    "alpha = {}, beta = {} lie in [{delta}, {}]",
                    range_label(&config.alpha),
                    range_label(&config.beta),
                    T::one() - delta
                )
            } else {
                offenders.join("; ")
            },
        }
    } else {
        Finding {
            condition: Condition::D2,
            status: FindingStatus::NotApplicable,
            detail: format!("{} uses no alpha/beta weights", config.scheme),
        }
    };
    out.push(d2);

    out.push(Finding {
        condition: Condition::D3,
        status: FindingStatus::RuntimeMonitored,
        detail: "boundedness of S(w_n) - w_n is monitored by the divergence guard".into(),
    });
    out.push(Finding {
        condition: Condition::D4,
        status: FindingStatus::RuntimeMonitored,
        detail: "boundedness of J'(w_n) - w_n is only observable at run time".into(),
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1_config() -> IterConfig<f64> {
        IterConfig::new(Scheme::InertialModifiedS).with_schedules(
            Schedule::constant(0.98).unwrap(),
            Schedule::power(1.0).unwrap(),
            Schedule::rational_shift(),
        )
    }

    fn status(findings: &[Finding], c: Condition) -> FindingStatus {
        findings.iter().find(|f| f.condition == c).unwrap().status
    }

    #[test]
    fn example1_violates_d1_and_d2() {
        let f = validate_conditions(&example1_config());
        assert_eq!(status(&f, Condition::D1), FindingStatus::Violated);
        assert_eq!(status(&f, Condition::D2), FindingStatus::Violated);
        assert_eq!(status(&f, Condition::D3), FindingStatus::RuntimeMonitored);
        assert_eq!(status(&f, Condition::D4), FindingStatus::RuntimeMonitored);
    }

    #[test]
    fn geometric_theta_satisfies_d1() {
        let cfg = IterConfig::<f64>::new(Scheme::InertialModifiedS).with_schedules(
            Schedule::geometric(0.5, 0.9).unwrap(),
            Schedule::constant(0.5).unwrap(),
            Schedule::constant(0.5).unwrap(),
        );
        let f = validate_conditions(&cfg);
        assert_eq!(status(&f, Condition::D1), FindingStatus::Satisfied);
        assert_eq!(status(&f, Condition::D2), FindingStatus::Satisfied);
    }

    #[test]
    fn power_alpha_violates_d2_for_every_delta() {
        for delta in [0.01, 0.1, 0.25, 0.49] {
            let mut cfg = IterConfig::<f64>::new(Scheme::InertialModifiedS);
            cfg.alpha = Schedule::power(1.0).unwrap();
            cfg.delta = delta;
            assert_eq!(
                status(&validate_conditions(&cfg), Condition::D2),
                FindingStatus::Violated
            );
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.as_str().parse::<Scheme>().unwrap(), s);
        }
        assert!("nesterov".parse::<Scheme>().is_err());
    }

    #[test]
    fn config_validation() {
        let cfg = IterConfig::<f64>::new(Scheme::Picard);
        assert!(cfg.validate().is_ok());
        assert!(cfg.clone().with_stop(0, 1e-9, 1e-9).validate().is_err());
        assert!(cfg.clone().with_stop(10, 0.0, 1e-9).validate().is_err());
        assert!(cfg.clone().with_guard(-1.0).validate().is_err());
        let mut bad_delta = cfg;
        bad_delta.delta = 0.5;
        assert!(bad_delta.validate().is_err());
    }
}
