use std::time::Duration;

use serde::Serialize;

use super::config::{Scheme, StopRule};
use crate::error::{Error, Result, Stage};
use crate::hilbert::Vector;
use crate::scalar::Scalar;

/// One row of a trace. Row n holds xₙ and the residuals at xₙ; `w` and `y`
/// are the intermediate points of the step from xₙ to xₙ₊₁ and are absent on
/// the final row (and `y` for single-map schemes).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord<T> {
    pub n: usize,
    pub x: Vector<T>,
    pub w: Option<Vector<T>>,
    pub y: Option<Vector<T>>,
    /// ‖xₙ − S(xₙ)‖
    pub res_s: T,
    /// ‖xₙ − J′(xₙ)‖
    pub res_j: T,
    /// ‖xₙ − xₙ₋₁‖
    pub step: T,
    /// ‖xₙ − x*‖ when a reference point was supplied.
    pub dist_opt: Option<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Termination {
    MaxIter,
    StepTol,
    ResidualTol,
    NonFinite {
        n: usize,
        stage: Stage,
    },
    Guard {
        n: usize,
        what: &'static str,
        value: f64,
    },
    /// Trace assembled from raw points rather than produced by a run.
    Synthetic,
}

impl Termination {
    pub fn diverged(&self) -> bool {
        matches!(self, Self::NonFinite { .. } | Self::Guard { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::MaxIter => "max_iter",
            Self::StepTol => "step_tol",
            Self::ResidualTol => "residual_tol",
            Self::NonFinite { .. } => "non_finite",
            Self::Guard { .. } => "guard",
            Self::Synthetic => "synthetic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace<T> {
    pub scheme: Option<Scheme>,
    pub records: Vec<StepRecord<T>>,
    pub termination: Termination,
    pub stop: Option<StopRule<T>>,
    pub guard: Option<T>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl<T: Scalar> IterationTrace<T> {
    /// Wraps a bare point sequence x₁, x₂, … as a trace. Residual columns
    /// are NaN.
    pub fn from_points(points: Vec<Vector<T>>) -> Self {
        let mut prev: Option<Vector<T>> = None;
        let records = points
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                let step = prev
                    .as_ref()
                    .and_then(|p| x.distance(p).ok())
                    .unwrap_or_else(T::zero);
                prev = Some(x.clone());
                StepRecord {
                    n: i + 1,
                    x,
                    w: None,
                    y: None,
                    res_s: T::nan(),
                    res_j: T::nan(),
                    step,
                    dist_opt: None,
                }
            })
            .collect();
        Self {
            scheme: None,
            records,
            termination: Termination::Synthetic,
            stop: None,
            guard: None,
            elapsed: Duration::ZERO,
        }
    }

    /// Number of steps taken (rows − 1).
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&StepRecord<T>> {
        self.records.last()
    }

    pub fn final_point(&self) -> Option<&Vector<T>> {
        self.last().map(|r| &r.x)
    }

    pub fn points(&self) -> impl Iterator<Item = &Vector<T>> {
        self.records.iter().map(|r| &r.x)
    }

    /// Converts a diverged trace into the corresponding error.
    pub fn into_result(self) -> Result<Self> {
        match self.termination {
            Termination::NonFinite { stage, .. } => Err(Error::Divergence { stage }),
            Termination::Guard { n, what, value } => Err(Error::GuardExceeded {
                n,
                what,
                value,
                guard: self.guard.map_or(f64::NAN, Scalar::to_f64_lossy),
            }),
            _ => Ok(self),
        }
    }

    /// First n with ‖xₙ − target‖ ≤ tol.
    pub fn iterations_to(&self, target: &Vector<T>, tol: T) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.x.distance(target).map(|d| d <= tol).unwrap_or(false))
            .map(|r| r.n)
    }
}
