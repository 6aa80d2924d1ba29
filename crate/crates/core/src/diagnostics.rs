//! Checks run against finished traces: per-step Fejér-type monotonicity,
//! existence of lim‖xₙ − x*‖, vanishing residuals, empirical rate
//! comparison, and condition (B) profiling.

use std::cmp::Ordering;

use serde::Serialize;

use crate::analysis::{check_nonexpansive, SeededSampler};
use crate::engines::IterationTrace;
use crate::error::{Error, Result};
use crate::hilbert::Vector;
use crate::operators::OperatorExpr;
use crate::scalar::Scalar;
use crate::smip::SmipProblem;

/// Relative slack allowed in the per-step distance inequalities.
pub const FEJER_TOLERANCE: f64 = 1e-10;
/// Tail ratio threshold for classifying one sequence as faster.
pub const FASTER_THRESHOLD: f64 = 0.1;
/// Ratios with denominator below this are excluded.
pub const DENOMINATOR_FLOOR: f64 = 1e-300;
pub const MIN_VALID_RATIOS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FejerStep<T> {
    pub n: usize,
    /// ‖wₙ − x*‖
    pub dist_w: T,
    /// ‖yₙ − x*‖, for schemes with an intermediate point.
    pub dist_y: Option<T>,
    /// ‖xₙ₊₁ − x*‖
    pub dist_next: T,
    /// ‖wₙ − x*‖ − ‖xₙ₊₁ − x*‖
    pub slack: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FejerReport<T> {
    pub status: CheckStatus,
    pub min_slack: Option<T>,
    /// Whether ‖xₙ₊₁ − x*‖ ≤ ‖yₙ − x*‖ ≤ ‖wₙ − x*‖ held at every step that
    /// records yₙ; `None` when no step does.
    pub chain_holds: Option<bool>,
    pub steps: Vec<FejerStep<T>>,
    pub note: String,
}

fn within<T: Scalar>(lhs: T, rhs: T) -> bool {
    lhs <= rhs + T::lit(FEJER_TOLERANCE) * (T::one() + rhs)
}

/// Checks ‖xₙ₊₁ − x*‖ ≤ ‖wₙ − x*‖ at every step, and the chain through yₙ
/// where recorded, each with slack 1e−10·(1 + rhs).
pub fn fejer_check<T: Scalar>(
    trace: &IterationTrace<T>,
    x_star: &Vector<T>,
) -> Result<FejerReport<T>> {
    let mut steps = Vec::new();
    let mut ok = true;
    let mut chain: Option<bool> = None;
    for pair in trace.records.windows(2) {
        let (cur, next) = (&pair[0], &pair[1]);
        let w = cur
            .w
            .as_ref()
            .ok_or(Error::IncompleteTrace { what: "w_n" })?;
        let dist_w = w.distance(x_star)?;
        let dist_next = next.x.distance(x_star)?;
        let dist_y = cur.y.as_ref().map(|y| y.distance(x_star)).transpose()?;
        ok &= within(dist_next, dist_w);
        if let Some(dy) = dist_y {
            let holds = within(dist_next, dy) && within(dy, dist_w);
            chain = Some(chain.unwrap_or(true) && holds);
        }
        steps.push(FejerStep {
            n: cur.n,
            dist_w,
            dist_y,
            dist_next,
            slack: dist_w - dist_next,
        });
    }
    let min_slack = steps
        .iter()
        .map(|s| s.slack)
        .fold(None, |acc: Option<T>, s| Some(acc.map_or(s, |a| a.min(s))));
    let pass = ok && chain.unwrap_or(true);
    Ok(FejerReport {
        status: if pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        min_slack,
        chain_holds: chain,
        note: format!("{} steps checked", steps.len()),
        steps,
    })
}

/// Runs [`fejer_check`] only when sampling finds both S and J′ nonexpansive;
/// otherwise reports `Skipped` with the offending Lipschitz estimate.
pub fn fejer_check_guarded<T: Scalar>(
    trace: &IterationTrace<T>,
    x_star: &Vector<T>,
    s: &OperatorExpr<T>,
    jprime: &OperatorExpr<T>,
    seed: u64,
    samples: usize,
) -> Result<FejerReport<T>> {
    for (name, op) in [("S", s), ("J'", jprime)] {
        let report = check_nonexpansive(op, &mut SeededSampler::new(seed), samples)?;
        if !report.passed() {
            return Ok(FejerReport {
                status: CheckStatus::Skipped,
                min_slack: None,
                chain_holds: None,
                steps: Vec::new(),
                note: format!(
                    "skipped: {name} is not nonexpansive (sampled Lipschitz ratio {:.6})",
                    report.estimate.map_or(f64::NAN, Scalar::to_f64_lossy)
                ),
            });
        }
    }
    fejer_check(trace, x_star)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport<T> {
    pub status: CheckStatus,
    /// Back-and-forth movement of dₖ = ‖xₖ − x*‖ over the last quarter
    /// (total variation minus net change) plus the final |dₖ₊₁ − dₖ|.
    pub oscillation: T,
    pub threshold: T,
    pub tail_len: usize,
    pub note: String,
}

fn tail_start(len: usize) -> usize {
    let q = (len / 4).max(2).min(len);
    len - q
}

/// Checks that ‖xₙ − x*‖ has settled at the scale of the run's step
/// tolerance.
///
/// Over the last quarter of the trace, the oscillation of dₖ = ‖xₖ − x*‖ is
/// its total variation minus its net change (zero for a monotone tail) plus
/// the size of the final move. The check passes when this is at most
/// 10·step_tol. A diverged run always fails.
pub fn limit_exists_check<T: Scalar>(
    trace: &IterationTrace<T>,
    x_star: &Vector<T>,
) -> Result<LimitReport<T>> {
    let len = trace.records.len();
    if len < 10 {
        return Err(Error::TraceTooShort { len, needed: 10 });
    }
    let stop = trace
        .stop
        .ok_or(Error::IncompleteTrace { what: "stop rule" })?;
    let threshold = T::lit(10.0) * stop.step_tol;
    let dists = trace
        .records
        .iter()
        .map(|r| r.x.distance(x_star))
        .collect::<Result<Vec<T>>>()?;
    let start = tail_start(len);
    let tail = &dists[start..];
    let diffs: Vec<T> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let variation = diffs.iter().fold(T::zero(), |acc, d| acc + d.abs());
    let net = diffs.iter().fold(T::zero(), |acc, &d| acc + d).abs();
    let last_move = diffs.last().map_or(T::zero(), |d| d.abs());
    let oscillation = (variation - net).max(T::zero()) + last_move;
    let (status, note) = if trace.termination.diverged() {
        (
            CheckStatus::Fail,
            format!("run diverged ({})", trace.termination.label()),
        )
    } else if oscillation <= threshold {
        (CheckStatus::Pass, "distance to x* has settled".to_string())
    } else {
        (
            CheckStatus::Fail,
            "distance to x* still moving in the last quarter".to_string(),
        )
    };
    Ok(LimitReport {
        status,
        oscillation,
        threshold,
        tail_len: tail.len(),
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualLimitReport<T> {
    pub status: CheckStatus,
    pub final_res_s: T,
    pub final_res_j: T,
    pub tolerance: T,
    pub s_trend_non_increasing: bool,
    pub j_trend_non_increasing: bool,
    pub note: String,
}

fn median3<T: Scalar>(a: T, b: T, c: T) -> T {
    a.max(b).min(a.min(b).max(c))
}

/// Non-increasing under a 3-point moving median. Rises smaller than
/// 1e−3·tol are treated as noise.
fn trend_non_increasing<T: Scalar>(values: &[T], tol: T) -> bool {
    if values.len() < 3 {
        return values.windows(2).all(|w| w[1] <= w[0] + T::lit(1e-3) * tol);
    }
    let smoothed: Vec<T> = values
        .windows(3)
        .map(|w| median3(w[0], w[1], w[2]))
        .collect();
    smoothed
        .windows(2)
        .all(|w| w[1] <= w[0] + T::lit(1e-3) * tol)
}

/// [`residual_limit_check_with_tol`] using the trace's `residual_tol`.
pub fn residual_limit_check<T: Scalar>(
    trace: &IterationTrace<T>,
) -> Result<ResidualLimitReport<T>> {
    let stop = trace
        .stop
        .ok_or(Error::IncompleteTrace { what: "stop rule" })?;
    residual_limit_check_with_tol(trace, stop.residual_tol)
}

/// Passes iff both final residuals are ≤ `tol` and each residual column is
/// non-increasing over the last quarter under a 3-point moving median.
pub fn residual_limit_check_with_tol<T: Scalar>(
    trace: &IterationTrace<T>,
    tol: T,
) -> Result<ResidualLimitReport<T>> {
    let last = trace
        .last()
        .ok_or(Error::IncompleteTrace { what: "records" })?;
    if trace
        .records
        .iter()
        .any(|r| r.res_s.is_nan() || r.res_j.is_nan())
    {
        return Err(Error::IncompleteTrace {
            what: "residual columns",
        });
    }
    let start = tail_start(trace.records.len());
    let tail = &trace.records[start..];
    let res_s: Vec<T> = tail.iter().map(|r| r.res_s).collect();
    let res_j: Vec<T> = tail.iter().map(|r| r.res_j).collect();
    let s_trend = trend_non_increasing(&res_s, tol);
    let j_trend = trend_non_increasing(&res_j, tol);
    let small = last.res_s <= tol && last.res_j <= tol;
    let diverged = trace.termination.diverged();
    let pass = small && s_trend && j_trend && !diverged;
    let note = if diverged {
        format!("run diverged ({})", trace.termination.label())
    } else if !small {
        "final residual above tolerance".to_string()
    } else if !(s_trend && j_trend) {
        "residual trend rising in the last quarter".to_string()
    } else {
        "both residuals vanish".to_string()
    };
    Ok(ResidualLimitReport {
        status: if pass {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        final_res_s: last.res_s,
        final_res_j: last.res_j,
        tolerance: tol,
        s_trend_non_increasing: s_trend,
        j_trend_non_increasing: j_trend,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateClass {
    Faster,
    SameRate,
    Slower,
    Undetermined,
}

impl RateClass {
    pub fn reversed(self) -> Self {
        match self {
            Self::Faster => Self::Slower,
            Self::Slower => Self::Faster,
            other => other,
        }
    }
}

/// Empirical estimate of lim ‖uₙ − u‖/‖vₙ − v‖.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate<T> {
    pub ratios: Vec<T>,
    pub excluded: usize,
    /// Geometric-mean median (median of log ratios, exponentiated) over the
    /// last quarter of valid ratios.
    pub tail_median: Option<T>,
    pub classification: RateClass,
    pub note: String,
}

fn median_sorted<T: Scalar>(sorted: &[T]) -> T {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / T::two()
    }
}

/// Compares how fast `trace_u` approaches `u` against `trace_v` approaching
/// `v`.
///
/// `Faster` requires a tail median below 0.1 with a strictly decreasing tail;
/// `Slower` is the mirror image (median above 10, strictly increasing), so
/// swapping the arguments swaps the two. Fewer than five usable ratios give
/// `Undetermined`.
pub fn rate_compare<T: Scalar>(
    trace_u: &IterationTrace<T>,
    trace_v: &IterationTrace<T>,
    u: &Vector<T>,
    v: &Vector<T>,
) -> Result<RateEstimate<T>> {
    if trace_u.records.is_empty() || trace_v.records.is_empty() {
        return Err(Error::IncompleteTrace { what: "records" });
    }
    let floor = T::lit(DENOMINATOR_FLOOR);
    let mut ratios = Vec::new();
    let mut excluded = 0;
    for (ru, rv) in trace_u.records.iter().zip(&trace_v.records) {
        let num = ru.x.distance(u)?;
        let den = rv.x.distance(v)?;
        if den < floor {
            excluded += 1;
        } else {
            ratios.push(num / den);
        }
    }
    let undetermined = |ratios, note: String| RateEstimate {
        ratios,
        excluded,
        tail_median: None,
        classification: RateClass::Undetermined,
        note,
    };
    if ratios.len() < MIN_VALID_RATIOS {
        let note = format!(
            "only {} valid ratios ({} excluded for vanishing denominator); need {}",
            ratios.len(),
            excluded,
            MIN_VALID_RATIOS
        );
        return Ok(undetermined(ratios, note));
    }
    let tail = &ratios[tail_start(ratios.len())..];
    if tail.iter().any(|r| r.is_zero()) {
        // u reached its limit exactly while v had not.
        let strictly_dec = tail.windows(2).all(|w| w[1] < w[0] || w[1].is_zero());
        return Ok(RateEstimate {
            tail_median: Some(T::zero()),
            classification: if strictly_dec {
                RateClass::Faster
            } else {
                RateClass::SameRate
            },
            note: "numerator vanished in the tail".into(),
            ratios,
            excluded,
        });
    }
    let mut logs: Vec<T> = tail.iter().map(|r| r.ln()).collect();
    logs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let median = median_sorted(&logs).exp();
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    let lo = T::lit(FASTER_THRESHOLD);
    let hi = T::one() / lo;
    let classification = if median < lo && decreasing {
        RateClass::Faster
    } else if median > hi && increasing {
        RateClass::Slower
    } else {
        RateClass::SameRate
    };
    Ok(RateEstimate {
        note: format!(
            "tail of {} ratios, thresholds {} / {}; {} excluded",
            tail.len(),
            lo,
            hi,
            excluded
        ),
        tail_median: Some(median),
        classification,
        ratios,
        excluded,
    })
}

/// Samples of (d(x, Σ), max{‖x − S(x)‖, ‖x − J′(x)‖}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionBProfile<T> {
    pub pairs: Vec<(T, T)>,
    /// Sorted by distance; the value at d is the smallest residual among
    /// samples at distance ≥ d, a non-decreasing lower envelope for f.
    pub envelope: Vec<(T, T)>,
}

/// Profiles condition (B) on the given points. Descriptive only.
pub fn condition_b_profile<T: Scalar>(
    problem: &SmipProblem<T>,
    s: &OperatorExpr<T>,
    points: &[Vector<T>],
    sigma_distance: impl Fn(&Vector<T>) -> T,
) -> Result<ConditionBProfile<T>> {
    let jp = problem.jprime();
    let pairs = points
        .iter()
        .map(|x| {
            let rs = x.distance(&s.evaluate(x)?)?;
            let rj = x.distance(&jp.evaluate(x)?)?;
            Ok((sigma_distance(x), rs.max(rj)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = pairs.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
    let mut envelope = sorted.clone();
    let mut running = T::infinity();
    for entry in envelope.iter_mut().rev() {
        running = running.min(entry.1);
        entry.1 = running;
    }
    Ok(ConditionBProfile { pairs, envelope })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engines::{run, IterConfig, Scheme};
    use crate::operators::LinearOp;

    fn v1(x: f64) -> Vector<f64> {
        Vector::new(vec![x]).unwrap()
    }

    fn identity_problem() -> SmipProblem<f64> {
        SmipProblem::direct(
            OperatorExpr::identity(1),
            OperatorExpr::identity(1),
            LinearOp::identity(1),
            1.0,
        )
        .unwrap()
    }

    fn picard_trace(x0: f64, max_iter: usize) -> IterationTrace<f64> {
        let s = OperatorExpr::affine_1d(0.25, 0.75);
        let cfg = IterConfig::new(Scheme::Picard).with_stop(max_iter, 1e-15, 1e-15);
        run(&cfg, &s, &identity_problem(), &v1(x0), Some(&v1(1.0))).unwrap()
    }

    #[test]
    fn fejer_passes_on_contraction() {
        let t = picard_trace(9.0, 20);
        let r = fejer_check(&t, &v1(1.0)).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        assert!(r.steps.iter().all(|s| s.slack > 0.0));
        assert_eq!(r.chain_holds, None);
    }

    #[test]
    fn fejer_constant_trace_has_zero_slack() {
        let mut t = IterationTrace::from_points(vec![v1(1.0); 5]);
        for r in &mut t.records {
            r.w = Some(r.x.clone());
        }
        let r = fejer_check(&t, &v1(1.0)).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);
        assert_eq!(r.min_slack, Some(0.0));
    }

    #[test]
    fn fejer_needs_w() {
        let t = IterationTrace::from_points(vec![v1(1.0), v1(2.0)]);
        assert_eq!(
            fejer_check(&t, &v1(1.0)).unwrap_err(),
            Error::IncompleteTrace { what: "w_n" }
        );
    }

    #[test]
    fn fejer_skipped_for_expansive_map() {
        let t = picard_trace(9.0, 20);
        let u = OperatorExpr::affine_1d(4.5, -3.5);
        let r = fejer_check_guarded(&t, &v1(1.0), &OperatorExpr::identity(1), &u, 1, 100).unwrap();
        assert_eq!(r.status, CheckStatus::Skipped);
        assert!(r.note.contains("J'"));
    }

    #[test]
    fn residual_limit_on_contraction() {
        let t = picard_trace(9.0, 60);
        let r = residual_limit_check_with_tol(&t, 1e-10).unwrap();
        assert_eq!(r.status, CheckStatus::Pass, "{r:?}");
    }

    #[test]
    fn residual_limit_fails_on_stuck_iterate() {
        // Byrne with J' = identity never moves, so the S residual stays at 6.
        let s = OperatorExpr::affine_1d(0.25, 0.75);
        let cfg = IterConfig::new(Scheme::Byrne).with_stop(20, 1e-300, 1e-9);
        let t = run(&cfg, &s, &identity_problem(), &v1(9.0), None).unwrap();
        let r = residual_limit_check(&t).unwrap();
        assert_eq!(r.status, CheckStatus::Fail);
        assert!((r.final_res_s - 6.0).abs() < 1e-12);
    }

    #[test]
    fn limit_check_examples() {
        let constant = {
            let s = OperatorExpr::identity(1);
            let cfg = IterConfig::new(Scheme::Picard).with_stop(12, 1e-300, 1e-300);
            run(&cfg, &s, &identity_problem(), &v1(3.0), None).unwrap()
        };
        // identity map: the residual stop fires at once, so pad to length.
        let padded = IterationTrace {
            stop: constant.stop,
            ..IterationTrace::from_points(vec![v1(3.0); 12])
        };
        let r = limit_exists_check(&padded, &v1(1.0)).unwrap();
        assert_eq!(r.status, CheckStatus::Pass);

        let short = IterationTrace::from_points(vec![v1(3.0); 4]);
        assert!(matches!(
            limit_exists_check(&short, &v1(1.0)),
            Err(Error::TraceTooShort { .. })
        ));

        let s = OperatorExpr::affine_1d(2.0, 0.0);
        let cfg = IterConfig::new(Scheme::Picard)
            .with_stop(1000, 1e-12, 1e-12)
            .with_guard(1e8);
        let diverged = run(&cfg, &s, &identity_problem(), &v1(1.0), None).unwrap();
        assert!(diverged.termination.diverged());
        let r = limit_exists_check(&diverged, &v1(0.0)).unwrap();
        assert_eq!(r.status, CheckStatus::Fail);
    }

    #[test]
    fn rate_classification() {
        let u = IterationTrace::from_points((1..=30).map(|n| v1(0.25f64.powi(n))).collect());
        let v = IterationTrace::from_points((1..=30).map(|n| v1(0.5f64.powi(n))).collect());
        let zero = v1(0.0);
        let fwd = rate_compare(&u, &v, &zero, &zero).unwrap();
        assert_eq!(fwd.classification, RateClass::Faster);
        let back = rate_compare(&v, &u, &zero, &zero).unwrap();
        assert_eq!(back.classification, RateClass::Slower);
        let same = rate_compare(&u, &u, &zero, &zero).unwrap();
        assert_eq!(same.classification, RateClass::SameRate);
        assert!((same.tail_median.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rate_undetermined_when_denominators_vanish() {
        let u = IterationTrace::from_points((1..=10).map(|n| v1(n as f64)).collect());
        let v = IterationTrace::from_points(vec![v1(0.0); 10]);
        let r = rate_compare(&u, &v, &v1(0.0), &v1(0.0)).unwrap();
        assert_eq!(r.classification, RateClass::Undetermined);
        assert_eq!(r.excluded, 10);
    }

    #[test]
    fn condition_b_examples() {
        let s = OperatorExpr::affine_1d(0.25, 0.75);
        let p = identity_problem();
        let dist = |x: &Vector<f64>| (x[0] - 1.0).abs();
        let eps = 1e-3;
        let prof = condition_b_profile(&p, &s, &[v1(1.0), v1(5.0), v1(1.0 + eps)], dist).unwrap();
        assert_eq!(prof.pairs[0], (0.0, 0.0));
        assert_eq!(prof.pairs[1], (4.0, 3.0));
        assert!((prof.pairs[2].0 - eps).abs() < 1e-15);
        assert!((prof.pairs[2].1 - 0.75 * eps).abs() < 1e-12);
        assert!(prof.envelope.windows(2).all(|w| w[0].1 <= w[1].1));
    }
}
