use splitfix::catalog::{catalog, reference_config, reference_example, well_posed_config};
use splitfix::diagnostics::{
    fejer_check, fejer_check_guarded, limit_exists_check, residual_limit_check_with_tol,
    CheckStatus,
};
use splitfix::engines::{
    run, step_inertial_s, validate_conditions, Condition, FindingStatus, IterConfig, Schedule,
    Scheme, Termination,
};
use splitfix::{Error, LinearOp, OperatorExpr, SmipProblem, Stage, Vector};

fn v(xs: &[f64]) -> Vector<f64> {
    Vector::new(xs.to_vec()).unwrap()
}

/// Straight-line evaluation of the first step of the worked example with
/// scalar arithmetic only.
fn hand_step(x: f64, x_prev: f64, theta: f64, alpha: f64, beta: f64) -> (f64, f64, f64) {
    let s = |t: f64| (t + 3.0) / 4.0;
    let u = |t: f64| (9.0 * t - 7.0) / 2.0;
    let vv = |t: f64| (5.0 * t - 2.0) / 3.0;
    let a = -0.5;
    let gamma = 0.000025;
    let jp = |t: f64| {
        let at = a * t;
        u(t + gamma * a * (vv(at) - at))
    };
    let w = x + theta * (x - x_prev);
    let y = (1.0 - beta) * w + beta * s(w);
    let x_next = (1.0 - alpha) * s(y) + alpha * jp(y);
    (w, y, x_next)
}

#[test]
fn first_step_matches_hand_oracle() {
    let (w_o, y_o, x_o) = hand_step(0.1, 0.1, 0.98, 0.5, 2.0 / 3.0);
    assert!((w_o - 0.1).abs() < 1e-15);
    assert!((y_o - 0.55).abs() < 1e-15);
    assert!((x_o - -0.0687261).abs() < 1e-6);

    let p = reference_example::<f64>(0.1);
    let step = step_inertial_s(
        &v(&[0.1]),
        &v(&[0.1]),
        &p.s,
        p.problem.jprime(),
        0.98,
        0.5,
        2.0 / 3.0,
    )
    .unwrap();
    assert!((step.w[0] - 0.1).abs() < 1e-15);
    assert!((step.y[0] - 0.55).abs() < 1e-15);
    assert!((step.x_next[0] - -0.0687261).abs() < 1e-6);
    assert!((step.x_next[0] - x_o).abs() < 1e-14);
    assert!((p.s.evaluate(&step.y).unwrap()[0] - 0.8875).abs() < 1e-15);
    assert!((p.problem.jprime().evaluate(&step.y).unwrap()[0] - -1.0249522).abs() < 1e-6);
}

#[test]
fn identity_maps_without_inertia_fix_the_point() {
    let id = OperatorExpr::identity(2);
    let x = v(&[1.5, -2.0]);
    let step = step_inertial_s(&x, &v(&[7.0, 3.0]), &id, &id, 0.0, 0.5, 0.5).unwrap();
    assert_eq!(step.x_next, x);
    let step = step_inertial_s(&x, &v(&[7.0, 3.0]), &id, &id, 0.0, 0.3, 0.6).unwrap();
    assert!(step.x_next.distance(&x).unwrap() <= 4.0 * f64::EPSILON);
}

#[test]
fn equal_previous_point_removes_inertia() {
    let s = OperatorExpr::affine_1d(0.25, 0.75);
    for theta in [0.0, 0.5, 0.98, 3.0] {
        let step = step_inertial_s(&v(&[4.0]), &v(&[4.0]), &s, &s, theta, 0.5, 0.5).unwrap();
        assert_eq!(step.w, v(&[4.0]));
    }
}

#[test]
fn step_parameters_are_checked() {
    let id = OperatorExpr::identity(1);
    let x = v(&[1.0]);
    assert!(step_inertial_s(&x, &x, &id, &id, -0.1, 0.5, 0.5).is_err());
    assert!(step_inertial_s(&x, &x, &id, &id, 0.1, 1.0, 0.5).is_err());
    assert!(step_inertial_s(&x, &x, &id, &id, 0.1, 0.5, 0.0).is_err());
    let two = OperatorExpr::identity(2);
    assert!(step_inertial_s(&x, &x, &two, &two, 0.1, 0.5, 0.5).is_err());
}

#[test]
fn overflow_names_the_stage() {
    let id = OperatorExpr::identity(1);
    let err = step_inertial_s(&v(&[1e308]), &v(&[-1e308]), &id, &id, 1.0, 0.5, 0.5).unwrap_err();
    assert!(
        matches!(err, Error::Divergence { stage: Stage::W }),
        "{err:?}"
    );
    let big = OperatorExpr::scale(1, 1e300);
    let err = step_inertial_s(&v(&[1e10]), &v(&[1e10]), &big, &id, 0.0, 0.5, 0.5).unwrap_err();
    assert!(
        matches!(err, Error::Divergence { stage: Stage::Y }),
        "{err:?}"
    );
}

#[test]
fn reference_example_settles_at_one() {
    for x0 in [0.1, -0.1] {
        let p = reference_example::<f64>(x0);
        let trace = run(
            &reference_config(),
            &p.s,
            &p.problem,
            &p.x0,
            Some(&p.x_star),
        )
        .unwrap();
        assert!(trace.iterations() <= 100);
        assert!((trace.final_point().unwrap()[0] - 1.0).abs() <= 1e-5);
        assert_eq!(trace.records[0].step, 0.0);

        let fejer =
            fejer_check_guarded(&trace, &p.x_star, &p.s, p.problem.jprime(), 1, 1000).unwrap();
        assert_eq!(fejer.status, CheckStatus::Skipped);
        assert!(fejer.note.contains("J'"), "{}", fejer.note);

        let limit = limit_exists_check(&trace, &p.x_star).unwrap();
        assert_eq!(limit.status, CheckStatus::Pass, "{limit:?}");
        let residual = residual_limit_check_with_tol(&trace, 1e-4).unwrap();
        assert_eq!(residual.status, CheckStatus::Pass, "{residual:?}");
    }
}

#[test]
fn picard_contraction_closed_form() {
    let s = OperatorExpr::affine_1d(0.25, 0.75);
    let id = SmipProblem::direct(
        OperatorExpr::identity(1),
        OperatorExpr::identity(1),
        LinearOp::identity(1),
        1.0,
    )
    .unwrap();
    let config = IterConfig::new(Scheme::Picard).with_stop(40, 1e-300, 1e-300);
    let trace = run(&config, &s, &id, &v(&[9.0]), Some(&v(&[1.0]))).unwrap();
    for r in trace.records.iter().take(20) {
        let k = (r.n - 1) as i32;
        let expected = 8.0 * 0.25f64.powi(k);
        assert!(
            (r.dist_opt.unwrap() - expected).abs() <= 1e-15 * 8.0,
            "n = {}",
            r.n
        );
    }
    let reached = trace.iterations_to(&v(&[1.0]), 1e-6).unwrap();
    assert_eq!(reached - 1, 12);
    assert_eq!(
        fejer_check(&trace, &v(&[1.0])).unwrap().status,
        CheckStatus::Pass
    );
}

#[test]
fn byrne_with_identity_jprime_is_constant() {
    let s = OperatorExpr::affine_1d(0.25, 0.75);
    let p = SmipProblem::direct(
        OperatorExpr::identity(1),
        OperatorExpr::identity(1),
        LinearOp::identity(1),
        1.0,
    )
    .unwrap();
    let config = IterConfig::new(Scheme::Byrne).with_stop(20, 1e-12, 1e-12);
    let trace = run(&config, &s, &p, &v(&[5.0]), None).unwrap();
    assert!(trace.points().all(|x| *x == v(&[5.0])));
    let residual = residual_limit_check_with_tol(&trace, 1e-6).unwrap();
    assert_eq!(residual.status, CheckStatus::Fail);
    assert!(!residual.s_trend_non_increasing || residual.final_res_s > 1e-6);
}

#[test]
fn zero_inertia_is_bit_identical_to_modified_s() {
    let zero_theta = |scheme| {
        IterConfig::new(scheme)
            .with_schedules(
                Schedule::constant(0.0).unwrap(),
                Schedule::power(1.0).unwrap(),
                Schedule::constant(0.5).unwrap(),
            )
            .with_stop(200, f64::MIN_POSITIVE, f64::MIN_POSITIVE)
    };
    for p in catalog::<f64>().into_iter().take(3) {
        let a = run(
            &zero_theta(Scheme::InertialModifiedS),
            &p.s,
            &p.problem,
            &p.x0,
            None,
        )
        .unwrap();
        let b = run(
            &zero_theta(Scheme::ModifiedS),
            &p.s,
            &p.problem,
            &p.x0,
            None,
        )
        .unwrap();
        assert_eq!(a.records, b.records, "{}", p.name);
        assert_eq!(a.termination, b.termination);
    }
}

#[test]
fn explicit_previous_point_is_used() {
    let s = OperatorExpr::affine_1d(0.25, 0.75);
    let p = SmipProblem::direct(
        OperatorExpr::identity(1),
        OperatorExpr::identity(1),
        LinearOp::identity(1),
        1.0,
    )
    .unwrap();
    let config = IterConfig::new(Scheme::InertialModifiedS)
        .with_init(splitfix::engines::InitRule::Explicit(v(&[3.0])))
        .with_stop(5, 1e-12, 1e-12);
    let trace = run(&config, &s, &p, &v(&[5.0]), None).unwrap();
    assert_eq!(trace.records[0].step, 2.0);
    assert_eq!(trace.records[0].w.as_ref().unwrap()[0], 5.0 + 0.25 * 2.0);
}

#[test]
fn guard_trips_on_expansive_map() {
    let s = OperatorExpr::scale(1, 2.0);
    let p = SmipProblem::direct(
        OperatorExpr::identity(1),
        OperatorExpr::identity(1),
        LinearOp::identity(1),
        1.0,
    )
    .unwrap();
    let config = IterConfig::new(Scheme::InertialModifiedS)
        .with_schedules(
            Schedule::constant(0.98).unwrap(),
            Schedule::constant(0.5).unwrap(),
            Schedule::constant(0.5).unwrap(),
        )
        .with_stop(10_000, 1e-12, 1e-12);
    let trace = run(&config, &s, &p, &v(&[1.0]), None).unwrap();
    assert!(matches!(trace.termination, Termination::Guard { .. }));
    assert!(matches!(
        trace.into_result(),
        Err(Error::GuardExceeded { .. })
    ));
}

#[test]
fn condition_findings() {
    let findings = validate_conditions(&reference_config::<f64>());
    let status = |c| findings.iter().find(|f| f.condition == c).unwrap().status;
    assert_eq!(status(Condition::D1), FindingStatus::Violated);
    assert_eq!(status(Condition::D2), FindingStatus::Violated);
    assert_eq!(status(Condition::D3), FindingStatus::RuntimeMonitored);
    assert_eq!(status(Condition::D4), FindingStatus::RuntimeMonitored);

    let findings = validate_conditions(&well_posed_config::<f64>(10, 1e-8, 1e-8));
    assert!(findings.iter().all(|f| !f.violated()), "{findings:?}");
}

#[test]
fn single_precision_run() {
    let p = catalog::<f32>().pop().unwrap();
    let config = well_posed_config::<f32>(500, 1e-6, 1e-5);
    let trace = run(&config, &p.s, &p.problem, &p.x0, Some(&p.x_star)).unwrap();
    assert!(!trace.termination.diverged());
    assert!((trace.final_point().unwrap()[0] - 1.0).abs() < 1e-4);
}
