use proptest::prelude::*;
use splitfix::diagnostics::{rate_compare, RateClass};
use splitfix::engines::{IterationTrace, Schedule};
use splitfix::operators::soft_threshold;
use splitfix::{
    combine, inner, norm, ConvexSet, LinearOp, MonotoneSpec, OperatorExpr, SmipProblem, Vector,
};

fn coords(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
}

fn pair(max_dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1..=max_dim).prop_flat_map(|d| (coords(d), coords(d)))
}

fn vector(c: Vec<f64>) -> Vector<f64> {
    Vector::new(c).unwrap()
}

fn specs(dim: usize) -> Vec<MonotoneSpec<f64>> {
    let lo = vector(vec![-1.0; dim]);
    let hi = vector(vec![2.0; dim]);
    let mut psd = vec![vec![0.0; dim]; dim];
    for (i, row) in psd.iter_mut().enumerate() {
        row[i] = 1.0 + i as f64;
        if i + 1 < dim {
            row[i + 1] = 0.5;
        }
    }
    vec![
        MonotoneSpec::zero(dim),
        MonotoneSpec::linear_psd(LinearOp::from_rows(psd).unwrap()).unwrap(),
        MonotoneSpec::subdifferential_abs(dim, 0.7).unwrap(),
        MonotoneSpec::normal_cone(ConvexSet::boxed(lo, hi).unwrap()),
        MonotoneSpec::normal_cone(ConvexSet::ball(vector(vec![0.5; dim]), 1.5).unwrap()),
    ]
}

proptest! {
    #[test]
    fn two_point_identity(a in -2.0f64..2.0, (x, y) in pair(6)) {
        let (x, y) = (vector(x), vector(y));
        let lhs = combine(a, &x, &y).unwrap().norm_squared();
        let d = x.sub(&y).unwrap().norm_squared();
        let rhs = a * x.norm_squared() + (1.0 - a) * y.norm_squared() - a * (1.0 - a) * d;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + x.norm_squared() + y.norm_squared()));
    }

    #[test]
    fn cauchy_schwarz((x, y) in pair(8)) {
        let (x, y) = (vector(x), vector(y));
        let bound = norm(&x) * norm(&y);
        prop_assert!(inner(&x, &y).unwrap().abs() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn norm_squared_is_self_inner(x in (1..8usize).prop_flat_map(coords)) {
        let x = vector(x);
        let n2 = norm(&x).powi(2);
        let ip = inner(&x, &x).unwrap();
        prop_assert!((n2 - ip).abs() <= 1e-12 * ip.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn resolvents_are_firmly_nonexpansive(lambda in 1e-3f64..=10.0, (x, y) in pair(4)) {
        let (x, y) = (vector(x), vector(y));
        for spec in specs(x.dim()) {
            let jx = spec.resolvent(lambda, &x).unwrap();
            let jy = spec.resolvent(lambda, &y).unwrap();
            let dj = jx.sub(&jy).unwrap();
            let dx = x.sub(&y).unwrap();
            let slack = 1e-10 * (1.0 + dx.norm_squared());
            prop_assert!(dj.inner(&dx).unwrap() >= dj.norm_squared() - slack, "{}", spec.name());
            prop_assert!(dj.norm() <= dx.norm() + 1e-10, "{}", spec.name());
            prop_assert_eq!(spec.resolvent(lambda, &x).unwrap(), jx);
        }
    }

    #[test]
    fn psd_resolvent_solves_its_inclusion(lambda in 1e-3f64..=10.0, x in (1..5usize).prop_flat_map(coords)) {
        let x = vector(x);
        let spec = &specs(x.dim())[1];
        let MonotoneSpec::LinearPsd { matrix } = spec else { unreachable!() };
        let z = spec.resolvent(lambda, &x).unwrap();
        let back = z.add(&matrix.apply(&z).unwrap().scale(lambda)).unwrap();
        prop_assert!(back.distance(&x).unwrap() <= 1e-10 * (1.0 + x.norm()));
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero(x in (1..6usize).prop_flat_map(coords), t in 0.0f64..5.0) {
        let x = vector(x);
        let z = soft_threshold(&x, t);
        for (zi, xi) in z.coords().iter().zip(x.coords()) {
            prop_assert!(zi.abs() <= xi.abs());
            prop_assert!(*zi == 0.0 || zi.signum() == xi.signum());
            prop_assert!((xi - zi).abs() <= t + 1e-15);
        }
    }

    #[test]
    fn projections_are_idempotent(x in (1..5usize).prop_flat_map(coords)) {
        let d = x.len();
        let x = vector(x);
        let sets = [
            ConvexSet::boxed(vector(vec![-1.0; d]), vector(vec![2.0; d])).unwrap(),
            ConvexSet::ball(vector(vec![0.5; d]), 1.5).unwrap(),
        ];
        for set in sets {
            let p = set.project(&x).unwrap();
            prop_assert!(set.project(&p).unwrap().distance(&p).unwrap() <= 1e-14 * (1.0 + p.norm()));
            prop_assert!(set.distance(&x).unwrap() <= x.distance(&p).unwrap());
        }
    }

    #[test]
    fn jprime_with_identity_resolvents_is_identity(x in (1..5usize).prop_flat_map(coords), gamma in 0.01f64..1.0) {
        let d = x.len();
        let x = vector(x);
        let p = SmipProblem::direct(
            OperatorExpr::identity(d),
            OperatorExpr::identity(3),
            LinearOp::from_rows(vec![vec![1.0; d], vec![0.5; d], vec![-1.0; d]]).unwrap(),
            gamma,
        )
        .unwrap();
        prop_assert_eq!(p.jprime().evaluate(&x).unwrap(), x);
    }

    #[test]
    fn jprime_matches_straight_line_oracle(
        a in prop::array::uniform4(-2.0f64..2.0),
        u in prop::array::uniform2(-2.0f64..2.0),
        vv in prop::array::uniform2(-2.0f64..2.0),
        x in prop::array::uniform2(-10.0f64..10.0),
        gamma in 0.001f64..1.0,
    ) {
        // U(z) = u0·z + u1, V(t) = v0·t + v1 componentwise, A = [[a0, a1], [a2, a3]].
        let au = LinearOp::from_rows(vec![vec![u[0], 0.0], vec![0.0, u[0]]]).unwrap();
        let av = LinearOp::from_rows(vec![vec![vv[0], 0.0], vec![0.0, vv[0]]]).unwrap();
        let uop = OperatorExpr::affine(au, vector(vec![u[1], u[1]])).unwrap();
        let vop = OperatorExpr::affine(av, vector(vec![vv[1], vv[1]])).unwrap();
        let amat = LinearOp::from_rows(vec![vec![a[0], a[1]], vec![a[2], a[3]]]).unwrap();
        let p = SmipProblem::direct(uop, vop, amat, gamma).unwrap();

        let ax = [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]];
        let r = [vv[0] * ax[0] + vv[1] - ax[0], vv[0] * ax[1] + vv[1] - ax[1]];
        let at_r = [a[0] * r[0] + a[2] * r[1], a[1] * r[0] + a[3] * r[1]];
        let z = [x[0] + gamma * at_r[0], x[1] + gamma * at_r[1]];
        let expected = [u[0] * z[0] + u[1], u[0] * z[1] + u[1]];

        let got = p.jprime().evaluate(&vector(x.to_vec())).unwrap();
        for i in 0..2 {
            prop_assert!((got[i] - expected[i]).abs() <= 1e-14 * (1.0 + expected[i].abs()) * 16.0);
        }
    }

    #[test]
    fn schedule_values_stay_in_declared_range(
        c in 0.0f64..1.0, p in 0.1f64..3.0, r in -1.0f64..=1.0, c0 in -1.0f64..1.0, n in 1usize..10_000,
    ) {
        let schedules = [
            Schedule::constant(c).unwrap(),
            Schedule::power(p).unwrap(),
            Schedule::rational_shift(),
            Schedule::geometric(r, c0).unwrap(),
            Schedule::table(vec![c, c0, 0.5 * c]).unwrap(),
        ];
        for s in schedules {
            let (lo, hi) = s.declared_range();
            let value = s.value(n).unwrap();
            prop_assert!(lo <= value && value <= hi, "{} at {n}", s.label());
        }
    }

    #[test]
    fn rate_compare_is_antisymmetric(q1 in 0.05f64..0.95, q2 in 0.05f64..0.95, len in 5usize..60) {
        let seq = |q: f64| {
            IterationTrace::from_points((1..=len).map(|n| vector(vec![q.powi(n as i32)])).collect())
        };
        let (tu, tv) = (seq(q1), seq(q2));
        let zero = vector(vec![0.0]);
        let forward = rate_compare(&tu, &tv, &zero, &zero).unwrap();
        let backward = rate_compare(&tv, &tu, &zero, &zero).unwrap();
        prop_assert_eq!(forward.classification.reversed(), backward.classification);
        if q1 == q2 {
            prop_assert_eq!(forward.classification, RateClass::SameRate);
        }
    }
}
