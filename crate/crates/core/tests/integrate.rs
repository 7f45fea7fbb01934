mod common;

use common::*;
use proptest::prelude::*;
use vacfield::*;

fn rk45(tol: f64) -> IntegratorKind<f64> {
    IntegratorKind::Rk45 { atol: tol, rtol: tol }
}

fn flyby(model: ModelKind, field: &VacuumField<f64>, tau: f64, integ: &IntegratorKind<f64>, h: f64) -> TrajectoryRecord64 {
    let rec = simulate(model, &flyby_particle(), field, Vec3::from(FLYBY_R0), tau, integ, h).unwrap();
    assert!(rec.completed(), "{:?}", rec.terminated);
    rec
}

fn distance(a: &PhasePoint<f64>, b: &PhasePoint<f64>) -> f64 {
    (a.r - b.r).max_abs().max((a.mom - b.mom).max_abs()).max((a.t - b.t).abs())
}

#[test]
fn rk4_local_error_is_fifth_order() {
    let f = flyby_field();
    let start = init_phase(ModelKind::M1, &flyby_particle(), &f, Vec3::new(-0.4, 0.3, 0.0)).unwrap();
    let err = |h: f64| {
        let one = step(&IntegratorKind::Rk4, ModelKind::M1, &start, &f, h).unwrap();
        let mut fine = start;
        for _ in 0..400 {
            fine = step(&IntegratorKind::Rk4, ModelKind::M1, &fine, &f, h / 400.0).unwrap();
        }
        distance(&one, &fine)
    };
    let ratio = err(0.2) / err(0.1);
    assert!((26.0..38.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn m3_without_potential_is_m1() {
    let f = flyby_field().with_uniform_magnetic(Vec3::zero());
    let integ = IntegratorKind::implicit_midpoint();
    let a = flyby(ModelKind::M1, &f, 5.0, &integ, 1e-2);
    let b = flyby(ModelKind::M3, &f, 5.0, &integ, 1e-2);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.samples.iter().zip(&b.samples) {
        assert!((x.r - y.r).max_abs() < 1e-12 && (x.t - y.t).abs() < 1e-12);
    }
}

#[test]
fn integrators_agree() {
    let f = flyby_field();
    let a = flyby(ModelKind::M3, &f, 3.0, &rk45(1e-10), 1e-2);
    let b = flyby(ModelKind::M3, &f, 3.0, &IntegratorKind::implicit_midpoint(), 1e-4);
    let c = flyby(ModelKind::M3, &f, 3.0, &IntegratorKind::Rk4, 1e-3);
    let end = |r: &TrajectoryRecord64| *r.samples.last().unwrap();
    assert!((end(&a).r - end(&b).r).max_abs() < 1e-7);
    assert!((end(&a).r - end(&c).r).max_abs() < 1e-9);
    let (dpos, de) = compare_trajectories(&a, &b).unwrap();
    assert!(dpos < 1e-7 && de < 1e-9, "{dpos} {de}");
}

#[test]
fn clock_defect_is_small() {
    let f = flyby_field();
    // the midpoint rule keeps Δt² = Δτ² + |Δr|² to rounding
    let mid = flyby(ModelKind::M1, &f, FLYBY_TAU, &IntegratorKind::implicit_midpoint(), 0.02).max_clock_defect();
    assert!(mid < 1e-14, "{mid}");
    for h in [0.05, 0.02] {
        let d = flyby(ModelKind::M1, &f, FLYBY_TAU, &IntegratorKind::Rk4, h).max_clock_defect();
        assert!(d < h * h * h, "h = {h}: {d}");
    }
}

#[test]
fn initial_velocity_is_recovered() {
    let u0 = Vec3::new(0.2, -0.35, 0.1);
    let p = Particle::new(0.8, u0).unwrap();
    let r0 = Vec3::new(0.3, 0.1, -0.4);
    let busy = busy_field();
    let no_a = flyby_field().with_uniform_magnetic(Vec3::zero());
    for (model, f) in [
        (ModelKind::M0, &busy),
        (ModelKind::M1, &busy),
        (ModelKind::M3, &busy),
        (ModelKind::M2, &no_a),
    ] {
        let p = Particle { q: f.q_test, ..p };
        let ph = init_phase(model, &p, f, r0).unwrap();
        assert!((lab_velocity(model, &ph, f).unwrap() - u0).max_abs() < 1e-12, "{model}");
    }
}

#[test]
fn m2_departs_from_m3_in_a_nonuniform_potential() {
    let f = busy_field();
    let p = Particle::new(0.8, Vec3::new(0.2, 0.1, 0.0)).unwrap();
    let integ = IntegratorKind::implicit_midpoint();
    let r0 = Vec3::new(-1.0, 0.0, 0.3);
    let m2 = simulate(ModelKind::M2, &p, &f, r0, 4.0, &integ, 1e-2).unwrap();
    let m3 = simulate(ModelKind::M3, &p, &f, r0, 4.0, &integ, 1e-2).unwrap();
    let (dpos, _) = compare_trajectories(&m2, &m3).unwrap();
    assert!(dpos > 1e-6 && dpos < 1.0, "{dpos}");
}

#[test]
fn clocks_run_forward() {
    let f = busy_field();
    let p = Particle::new(0.8, Vec3::new(0.5, -0.2, 0.1)).unwrap();
    for model in ModelKind::ALL {
        let rec = simulate(model, &p, &f, Vec3::new(-1.0, 0.2, 0.0), 3.0, &IntegratorKind::implicit_midpoint(), 1e-2).unwrap();
        assert!(rec.completed());
        for w in rec.samples.windows(2) {
            assert!(w[1].t > w[0].t && w[1].tau > w[0].tau, "{model}");
            assert!(w[1].t - w[0].t >= w[1].tau - w[0].tau - 1e-15, "{model}");
        }
    }
}

#[test]
fn initialization_errors() {
    let f = VacuumField::new(-1.0, 1.0).unwrap().with_source(FieldSource::fixed(20.0, Vec3::zero(), 0.05).unwrap());
    let p = Particle::new(1.0, Vec3::new(0.5, 0.0, 0.0)).unwrap();
    let integ = IntegratorKind::Rk4;
    assert!(matches!(
        simulate(ModelKind::M1, &p, &f, Vec3::new(0.5, 0.0, 0.0), 1.0, &integ, 1e-2),
        Err(Error::NonNegativeField(_))
    ));
    assert!(matches!(
        simulate(ModelKind::M1, &p, &f, Vec3::new(-3.0, 0.0, 0.0), -1.0, &integ, 1e-2),
        Err(Error::InvalidParameter(_))
    ));
    let other = Particle::new(0.5, Vec3::zero()).unwrap();
    assert!(matches!(
        simulate(ModelKind::M1, &other, &f, Vec3::new(-3.0, 0.0, 0.0), 1.0, &integ, 1e-2),
        Err(Error::InvalidParameter(_))
    ));
    // the conserved energy keeps W̄ away from zero: a head-on approach turns around
    let rec = simulate(ModelKind::M1, &p, &f, Vec3::new(-3.0, 0.0, 0.0), 20.0, &IntegratorKind::implicit_midpoint(), 1e-2).unwrap();
    assert!(rec.completed());
    assert!(rec.samples.iter().all(|s| s.w < 0.0));
    assert!(rec.samples.last().unwrap().u_lab.x < 0.0);
}

fn random_state() -> impl Strategy<Value = (Vec3<f64>, Vec3<f64>, f64)> {
    (
        prop::array::uniform3(-1.5..1.5f64),
        prop::array::uniform3(-0.3..0.3f64),
        -1.0..1.0f64,
    )
        .prop_map(|(r, u, t)| (Vec3::from(r), Vec3::from(u), t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn midpoint_is_reversible((r, u, t) in random_state(), h in 0.01..0.1f64) {
        let f = busy_field();
        let integ = IntegratorKind::implicit_midpoint();
        for model in [ModelKind::M1, ModelKind::M2, ModelKind::M3] {
            let mut ph = init_phase(model, &Particle::new(f.q_test, u).unwrap(), &f, r).unwrap();
            ph.t = t;
            let there = step(&integ, model, &ph, &f, h).unwrap();
            let back = step(&integ, model, &there, &f, -h).unwrap();
            prop_assert!(distance(&back, &ph) <= 1e-10, "{model}");
        }
    }

    #[test]
    fn clock_rate_is_at_least_one((r, u, t) in random_state()) {
        let f = busy_field();
        for model in ModelKind::ALL {
            let mut ph = init_phase(model, &Particle::new(f.q_test, u).unwrap(), &f, r).unwrap();
            ph.t = t;
            prop_assert!(clock_rate(model, &ph, &f).unwrap() >= 1.0);
        }
    }
}
