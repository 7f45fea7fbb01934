use vacfield::maxwell::*;
use vacfield::{Error, FieldSource, VacuumField, Vec3};

fn run(n: usize, h: f64, steps: usize, problem: &WaveProblem<f64>) -> GridField<f64> {
    let g = GridField::centered([n, n, n], h, 0.5 * h, problem.clone()).unwrap();
    evolve_wave(g, steps).unwrap()
}

/// h³-weighted L2 distance between the newest level and the exact potentials.
fn plane_wave_error(g: &GridField<f64>) -> f64 {
    let level = g.newest_level();
    let t = g.time_of(level);
    let phi = g.phi(level).unwrap();
    let comps: Vec<&[f64]> = (0..3).map(|c| g.a(level, c).unwrap()).collect();
    let mut acc = 0.0;
    for i in 0..g.n[0] {
        for j in 0..g.n[1] {
            for k in 0..g.n[2] {
                let idx = g.index(i, j, k);
                let (p, a) = g.problem.potentials(g.point(i, j, k), t);
                acc += (phi[idx] - p).powi(2);
                for (c, comp) in comps.iter().enumerate() {
                    acc += (comp[idx] - a.component(c)).powi(2);
                }
            }
        }
    }
    (acc * g.h.powi(3)).sqrt()
}

#[test]
fn plane_wave_tracks_the_exact_solution_at_second_order() {
    let problem = WaveProblem::plane_wave(Vec3::new(0.0, 0.2, -0.1), Vec3::new(1.0, 0.5, 1.0), 0.1).unwrap();
    let coarse = plane_wave_error(&run(24, 0.2, 20, &problem));
    let fine = plane_wave_error(&run(48, 0.1, 40, &problem));
    let ratio = coarse / fine;
    assert!(fine < 1e-2, "{fine}");
    assert!((3.5..4.5).contains(&ratio), "{coarse} {fine}");
}

#[test]
fn dipole_keeps_the_lorenz_gauge_at_second_order() {
    let problem = WaveProblem::dipole(1.0, 2.0, 0.4).unwrap();
    let c = maxwell_residuals(&run(24, 0.2, 15, &problem), 15).unwrap();
    let f = maxwell_residuals(&run(48, 0.1, 30, &problem), 30).unwrap();
    for ratio in [c.gauge / f.gauge, c.continuity / f.continuity] {
        assert!((3.3..4.7).contains(&ratio), "{c:?} {f:?}");
    }
}

#[test]
fn plane_wave_residuals_are_small() {
    let problem = WaveProblem::plane_wave(Vec3::new(0.0, 0.2, -0.1), Vec3::new(1.0, 0.5, 1.0), 0.0).unwrap();
    let g = run(24, 0.2, 10, &problem);
    let r = maxwell_residuals(&g, 10).unwrap();
    // discrete residuals are far below the field scale
    let scale = 0.2 * Vec3::new(1.0, 0.5, 1.0).norm();
    assert!(r.maxwell().iter().all(|v| *v < 0.05 * scale), "{r:?}");
}

#[test]
fn constructor_errors() {
    assert!(matches!(
        WaveProblem::plane_wave(Vec3::new(1.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), 0.0),
        Err(Error::InvalidParameter(_))
    ));
    assert!(GridField::<f64>::centered([3, 9, 9], 0.1, 0.05, WaveProblem::Vacuum).is_err());
}

#[test]
fn static_potential_gives_a_constant_series() {
    let field = VacuumField::new(-1.0, 1.0).unwrap().with_source(FieldSource::fixed(1.0, Vec3::new(0.1, 0.0, 0.0), 0.3).unwrap());
    let n = [40, 40, 40];
    let origin = Vec3::new(-2.0, -2.0, -2.0);
    let samples: Vec<_> = (0..4)
        .map(|i| {
            let t = 0.5 * i as f64;
            (t, ScalarGrid::sample_phi(&field, t, n, 0.1, origin).unwrap())
        })
        .collect();
    let ball = Ball { center0: Vec3::new(0.2, -0.1, 0.0), radius: 0.7 };
    let series = advected_integral(&samples, Vec3::zero(), ball).unwrap();
    for v in &series {
        assert!((v - series[0]).abs() <= 1e-14 * series[0].abs());
    }
    let moving = advected_integral(&samples, Vec3::new(0.4, 0.0, 0.0), ball).unwrap();
    assert!((moving[3] - moving[0]).abs() > 1e-3 * moving[0].abs());
}

#[test]
fn ball_integral_of_simple_fields() {
    let n = [30, 30, 30];
    let origin = Vec3::new(-1.5, -1.5, -1.5);
    let one = ScalarGrid::from_fn(n, 0.1, origin, |_| 1.0);
    let linear = ScalarGrid::from_fn(n, 0.1, origin, |r: Vec3<f64>| 2.0 + r.x - 3.0 * r.z);
    let ball = Ball { center0: Vec3::new(0.1, 0.2, -0.3), radius: 0.8 };
    let vol = 4.0 / 3.0 * std::f64::consts::PI * 0.8f64.powi(3);
    let s = advected_integral(&[(0.0, one), (0.0, linear)], Vec3::zero(), ball).unwrap();
    assert!((s[0] - vol).abs() < 1e-12);
    assert!((s[1] - vol * (2.0 + 0.1 + 0.9)).abs() < 1e-11);

    let small = ScalarGrid::from_fn([10, 10, 10], 0.1, origin, |_| 1.0);
    assert!(matches!(advected_integral(&[(0.0, small)], Vec3::zero(), ball), Err(Error::BallExitsGrid(0))));
}
