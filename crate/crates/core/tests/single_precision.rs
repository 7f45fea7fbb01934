use vacfield::quantum::*;
use vacfield::*;

#[test]
fn flyby_runs_in_f32() {
    let field: VacuumField32 = VacuumField::new(-1.0f32, 1.0)
        .unwrap()
        .with_source(FieldSource::fixed(1.0, Vec3::zero(), 0.1).unwrap())
        .with_uniform_magnetic(Vec3::new(0.0, 0.0, 0.05));
    let p = Particle::new(1.0f32, Vec3::new(0.3, 0.0, 0.0)).unwrap();
    for model in ModelKind::ALL {
        let rec = simulate(model, &p, &field, Vec3::new(-1.5, 0.3, 0.0), 5.0, &IntegratorKind::implicit_midpoint(), 1e-2).unwrap();
        assert!(rec.completed(), "{model}: {:?}", rec.terminated);
        assert!(rec.max_relative_energy_drift() < 1e-4, "{model}");
    }
}

#[test]
fn quantum_norm_in_f32() {
    let n = 100;
    let model = QuantumModel { kind: QuantumModelKind::Modified, profiles: Profiles::uniform(n, -1.0f32, 0.2, 0.5) };
    let op = build_hamiltonian(&model, n, 0.1, 0.2, Domain::Periodic).unwrap();
    let mut s = WaveState::gaussian(n, -5.0, 0.1, 0.2, Domain::Periodic, 0.0, 0.8, 2.0).unwrap();
    let n0 = s.norm2();
    for _ in 0..100 {
        s = cn_step(&op, &s, 0.01).unwrap();
    }
    assert!((s.norm2() - n0).abs() < 1e-4 * n0);
}
