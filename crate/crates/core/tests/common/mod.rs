#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vacfield::{FieldSource, Particle, VacuumField, Vec3};

pub const FLYBY_R0: [f64; 3] = [-1.5, 0.3, 0.0];
pub const FLYBY_U0: [f64; 3] = [0.3, 0.0, 0.0];
pub const FLYBY_TAU: f64 = 10.0;

/// Repulsive softened source at the origin plus a weak uniform B along z.
pub fn flyby_field() -> VacuumField<f64> {
    VacuumField::new(-1.0, 1.0)
        .unwrap()
        .with_source(FieldSource::fixed(1.0, Vec3::zero(), 0.1).unwrap())
        .with_uniform_magnetic(Vec3::new(0.0, 0.0, 0.05))
}

pub fn flyby_particle() -> Particle<f64> {
    Particle::new(1.0, Vec3::from(FLYBY_U0)).unwrap()
}

/// Two moving sources and a background B: A is nonuniform and time dependent.
pub fn busy_field() -> VacuumField<f64> {
    VacuumField::new(-1.0, 0.8)
        .unwrap()
        .with_source(FieldSource::new(0.7, Vec3::new(0.5, -0.3, 0.2), Vec3::new(0.4, 0.1, -0.2), 0.2).unwrap())
        .with_source(FieldSource::new(-0.4, Vec3::new(-0.6, 0.4, -0.1), Vec3::new(-0.1, 0.3, 0.2), 0.3).unwrap())
        .with_uniform_magnetic(Vec3::new(0.1, -0.2, 0.3))
        .with_uniform_potential(Vec3::new(0.05, 0.0, -0.02))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3<f64> {
    Vec3::new(
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
        rng.gen_range(-scale..scale),
    )
}

/// A random vector with |v| < max.
pub fn rand_ball(rng: &mut ChaCha8Rng, max: f64) -> Vec3<f64> {
    loop {
        let v = rand_vec(rng, max);
        if v.norm() < max {
            return v;
        }
    }
}

/// Independent q∇⟨A,u⟩ for fields built from sources and a uniform background.
pub fn grad_a_dot_oracle(field: &VacuumField<f64>, r: Vec3<f64>, t: f64, u: Vec3<f64>) -> Vec3<f64> {
    let mut g = Vec3::zero();
    for s in &field.sources {
        let d = r - (s.r0 + s.uf * t);
        let dist = (d.norm2() + s.eps * s.eps).sqrt();
        // ∇ of qs/(4π dist)
        let grad_phi = d * (-s.qs / (4.0 * std::f64::consts::PI * dist.powi(3)));
        g += grad_phi * s.uf.dot(u);
    }
    // ⟨½ B×r, u⟩ = ½⟨r, u×B⟩
    g += u.cross(field.background.b0) * 0.5;
    g * field.q_test
}

/// Central-difference derivative of `f` along each axis.
pub fn fd_grad(f: impl Fn(Vec3<f64>) -> f64, x: Vec3<f64>, h: f64) -> Vec3<f64> {
    let mut g = [0.0; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let e = Vec3::<f64>::axis(i) * h;
        *gi = (f(x + e) - f(x - e)) / (2.0 * h);
    }
    Vec3::from(g)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
