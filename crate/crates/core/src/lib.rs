//! Vacuum-field electrodynamics: particle models M0–M3 with their Lagrangian
//! and Hamiltonian forms, time integration, finite-difference verification of
//! the Lorenz-gauge wave equations, and 1-D quantized evolutions.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the `*64`
//! aliases below fix it to `f64`. Units have c = 1.

// `!(x > 0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod dynamics;
pub mod error;
pub mod fields;
pub mod integrate;
pub mod maxwell;
pub mod quantum;
mod scalar;
pub mod state;
pub mod vec3;

pub use dynamics::{
    action, euler_lagrange_residual, force, hamiltonian, invariant_energy, vector_field, ForceKind,
    Lagrangian,
};
pub use error::{Error, Result};
pub use fields::{FieldSource, VacuumField};
pub use integrate::{
    compare_trajectories, simulate, simulate_lab_force, step, IntegratorKind, Sample, TrajectoryRecord,
};
pub use scalar::Scalar;
pub use state::{clock_rate, init_phase, lab_velocity, ModelKind, Particle, PhasePoint};
pub use vec3::{Mat3, Vec3};

pub type Vec3f64 = Vec3<f64>;
pub type VacuumField64 = VacuumField<f64>;
pub type FieldSource64 = FieldSource<f64>;
pub type Particle64 = Particle<f64>;
pub type PhasePoint64 = PhasePoint<f64>;
pub type TrajectoryRecord64 = TrajectoryRecord<f64>;
pub type IntegratorKind64 = IntegratorKind<f64>;
pub type VacuumField32 = VacuumField<f32>;
