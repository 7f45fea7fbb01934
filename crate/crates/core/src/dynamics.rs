//! Lagrangians, Hamiltonians, canonical vector fields and force laws of the
//! four particle models, plus the variational diagnostics evaluated on
//! recorded trajectories.
//!
//! All vacuum-field models are parametrized by proper time τ and use
//! ṙ = dr/dτ; M0 is parametrized by lab time t and uses u = dr/dt.

use crate::error::{Error, Result};
use crate::fields::VacuumField;
use crate::integrate::TrajectoryRecord;
use crate::state::{ModelKind, PhasePoint};
use crate::vec3::{Mat3, Vec3};
use crate::Scalar;

/// Which Lorentz-type force law to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ForceKind {
    /// qE + q u×B
    ClassicalLorentz,
    /// qE + q u×B − q∇⟨A,u⟩
    ModifiedLorentz,
}

impl ForceKind {
    pub fn name(self) -> &'static str {
        match self {
            ForceKind::ClassicalLorentz => "classical",
            ForceKind::ModifiedLorentz => "modified",
        }
    }
}

#[inline]
pub(crate) fn guarded_sqrt<T: Scalar>(x: T) -> Result<T> {
    if x > T::guard() {
        Ok(x.sqrt())
    } else {
        Err(Error::SubluminalViolation(x.to_f64_lossy()))
    }
}

/// Field quantities at one space-time point.
struct Local<T> {
    w: T,
    grad_w: Vec3<T>,
    a: Vec3<T>,
    jac: Mat3<T>,
}

impl<T: Scalar> Local<T> {
    fn at(field: &VacuumField<T>, r: Vec3<T>, t: T, with_a: bool) -> Result<Self> {
        let (w, grad_w) = field.w_and_grad(r, t);
        let (a, jac) = if with_a && !field.has_no_vector_potential() {
            (field.eval_a(r, t)?, field.jacobian_a(r, t)?)
        } else {
            (Vec3::zero(), Mat3::zero())
        };
        Ok(Self { w, grad_w, a, jac })
    }
}

/// A model Lagrangian bound to a field. M0 additionally needs the rest mass.
#[derive(Debug, Clone, Copy)]
pub struct Lagrangian<'a, T> {
    pub model: ModelKind,
    pub field: &'a VacuumField<T>,
    pub rest_mass: T,
}

impl<'a, T: Scalar> Lagrangian<'a, T> {
    pub fn new(model: ModelKind, field: &'a VacuumField<T>) -> Self {
        Self { model, field, rest_mass: T::one() }
    }

    pub fn with_rest_mass(mut self, rest_mass: T) -> Self {
        self.rest_mass = rest_mass;
        self
    }

    fn check_velocity(&self, rdot: Vec3<T>) -> Result<()> {
        if self.model == ModelKind::M0 {
            let speed = rdot.norm();
            if !(speed < T::one()) {
                return Err(Error::SuperluminalInit(speed.to_f64_lossy()));
            }
        }
        Ok(())
    }

    /// M2's source drift ξ̇ closed self-consistently with qA = W̄ ξ̇ (1 + |ṙ − ξ̇|²)^{−1/2}.
    /// Zero for the other models.
    pub fn drift(&self, r: Vec3<T>, rdot: Vec3<T>, time: T) -> Result<Vec3<T>> {
        if self.model != ModelKind::M2 {
            return Ok(Vec3::zero());
        }
        let loc = Local::at(self.field, r, time, true)?;
        Ok(self.drift_local(&loc, rdot)?.0)
    }

    /// Returns (ξ̇, g) with g = (1 + |ṙ − ξ̇|²)^{1/2}.
    fn drift_local(&self, loc: &Local<T>, rdot: Vec3<T>) -> Result<(Vec3<T>, T)> {
        let a = loc.a * (self.field.q_test / loc.w);
        let c = T::one() - a.norm2();
        if !(c > T::guard()) {
            return Err(Error::SubluminalViolation(c.to_f64_lossy()));
        }
        // (1 − a²) g² + 2⟨ṙ,a⟩ g − (1 + ṙ²) = 0, positive root
        let b = rdot.dot(a);
        let k = T::one() + rdot.norm2();
        let disc = (b * b + c * k).sqrt();
        let g = if b >= T::zero() { k / (b + disc) } else { (disc - b) / c };
        Ok((a * g, g))
    }

    pub fn value(&self, r: Vec3<T>, rdot: Vec3<T>, time: T) -> Result<T> {
        self.check_velocity(rdot)?;
        let loc = Local::at(self.field, r, time, self.model != ModelKind::M1)?;
        let q = self.field.q_test;
        Ok(match self.model {
            ModelKind::M0 => {
                -self.rest_mass * (T::one() - rdot.norm2()).sqrt() + q * loc.a.dot(rdot)
                    - (loc.w - self.field.w_inf)
            }
            ModelKind::M1 => -loc.w * (T::one() + rdot.norm2()).sqrt(),
            ModelKind::M2 => -loc.w * self.drift_local(&loc, rdot)?.1,
            ModelKind::M3 => -loc.w * (T::one() + rdot.norm2()).sqrt() + q * loc.a.dot(rdot),
        })
    }

    /// M2 Lagrangian −W̄(1 + |ṙ − ξ̇|²)^{1/2} with an explicitly given drift.
    pub fn value_with_drift(&self, r: Vec3<T>, rdot: Vec3<T>, xidot: Vec3<T>, time: T) -> Result<T> {
        let w = self.field.eval_w(r, time);
        Ok(-w * (T::one() + (rdot - xidot).norm2()).sqrt())
    }

    /// ∂L/∂ṙ in closed form; M2 holds ξ̇ fixed at its self-consistent value.
    pub fn legendre_momentum(&self, r: Vec3<T>, rdot: Vec3<T>, time: T) -> Result<Vec3<T>> {
        self.check_velocity(rdot)?;
        let loc = Local::at(self.field, r, time, self.model != ModelKind::M1)?;
        let q = self.field.q_test;
        Ok(match self.model {
            ModelKind::M0 => {
                rdot * (self.rest_mass / (T::one() - rdot.norm2()).sqrt()) + loc.a * q
            }
            ModelKind::M1 => rdot * (-loc.w / (T::one() + rdot.norm2()).sqrt()),
            ModelKind::M2 => {
                let (xidot, g) = self.drift_local(&loc, rdot)?;
                (rdot - xidot) * (-loc.w / g)
            }
            ModelKind::M3 => rdot * (-loc.w / (T::one() + rdot.norm2()).sqrt()) + loc.a * q,
        })
    }

    /// ∂L/∂r; M2 holds ξ̇ fixed, M0/M3 hold the velocity fixed inside ⟨A, ·⟩.
    pub fn position_gradient(&self, r: Vec3<T>, rdot: Vec3<T>, time: T) -> Result<Vec3<T>> {
        self.check_velocity(rdot)?;
        let loc = Local::at(self.field, r, time, self.model != ModelKind::M1)?;
        let q = self.field.q_test;
        Ok(match self.model {
            ModelKind::M0 => loc.jac.tr_mul_vec(rdot) * q - loc.grad_w,
            ModelKind::M1 => loc.grad_w * -(T::one() + rdot.norm2()).sqrt(),
            ModelKind::M2 => loc.grad_w * -self.drift_local(&loc, rdot)?.1,
            ModelKind::M3 => {
                loc.grad_w * -(T::one() + rdot.norm2()).sqrt() + loc.jac.tr_mul_vec(rdot) * q
            }
        })
    }
}

/// Model Hamiltonian. M0 returns the lab energy (m0² + p²)^{1/2} + qφ.
pub fn hamiltonian<T: Scalar>(
    model: ModelKind,
    phase: &PhasePoint<T>,
    field: &VacuumField<T>,
) -> Result<T> {
    let loc = Local::at(field, phase.r, phase.t, model.uses_total_momentum())?;
    let q = field.q_test;
    let w2 = loc.w * loc.w;
    match model {
        ModelKind::M0 => Ok((phase.rest_mass * phase.rest_mass + phase.mom.norm2()).sqrt()
            + (loc.w - field.w_inf)),
        ModelKind::M1 => Ok(-guarded_sqrt(w2 - phase.mom.norm2())?),
        ModelKind::M2 => {
            let s = guarded_sqrt(w2 - phase.mom.norm2())?;
            Ok(-s - q * loc.a.dot(phase.mom) / s)
        }
        ModelKind::M3 => {
            let p = phase.mom - loc.a * q;
            Ok(-guarded_sqrt(w2 - p.norm2())?)
        }
    }
}

/// The conserved energy each model's flow carries.
pub fn invariant_energy<T: Scalar>(
    model: ModelKind,
    phase: &PhasePoint<T>,
    field: &VacuumField<T>,
) -> Result<T> {
    let h = hamiltonian(model, phase, field)?;
    Ok(match model {
        ModelKind::M0 => h,
        _ => -h,
    })
}

/// Right-hand side (dr/dτ, dmom/dτ); for M0 (dr/dt, dp/dt).
pub fn vector_field<T: Scalar>(
    model: ModelKind,
    phase: &PhasePoint<T>,
    field: &VacuumField<T>,
) -> Result<(Vec3<T>, Vec3<T>)> {
    if model == ModelKind::M0 {
        return lab_force_field(ForceKind::ClassicalLorentz, phase, field);
    }
    let loc = Local::at(field, phase.r, phase.t, model.uses_total_momentum())?;
    let q = field.q_test;
    let w2 = loc.w * loc.w;
    let w_grad_w = loc.grad_w * loc.w;
    match model {
        ModelKind::M1 => {
            let s = guarded_sqrt(w2 - phase.mom.norm2())?;
            Ok((phase.mom / s, w_grad_w / s))
        }
        ModelKind::M2 => {
            let big_p = phase.mom;
            let s = guarded_sqrt(w2 - big_p.norm2())?;
            let s3 = s * s * s;
            let coupling = q * loc.a.dot(big_p);
            let rdot = big_p / s - loc.a * (q / s) - big_p * (coupling / s3);
            let pdot = w_grad_w / s + loc.jac.tr_mul_vec(big_p) * (q / s) - w_grad_w * (coupling / s3);
            Ok((rdot, pdot))
        }
        ModelKind::M3 => {
            let p = phase.mom - loc.a * q;
            let s = guarded_sqrt(w2 - p.norm2())?;
            Ok((p / s, (w_grad_w + loc.jac.tr_mul_vec(p) * q) / s))
        }
        ModelKind::M0 => unreachable!(),
    }
}

/// M2's drift ξ̇ = −qA (W̄² − P²)^{−1/2}.
pub fn source_drift<T: Scalar>(phase: &PhasePoint<T>, field: &VacuumField<T>) -> Result<Vec3<T>> {
    let w = field.eval_w(phase.r, phase.t);
    let s = guarded_sqrt(w * w - phase.mom.norm2())?;
    Ok(field.eval_a(phase.r, phase.t)? * (-field.q_test / s))
}

/// Lab-time right-hand side (u, dp/dt) of a relativistic particle of rest
/// mass `phase.rest_mass` and kinetic momentum `phase.mom` under `kind`.
pub fn lab_force_field<T: Scalar>(
    kind: ForceKind,
    phase: &PhasePoint<T>,
    field: &VacuumField<T>,
) -> Result<(Vec3<T>, Vec3<T>)> {
    let m0 = phase.rest_mass;
    let u = phase.mom / (m0 * m0 + phase.mom.norm2()).sqrt();
    let f = force(kind, field, phase.r, u, field.q_test, phase.t)?;
    Ok((u, f))
}

/// Lorentz-type force on charge `q` moving with lab velocity `u`.
///
/// The classical law is assembled from E and B; the modified law is assembled
/// independently as −∇W̄ q/q_test − q dA/dt with dA/dt = ∂A/∂t + (u·∇)A.
pub fn force<T: Scalar>(
    kind: ForceKind,
    field: &VacuumField<T>,
    r: Vec3<T>,
    u: Vec3<T>,
    q: T,
    t: T,
) -> Result<Vec3<T>> {
    let speed = u.norm();
    if !(speed < T::one()) {
        return Err(Error::SuperluminalInit(speed.to_f64_lossy()));
    }
    match kind {
        ForceKind::ClassicalLorentz => {
            let (e, b) = field.eval_eb(r, t)?;
            Ok((e + u.cross(b)) * q)
        }
        ForceKind::ModifiedLorentz => {
            let total_da = field.dadt(r, t)? + field.convective_a(r, t, u)?;
            Ok((field.grad_w(r, t) / field.q_test + total_da) * -q)
        }
    }
}

fn sample_phase<T: Scalar>(traj: &TrajectoryRecord<T>, i: usize) -> PhasePoint<T> {
    let s = &traj.samples[i];
    PhasePoint { r: s.r, mom: s.mom, tau: s.tau, t: s.t, rest_mass: traj.meta.rest_mass }
}

fn evolution_param<T: Scalar>(model: ModelKind, traj: &TrajectoryRecord<T>, i: usize) -> T {
    if model.evolves_in_proper_time() {
        traj.samples[i].tau
    } else {
        traj.samples[i].t
    }
}

/// Largest discrete Euler–Lagrange defect |d/dτ(∂L/∂ṙ) − ∂L/∂r| (max norm)
/// over interior samples, with velocities taken from each sample's state.
pub fn euler_lagrange_residual<T: Scalar>(
    model: ModelKind,
    traj: &TrajectoryRecord<T>,
    field: &VacuumField<T>,
) -> Result<T> {
    let n = traj.samples.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let lag = Lagrangian::new(model, field).with_rest_mass(traj.meta.rest_mass);
    let mut momenta = Vec::with_capacity(n);
    let mut velocities = Vec::with_capacity(n);
    for i in 0..n {
        let ph = sample_phase(traj, i);
        let (rdot, _) = vector_field(model, &ph, field)?;
        let time = ph.t;
        momenta.push(lag.legendre_momentum(ph.r, rdot, time)?);
        velocities.push(rdot);
    }
    let mut worst = T::zero();
    for i in 1..n - 1 {
        let span = evolution_param(model, traj, i + 1) - evolution_param(model, traj, i - 1);
        let dp = (momenta[i + 1] - momenta[i - 1]) / span;
        let s = &traj.samples[i];
        let grad = lag.position_gradient(s.r, velocities[i], s.t)?;
        worst = worst.max((dp - grad).max_abs());
    }
    Ok(worst)
}

/// Second-order finite-difference velocities of positions over the evolution parameter.
fn position_velocities<T: Scalar>(params: &[T], pos: &[Vec3<T>]) -> Vec<Vec3<T>> {
    let n = pos.len();
    let three_point = |i0: usize, at: usize| -> Vec3<T> {
        // derivative at params[at] of the quadratic through i0, i0+1, i0+2
        let (x0, x1, x2) = (params[i0], params[i0 + 1], params[i0 + 2]);
        let x = params[at];
        let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        pos[i0] * l0 + pos[i0 + 1] * l1 + pos[i0 + 2] * l2
    };
    (0..n)
        .map(|i| match i {
            0 => three_point(0, 0),
            i if i == n - 1 => three_point(n - 3, n - 1),
            i => three_point(i - 1, i),
        })
        .collect()
}

/// Trapezoidal action ∫ L dτ (dt for M0) along the recorded positions, with
/// velocities from second-order finite differences of the positions.
pub fn action<T: Scalar>(
    model: ModelKind,
    traj: &TrajectoryRecord<T>,
    field: &VacuumField<T>,
) -> Result<T> {
    let n = traj.samples.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let params: Vec<T> = (0..n).map(|i| evolution_param(model, traj, i)).collect();
    let pos: Vec<Vec3<T>> = traj.samples.iter().map(|s| s.r).collect();
    let vel = position_velocities(&params, &pos);
    let lag = Lagrangian::new(model, field).with_rest_mass(traj.meta.rest_mass);
    let mut values = Vec::with_capacity(n);
    for (s, v) in traj.samples.iter().zip(&vel) {
        values.push(lag.value(s.r, *v, s.t)?);
    }
    let half = T::lit(0.5);
    Ok((1..n).map(|i| (params[i] - params[i - 1]) * (values[i] + values[i - 1]) * half).sum())
}
