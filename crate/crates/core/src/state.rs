//! Shared state types: model selection, the test particle and the canonical
//! phase point with its two clocks. Units have c = 1 throughout.

use std::fmt;
use std::str::FromStr;

use crate::dynamics;
use crate::error::{Error, Result};
use crate::fields::VacuumField;
use crate::vec3::Vec3;
use crate::Scalar;

/// Which equations of motion drive the test particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Classical relativistic particle under the Lorentz force, evolved in lab time.
    M0,
    /// Free vacuum-field particle, H = −(W̄² − p²)^{1/2}.
    M1,
    /// Interacting vacuum-field particle, H = −s − q⟨A,P⟩/s with s = (W̄² − P²)^{1/2}.
    M2,
    /// Dual model, H = −(W̄² − |P − qA|²)^{1/2}.
    M3,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::M0, ModelKind::M1, ModelKind::M2, ModelKind::M3];

    /// Whether the model is advanced in proper time τ (true) or lab time t.
    pub fn evolves_in_proper_time(self) -> bool {
        !matches!(self, ModelKind::M0)
    }

    /// Whether the stored momentum is the common particle–field momentum P.
    pub fn uses_total_momentum(self) -> bool {
        matches!(self, ModelKind::M2 | ModelKind::M3)
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::M0 => "M0",
            ModelKind::M1 => "M1",
            ModelKind::M2 => "M2",
            ModelKind::M3 => "M3",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "M0" => Ok(ModelKind::M0),
            "M1" => Ok(ModelKind::M1),
            "M2" => Ok(ModelKind::M2),
            "M3" => Ok(ModelKind::M3),
            other => Err(Error::InvalidParameter(format!("unknown model '{other}'"))),
        }
    }
}

/// A test particle: its charge and initial lab velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle<T> {
    pub q: T,
    pub u0: Vec3<T>,
}

impl<T: Scalar> Particle<T> {
    pub fn new(q: T, u0: Vec3<T>) -> Result<Self> {
        let speed = u0.norm();
        if !(speed < T::one()) {
            return Err(Error::SuperluminalInit(speed.to_f64_lossy()));
        }
        Ok(Self { q, u0 })
    }
}

/// Canonical state of one test particle plus its proper and lab clocks.
///
/// `mom` is p for M0/M1 and the common momentum P = p + qA for M2/M3.
/// `rest_mass` is fixed at initialization as −W̄(r0)(1 − u0²)^{1/2}; only M0
/// uses it dynamically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint<T> {
    pub r: Vec3<T>,
    pub mom: Vec3<T>,
    pub tau: T,
    pub t: T,
    pub rest_mass: T,
}

/// The particle's charge must equal `field.q_test`, which the flows use for the coupling.
pub fn init_phase<T: Scalar>(
    model: ModelKind,
    particle: &Particle<T>,
    field: &VacuumField<T>,
    r0: Vec3<T>,
) -> Result<PhasePoint<T>> {
    let speed = particle.u0.norm();
    if !(speed < T::one()) {
        return Err(Error::SuperluminalInit(speed.to_f64_lossy()));
    }
    if particle.q != field.q_test {
        return Err(Error::InvalidParameter(format!(
            "particle charge {} differs from the field's test charge {}",
            particle.q, field.q_test
        )));
    }
    let w = field.eval_w(r0, T::zero());
    if !(w < T::zero()) {
        return Err(Error::NonNegativeField(w.to_f64_lossy()));
    }
    let mut mom = particle.u0 * (-w);
    if model.uses_total_momentum() {
        mom += field.eval_a(r0, T::zero())? * particle.q;
    }
    Ok(PhasePoint {
        r: r0,
        mom,
        tau: T::zero(),
        t: T::zero(),
        rest_mass: -w * (T::one() - particle.u0.norm2()).sqrt(),
    })
}

/// dt/dτ for the given state. M0 is evolved in t and returns 1.
pub fn clock_rate<T: Scalar>(
    model: ModelKind,
    phase: &PhasePoint<T>,
    field: &VacuumField<T>,
) -> Result<T> {
    match model {
        ModelKind::M0 => Ok(T::one()),
        ModelKind::M1 | ModelKind::M3 => {
            let (rdot, _) = dynamics::vector_field(model, phase, field)?;
            Ok((T::one() + rdot.norm2()).sqrt())
        }
        ModelKind::M2 => {
            let (rdot, _) = dynamics::vector_field(model, phase, field)?;
            let xidot = dynamics::source_drift(phase, field)?;
            Ok((T::one() + (rdot - xidot).norm2()).sqrt())
        }
    }
}

/// Lab-frame velocity u = dr/dt recovered from a phase point.
pub fn lab_velocity<T: Scalar>(
    model: ModelKind,
    phase: &PhasePoint<T>,
    field: &VacuumField<T>,
) -> Result<Vec3<T>> {
    let (rdot, _) = dynamics::vector_field(model, phase, field)?;
    Ok(rdot / clock_rate(model, phase, field)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::FieldSource;
    use approx::assert_relative_eq;

    fn flat() -> VacuumField<f64> {
        VacuumField::uniform(-1.0, 1.0).unwrap()
    }

    #[test]
    fn rest_particle_has_zero_momentum() {
        let p = Particle::new(1.0, Vec3::zero()).unwrap();
        let ph = init_phase(ModelKind::M1, &p, &flat(), Vec3::new(4.0, 1.0, 2.0)).unwrap();
        assert_eq!(ph.mom, Vec3::zero());
        assert_eq!((ph.tau, ph.t), (0.0, 0.0));
        assert_eq!(ph.rest_mass, 1.0);
    }

    #[test]
    fn momentum_closed_forms() {
        let p = Particle::new(1.0, Vec3::new(0.6, 0.0, 0.0)).unwrap();
        let ph = init_phase(ModelKind::M1, &p, &flat(), Vec3::zero()).unwrap();
        assert_relative_eq!(ph.mom.x, 0.6);
        let field = flat().with_uniform_potential(Vec3::new(0.0, 0.1, 0.0));
        let ph3 = init_phase(ModelKind::M3, &p, &field, Vec3::zero()).unwrap();
        assert_relative_eq!(ph3.mom.x, 0.6);
        assert_relative_eq!(ph3.mom.y, 0.1);
        assert_eq!(ph3.mom.z, 0.0);
    }

    #[test]
    fn init_errors() {
        assert!(matches!(
            Particle::new(1.0, Vec3::new(1.0, 0.0, 0.0)),
            Err(Error::SuperluminalInit(_))
        ));
        let fast = Particle { q: 1.0, u0: Vec3::new(0.8, 0.8, 0.0) };
        assert!(matches!(
            init_phase(ModelKind::M1, &fast, &flat(), Vec3::zero()),
            Err(Error::SuperluminalInit(_))
        ));
        // a strong repulsive source lifts W̄ above zero near its centre
        let field = VacuumField::new(-0.1, 1.0)
            .unwrap()
            .with_source(FieldSource::fixed(10.0, Vec3::zero(), 0.1).unwrap());
        let p = Particle::new(1.0, Vec3::zero()).unwrap();
        assert!(matches!(
            init_phase(ModelKind::M1, &p, &field, Vec3::zero()),
            Err(Error::NonNegativeField(_))
        ));
    }

    #[test]
    fn clock_rate_values() {
        let mut ph = PhasePoint { r: Vec3::zero(), mom: Vec3::zero(), tau: 0.0, t: 0.0, rest_mass: 1.0 };
        assert_eq!(clock_rate(ModelKind::M1, &ph, &flat()).unwrap(), 1.0);
        ph.mom = Vec3::new(0.6, 0.0, 0.0);
        assert_relative_eq!(clock_rate(ModelKind::M1, &ph, &flat()).unwrap(), 1.25, max_relative = 1e-15);
        assert_eq!(clock_rate(ModelKind::M0, &ph, &flat()).unwrap(), 1.0);
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelKind::ALL {
            assert_eq!(m.name().parse::<ModelKind>().unwrap(), m);
        }
        assert!("M9".parse::<ModelKind>().is_err());
    }
}
