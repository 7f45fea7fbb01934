//! The vacuum potential field W̄, the vector potential it induces through
//! moving sources, and the assembled electric and magnetic fields.
//!
//! W̄(r, t) = w_inf + q_test Σᵢ qsᵢ / (4π sᵢ),   sᵢ = (|r − Rᵢ(t)|² + εᵢ²)^{1/2}
//!
//! Every source moves rigidly, Rᵢ(t) = R0ᵢ + ufᵢ t, and contributes
//! W̄ᵢ ufᵢ / q_test to the vector potential. An optional static background
//! A_bg(r) = a0 + ½ B0 × r supplies uniform potentials and uniform magnetic
//! fields that no softened point source can produce.

use crate::error::{Error, Result};
use crate::vec3::{Mat3, Vec3};
use crate::Scalar;

/// A softened point source in uniform straight-line motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSource<T> {
    pub qs: T,
    pub r0: Vec3<T>,
    pub uf: Vec3<T>,
    pub eps: T,
}

impl<T: Scalar> FieldSource<T> {
    /// Default softening length.
    pub fn default_eps() -> T {
        T::lit(0.01)
    }

    pub fn new(qs: T, r0: Vec3<T>, uf: Vec3<T>, eps: T) -> Result<Self> {
        if !(eps > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "softening length must be positive, got {eps}"
            )));
        }
        let speed = uf.norm();
        if !(speed < T::one()) {
            return Err(Error::SuperluminalInit(speed.to_f64_lossy()));
        }
        Ok(Self { qs, r0, uf, eps })
    }

    /// A source at rest.
    pub fn fixed(qs: T, r0: Vec3<T>, eps: T) -> Result<Self> {
        Self::new(qs, r0, Vec3::zero(), eps)
    }

    #[inline]
    pub fn position(&self, t: T) -> Vec3<T> {
        self.r0 + self.uf * t
    }

    /// Softened potential φᵢ = qs / (4π s) and its gradient.
    #[inline]
    fn potential_and_grad(&self, r: Vec3<T>, t: T) -> (T, Vec3<T>) {
        let d = r - self.position(t);
        let s2 = d.norm2() + self.eps * self.eps;
        let s = s2.sqrt();
        let four_pi = T::lit(4.0) * T::PI();
        let phi = self.qs / (four_pi * s);
        let grad = d * (-self.qs / (four_pi * s2 * s));
        (phi, grad)
    }

    fn is_moving(&self) -> bool {
        self.uf != Vec3::zero()
    }
}

/// Static background vector potential `a0 + ½ b0 × r`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Background<T> {
    pub a0: Vec3<T>,
    pub b0: Vec3<T>,
}

impl<T: Scalar> Background<T> {
    fn potential(&self, r: Vec3<T>) -> Vec3<T> {
        self.a0 + self.b0.cross(r) * T::lit(0.5)
    }

    /// `J[k][j] = ∂A_k/∂r_j` of `½ b0 × r`.
    fn jacobian(&self) -> Mat3<T> {
        let h = T::lit(0.5);
        let b = self.b0;
        let mut j = Mat3::zero();
        j.m[0][1] = -b.z * h;
        j.m[0][2] = b.y * h;
        j.m[1][0] = b.z * h;
        j.m[1][2] = -b.x * h;
        j.m[2][0] = -b.y * h;
        j.m[2][1] = b.x * h;
        j
    }

    fn is_zero(&self) -> bool {
        self.a0 == Vec3::zero() && self.b0 == Vec3::zero()
    }
}

/// The vacuum potential field seen by a test particle of charge `q_test`.
#[derive(Debug, Clone, PartialEq)]
pub struct VacuumField<T> {
    pub w_inf: T,
    pub sources: Vec<FieldSource<T>>,
    pub q_test: T,
    pub background: Background<T>,
}

impl<T: Scalar> VacuumField<T> {
    pub fn new(w_inf: T, q_test: T) -> Result<Self> {
        if !(w_inf < T::zero()) {
            return Err(Error::NonNegativeField(w_inf.to_f64_lossy()));
        }
        Ok(Self { w_inf, sources: Vec::new(), q_test, background: Background::default() })
    }

    /// Uniform field W̄ ≡ w_inf with no sources.
    pub fn uniform(w_inf: T, q_test: T) -> Result<Self> {
        Self::new(w_inf, q_test)
    }

    pub fn with_source(mut self, source: FieldSource<T>) -> Self {
        self.sources.push(source);
        self
    }

    pub fn with_uniform_potential(mut self, a0: Vec3<T>) -> Self {
        self.background.a0 = a0;
        self
    }

    pub fn with_uniform_magnetic(mut self, b0: Vec3<T>) -> Self {
        self.background.b0 = b0;
        self
    }

    /// True when no quantity depends explicitly on time.
    pub fn is_static(&self) -> bool {
        self.sources.iter().all(|s| !s.is_moving())
    }

    /// True when A vanishes identically.
    pub fn has_no_vector_potential(&self) -> bool {
        self.is_static() && self.background.is_zero()
    }

    fn require_charge(&self) -> Result<()> {
        if self.q_test == T::zero() {
            Err(Error::ZeroTestCharge)
        } else {
            Ok(())
        }
    }

    /// Contribution of source `i` to W̄ (baseline excluded).
    pub fn source_w(&self, i: usize, r: Vec3<T>, t: T) -> T {
        self.q_test * self.sources[i].potential_and_grad(r, t).0
    }

    pub fn eval_w(&self, r: Vec3<T>, t: T) -> T {
        let sum: T = self.sources.iter().map(|s| s.potential_and_grad(r, t).0).sum();
        self.w_inf + self.q_test * sum
    }

    pub fn grad_w(&self, r: Vec3<T>, t: T) -> Vec3<T> {
        let mut g = Vec3::zero();
        for s in &self.sources {
            g += s.potential_and_grad(r, t).1;
        }
        g * self.q_test
    }

    /// W̄ and ∇W̄ in one pass.
    pub fn w_and_grad(&self, r: Vec3<T>, t: T) -> (T, Vec3<T>) {
        let mut w = T::zero();
        let mut g = Vec3::zero();
        for s in &self.sources {
            let (p, dp) = s.potential_and_grad(r, t);
            w = w + p;
            g += dp;
        }
        (self.w_inf + self.q_test * w, g * self.q_test)
    }

    /// Scalar potential φ = (W̄ − w_inf) / q_test.
    pub fn eval_phi(&self, r: Vec3<T>, t: T) -> Result<T> {
        self.require_charge()?;
        Ok((self.eval_w(r, t) - self.w_inf) / self.q_test)
    }

    /// A = (1/q_test) Σᵢ W̄ᵢ ufᵢ + A_bg.
    pub fn eval_a(&self, r: Vec3<T>, t: T) -> Result<Vec3<T>> {
        self.require_charge()?;
        Ok(self.vector_potential(r, t))
    }

    fn vector_potential(&self, r: Vec3<T>, t: T) -> Vec3<T> {
        // W̄ᵢ / q_test is just the source potential φᵢ.
        let mut a = self.background.potential(r);
        for s in self.sources.iter().filter(|s| s.is_moving()) {
            a += s.uf * s.potential_and_grad(r, t).0;
        }
        a
    }

    /// Spatial Jacobian `J[k][j] = ∂A_k/∂r_j`.
    pub fn jacobian_a(&self, r: Vec3<T>, t: T) -> Result<Mat3<T>> {
        self.require_charge()?;
        Ok(self.jacobian(r, t))
    }

    fn jacobian(&self, r: Vec3<T>, t: T) -> Mat3<T> {
        let mut j = self.background.jacobian();
        for s in self.sources.iter().filter(|s| s.is_moving()) {
            j = j + Mat3::outer(s.uf, s.potential_and_grad(r, t).1);
        }
        j
    }

    /// ∂A/∂t; each moving source gives −⟨uf, ∇⟩ W̄ᵢ uf / q_test.
    pub fn dadt(&self, r: Vec3<T>, t: T) -> Result<Vec3<T>> {
        self.require_charge()?;
        let mut d = Vec3::zero();
        for s in self.sources.iter().filter(|s| s.is_moving()) {
            let g = s.potential_and_grad(r, t).1;
            d -= s.uf * s.uf.dot(g);
        }
        Ok(d)
    }

    /// E = −∇W̄/q_test − ∂A/∂t and B = ∇×A.
    pub fn eval_eb(&self, r: Vec3<T>, t: T) -> Result<(Vec3<T>, Vec3<T>)> {
        let dadt = self.dadt(r, t)?;
        let e = -(self.grad_w(r, t) / self.q_test) - dadt;
        Ok((e, curl_from_jacobian(&self.jacobian(r, t))))
    }

    /// ∇⟨A, u⟩ with the velocity `u` held fixed.
    pub fn grad_a_dot(&self, r: Vec3<T>, t: T, u: Vec3<T>) -> Result<Vec3<T>> {
        self.require_charge()?;
        Ok(self.jacobian(r, t).tr_mul_vec(u))
    }

    /// Convective derivative (u·∇)A with `u` fixed.
    pub fn convective_a(&self, r: Vec3<T>, t: T, u: Vec3<T>) -> Result<Vec3<T>> {
        self.require_charge()?;
        Ok(self.jacobian(r, t).mul_vec(u))
    }

    /// Stable 64-bit FNV-1a digest of the field parameters.
    pub fn description_hash(&self) -> u64 {
        let mut h = Fnv::default();
        h.scalar(self.w_inf);
        h.scalar(self.q_test);
        for v in [self.background.a0, self.background.b0] {
            h.vec(v);
        }
        for s in &self.sources {
            h.scalar(s.qs);
            h.vec(s.r0);
            h.vec(s.uf);
            h.scalar(s.eps);
        }
        h.0
    }
}

pub(crate) fn curl_from_jacobian<T: Scalar>(j: &Mat3<T>) -> Vec3<T> {
    let m = &j.m;
    Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1])
}

struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    fn bytes(&mut self, b: &[u8]) {
        for &x in b {
            self.0 ^= u64::from(x);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    fn scalar<T: Scalar>(&mut self, v: T) {
        self.bytes(&v.to_f64_lossy().to_bits().to_le_bytes());
    }

    fn vec<T: Scalar>(&mut self, v: Vec3<T>) {
        for c in v.to_f64() {
            self.bytes(&c.to_bits().to_le_bytes());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: f64, y: f64, z: f64) -> Vec3<f64> {
        Vec3::new(x, y, z)
    }

    fn unit_source() -> VacuumField<f64> {
        VacuumField::new(-1.0, 1.0)
            .unwrap()
            .with_source(FieldSource::fixed(1.0, Vec3::zero(), 0.01).unwrap())
    }

    #[test]
    fn baseline_only() {
        let f = VacuumField::uniform(-1.0, 1.0).unwrap();
        assert_eq!(f.eval_w(v(3.0, -2.0, 1.0), 5.0), -1.0);
        assert_eq!(f.grad_w(v(3.0, -2.0, 1.0), 5.0), Vec3::zero());
    }

    #[test]
    fn single_source_closed_form() {
        let f = unit_source();
        let expected = -1.0 + 1.0 / (4.0 * std::f64::consts::PI * (1.0f64 + 1e-4).sqrt());
        let w1 = f.eval_w(v(1.0, 0.0, 0.0), 0.0);
        assert_relative_eq!(w1, expected, max_relative = 1e-15);
        assert!((w1 - (-0.92042)).abs() < 1e-5);
        let w2 = f.eval_w(v(2.0, 0.0, 0.0), 0.0);
        assert!((w2 + 1.0).abs() < (w1 + 1.0).abs());
    }

    #[test]
    fn gradient_radial_on_axis() {
        let g = unit_source().grad_w(v(0.7, 0.0, 0.0), 0.0);
        assert!(g.x < 0.0);
        assert_eq!(g.y, 0.0);
        assert_eq!(g.z, 0.0);
    }

    #[test]
    fn positive_baseline_rejected() {
        assert!(matches!(VacuumField::<f64>::new(0.0, 1.0), Err(Error::NonNegativeField(_))));
        assert!(FieldSource::new(1.0, Vec3::zero(), v(1.0, 0.0, 0.0), 0.01).is_err());
        assert!(FieldSource::fixed(1.0, Vec3::zero(), 0.0).is_err());
    }

    #[test]
    fn vector_potential_from_moving_source() {
        let uf = v(0.5, 0.0, 0.0);
        let f = VacuumField::new(-1.0, 1.0)
            .unwrap()
            .with_source(FieldSource::new(1.0, Vec3::zero(), uf, 0.01).unwrap());
        let probe = v(0.3, 0.9, -0.2);
        let wi = f.source_w(0, probe, 0.0);
        let a = f.eval_a(probe, 0.0).unwrap();
        assert_relative_eq!(a.x, wi * 0.5, max_relative = 1e-15);
        assert_eq!(a.y, 0.0);
        // the worked value W̄₁ = 0.0795746 ⇒ A = 0.0397873
        assert!((0.0795746f64 * 0.5 - 0.0397873).abs() < 1e-12);
        assert_eq!(unit_source().eval_a(probe, 0.0).unwrap(), Vec3::zero());
    }

    #[test]
    fn zero_charge_is_an_error() {
        let f = VacuumField::new(-1.0, 0.0).unwrap();
        assert_eq!(f.eval_a(Vec3::zero(), 0.0), Err(Error::ZeroTestCharge));
        assert!(f.eval_eb(Vec3::zero(), 0.0).is_err());
    }

    #[test]
    fn static_source_has_no_magnetic_field() {
        let (e, b) = unit_source().eval_eb(v(0.0, 0.4, 0.0), 0.0).unwrap();
        assert_eq!(b, Vec3::zero());
        assert!(e.y > 0.0 && e.x == 0.0 && e.z == 0.0);
    }

    #[test]
    fn uniform_background_curl() {
        let b0 = v(0.1, -0.3, 0.7);
        let f = VacuumField::uniform(-1.0, 1.0).unwrap().with_uniform_magnetic(b0);
        let (e, b) = f.eval_eb(v(0.2, 1.0, -3.0), 0.0).unwrap();
        assert_eq!(e, Vec3::zero());
        assert_relative_eq!(b.x, b0.x, epsilon = 1e-15);
        assert_relative_eq!(b.y, b0.y, epsilon = 1e-15);
        assert_relative_eq!(b.z, b0.z, epsilon = 1e-15);
    }

    #[test]
    fn hash_depends_on_parameters() {
        let a = unit_source();
        let b = unit_source().with_uniform_potential(v(0.0, 0.1, 0.0));
        assert_eq!(a.description_hash(), unit_source().description_hash());
        assert_ne!(a.description_hash(), b.description_hash());
    }
}
