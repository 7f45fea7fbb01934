//! One-dimensional quantized Hamiltonians of the free, minimally coupled and
//! modified vacuum-field particle, with Crank–Nicolson evolution in τ.
//!
//! Kinetic terms are assembled edge by edge: each lattice edge e = (i, i+1)
//! carries a difference operator Π_e and contributes c_e Π_e†Π_e, which keeps
//! every operator Hermitian for the dx-weighted inner product. With fixed
//! ends the samples outside the grid are zero.

use std::io::Write;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::Scalar;

pub type C<T> = Complex<T>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Periodic,
    FixedEnds,
}

/// Complex samples ψ(x_i), x_i = x0 + i·dx.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState<T> {
    pub psi: Vec<C<T>>,
    pub x0: T,
    pub dx: T,
    pub hbar: T,
    pub domain: Domain,
}

impl<T: Scalar> WaveState<T> {
    pub fn new(psi: Vec<C<T>>, x0: T, dx: T, hbar: T, domain: Domain) -> Result<Self> {
        if psi.len() < 3 {
            return Err(Error::InvalidParameter(format!("need at least 3 samples, got {}", psi.len())));
        }
        if !(dx > T::zero()) || !(hbar > T::zero()) {
            return Err(Error::InvalidParameter("dx and hbar must be positive".into()));
        }
        Ok(Self { psi, x0, dx, hbar, domain })
    }

    pub fn from_fn(n: usize, x0: T, dx: T, hbar: T, domain: Domain, f: impl Fn(T) -> C<T>) -> Result<Self> {
        let psi = (0..n).map(|i| f(x0 + dx * T::from_usize_lossy(i))).collect();
        Self::new(psi, x0, dx, hbar, domain)
    }

    /// A Gaussian packet exp(−(x − c)²/(4σ²) + i k x), normalized.
    pub fn gaussian(n: usize, x0: T, dx: T, hbar: T, domain: Domain, center: T, sigma: T, k: T) -> Result<Self> {
        let four = T::lit(4.0);
        let mut s = Self::from_fn(n, x0, dx, hbar, domain, |x| {
            let d = x - center;
            C::from_polar((-d * d / (four * sigma * sigma)).exp(), k * x)
        })?;
        s.normalize()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn x(&self, i: usize) -> T {
        self.x0 + self.dx * T::from_usize_lossy(i)
    }

    /// ‖ψ‖² = dx Σ|ψ_i|².
    pub fn norm2(&self) -> T {
        self.dx * self.psi.iter().map(|z| z.norm_sqr()).sum::<T>()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm2().sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::InvalidParameter("cannot normalize a zero or non-finite state".into()));
        }
        for z in &mut self.psi {
            *z = *z / n;
        }
        Ok(())
    }

    /// dx-weighted inner product ⟨self, other⟩, antilinear in `self`.
    pub fn inner(&self, other: &[C<T>]) -> C<T> {
        self.psi.iter().zip(other).map(|(a, b)| a.conj() * b).sum::<C<T>>() * self.dx
    }

    /// Mean and variance of x under |ψ|².
    pub fn position_moments(&self) -> (T, T) {
        let total: T = self.psi.iter().map(|z| z.norm_sqr()).sum();
        let mean = self.psi.iter().enumerate().map(|(i, z)| self.x(i) * z.norm_sqr()).sum::<T>() / total;
        let var = self
            .psi
            .iter()
            .enumerate()
            .map(|(i, z)| {
                let d = self.x(i) - mean;
                d * d * z.norm_sqr()
            })
            .sum::<T>()
            / total;
        (mean, var)
    }

    /// Writes `x,re,im,abs2` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["x", "re", "im", "abs2"])?;
        for (i, z) in self.psi.iter().enumerate() {
            let row = [self.x(i), z.re, z.im, z.norm_sqr()];
            wtr.write_record(row.iter().map(|v| format!("{:.16e}", v.to_f64_lossy())))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuantumModelKind {
    /// p̂²/2m + W̄, m = −W̄.
    FreeVacuum,
    /// (p̂ − qA)²/2m + W̄.
    MinimalCoupling,
    /// Minimal coupling − q²A²/2m − q² A p̂ (1/2m³) p̂ A.
    Modified,
}

/// Field samples on the wavefunction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profiles<T> {
    pub w: Vec<T>,
    pub a: Vec<T>,
    pub q: T,
}

impl<T: Scalar> Profiles<T> {
    pub fn uniform(n: usize, w: T, a: T, q: T) -> Self {
        Self { w: vec![w; n], a: vec![a; n], q }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.w.len() != n || self.a.len() != n {
            return Err(Error::InvalidParameter(format!(
                "profiles have {} / {} samples, grid has {n}",
                self.w.len(),
                self.a.len()
            )));
        }
        for (index, &w) in self.w.iter().enumerate() {
            if !(w < T::zero()) {
                return Err(Error::NonPositiveMass { index, value: (-w).to_f64_lossy() });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel<T> {
    pub kind: QuantumModelKind,
    pub profiles: Profiles<T>,
}

/// Hermitian tridiagonal operator; `off[i]` is H[i][i+1] and, for periodic
/// domains, `off[n−1]` is H[n−1][0].
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian<T> {
    pub diag: Vec<C<T>>,
    pub off: Vec<C<T>>,
    pub domain: Domain,
}

impl<T: Scalar> Hamiltonian<T> {
    pub fn apply(&self, psi: &[C<T>]) -> Vec<C<T>> {
        let n = self.diag.len();
        let mut out: Vec<C<T>> = self.diag.iter().zip(psi).map(|(d, p)| d * p).collect();
        for i in 0..n - 1 {
            out[i] = out[i] + self.off[i] * psi[i + 1];
            out[i + 1] = out[i + 1] + self.off[i].conj() * psi[i];
        }
        if self.domain == Domain::Periodic {
            let c = self.off[n - 1];
            out[n - 1] = out[n - 1] + c * psi[0];
            out[0] = out[0] + c.conj() * psi[n - 1];
        }
        out
    }

    fn add_edge(&mut self, i: Option<usize>, j: Option<usize>, beta: C<T>, alpha: C<T>, c: T) {
        // c·v v†, v = conj(β) e_i + conj(α) e_j
        if let Some(i) = i {
            self.diag[i] = self.diag[i] + C::from(c * beta.norm_sqr());
        }
        if let Some(j) = j {
            self.diag[j] = self.diag[j] + C::from(c * alpha.norm_sqr());
        }
        if let (Some(i), Some(j)) = (i, j) {
            let h_ij = beta.conj() * alpha * c;
            if j == i + 1 {
                self.off[i] = self.off[i] + h_ij;
            } else {
                // wrap edge (n−1, 0)
                let last = self.off.len() - 1;
                self.off[last] = self.off[last] + h_ij;
            }
        }
    }
}

/// Edges as (left node, right node); None marks a zero sample beyond a fixed end.
fn edges(n: usize, domain: Domain) -> Vec<(Option<usize>, Option<usize>)> {
    match domain {
        Domain::Periodic => (0..n).map(|i| (Some(i), Some((i + 1) % n))).collect(),
        Domain::FixedEnds => std::iter::once((None, Some(0)))
            .chain((0..n - 1).map(|i| (Some(i), Some(i + 1))))
            .chain(std::iter::once((Some(n - 1), None)))
            .collect(),
    }
}

fn edge_avg<T: Scalar>(v: &[T], i: Option<usize>, j: Option<usize>) -> T {
    match (i, j) {
        (Some(i), Some(j)) => (v[i] + v[j]) * T::lit(0.5),
        (Some(i), None) => v[i],
        (None, Some(j)) => v[j],
        (None, None) => T::zero(),
    }
}

/// Assembles the discrete Hamiltonian of `model` for a grid with spacing `dx`.
pub fn build_hamiltonian<T: Scalar>(
    model: &QuantumModel<T>,
    n: usize,
    dx: T,
    hbar: T,
    domain: Domain,
) -> Result<Hamiltonian<T>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 samples, got {n}")));
    }
    let p = &model.profiles;
    p.validate(n)?;
    let zero = C::new(T::zero(), T::zero());
    let noff = if domain == Domain::Periodic { n } else { n - 1 };
    let mut h = Hamiltonian { diag: p.w.iter().map(|&w| C::from(w)).collect(), off: vec![zero; noff], domain };
    // ħ/(i dx)
    let d = C::new(T::zero(), -hbar / dx);
    let half = T::lit(0.5);
    let coupled = model.kind != QuantumModelKind::FreeVacuum;
    for (i, j) in edges(n, domain) {
        let m = -edge_avg(&p.w, i, j);
        let qa = if coupled { p.q * edge_avg(&p.a, i, j) } else { T::zero() };
        // Π_e ψ = β ψ_i + α ψ_j
        let alpha = d - C::from(qa * half);
        let beta = -d - C::from(qa * half);
        h.add_edge(i, j, beta, alpha, T::one() / (T::lit(2.0) * m));
    }
    if model.kind == QuantumModelKind::Modified {
        add_modified_terms(&mut h, p, n, dx, hbar, domain, T::one());
    }
    Ok(h)
}

/// Adds sign·(−q²A²/2m − q² A p̂ (1/2m³) p̂ A) to `h`.
fn add_modified_terms<T: Scalar>(
    h: &mut Hamiltonian<T>,
    p: &Profiles<T>,
    n: usize,
    dx: T,
    hbar: T,
    domain: Domain,
    sign: T,
) {
    let q2 = p.q * p.q;
    let two = T::lit(2.0);
    for i in 0..n {
        let m = -p.w[i];
        h.diag[i] = h.diag[i] - C::from(sign * q2 * p.a[i] * p.a[i] / (two * m));
    }
    let d = C::new(T::zero(), -hbar / dx);
    for (i, j) in edges(n, domain) {
        let m = -edge_avg(&p.w, i, j);
        let ai = i.map_or(T::zero(), |i| p.a[i]);
        let aj = j.map_or(T::zero(), |j| p.a[j]);
        // Π_A ψ = (ħ/i)(A_j ψ_j − A_i ψ_i)/dx
        h.add_edge(i, j, -d * ai, d * aj, -sign * q2 / (two * m * m * m));
    }
}

/// One Crank–Nicolson step (1 + iΔτĤ/2ħ)ψ' = (1 − iΔτĤ/2ħ)ψ.
pub fn cn_step<T: Scalar>(op: &Hamiltonian<T>, state: &WaveState<T>, dtau: T) -> Result<WaveState<T>> {
    let n = state.len();
    if op.diag.len() != n || op.domain != state.domain {
        return Err(Error::InvalidParameter("operator does not match the state grid".into()));
    }
    let hpsi = op.apply(&state.psi);
    let c = C::new(T::zero(), dtau / (T::lit(2.0) * state.hbar));
    let rhs: Vec<C<T>> = state.psi.iter().zip(&hpsi).map(|(p, hp)| p - c * hp).collect();
    let one = C::from(T::one());
    let diag: Vec<C<T>> = op.diag.iter().map(|d| one + c * d).collect();
    let upper: Vec<C<T>> = op.off.iter().map(|o| c * o).collect();
    let lower: Vec<C<T>> = op.off.iter().map(|o| c * o.conj()).collect();
    let psi = match op.domain {
        Domain::FixedEnds => thomas(&lower[..n - 1], &diag, &upper[..n - 1], &rhs)?,
        Domain::Periodic => cyclic_thomas(&lower, &diag, &upper, &rhs)?,
    };
    Ok(WaveState { psi, ..state.clone() })
}

/// Solves a tridiagonal system; `lower[i]` is M[i+1][i], `upper[i]` is M[i][i+1].
fn thomas<T: Scalar>(lower: &[C<T>], diag: &[C<T>], upper: &[C<T>], rhs: &[C<T>]) -> Result<Vec<C<T>>> {
    let n = diag.len();
    let mut cp = vec![C::new(T::zero(), T::zero()); n];
    let mut dp = vec![C::new(T::zero(), T::zero()); n];
    let tiny = T::epsilon() * T::lit(16.0);
    let mut denom = diag[0];
    for i in 0..n {
        if i > 0 {
            denom = diag[i] - lower[i - 1] * cp[i - 1];
        }
        if !(denom.norm() > tiny) || !denom.re.is_finite() || !denom.im.is_finite() {
            return Err(Error::SolveFailure(format!("zero pivot at row {i}")));
        }
        if i + 1 < n {
            cp[i] = upper[i] / denom;
        }
        dp[i] = if i == 0 { rhs[0] / denom } else { (rhs[i] - lower[i - 1] * dp[i - 1]) / denom };
    }
    let mut x = dp;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] = x[i] - cp[i] * next;
    }
    Ok(x)
}

/// Cyclic tridiagonal solve via Sherman–Morrison; `upper[n−1]` is M[n−1][0]
/// and `lower[n−1]` is M[0][n−1].
fn cyclic_thomas<T: Scalar>(lower: &[C<T>], diag: &[C<T>], upper: &[C<T>], rhs: &[C<T>]) -> Result<Vec<C<T>>> {
    let n = diag.len();
    let corner_top = lower[n - 1]; // M[0][n−1]
    let corner_bottom = upper[n - 1]; // M[n−1][0]
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] = b[0] - gamma;
    b[n - 1] = b[n - 1] - corner_bottom * corner_top / gamma;
    let x = thomas(&lower[..n - 1], &b, &upper[..n - 1], rhs)?;
    let mut u = vec![C::new(T::zero(), T::zero()); n];
    u[0] = gamma;
    u[n - 1] = corner_bottom;
    let z = thomas(&lower[..n - 1], &b, &upper[..n - 1], &u)?;
    let vx = x[0] + corner_top / gamma * x[n - 1];
    let vz = z[0] + corner_top / gamma * z[n - 1];
    let den = C::from(T::one()) + vz;
    if !(den.norm() > T::epsilon()) {
        return Err(Error::SolveFailure("singular cyclic correction".into()));
    }
    let f = vx / den;
    Ok(x.iter().zip(&z).map(|(a, b)| a - f * b).collect())
}

/// Plane-wave symbols of the exact square-root Hamiltonian and its
/// quadratic truncation: (exact, truncated, |exact − truncated|).
pub fn dispersion_check<T: Scalar>(k: T, w_const: T, hbar: T) -> Result<(T, T, T)> {
    let hk = hbar * k;
    if !(w_const < T::zero()) {
        return Err(Error::NonPositiveMass { index: 0, value: (-w_const).to_f64_lossy() });
    }
    if !(hk.abs() < w_const.abs()) {
        return Err(Error::SuperluminalMode { hk: hk.to_f64_lossy(), w: w_const.abs().to_f64_lossy() });
    }
    let ratio = hk / w_const;
    let exact = (T::one() - ratio * ratio).sqrt() * w_const;
    let m = -w_const;
    let truncated = hk * hk / (T::lit(2.0) * m) + w_const;
    Ok((exact, truncated, (exact - truncated).abs()))
}

/// ‖(Ĥ_mod − Ĥ_min)ψ‖ / ‖ψ‖ on identical profiles.
pub fn model_gap<T: Scalar>(state: &WaveState<T>, profiles: &Profiles<T>) -> Result<T> {
    let n = state.len();
    profiles.validate(n)?;
    let zero = C::new(T::zero(), T::zero());
    let noff = if state.domain == Domain::Periodic { n } else { n - 1 };
    let mut diff = Hamiltonian { diag: vec![zero; n], off: vec![zero; noff], domain: state.domain };
    add_modified_terms(&mut diff, profiles, n, state.dx, state.hbar, state.domain, T::one());
    let out = diff.apply(&state.psi);
    let num = (state.dx * out.iter().map(|z| z.norm_sqr()).sum::<T>()).sqrt();
    Ok(num / state.norm2().sqrt())
}

/// Least-squares slope of log(error) against log(ħk).
pub fn fitted_exponent<T: Scalar>(hks: &[T], errors: &[T]) -> T {
    let n = T::from_usize_lossy(hks.len());
    let xs: Vec<T> = hks.iter().map(|v| v.ln()).collect();
    let ys: Vec<T> = errors.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(&ys).map(|(x, y)| (*x - mx) * (*y - my)).sum();
    let sxx: T = xs.iter().map(|x| (*x - mx) * (*x - mx)).sum();
    sxy / sxx
}
