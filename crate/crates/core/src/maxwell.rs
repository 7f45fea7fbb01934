//! Finite-difference evolution of the Lorenz-gauge wave equations
//! □φ = ρ, □A = J on a collocated 3-D grid, and discrete Maxwell residuals of
//! the evolved potentials.
//!
//! E and B are assembled from the potentials with second-order centered
//! differences. The divergence and curl that enter the residuals use
//! fourth-order stencils: with the same second-order operators on both sides,
//! ⟨∇,∇×A⟩ and ∇×∇φ vanish identically and the Faraday and no-monopole
//! residuals would carry no information.

use std::collections::VecDeque;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fields::VacuumField;
use crate::vec3::Vec3;
use crate::Scalar;

/// Prescribed sources together with the boundary and initial data they imply.
#[derive(Debug, Clone, PartialEq)]
pub enum WaveProblem<T> {
    /// No sources, zero fields.
    Vacuum,
    /// φ = φ0·cos(k·r − ωt), A = (a + φ0·k/|k|)·cos(k·r − ωt), ω = |k|, a ⟂ k.
    /// The φ0 part is a pure-gauge longitudinal wave; φ0 = 0 is the transverse wave.
    PlaneWave { amplitude: Vec3<T>, k: Vec3<T>, phi0: T },
    /// Oscillating softened dipole along z: ρ = −p(t)∂g/∂z, J = p'(t)g ẑ with
    /// p(t) = p0 sin³(ωt) and g a normalized Gaussian of width `sigma`.
    /// Starts from rest; the boundary is held at zero.
    Dipole { p0: T, omega: T, sigma: T },
}

impl<T: Scalar> WaveProblem<T> {
    pub fn plane_wave(amplitude: Vec3<T>, k: Vec3<T>, phi0: T) -> Result<Self> {
        let kn = k.norm();
        if !(kn > T::zero()) {
            return Err(Error::InvalidParameter("plane wave needs a nonzero wave vector".into()));
        }
        if amplitude.dot(k).abs() > T::lit(1e-12) * amplitude.norm() * kn {
            return Err(Error::InvalidParameter("plane-wave amplitude must be orthogonal to k".into()));
        }
        Ok(WaveProblem::PlaneWave { amplitude, k, phi0 })
    }

    pub fn dipole(p0: T, omega: T, sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) || !(omega > T::zero()) {
            return Err(Error::InvalidParameter("dipole needs sigma > 0 and omega > 0".into()));
        }
        Ok(WaveProblem::Dipole { p0, omega, sigma })
    }

    /// (ρ, J) at (r, t).
    pub fn source(&self, r: Vec3<T>, t: T) -> (T, Vec3<T>) {
        match *self {
            WaveProblem::Dipole { p0, omega, sigma } => {
                let g = gaussian(r, sigma);
                let dgz = -r.z / (sigma * sigma) * g;
                let (s, c) = (omega * t).sin_cos();
                let p = p0 * s * s * s;
                let dp = T::lit(3.0) * p0 * omega * s * s * c;
                (-p * dgz, Vec3::new(T::zero(), T::zero(), dp * g))
            }
            _ => (T::zero(), Vec3::zero()),
        }
    }

    /// Exact potentials (φ, A) where known; used for initial and boundary data.
    pub fn potentials(&self, r: Vec3<T>, t: T) -> (T, Vec3<T>) {
        match *self {
            WaveProblem::PlaneWave { amplitude, k, phi0 } => {
                let kn = k.norm();
                let c = (k.dot(r) - kn * t).cos();
                (phi0 * c, (amplitude + k * (phi0 / kn)) * c)
            }
            _ => (T::zero(), Vec3::zero()),
        }
    }
}

fn gaussian<T: Scalar>(r: Vec3<T>, sigma: T) -> T {
    let norm = (T::lit(2.0) * T::PI()).powf(T::lit(1.5)) * sigma * sigma * sigma;
    (-r.norm2() / (T::lit(2.0) * sigma * sigma)).exp() / norm
}

#[derive(Debug, Clone, PartialEq)]
struct Level<T> {
    phi: Vec<T>,
    a: [Vec<T>; 3],
}

/// Potentials on a uniform grid with a short history of time levels.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    pub n: [usize; 3],
    pub h: T,
    pub dt: T,
    pub origin: Vec3<T>,
    pub problem: WaveProblem<T>,
    levels: VecDeque<Level<T>>,
    first_level: usize,
    keep: usize,
}

fn cfl_check<T: Scalar>(h: T, dt: T) -> Result<()> {
    let limit = h / T::lit(3.0).sqrt();
    if !(dt > T::zero()) || dt > limit {
        return Err(Error::CflViolation { dt: dt.to_f64_lossy(), limit: limit.to_f64_lossy() });
    }
    Ok(())
}

impl<T: Scalar> GridField<T> {
    /// A grid of `n` points per axis with spacing `h`, centred on the origin.
    /// The first two time levels (t = 0 and t = dt) come from the problem's
    /// exact potentials.
    pub fn centered(n: [usize; 3], h: T, dt: T, problem: WaveProblem<T>) -> Result<Self> {
        let half = |m: usize| -T::from_usize_lossy(m - 1) * h * T::lit(0.5);
        if n.iter().any(|&m| m < 7) {
            return Err(Error::InvalidParameter(format!("grid needs at least 7 points per axis, got {n:?}")));
        }
        Self::new(n, h, dt, Vec3::new(half(n[0]), half(n[1]), half(n[2])), problem)
    }

    pub fn new(n: [usize; 3], h: T, dt: T, origin: Vec3<T>, problem: WaveProblem<T>) -> Result<Self> {
        cfl_check(h, dt)?;
        if n.iter().any(|&m| m < 7) {
            return Err(Error::InvalidParameter(format!("grid needs at least 7 points per axis, got {n:?}")));
        }
        let mut g = Self { n, h, dt, origin, problem, levels: VecDeque::new(), first_level: 0, keep: 3 };
        let l0 = g.exact_level(T::zero());
        let l1 = g.exact_level(dt);
        g.levels.push_back(l0);
        g.levels.push_back(l1);
        Ok(g)
    }

    /// Number of time levels retained (at least 3).
    pub fn with_history(mut self, keep: usize) -> Self {
        self.keep = keep.max(3);
        self
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3<T> {
        self.origin
            + Vec3::new(T::from_usize_lossy(i), T::from_usize_lossy(j), T::from_usize_lossy(k)) * self.h
    }

    /// Absolute index of the newest stored level.
    pub fn newest_level(&self) -> usize {
        self.first_level + self.levels.len() - 1
    }

    pub fn oldest_level(&self) -> usize {
        self.first_level
    }

    pub fn time_of(&self, level: usize) -> T {
        self.dt * T::from_usize_lossy(level)
    }

    /// φ at a stored level.
    pub fn phi(&self, level: usize) -> Option<&[T]> {
        self.level(level).map(|l| l.phi.as_slice())
    }

    /// Component `c` of A at a stored level.
    pub fn a(&self, level: usize, c: usize) -> Option<&[T]> {
        self.level(level).map(|l| l.a[c].as_slice())
    }

    fn level(&self, level: usize) -> Option<&Level<T>> {
        level.checked_sub(self.first_level).and_then(|i| self.levels.get(i))
    }

    fn exact_level(&self, t: T) -> Level<T> {
        let [nx, ny, nz] = self.n;
        let mut phi = vec![T::zero(); self.len()];
        let mut a = [phi.clone(), phi.clone(), phi.clone()];
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    let idx = self.index(i, j, k);
                    let (p, av) = self.problem.potentials(self.point(i, j, k), t);
                    phi[idx] = p;
                    a[0][idx] = av.x;
                    a[1][idx] = av.y;
                    a[2][idx] = av.z;
                }
            }
        }
        Level { phi, a }
    }

    /// Adds ε∇χ to A on every stored level, χ = exp(−|r|²/(2w²)). This is
    /// static, so ∂φ/∂t + ⟨∇,A⟩ picks up ε∇²χ and the gauge condition fails.
    pub fn perturb_gauge(&mut self, eps: T, width: T) {
        let w2 = width * width;
        let pts: Vec<Vec3<T>> = (0..self.len()).map(|idx| self.point_of(idx)).collect();
        for level in &mut self.levels {
            for (idx, r) in pts.iter().enumerate() {
                let chi = (-r.norm2() / (T::lit(2.0) * w2)).exp();
                let g = *r * (-eps * chi / w2);
                level.a[0][idx] = level.a[0][idx] + g.x;
                level.a[1][idx] = level.a[1][idx] + g.y;
                level.a[2][idx] = level.a[2][idx] + g.z;
            }
        }
    }

    fn point_of(&self, idx: usize) -> Vec3<T> {
        let k = idx % self.n[2];
        let j = (idx / self.n[2]) % self.n[1];
        let i = idx / (self.n[1] * self.n[2]);
        self.point(i, j, k)
    }

    /// One leapfrog step: u⁺ = 2u − u⁻ + dt²(∇²u + s), boundary from the exact data.
    pub fn advance(&mut self) -> Result<()> {
        cfl_check(self.h, self.dt)?;
        let len = self.levels.len();
        let (prev, cur) = (&self.levels[len - 2], &self.levels[len - 1]);
        let cur_index = self.newest_level();
        let t = self.time_of(cur_index);
        let t_next = self.time_of(cur_index + 1);
        let [nx, ny, nz] = self.n;
        let slab = ny * nz;
        let dt2 = self.dt * self.dt;
        let inv_h2 = T::one() / (self.h * self.h);
        let two = T::lit(2.0);
        let six = T::lit(6.0);

        let mut next = Level {
            phi: vec![T::zero(); self.len()],
            a: [vec![T::zero(); self.len()], vec![T::zero(); self.len()], vec![T::zero(); self.len()]],
        };
        let this = &*self;
        let update = |comp: usize, out: &mut Vec<T>| {
            let (u, um) = if comp == 0 {
                (&cur.phi, &prev.phi)
            } else {
                (&cur.a[comp - 1], &prev.a[comp - 1])
            };
            out.par_chunks_mut(slab).enumerate().for_each(|(i, plane)| {
                for j in 0..ny {
                    for k in 0..nz {
                        let r = this.point(i, j, k);
                        let local = j * nz + k;
                        if i == 0 || j == 0 || k == 0 || i == nx - 1 || j == ny - 1 || k == nz - 1 {
                            let (p, av) = this.problem.potentials(r, t_next);
                            plane[local] = if comp == 0 { p } else { av.component(comp - 1) };
                            continue;
                        }
                        let idx = this.index(i, j, k);
                        let lap = (u[idx + slab] + u[idx - slab] + u[idx + nz] + u[idx - nz] + u[idx + 1] + u[idx - 1]
                            - six * u[idx])
                            * inv_h2;
                        let (rho, jv) = this.problem.source(r, t);
                        let s = if comp == 0 { rho } else { jv.component(comp - 1) };
                        plane[local] = two * u[idx] - um[idx] + dt2 * (lap + s);
                    }
                }
            });
        };
        update(0, &mut next.phi);
        for c in 0..3 {
            update(c + 1, &mut next.a[c]);
        }
        self.levels.push_back(next);
        while self.levels.len() > self.keep {
            self.levels.pop_front();
            self.first_level += 1;
        }
        Ok(())
    }

    /// Writes the newest level as flat binary: three little-endian u64 extents,
    /// then φ, Ax, Ay, Az as little-endian f64 in row-major (x slowest) order.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for &m in &self.n {
            out.write_all(&(m as u64).to_le_bytes())?;
        }
        let lvl = &self.levels[self.levels.len() - 1];
        for arr in std::iter::once(&lvl.phi).chain(lvl.a.iter()) {
            for v in arr {
                out.write_all(&v.to_f64_lossy().to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Advances `grid` by `steps` leapfrog steps.
pub fn evolve_wave<T: Scalar>(mut grid: GridField<T>, steps: usize) -> Result<GridField<T>> {
    cfl_check(grid.h, grid.dt)?;
    for _ in 0..steps {
        grid.advance()?;
    }
    Ok(grid)
}

/// L2 norms (h³-weighted, over the interior mask) of the residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub gauss: f64,
    pub faraday: f64,
    pub ampere: f64,
    pub nomono: f64,
    pub gauge: f64,
    pub continuity: f64,
}

impl ResidualReport {
    pub fn maxwell(&self) -> [f64; 4] {
        [self.gauss, self.faraday, self.ampere, self.nomono]
    }

    /// Componentwise coarse/fine ratios of the four Maxwell residuals.
    pub fn maxwell_ratios(coarse: &ResidualReport, fine: &ResidualReport) -> [f64; 4] {
        let (c, f) = (coarse.maxwell(), fine.maxwell());
        [c[0] / f[0], c[1] / f[1], c[2] / f[2], c[3] / f[3]]
    }
}

/// Stencil access for one scalar array.
struct Ops<'a, T> {
    n: [usize; 3],
    h: T,
    _m: std::marker::PhantomData<&'a T>,
}

impl<T: Scalar> Ops<'_, T> {
    fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.n[1] * self.n[2],
            1 => self.n[2],
            _ => 1,
        }
    }

    fn d2(&self, u: &[T], idx: usize, axis: usize) -> T {
        let s = self.stride(axis);
        (u[idx + s] - u[idx - s]) / (T::lit(2.0) * self.h)
    }

    fn d4(&self, u: &[T], idx: usize, axis: usize) -> T {
        let s = self.stride(axis);
        (T::lit(8.0) * (u[idx + s] - u[idx - s]) - (u[idx + 2 * s] - u[idx - 2 * s])) / (T::lit(12.0) * self.h)
    }
}

fn interior_margin(n: usize) -> usize {
    ((n as f64 * 0.1).ceil() as usize).max(3)
}

/// Residuals at stored level `t_index`; needs levels t_index ± 1 as well.
pub fn maxwell_residuals<T: Scalar>(grid: &GridField<T>, t_index: usize) -> Result<ResidualReport> {
    let available = grid.levels.len();
    let (lm, l0, lp) = match (
        t_index.checked_sub(1).and_then(|i| grid.level(i)),
        grid.level(t_index),
        grid.level(t_index + 1),
    ) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(Error::InsufficientHistory { index: t_index, available }),
    };
    let [nx, ny, nz] = grid.n;
    let ops = Ops { n: grid.n, h: grid.h, _m: std::marker::PhantomData };
    let dt = grid.dt;
    let two = T::lit(2.0);
    let t = grid.time_of(t_index);

    // E and B on every point with one cell of support; zero on the outer shell.
    let len = grid.len();
    let mut e = [vec![T::zero(); len], vec![T::zero(); len], vec![T::zero(); len]];
    let mut b = e.clone();
    let mut bm = e.clone();
    let mut bp = e.clone();
    let mut dedt = e.clone();
    let slab = ny * nz;
    let inner = |i: usize, j: usize, k: usize| i > 0 && j > 0 && k > 0 && i < nx - 1 && j < ny - 1 && k < nz - 1;

    let curl2 = |a: &[Vec<T>; 3], idx: usize| -> [T; 3] {
        [
            ops.d2(&a[2], idx, 1) - ops.d2(&a[1], idx, 2),
            ops.d2(&a[0], idx, 2) - ops.d2(&a[2], idx, 0),
            ops.d2(&a[1], idx, 0) - ops.d2(&a[0], idx, 1),
        ]
    };
    for (c, ec) in e.iter_mut().enumerate() {
        ec.par_chunks_mut(slab).enumerate().for_each(|(i, plane)| {
            for j in 0..ny {
                for k in 0..nz {
                    if inner(i, j, k) {
                        let idx = grid.index(i, j, k);
                        plane[j * nz + k] =
                            -(lp.a[c][idx] - lm.a[c][idx]) / (two * dt) - ops.d2(&l0.phi, idx, c);
                    }
                }
            }
        });
    }
    for (c, dc) in dedt.iter_mut().enumerate() {
        dc.par_chunks_mut(slab).enumerate().for_each(|(i, plane)| {
            for j in 0..ny {
                for k in 0..nz {
                    if inner(i, j, k) {
                        let idx = grid.index(i, j, k);
                        let att = (lp.a[c][idx] - two * l0.a[c][idx] + lm.a[c][idx]) / (dt * dt);
                        let gphi = (ops.d2(&lp.phi, idx, c) - ops.d2(&lm.phi, idx, c)) / (two * dt);
                        plane[j * nz + k] = -att - gphi;
                    }
                }
            }
        });
    }
    for (target, lvl) in [(&mut b, l0), (&mut bm, lm), (&mut bp, lp)] {
        for (c, bc) in target.iter_mut().enumerate() {
            bc.par_chunks_mut(slab).enumerate().for_each(|(i, plane)| {
                for j in 0..ny {
                    for k in 0..nz {
                        if inner(i, j, k) {
                            plane[j * nz + k] = curl2(&lvl.a, grid.index(i, j, k))[c];
                        }
                    }
                }
            });
        }
    }

    let div4 = |f: &[Vec<T>; 3], idx: usize| ops.d4(&f[0], idx, 0) + ops.d4(&f[1], idx, 1) + ops.d4(&f[2], idx, 2);
    let curl4 = |f: &[Vec<T>; 3], idx: usize| -> Vec3<T> {
        Vec3::new(
            ops.d4(&f[2], idx, 1) - ops.d4(&f[1], idx, 2),
            ops.d4(&f[0], idx, 2) - ops.d4(&f[2], idx, 0),
            ops.d4(&f[1], idx, 0) - ops.d4(&f[0], idx, 1),
        )
    };
    let (mx, my, mz) = (interior_margin(nx), interior_margin(ny), interior_margin(nz));
    let sums: [T; 6] = (mx..nx - mx)
        .into_par_iter()
        .map(|i| {
            let mut acc = [T::zero(); 6];
            for j in my..ny - my {
                for k in mz..nz - mz {
                    let idx = grid.index(i, j, k);
                    let r = grid.point(i, j, k);
                    let (rho, jv) = grid.problem.source(r, t);
                    let gauss = div4(&e, idx) - rho;
                    let dbdt = Vec3::new(
                        bp[0][idx] - bm[0][idx],
                        bp[1][idx] - bm[1][idx],
                        bp[2][idx] - bm[2][idx],
                    ) / (two * dt);
                    let faraday = curl4(&e, idx) + dbdt;
                    let ampere = curl4(&b, idx) - Vec3::new(dedt[0][idx], dedt[1][idx], dedt[2][idx]) - jv;
                    let nomono = div4(&b, idx);
                    let gauge = (lp.phi[idx] - lm.phi[idx]) / (two * dt) + div4(&l0.a, idx);
                    let continuity = source_continuity(&grid.problem, &ops, r, t, dt);
                    let vals = [
                        gauss * gauss,
                        faraday.norm2(),
                        ampere.norm2(),
                        nomono * nomono,
                        gauge * gauge,
                        continuity * continuity,
                    ];
                    for (a, v) in acc.iter_mut().zip(vals) {
                        *a = *a + v;
                    }
                }
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold([T::zero(); 6], |mut s, a| {
            for (x, y) in s.iter_mut().zip(a) {
                *x = *x + y;
            }
            s
        });
    let w = grid.h * grid.h * grid.h;
    let norm = |s: T| (s * w).sqrt().to_f64_lossy();
    Ok(ResidualReport {
        gauss: norm(sums[0]),
        faraday: norm(sums[1]),
        ampere: norm(sums[2]),
        nomono: norm(sums[3]),
        gauge: norm(sums[4]),
        continuity: norm(sums[5]),
    })
}

/// ∂ρ/∂t + ⟨∇,J⟩ of the sampled sources with the same centered stencils.
fn source_continuity<T: Scalar>(problem: &WaveProblem<T>, ops: &Ops<'_, T>, r: Vec3<T>, t: T, dt: T) -> T {
    let two = T::lit(2.0);
    let drho = (problem.source(r, t + dt).0 - problem.source(r, t - dt).0) / (two * dt);
    let h = ops.h;
    let mut div = T::zero();
    for axis in 0..3 {
        let e = Vec3::axis(axis) * h;
        let f = |s: T| problem.source(r + e * s, t).1.component(axis);
        div = div + (T::lit(8.0) * (f(T::one()) - f(-T::one())) - (f(two) - f(-two))) / (T::lit(12.0) * h);
    }
    drho + div
}

/// Scalar samples on a uniform grid, x slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<T> {
    pub n: [usize; 3],
    pub h: T,
    pub origin: Vec3<T>,
    pub data: Vec<T>,
}

impl<T: Scalar> ScalarGrid<T> {
    pub fn from_fn(n: [usize; 3], h: T, origin: Vec3<T>, f: impl Fn(Vec3<T>) -> T + Sync) -> Self {
        let data = (0..n[0] * n[1] * n[2])
            .into_par_iter()
            .map(|idx| {
                let k = idx % n[2];
                let j = (idx / n[2]) % n[1];
                let i = idx / (n[1] * n[2]);
                f(origin + Vec3::new(T::from_usize_lossy(i), T::from_usize_lossy(j), T::from_usize_lossy(k)) * h)
            })
            .collect();
        Self { n, h, origin, data }
    }

    /// Samples the potential φ = (W̄ − w∞)/q of `field` at time `t`.
    pub fn sample_phi(field: &VacuumField<T>, t: T, n: [usize; 3], h: T, origin: Vec3<T>) -> Result<Self> {
        field.eval_phi(origin, t)?;
        Ok(Self::from_fn(n, h, origin, |r| field.eval_phi(r, t).unwrap_or(T::zero())))
    }

    /// Tricubic (four-point Lagrange per axis) interpolation; None if the
    /// stencil leaves the grid.
    pub fn interpolate(&self, r: Vec3<T>) -> Option<T> {
        let mut base = [0usize; 3];
        let mut wts = [[T::zero(); 4]; 3];
        for axis in 0..3 {
            let s = (r.component(axis) - self.origin.component(axis)) / self.h;
            let fl = s.floor();
            let i = fl.to_i64()?;
            if i < 1 || i + 2 >= self.n[axis] as i64 {
                return None;
            }
            base[axis] = (i - 1) as usize;
            let x = s - fl;
            let one = T::one();
            let two = T::lit(2.0);
            let six = T::lit(6.0);
            wts[axis] = [
                -x * (x - one) * (x - two) / six,
                (x + one) * (x - one) * (x - two) / two,
                -(x + one) * x * (x - two) / two,
                (x + one) * x * (x - one) / six,
            ];
        }
        let mut acc = T::zero();
        for (a, wa) in wts[0].iter().enumerate() {
            for (b, wb) in wts[1].iter().enumerate() {
                let row = ((base[0] + a) * self.n[1] + base[1] + b) * self.n[2] + base[2];
                let mut inner = T::zero();
                for (c, wc) in wts[2].iter().enumerate() {
                    inner = inner + *wc * self.data[row + c];
                }
                acc = acc + *wa * *wb * inner;
            }
        }
        Some(acc)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// A ball whose centre moves as `center0 + v·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball<T> {
    pub center0: Vec3<T>,
    pub radius: T,
}

/// Integral of each snapshot over the ball centred at center0 + v·t.
/// Spherical product rule: Gauss–Legendre in r and cos θ, trapezoid in azimuth.
pub fn advected_integral<T: Scalar>(
    field_samples: &[(T, ScalarGrid<T>)],
    v: Vec3<T>,
    ball: Ball<T>,
) -> Result<Vec<T>> {
    if !(v.norm() < T::one()) {
        return Err(Error::SuperluminalInit(v.norm().to_f64_lossy()));
    }
    if !(ball.radius > T::zero()) {
        return Err(Error::InvalidParameter("ball radius must be positive".into()));
    }
    let (nr, nmu, naz) = (24, 24, 48);
    let gr = gauss_legendre(nr);
    let gmu = gauss_legendre(nmu);
    let mut series = Vec::with_capacity(field_samples.len());
    for (sample, (t, grid)) in field_samples.iter().enumerate() {
        let center = ball.center0 + v * *t;
        let mut acc = T::zero();
        for &(xr, wr) in &gr {
            let rad = ball.radius * T::lit(0.5 * (xr + 1.0));
            let wrad = T::lit(wr * 0.5) * ball.radius * rad * rad;
            for &(mu, wmu) in &gmu {
                let sin_t = (1.0 - mu * mu).sqrt();
                for a in 0..naz {
                    let az = 2.0 * std::f64::consts::PI * a as f64 / naz as f64;
                    let dir = Vec3::new(T::lit(sin_t * az.cos()), T::lit(sin_t * az.sin()), T::lit(mu));
                    let val = grid.interpolate(center + dir * rad).ok_or(Error::BallExitsGrid(sample))?;
                    acc = acc + wrad * T::lit(wmu * 2.0 * std::f64::consts::PI / naz as f64) * val;
                }
            }
        }
        series.push(acc);
    }
    Ok(series)
}
