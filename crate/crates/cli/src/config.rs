//! Scenario files: one JSON document per scenario.

use std::path::Path;

use serde::Deserialize;
use vacfield::maxwell::WaveProblem;
use vacfield::quantum::{Domain, QuantumModelKind};
use vacfield::{FieldSource, IntegratorKind, ModelKind, Particle, VacuumField, Vec3};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default = "default_models")]
    pub models: Vec<String>,
    pub particle: ParticleConfig,
    pub field: FieldConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default = "default_tau_end")]
    pub tau_end: f64,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub compare: CompareConfig,
    #[serde(default)]
    pub maxwell: Option<MaxwellConfig>,
    #[serde(default)]
    pub quantum: Option<QuantumConfig>,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// Output directory, overridden by `--out` or the environment.
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_models() -> Vec<String> {
    vec!["M1".into()]
}
fn default_tau_end() -> f64 {
    10.0
}
fn default_h() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    #[serde(default = "one")]
    pub q: f64,
    pub u0: [f64; 3],
    #[serde(default)]
    pub r0: [f64; 3],
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub w_inf: f64,
    #[serde(default)]
    pub sources: Vec<SourceConfig>,
    /// Uniform background vector potential.
    #[serde(default)]
    pub a0: [f64; 3],
    /// Uniform background magnetic field.
    #[serde(default)]
    pub b0: [f64; 3],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub qs: f64,
    #[serde(default)]
    pub r0: [f64; 3],
    #[serde(default)]
    pub uf: [f64; 3],
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    FieldSource::<f64>::default_eps()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegratorConfig {
    Rk4,
    ImplicitMidpoint {
        #[serde(default = "default_mid_tol")]
        tol: f64,
        #[serde(default = "default_max_iter")]
        max_iter: usize,
    },
    Rk45 {
        atol: f64,
        rtol: f64,
    },
}

fn default_mid_tol() -> f64 {
    1e-12
}
fn default_max_iter() -> usize {
    50
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig::ImplicitMidpoint { tol: default_mid_tol(), max_iter: default_max_iter() }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Also compare both runs against the closed-form gyration in a uniform B.
    #[serde(default)]
    pub analytic_gyration: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Vacuum,
    PlaneWave {
        amplitude: [f64; 3],
        k: [f64; 3],
        #[serde(default)]
        phi0: f64,
    },
    Dipole {
        p0: f64,
        omega: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaxwellConfig {
    pub problem: ProblemConfig,
    #[serde(default = "default_grid_n")]
    pub n: usize,
    #[serde(default = "default_grid_h")]
    pub h: f64,
    /// dt = cfl·h
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_grid_steps")]
    pub steps: usize,
    /// Repeat on a grid with half the spacing and report convergence ratios.
    #[serde(default = "yes")]
    pub refine: bool,
    /// Amplitude of a static gauge perturbation added to the initial data.
    #[serde(default)]
    pub gauge_violation: f64,
    #[serde(default = "default_gauge_width")]
    pub gauge_width: f64,
    /// Write the final coarse-grid potentials as a raw binary dump.
    #[serde(default)]
    pub dump: bool,
}

fn default_grid_n() -> usize {
    48
}
fn default_grid_h() -> f64 {
    0.1
}
fn default_cfl() -> f64 {
    0.5
}
fn default_grid_steps() -> usize {
    30
}
fn default_gauge_width() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: f64,
    pub sigma: f64,
    #[serde(default)]
    pub k: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumConfig {
    #[serde(default = "default_quantum_kinds")]
    pub kinds: Vec<String>,
    pub n: usize,
    pub dx: f64,
    pub x0: f64,
    pub hbar: f64,
    #[serde(default = "default_domain")]
    pub domain: String,
    pub packet: PacketConfig,
    pub dtau: f64,
    pub steps: usize,
    /// Snapshot interval in steps; 0 writes only the first and last state.
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default = "default_hks")]
    pub dispersion_hk: Vec<f64>,
    #[serde(default = "minus_one")]
    pub dispersion_w: f64,
}

fn default_quantum_kinds() -> Vec<String> {
    vec!["free".into(), "minimal".into(), "modified".into()]
}
fn default_domain() -> String {
    "periodic".into()
}
fn default_hks() -> Vec<f64> {
    vec![0.05, 0.1, 0.2]
}
fn minus_one() -> f64 {
    -1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    /// Random states per model for the pointwise suites.
    #[serde(default = "default_states")]
    pub states: usize,
    /// Half-width of the box positions are drawn from.
    #[serde(default = "default_box")]
    pub half_width: f64,
}

fn default_states() -> usize {
    200
}
fn default_box() -> f64 {
    2.0
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self { states: default_states(), half_width: default_box() }
    }
}

/// Every pass/fail threshold, with its default.
#[derive(Debug, Clone, Deserialize, serde::Serialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub energy_drift: f64,
    pub position: f64,
    pub force_gap: f64,
    pub legendre: f64,
    pub legendre_fd: f64,
    pub gradient_fd: f64,
    pub el_ratio: [f64; 2],
    pub maxwell_ratio: [f64; 2],
    pub gauge_break_ratio: f64,
    pub norm_drift: f64,
    pub dispersion_exponent: [f64; 2],
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            energy_drift: 1e-8,
            position: 1e-6,
            force_gap: 1e-12,
            legendre: 1e-9,
            legendre_fd: 1e-6,
            gradient_fd: 1e-6,
            el_ratio: [3.5, 4.5],
            maxwell_ratio: [3.2, 4.8],
            gauge_break_ratio: 2.0,
            norm_drift: 1e-11,
            dispersion_exponent: [3.9, 4.1],
        }
    }
}

/// A config that parsed but failed validation, or could not be read at all.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// The validated, library-typed form of a scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub raw: ScenarioConfig,
    pub models: Vec<ModelKind>,
    pub particle: Particle<f64>,
    pub r0: Vec3<f64>,
    pub field: VacuumField<f64>,
    pub integrator: IntegratorKind<f64>,
    pub maxwell: Option<WaveProblem<f64>>,
    pub quantum: Option<(Vec<QuantumModelKind>, Domain)>,
}

pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    let raw: ScenarioConfig =
        serde_json::from_str(&text).map_err(|e| err(format!("{}: {e}", path.display())))?;
    validate(raw)
}

pub fn validate(raw: ScenarioConfig) -> Result<Scenario, ConfigError> {
    if raw.name.is_empty() || raw.name.contains(['/', '\\']) {
        return Err(err("name must be a non-empty file stem"));
    }
    let models = raw
        .models
        .iter()
        .map(|m| m.parse::<ModelKind>().map_err(|e| err(format!("models: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if models.is_empty() {
        return Err(err("models: at least one model is required"));
    }
    let p = &raw.particle;
    let particle = Particle::new(p.q, Vec3::from(p.u0)).map_err(|e| err(format!("particle.u0: {e}")))?;
    let f = &raw.field;
    let mut field = VacuumField::new(f.w_inf, p.q).map_err(|e| err(format!("field / particle.q: {e}")))?;
    for (i, s) in f.sources.iter().enumerate() {
        let src = FieldSource::new(s.qs, Vec3::from(s.r0), Vec3::from(s.uf), s.eps)
            .map_err(|e| err(format!("field.sources[{i}]: {e}")))?;
        field = field.with_source(src);
    }
    field = field.with_uniform_potential(Vec3::from(f.a0)).with_uniform_magnetic(Vec3::from(f.b0));
    let r0 = Vec3::from(p.r0);
    let w0 = field.eval_w(r0, 0.0);
    if !(w0 < 0.0) {
        return Err(err(format!("particle.r0: vacuum field must be negative there, got W = {w0}")));
    }
    let integrator = match raw.integrator {
        IntegratorConfig::Rk4 => IntegratorKind::Rk4,
        IntegratorConfig::ImplicitMidpoint { tol, max_iter } => IntegratorKind::ImplicitMidpoint { tol, max_iter },
        IntegratorConfig::Rk45 { atol, rtol } => IntegratorKind::Rk45 { atol, rtol },
    };
    integrator.validate().map_err(|e| err(format!("integrator: {e}")))?;
    if !(raw.h > 0.0 && raw.h.is_finite()) || !(raw.tau_end > 0.0 && raw.tau_end.is_finite()) {
        return Err(err("h and tau_end must be positive and finite"));
    }
    if raw.checks.states == 0 || !(raw.checks.half_width > 0.0) {
        return Err(err("checks: states and half_width must be positive"));
    }
    let t = &raw.tolerances;
    let ranges = [t.el_ratio, t.maxwell_ratio, t.dispersion_exponent];
    let scalars =
        [t.energy_drift, t.position, t.force_gap, t.legendre, t.legendre_fd, t.gradient_fd, t.gauge_break_ratio, t.norm_drift];
    if scalars.iter().any(|v| !(*v > 0.0)) || ranges.iter().any(|r| !(r[0] < r[1])) {
        return Err(err("tolerances must be positive and ranges increasing"));
    }

    let maxwell = match &raw.maxwell {
        None => None,
        Some(m) => {
            if m.n < 9 || !(m.h > 0.0) || m.steps == 0 {
                return Err(err("maxwell: need n >= 9, h > 0 and steps >= 1"));
            }
            if !(m.cfl > 0.0 && m.cfl <= 1.0 / 3f64.sqrt()) {
                return Err(err(format!("maxwell.cfl: must lie in (0, 1/sqrt(3)], got {}", m.cfl)));
            }
            let problem = match &m.problem {
                ProblemConfig::Vacuum => Ok(WaveProblem::Vacuum),
                ProblemConfig::PlaneWave { amplitude, k, phi0 } => {
                    WaveProblem::plane_wave(Vec3::from(*amplitude), Vec3::from(*k), *phi0)
                }
                ProblemConfig::Dipole { p0, omega, sigma } => WaveProblem::dipole(*p0, *omega, *sigma),
            }
            .map_err(|e| err(format!("maxwell.problem: {e}")))?;
            Some(problem)
        }
    };

    let quantum = match &raw.quantum {
        None => None,
        Some(q) => {
            let kinds = q
                .kinds
                .iter()
                .map(|k| match k.as_str() {
                    "free" => Ok(QuantumModelKind::FreeVacuum),
                    "minimal" => Ok(QuantumModelKind::MinimalCoupling),
                    "modified" => Ok(QuantumModelKind::Modified),
                    other => Err(err(format!("quantum.kinds: unknown model '{other}' (free, minimal, modified)"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let domain = match q.domain.as_str() {
                "periodic" => Domain::Periodic,
                "fixed_ends" => Domain::FixedEnds,
                other => return Err(err(format!("quantum.domain: unknown domain '{other}'"))),
            };
            if q.n < 3 || !(q.dx > 0.0) || !(q.hbar > 0.0) || !(q.dtau > 0.0) || !(q.packet.sigma > 0.0) {
                return Err(err("quantum: need n >= 3 and positive dx, hbar, dtau, packet.sigma"));
            }
            if q.dispersion_hk.len() < 2 || q.dispersion_hk.iter().any(|hk| !(*hk > 0.0 && *hk < q.dispersion_w.abs())) {
                return Err(err("quantum.dispersion_hk: need at least two values in (0, |dispersion_w|)"));
            }
            if !(q.dispersion_w < 0.0) {
                return Err(err("quantum.dispersion_w must be negative"));
            }
            Some((kinds, domain))
        }
    };

    Ok(Scenario { raw, models, particle, r0, field, integrator, maxwell, quantum })
}

impl Scenario {
    pub fn tol(&self) -> &Tolerances {
        &self.raw.tolerances
    }

    pub fn name(&self) -> &str {
        &self.raw.name
    }
}
