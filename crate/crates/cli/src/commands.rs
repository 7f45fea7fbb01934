use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vacfield::dynamics::Lagrangian;
use vacfield::maxwell::{evolve_wave, maxwell_residuals, GridField, ResidualReport};
use vacfield::quantum::{
    build_hamiltonian, cn_step, dispersion_check, fitted_exponent, model_gap, Profiles, QuantumModel,
    QuantumModelKind, WaveState,
};
use vacfield::{
    compare_trajectories, euler_lagrange_residual, force, hamiltonian, simulate, vector_field, ForceKind, ModelKind,
    PhasePoint, TrajectoryRecord, VacuumField, Vec3,
};

use crate::config::Scenario;
use crate::report::{config_err, run_err, CliError, Output, Report};

fn rand_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec3<f64> {
    Vec3::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

fn rand_ball(rng: &mut ChaCha8Rng, radius: f64) -> Vec3<f64> {
    loop {
        let v = rand_vec(rng, radius);
        if v.norm() < radius {
            return v;
        }
    }
}

fn fd_grad(f: impl Fn(Vec3<f64>) -> Option<f64>, x: Vec3<f64>, h: f64) -> Option<Vec3<f64>> {
    let mut g = [0.0; 3];
    for (i, gi) in g.iter_mut().enumerate() {
        let e = Vec3::<f64>::axis(i) * h;
        *gi = (f(x + e)? - f(x - e)?) / (2.0 * h);
    }
    Some(Vec3::from(g))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn write_trajectory(out: &Output, suffix: &str, rec: &TrajectoryRecord<f64>) -> Result<(), CliError> {
    let w = out.create(suffix)?;
    rec.write_csv(w).map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Serialize)]
struct RunSummary {
    model: String,
    file: String,
    samples: usize,
    completed: bool,
    terminated: Option<String>,
    energy_start: f64,
    energy_end: f64,
    max_relative_energy_drift: f64,
    max_clock_defect: f64,
}

fn run_model(sc: &Scenario, model: ModelKind, out: &Output, report: &mut Report) -> Result<(TrajectoryRecord<f64>, RunSummary), CliError> {
    let rec = simulate(model, &sc.particle, &sc.field, sc.r0, sc.raw.tau_end, &sc.integrator, sc.raw.h)
        .map_err(config_err(model.name()))?;
    let suffix = format!("{model}.csv");
    write_trajectory(out, &suffix, &rec)?;
    let drift = rec.max_relative_energy_drift();
    if let Some(e) = &rec.terminated {
        eprintln!("{model}: stopped after {} samples: {e}", rec.len());
    }
    report.holds(format!("{model} run completed"), rec.completed());
    let summary = RunSummary {
        model: model.to_string(),
        file: out.file_name(&suffix),
        samples: rec.len(),
        completed: rec.completed(),
        terminated: rec.terminated.as_ref().map(|e| e.to_string()),
        energy_start: rec.samples[0].energy,
        energy_end: rec.samples[rec.len() - 1].energy,
        max_relative_energy_drift: drift,
        max_clock_defect: rec.max_clock_defect(),
    };
    Ok((rec, summary))
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    scenario: &'a str,
    command: &'a str,
    pass: bool,
    checks: &'a [crate::report::Check],
    details: T,
}

fn finish<T: Serialize>(sc: &Scenario, out: &Output, command: &str, report: Report, details: T) -> Result<Report, CliError> {
    let summary =
        Summary { scenario: sc.name(), command, pass: report.passed(), checks: &report.checks, details };
    out.json(&format!("{command}.json"), &summary)?;
    Ok(report)
}

pub fn simulate_cmd(sc: &Scenario, out: &Output) -> Result<Report, CliError> {
    let mut report = Report::default();
    let mut runs = Vec::new();
    for &model in &sc.models {
        let (_, summary) = run_model(sc, model, out, &mut report)?;
        report.at_most(format!("{model} relative energy drift"), summary.max_relative_energy_drift, sc.tol().energy_drift);
        runs.push(summary);
    }
    #[derive(Serialize)]
    struct Details {
        integrator: &'static str,
        h: f64,
        tau_end: f64,
        runs: Vec<RunSummary>,
    }
    let details = Details { integrator: sc.integrator.name(), h: sc.raw.h, tau_end: sc.raw.tau_end, runs };
    finish(sc, out, "simulate", report, details)
}

/// Closed-form lab-time orbit in a uniform magnetic field with uniform W̄.
fn gyration(sc: &Scenario) -> impl Fn(f64) -> Vec3<f64> {
    let energy = -sc.field.w_inf;
    let omega = sc.field.background.b0 * (-sc.particle.q / energy);
    let u0 = sc.particle.u0;
    let r0 = sc.r0;
    move |t: f64| {
        let w = omega.norm();
        if w == 0.0 {
            return r0 + u0 * t;
        }
        let n = omega / w;
        let par = n * n.dot(u0);
        let perp = u0 - par;
        let th = w * t;
        r0 + par * t + (perp * th.sin() + n.cross(perp) * (1.0 - th.cos())) / w
    }
}

pub fn compare_cmd(sc: &Scenario, out: &Output) -> Result<Report, CliError> {
    if sc.models.len() != 2 {
        return Err(CliError::Config(format!("compare needs exactly two models, got {}", sc.models.len())));
    }
    let gyro = sc.raw.compare.analytic_gyration;
    if gyro && !sc.field.sources.is_empty() {
        return Err(CliError::Config("compare.analytic_gyration needs a field without sources".into()));
    }
    let mut report = Report::default();
    let (a, sa) = run_model(sc, sc.models[0], out, &mut report)?;
    let (b, sb) = run_model(sc, sc.models[1], out, &mut report)?;
    let (pos, energy) = compare_trajectories(&a, &b).map_err(run_err("compare"))?;
    report.at_most(format!("{} vs {} max position deviation", sc.models[0], sc.models[1]), pos, sc.tol().position);
    let mut circle = Vec::new();
    if gyro {
        let exact = gyration(sc);
        for (rec, model) in [(&a, sc.models[0]), (&b, sc.models[1])] {
            let dev = rec.samples.iter().map(|s| (s.r - exact(s.t)).norm()).fold(0.0, f64::max);
            report.at_most(format!("{model} vs analytic gyration"), dev, sc.tol().position);
            circle.push(dev);
        }
    }
    #[derive(Serialize)]
    struct Details {
        max_pos_dev: f64,
        /// Largest gap between the two energy columns; the models may carry different invariants.
        max_energy_dev: f64,
        analytic_dev: Vec<f64>,
        runs: [RunSummary; 2],
    }
    let details = Details { max_pos_dev: pos, max_energy_dev: energy, analytic_dev: circle, runs: [sa, sb] };
    finish(sc, out, "compare", report, details)
}

pub fn forces_cmd(sc: &Scenario, out: &Output, seed: u64) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = &sc.field;
    let q = field.q_test;
    let mut rows = Vec::with_capacity(sc.raw.checks.states);
    let (mut worst, mut largest_gap) = (0.0f64, 0.0f64);
    for _ in 0..sc.raw.checks.states {
        let r = rand_vec(&mut rng, sc.raw.checks.half_width);
        let t = rng.gen_range(-1.0..1.0);
        let u = rand_ball(&mut rng, 0.9);
        let c = force(ForceKind::ClassicalLorentz, field, r, u, q, t).map_err(run_err("classical force"))?;
        let m = force(ForceKind::ModifiedLorentz, field, r, u, q, t).map_err(run_err("modified force"))?;
        let expected = field.grad_a_dot(r, t, u).map_err(run_err("gradient term"))? * q;
        let gap = c - m;
        let defect = (gap - expected).max_abs();
        worst = worst.max(defect);
        largest_gap = largest_gap.max(gap.norm());
        rows.push(vec![r.x, r.y, r.z, t, u.x, u.y, u.z, c.x, c.y, c.z, m.x, m.y, m.z, gap.x, gap.y, gap.z, defect]);
    }
    let header = [
        "rx", "ry", "rz", "t", "ux", "uy", "uz", "fcx", "fcy", "fcz", "fmx", "fmy", "fmz", "gapx", "gapy", "gapz",
        "defect",
    ];
    out.table("forces.csv", &header, &rows)?;
    let mut report = Report::default();
    report.at_most("force gap minus q grad<A,u>", worst, sc.tol().force_gap);
    #[derive(Serialize)]
    struct Details {
        seed: u64,
        states: usize,
        max_gap_norm: f64,
        file: String,
    }
    let details = Details { seed, states: rows.len(), max_gap_norm: largest_gap, file: out.file_name("forces.csv") };
    finish(sc, out, "forces", report, details)
}

fn residuals(sc: &Scenario, n: usize, h: f64, steps: usize) -> Result<(GridField<f64>, ResidualReport), CliError> {
    let cfg = sc.raw.maxwell.as_ref().expect("validated");
    let problem = sc.maxwell.clone().expect("validated");
    let mut g = GridField::centered([n, n, n], h, cfg.cfl * h, problem).map_err(config_err("maxwell grid"))?;
    if cfg.gauge_violation != 0.0 {
        g.perturb_gauge(cfg.gauge_violation, cfg.gauge_width);
    }
    let g = evolve_wave(g, steps).map_err(run_err("maxwell evolution"))?;
    let r = maxwell_residuals(&g, steps).map_err(run_err("maxwell residuals"))?;
    Ok((g, r))
}

pub fn maxwell_cmd(sc: &Scenario, out: &Output) -> Result<Report, CliError> {
    let cfg = sc.raw.maxwell.as_ref().ok_or_else(|| CliError::Config("missing 'maxwell' section".into()))?;
    let mut report = Report::default();
    let (grid, coarse) = residuals(sc, cfg.n, cfg.h, cfg.steps)?;
    if cfg.dump {
        let w = out.create("maxwell.bin")?;
        grid.write_binary(w).map_err(|e| CliError::Io(e.to_string()))?;
    }
    drop(grid);
    let mut levels = vec![(cfg.n, cfg.h, coarse)];
    let mut ratios = None;
    if cfg.refine {
        let (_, fine) = residuals(sc, 2 * cfg.n, 0.5 * cfg.h, 2 * cfg.steps)?;
        let r = ResidualReport::maxwell_ratios(&coarse, &fine);
        if cfg.gauge_violation == 0.0 {
            for (name, v) in ["gauss", "faraday", "ampere", "no-monopole"].iter().zip(r) {
                report.within(format!("{name} residual ratio"), v, sc.tol().maxwell_ratio);
            }
        } else {
            report.below("gauss residual ratio under gauge violation", r[0], sc.tol().gauge_break_ratio);
        }
        ratios = Some(r);
        levels.push((2 * cfg.n, 0.5 * cfg.h, fine));
    }
    let rows: Vec<Vec<f64>> = levels
        .iter()
        .map(|(n, h, r)| vec![*n as f64, *h, cfg.cfl * h, r.gauss, r.faraday, r.ampere, r.nomono, r.gauge, r.continuity])
        .collect();
    out.table(
        "maxwell_convergence.csv",
        &["n", "h", "dt", "gauss", "faraday", "ampere", "nomono", "gauge", "continuity"],
        &rows,
    )?;
    #[derive(Serialize)]
    struct Details {
        residuals: Vec<ResidualReport>,
        ratios: Option<[f64; 4]>,
    }
    let details = Details { residuals: levels.iter().map(|l| l.2).collect(), ratios };
    finish(sc, out, "maxwell", report, details)
}

fn kind_name(kind: QuantumModelKind) -> &'static str {
    match kind {
        QuantumModelKind::FreeVacuum => "free",
        QuantumModelKind::MinimalCoupling => "minimal",
        QuantumModelKind::Modified => "modified",
    }
}

/// W̄ and the x-component of A sampled along the x axis at t = 0.
fn axis_profiles(field: &VacuumField<f64>, n: usize, x0: f64, dx: f64) -> Result<Profiles<f64>, CliError> {
    let mut w = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for i in 0..n {
        let r = Vec3::new(x0 + dx * i as f64, 0.0, 0.0);
        w.push(field.eval_w(r, 0.0));
        a.push(field.eval_a(r, 0.0).map_err(config_err("quantum profile"))?.x);
    }
    Ok(Profiles { w, a, q: field.q_test })
}

pub fn quantum_cmd(sc: &Scenario, out: &Output) -> Result<Report, CliError> {
    let cfg = sc.raw.quantum.as_ref().ok_or_else(|| CliError::Config("missing 'quantum' section".into()))?;
    let (kinds, domain) = sc.quantum.clone().expect("validated");
    let profiles = axis_profiles(&sc.field, cfg.n, cfg.x0, cfg.dx)?;
    let mut report = Report::default();

    #[derive(Serialize)]
    struct Run {
        model: &'static str,
        norm_start: f64,
        norm_end: f64,
        mean_start: f64,
        mean_end: f64,
        variance_start: f64,
        variance_end: f64,
        gap_end: f64,
        snapshots: Vec<String>,
    }
    let mut runs = Vec::new();
    let mut gap_rows = Vec::new();
    for kind in kinds {
        let model = QuantumModel { kind, profiles: profiles.clone() };
        let op = build_hamiltonian(&model, cfg.n, cfg.dx, cfg.hbar, domain).map_err(config_err("quantum operator"))?;
        let p = &cfg.packet;
        let mut s = WaveState::gaussian(cfg.n, cfg.x0, cfg.dx, cfg.hbar, domain, p.center, p.sigma, p.k)
            .map_err(config_err("quantum packet"))?;
        let start = s.clone();
        let mut snapshots = Vec::new();
        let mut snap = |s: &WaveState<f64>, step: usize| -> Result<(), CliError> {
            let suffix = format!("psi_{}_{step:06}.csv", kind_name(kind));
            s.write_csv(out.create(&suffix)?).map_err(|e| CliError::Io(e.to_string()))?;
            snapshots.push(out.file_name(&suffix));
            Ok(())
        };
        snap(&s, 0)?;
        for step in 1..=cfg.steps {
            s = cn_step(&op, &s, cfg.dtau).map_err(run_err("crank-nicolson step"))?;
            if step == cfg.steps || (cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
                snap(&s, step)?;
            }
        }
        let (n0, n1) = (start.norm2().sqrt(), s.norm2().sqrt());
        report.at_most(format!("{} norm drift", kind_name(kind)), (n1 - n0).abs(), sc.tol().norm_drift);
        let gap0 = model_gap(&start, &profiles).map_err(run_err("model gap"))?;
        let gap1 = model_gap(&s, &profiles).map_err(run_err("model gap"))?;
        let k = match kind {
            QuantumModelKind::FreeVacuum => 0.0,
            QuantumModelKind::MinimalCoupling => 1.0,
            QuantumModelKind::Modified => 2.0,
        };
        gap_rows.push(vec![k, 0.0, gap0]);
        gap_rows.push(vec![k, cfg.steps as f64 * cfg.dtau, gap1]);
        let (m0, v0) = start.position_moments();
        let (m1, v1) = s.position_moments();
        runs.push(Run {
            model: kind_name(kind),
            norm_start: n0,
            norm_end: n1,
            mean_start: m0,
            mean_end: m1,
            variance_start: v0,
            variance_end: v1,
            gap_end: gap1,
            snapshots,
        });
    }
    out.table("quantum_gap.csv", &["model", "tau", "gap"], &gap_rows)?;

    let mut disp_rows = Vec::new();
    let mut errors = Vec::new();
    for &hk in &cfg.dispersion_hk {
        let (exact, truncated, e) = dispersion_check(hk, cfg.dispersion_w, 1.0).map_err(config_err("dispersion"))?;
        disp_rows.push(vec![hk, exact, truncated, e]);
        errors.push(e);
    }
    out.table("dispersion.csv", &["hk", "exact", "truncated", "error"], &disp_rows)?;
    let exponent = fitted_exponent(&cfg.dispersion_hk, &errors);
    report.within("dispersion error exponent", exponent, sc.tol().dispersion_exponent);

    #[derive(Serialize)]
    struct Details {
        runs: Vec<Run>,
        dispersion_exponent: f64,
        model_column: &'static str,
    }
    let details = Details { runs, dispersion_exponent: exponent, model_column: "0 free, 1 minimal, 2 modified" };
    finish(sc, out, "quantum", report, details)
}

pub fn checks_cmd(sc: &Scenario, out: &Output, seed: u64) -> Result<Report, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let field = &sc.field;
    let tol = sc.tol();
    let hw = sc.raw.checks.half_width;
    let mut report = Report::default();

    #[derive(Serialize, Default)]
    struct ModelChecks {
        model: String,
        legendre: f64,
        legendre_fd: f64,
        flow_fd: Option<f64>,
        skipped: usize,
        el_residuals: Option<[f64; 2]>,
    }
    let mut per_model = Vec::new();

    // ∇W̄ against central differences
    let mut grad_worst = 0.0f64;
    for _ in 0..sc.raw.checks.states {
        let r = rand_vec(&mut rng, hw);
        let t = rng.gen_range(-1.0..1.0);
        let g = field.grad_w(r, t);
        let fd = fd_grad(|x| Some(field.eval_w(x, t)), r, 1e-5).expect("total");
        grad_worst = grad_worst.max((g - fd).norm() / g.norm().max(1e-3));
    }
    report.at_most("grad W vs finite differences", grad_worst, tol.gradient_fd);

    for &model in &sc.models {
        let mut mc = ModelChecks { model: model.to_string(), ..Default::default() };
        let mut flow_worst = 0.0f64;
        for _ in 0..sc.raw.checks.states {
            let r = rand_vec(&mut rng, hw);
            let t = rng.gen_range(-1.0..1.0);
            let rdot = if model == ModelKind::M0 { rand_ball(&mut rng, 0.9) } else { rand_vec(&mut rng, 1.5) };
            let m0 = -field.eval_w(r, t);
            if !(m0 > 0.0) {
                mc.skipped += 1;
                continue;
            }
            let lag = Lagrangian::new(model, field).with_rest_mass(m0);
            let (Ok(p), Ok(l)) = (lag.legendre_momentum(r, rdot, t), lag.value(r, rdot, t)) else {
                mc.skipped += 1;
                continue;
            };
            let mom = if model == ModelKind::M0 { p - field.eval_a(r, t).map_err(run_err("A"))? * field.q_test } else { p };
            let ph = PhasePoint { r, mom, tau: 0.0, t, rest_mass: m0 };
            let h = hamiltonian(model, &ph, field).map_err(run_err("hamiltonian"))?;
            mc.legendre = mc.legendre.max(rel(p.dot(rdot) - l, h));
            let xidot = lag.drift(r, rdot, t).map_err(run_err("drift"))?;
            let fd = if model == ModelKind::M2 {
                fd_grad(|v| lag.value_with_drift(r, v, xidot, t).ok(), rdot, 1e-6)
            } else {
                fd_grad(|v| lag.value(r, v, t).ok(), rdot, 1e-6)
            };
            if let Some(fd) = fd {
                mc.legendre_fd = mc.legendre_fd.max((fd - p).max_abs() / p.max_abs().max(1.0));
            }
            if model != ModelKind::M0 {
                let (rd, md) = vector_field(model, &ph, field).map_err(run_err("vector field"))?;
                let hp = fd_grad(|x| hamiltonian(model, &PhasePoint { mom: x, ..ph }, field).ok(), mom, 1e-6);
                let hr = fd_grad(|x| hamiltonian(model, &PhasePoint { r: x, ..ph }, field).ok(), r, 1e-6);
                if let (Some(hp), Some(hr)) = (hp, hr) {
                    let e = ((rd - hp).norm() / rd.norm().max(1e-2)).max((md + hr).norm() / md.norm().max(1e-2));
                    flow_worst = flow_worst.max(e);
                }
            }
        }
        report.at_most(format!("{model} <p,rdot> - L vs H"), mc.legendre, tol.legendre);
        report.at_most(format!("{model} dL/drdot vs finite differences"), mc.legendre_fd, tol.legendre_fd);
        if model != ModelKind::M0 {
            report.at_most(format!("{model} flow vs grad H"), flow_worst, tol.gradient_fd);
            mc.flow_fd = Some(flow_worst);
        }
        if matches!(model, ModelKind::M1 | ModelKind::M3) {
            let el = |h: f64| -> Result<f64, CliError> {
                let rec = simulate(model, &sc.particle, field, sc.r0, sc.raw.tau_end, &sc.integrator, h)
                    .map_err(config_err("euler-lagrange run"))?;
                euler_lagrange_residual(model, &rec, field).map_err(run_err("euler-lagrange residual"))
            };
            let (coarse, fine) = (el(2.0 * sc.raw.h)?, el(sc.raw.h)?);
            report.within(format!("{model} Euler-Lagrange residual ratio"), coarse / fine, tol.el_ratio);
            mc.el_residuals = Some([coarse, fine]);
        }
        per_model.push(mc);
    }
    #[derive(Serialize)]
    struct Details {
        seed: u64,
        states: usize,
        grad_w_fd: f64,
        models: Vec<ModelChecks>,
    }
    let details = Details { seed, states: sc.raw.checks.states, grad_w_fd: grad_worst, models: per_model };
    finish(sc, out, "checks", report, details)
}
