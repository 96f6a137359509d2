//! Configuration-driven scenario runner: executes each mode and emits the
//! machine-readable `report.json` plus mode-specific CSV artifacts.
//!
//! Exit codes: 0 success, 2 solver non-convergence, 3 configuration error,
//! 4 blow-up.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array1;

use crate::attractor::{
    enumerate_equilibria, equilibrium_bound, plan_steering, NewtonOptions, PlanConfig,
};
use crate::config::{RawConfig, RunMode, ScenarioConfig};
use crate::control::{local_control, ControlSolution, HumConfig, HumProblem, PicardConfig};
use crate::dynamics::{fit_energy_decay, Force, SimOptions, Simulator};
use crate::error::{Error, Result};
use crate::model::{
    bump_field, indicator_field, linearized_potential, total_energy, NonlinearitySpec,
};
use crate::observability::{
    check_nonlinear_observability, plate_gramian, schrodinger_gramian, GramianReport,
    PlateObsMode,
};
use crate::spectral::{random_state, ModalState};

/// Machine-readable run summary; deterministic except the timestamp.
#[derive(Debug, serde::Serialize)]
pub struct Report {
    pub config_hash: String,
    pub mode: &'static str,
    pub seed: u64,
    pub timestamp: String,
    pub numbers: BTreeMap<String, f64>,
    pub notes: BTreeMap<String, String>,
}

impl Report {
    fn new(cfg: &ScenarioConfig) -> Report {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Report {
            config_hash: cfg.config_hash.clone(),
            mode: cfg.run.mode.name(),
            seed: cfg.run.seed,
            timestamp: format!("{now:.3}"),
            numbers: BTreeMap::new(),
            notes: BTreeMap::new(),
        }
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.17e}")
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut f = std::fs::File::create(dir.join(name))?;
    f.write_all(text.as_bytes())?;
    Ok(())
}

fn write_report(dir: &Path, report: &Report) -> Result<()> {
    write_text(dir, "report.json", &serde_json::to_string_pretty(report)?)
}

/// Every headline number lands in `summary.csv` as well.
fn write_summary_csv(dir: &Path, numbers: &BTreeMap<String, f64>) -> Result<()> {
    let mut text = String::from("metric,value\n");
    for (k, v) in numbers {
        text.push_str(&format!("{k},{}\n", fmt17(*v)));
    }
    write_text(dir, "summary.csv", &text)
}

fn write_energy_csv(
    dir: &Path,
    spec: &NonlinearitySpec,
    traj: &crate::dynamics::Trajectory,
) -> Result<()> {
    let mut text = String::from("t,E,kinetic,bending,mass,potential,dissipation_cum,norm_X\n");
    let cum = traj.dissipated_cumulative();
    for (i, state) in traj.states.iter().enumerate() {
        let e = total_energy(spec, state)?;
        let diss = cum.get(i).copied().unwrap_or(0.0);
        text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt17(traj.times[i]),
            fmt17(e.total),
            fmt17(e.kinetic),
            fmt17(e.bending),
            fmt17(e.mass),
            fmt17(e.potential),
            fmt17(diss),
            fmt17(state.x_norm()),
        ));
    }
    write_text(dir, "energy.csv", &text)
}

fn write_gramian_csv(dir: &Path, rep: &GramianReport) -> Result<()> {
    let mut text = String::from("truncation,mu_min\n");
    for (cut, mu) in &rep.eigenvalue_history {
        text.push_str(&format!("{cut},{}\n", fmt17(*mu)));
    }
    write_text(dir, "gramian.csv", &text)?;
    write_text(dir, "gramian_report.json", &serde_json::to_string_pretty(rep)?)
}

fn write_control(dir: &Path, name: &str, sol: &ControlSolution) -> Result<()> {
    #[derive(serde::Serialize)]
    struct Header {
        duration: f64,
        segments: Vec<(f64, usize)>,
        iterations: usize,
        terminal_error: f64,
        residual_history: Vec<f64>,
    }
    let header = Header {
        duration: sol.duration(),
        segments: sol.segments.iter().map(|s| (s.dt, s.samples.len())).collect(),
        iterations: sol.iterations,
        terminal_error: sol.terminal_error,
        residual_history: sol.residual_history.clone(),
    };
    write_text(dir, &format!("{name}.json"), &serde_json::to_string_pretty(&header)?)?;

    let mut text = String::new();
    if let Some(first) = sol.segments.first().and_then(|s| s.samples.first()) {
        text.push_str("t");
        for i in 0..first.len() {
            text.push_str(&format!(",g{i}"));
        }
        text.push('\n');
    }
    let mut t0 = 0.0;
    for seg in &sol.segments {
        for (i, sample) in seg.samples.iter().enumerate() {
            let t = t0 + seg.dt * i as f64;
            text.push_str(&fmt17(t));
            for v in sample.iter() {
                text.push(',');
                text.push_str(&fmt17(*v));
            }
            text.push('\n');
        }
        t0 += seg.duration();
    }
    write_text(dir, &format!("{name}.csv"), &text)
}

/// Executes a validated scenario and writes artifacts into the output
/// directory. Returns the report on success.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Report> {
    let dir = Path::new(&cfg.output.directory).to_path_buf();
    std::fs::create_dir_all(&dir)?;
    let mut report = Report::new(cfg);
    let geom = cfg.build_geometry()?;
    let spec = cfg.build_nonlinearity(&geom)?;

    match cfg.run.mode {
        RunMode::Simulate => {
            let damping = if cfg.run.damping { Some(cfg.build_damping(&geom)?) } else { None };
            let sim =
                Simulator::new(geom.clone(), Force::Nonlinear(spec.clone()), damping.as_ref())?;
            let state0 = random_state(&geom, cfg.run.seed, cfg.run.initial_norm);
            let mut opts = SimOptions::new(cfg.run.dt, cfg.run.t_final);
            opts.damping = cfg.run.damping;
            let traj = sim.simulate(&state0, &opts)?;
            write_energy_csv(&dir, &spec, &traj)?;
            let e0 = traj.energy[0];
            let ef = *traj.energy.last().unwrap();
            let dissipated = traj.total_dissipated();
            report.numbers.insert("energy_initial".into(), e0);
            report.numbers.insert("energy_final".into(), ef);
            report.numbers.insert("dissipated_total".into(), dissipated);
            report
                .numbers
                .insert("identity_defect".into(), (ef - e0 + dissipated).abs());
            report
                .numbers
                .insert("x_norm_final".into(), traj.final_state().x_norm());
            if !cfg.run.damping && e0 > 0.0 {
                let drift = traj
                    .energy
                    .iter()
                    .fold(0.0f64, |m, &e| m.max((e - e0).abs()))
                    / e0;
                report.numbers.insert("relative_energy_drift".into(), drift);
            }
            if cfg.run.damping {
                if let Ok(fit) = fit_energy_decay(
                    &traj.times,
                    &traj.energy,
                    0.1 * cfg.run.t_final,
                    cfg.run.t_final,
                ) {
                    report.numbers.insert("decay_rate".into(), fit.rate);
                    report.numbers.insert("decay_r_squared".into(), fit.r_squared);
                }
            }
        }
        RunMode::Observability => {
            let damping = cfg.build_damping(&geom)?;
            let tf = geom.base();
            let weight = match cfg.run.weight.as_str() {
                "indicator" => indicator_field(tf, damping.boxes()),
                _ => bump_field(&geom, tf, damping.boxes(), damping.delta()),
            };
            match cfg.run.observability_kind.as_str() {
                "schrodinger" => {
                    let rep =
                        schrodinger_gramian(&geom, &weight, cfg.run.t_final, cfg.run.dt)?;
                    write_gramian_csv(&dir, &rep)?;
                    report.numbers.insert("mu_min".into(), rep.mu_min);
                    report.numbers.insert("c_obs".into(), rep.c_obs);
                    report
                        .numbers
                        .insert("observable".into(), if rep.observable { 1.0 } else { 0.0 });
                }
                "plate" => {
                    let mode = match cfg.run.plate_mode.as_str() {
                        "boundary" => PlateObsMode::BoundaryBend,
                        "boundaryless" => PlateObsMode::BoundarylessField,
                        _ => PlateObsMode::DampedField,
                    };
                    let weight = if mode == PlateObsMode::DampedField {
                        damping.gamma_sq().mapv(f64::sqrt)
                    } else {
                        weight
                    };
                    let pot;
                    let potential = if cfg.run.potential_constant != 0.0 {
                        pot = Array1::from_elem(tf.grid_len(), cfg.run.potential_constant);
                        Some(&pot)
                    } else {
                        None
                    };
                    let rep = plate_gramian(
                        &geom,
                        &weight,
                        cfg.run.t_final,
                        potential,
                        mode,
                        cfg.run.sobolev_s,
                        cfg.run.dt,
                    )?;
                    write_gramian_csv(&dir, &rep)?;
                    report.numbers.insert("mu_min".into(), rep.mu_min);
                    report.numbers.insert("c_obs".into(), rep.c_obs);
                    report
                        .numbers
                        .insert("observable".into(), if rep.observable { 1.0 } else { 0.0 });
                }
                "nonlinear" => {
                    let rep = check_nonlinear_observability(
                        &spec,
                        &damping,
                        cfg.run.energy_cap,
                        cfg.run.samples,
                        cfg.run.t_final,
                        cfg.run.dt,
                        cfg.run.seed,
                    )?;
                    let mut text = String::from("seed,energy0,dissipated,ratio\n");
                    for s in &rep.samples {
                        text.push_str(&format!(
                            "{},{},{},{}\n",
                            s.seed,
                            fmt17(s.energy0),
                            fmt17(s.dissipated),
                            fmt17(s.ratio)
                        ));
                    }
                    write_text(&dir, "nonlinear_observability.csv", &text)?;
                    report.numbers.insert("max_ratio".into(), rep.max_ratio);
                    report.numbers.insert("samples".into(), rep.samples.len() as f64);
                    let violations =
                        rep.samples.iter().filter(|s| s.ucp_violation).count() as f64;
                    report.numbers.insert("ucp_violations".into(), violations);
                }
                other => {
                    return Err(Error::Options(format!(
                        "unknown observability kind `{other}`"
                    )))
                }
            }
        }
        RunMode::Hum => {
            let damping = cfg.build_damping(&geom)?;
            let potential = linearized_potential(&spec, &Array1::zeros(geom.mode_count()))?;
            let hum = HumProblem::new(geom.clone(), &damping, Some(potential))?;
            let mut hum_cfg = HumConfig::new(cfg.run.t_final, cfg.run.dt);
            hum_cfg.cg_tol = cfg.run.cg_tol;
            hum_cfg.check_observability = cfg.run.check_observability;
            let target = random_state(&geom, cfg.run.seed, cfg.run.target_norm);
            let sol = hum.solve(&target, &hum_cfg)?;
            write_control(&dir, "control", &sol)?;
            report.numbers.insert("terminal_error".into(), sol.terminal_error);
            report.numbers.insert("iterations".into(), sol.iterations as f64);
            report.numbers.insert("duration".into(), sol.duration());
            report
                .numbers
                .insert("support_leak".into(), sol.support_leak(hum.gamma_sq()));
        }
        RunMode::LocalControl => {
            let damping = cfg.build_damping(&geom)?;
            let guess = match cfg.run.guesses.first() {
                Some(&c) => ScenarioConfig::constant_guess(&geom, c),
                None => Array1::zeros(geom.mode_count()),
            };
            let eq = crate::attractor::solve_equilibrium(&spec, &guess, &NewtonOptions::default())?;
            let e_state = eq.state(&geom);
            let probe = random_state(&geom, cfg.run.seed, cfg.run.start_norm);
            let start = ModalState::new(
                &e_state.u + &probe.u,
                probe.v.clone(),
                geom.clone(),
                0.0,
            )?;
            let mut pc = PicardConfig::new(cfg.run.t_final, cfg.run.dt);
            pc.tol = cfg.run.tolerance;
            pc.hum.cg_tol = cfg.run.cg_tol;
            pc.hum.check_observability = cfg.run.check_observability;
            let sol = local_control(&spec, &damping, &eq.e_hat, &start, &e_state, &pc)?;
            write_control(&dir, "control", &sol)?;
            report.numbers.insert("terminal_error".into(), sol.terminal_error);
            report.numbers.insert("iterations".into(), sol.iterations as f64);
            report.numbers.insert("duration".into(), sol.duration());
            report.numbers.insert("equilibrium_residual".into(), eq.residual);
        }
        RunMode::Steer => {
            let damping = cfg.build_damping(&geom)?;
            let opts = NewtonOptions::default();
            let mut seeds: Vec<Array1<f64>> = cfg
                .run
                .guesses
                .iter()
                .map(|&c| ScenarioConfig::constant_guess(&geom, c))
                .collect();
            for i in 0..cfg.run.random_guesses {
                seeds.push(random_state(&geom, cfg.run.seed + 1000 + i as u64, cfg.run.guess_norm).u);
            }
            let mut eqs = enumerate_equilibria(&spec, &seeds, &opts);
            if eqs.is_empty() {
                return Err(Error::NonConvergence("no equilibria found from seeds".into()));
            }
            let u0 = match cfg.run.start_constant {
                Some(c) => ScenarioConfig::constant_state(&geom, c),
                None => random_state(&geom, cfg.run.seed, cfg.run.start_norm),
            };
            let u1 = match cfg.run.end_constant {
                Some(c) => ScenarioConfig::constant_state(&geom, c),
                None => ModalState::zero(geom.clone()),
            };
            let mut plan_cfg = PlanConfig::new(cfg.run.control_time, cfg.run.dt);
            plan_cfg.picard.tol = cfg.run.tolerance;
            plan_cfg.picard.hum.cg_tol = cfg.run.cg_tol;
            plan_cfg.seed = cfg.run.seed;
            let (plan, control, _traj) =
                plan_steering(&spec, &damping, &u0, &u1, &mut eqs, &plan_cfg)?;
            write_text(&dir, "plan.json", &serde_json::to_string_pretty(&plan)?)?;
            write_control(&dir, "control", &control)?;
            report.numbers.insert("terminal_error".into(), plan.terminal_error);
            report.numbers.insert("total_duration".into(), plan.total_duration);
            report.numbers.insert("t_max".into(), plan.budget.t_max);
            report.numbers.insert("legs".into(), plan.legs.len() as f64);
            report.numbers.insert("equilibria".into(), eqs.len() as f64);
        }
        RunMode::Equilibria => {
            let opts = NewtonOptions::default();
            let mut seeds: Vec<Array1<f64>> = cfg
                .run
                .guesses
                .iter()
                .map(|&c| ScenarioConfig::constant_guess(&geom, c))
                .collect();
            for i in 0..cfg.run.random_guesses {
                seeds.push(random_state(&geom, cfg.run.seed + 1000 + i as u64, cfg.run.guess_norm).u);
            }
            let eqs = enumerate_equilibria(&spec, &seeds, &opts);
            let mut text = String::from("index,mean_value,x_norm,residual,bound_lhs,bound_rhs\n");
            let mut max_residual = 0.0f64;
            for (i, eq) in eqs.iter().enumerate() {
                let (lhs, rhs) = equilibrium_bound(&spec, &eq.e_hat)?;
                let state = eq.state(&geom);
                text.push_str(&format!(
                    "{i},{},{},{},{},{}\n",
                    fmt17(eq.e_hat[0]),
                    fmt17(state.x_norm()),
                    fmt17(eq.residual),
                    fmt17(lhs),
                    fmt17(rhs)
                ));
                max_residual = max_residual.max(eq.residual);
            }
            write_text(&dir, "equilibria.csv", &text)?;
            report.numbers.insert("count".into(), eqs.len() as f64);
            report.numbers.insert("max_residual".into(), max_residual);
        }
    }

    write_summary_csv(&dir, &report.numbers)?;
    write_report(&dir, &report)?;
    Ok(report)
}

/// Full CLI entry: reads, overrides, validates, runs, maps errors to exit
/// codes, and leaves diagnostics in `report.json` on failure.
pub fn execute(
    mode: RunMode,
    config_path: &Path,
    sets: &[String],
    out: Option<&str>,
    seed: Option<u64>,
) -> i32 {
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: cannot read {}: {e}", config_path.display());
            return 3;
        }
    };
    let mut raw = match RawConfig::parse(&text) {
        Ok(r) => r,
        Err(errors) => {
            for e in &errors {
                eprintln!("config error: {e}");
            }
            return 3;
        }
    };
    let mut hash_source = text.clone();
    let apply = |raw: &mut RawConfig, assignment: &str, hash_source: &mut String| -> bool {
        hash_source.push('\n');
        hash_source.push_str(assignment);
        match raw.set_override(assignment) {
            Ok(()) => true,
            Err(e) => {
                eprintln!("config error: {e}");
                false
            }
        }
    };
    let mode_set = format!("run.mode={}", mode.name());
    if !apply(&mut raw, &mode_set, &mut hash_source) {
        return 3;
    }
    for s in sets {
        if !apply(&mut raw, s, &mut hash_source) {
            return 3;
        }
    }
    if let Some(dir) = out {
        if !apply(&mut raw, &format!("output.directory={dir}"), &mut hash_source) {
            return 3;
        }
    }
    if let Some(seed) = seed {
        if !apply(&mut raw, &format!("run.seed={seed}"), &mut hash_source) {
            return 3;
        }
    }
    let cfg = match crate::config::validate_config(&raw, &hash_source) {
        Ok(c) => c,
        Err(errors) => {
            for e in &errors {
                eprintln!("config error: {e}");
            }
            return 3;
        }
    };
    match run_scenario(&cfg) {
        Ok(report) => {
            println!(
                "{} finished; artifacts in {}",
                report.mode, cfg.output.directory
            );
            for (k, v) in &report.numbers {
                println!("  {k} = {v:.6e}");
            }
            0
        }
        Err(err) => {
            let code = exit_code_for(&err);
            eprintln!("{} failed (exit {code}): {err}", cfg.run.mode.name());
            let mut report = Report::new(&cfg);
            report.notes.insert("error".into(), err.to_string());
            report.numbers.insert("exit_code".into(), code as f64);
            let dir = Path::new(&cfg.output.directory);
            let _ = write_report(dir, &report);
            code
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::BlowUp { .. } | Error::Overflow(_) => 4,
        Error::NonConvergence(_)
        | Error::NotObservable(_)
        | Error::OutOfRadius(_)
        | Error::PlanFailed { .. } => 2,
        Error::Config(_) => 3,
        _ => 1,
    }
}
