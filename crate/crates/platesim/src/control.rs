//! HUM linear control synthesis and the nonlinear local control fixed point.
//!
//! The control enters the plate equation as a plain source `g(t, x)`; HUM
//! controls have the form `g = γ²(x)Φ(t, x)` where `Φ` solves the adjoint
//! system. The duality operator `Λ(Φ0, Φ1) = (v, ∂t v)(0)` (backward solve
//! with source `γ²Φ`) is symmetric positive semidefinite under the pairing
//! `⟨(Φ0,Φ1),(v0,v1)⟩ = ⟨Φ1,v0⟩ − ⟨Φ0,v1⟩`, with
//! `⟨Φd, ΛΦd⟩ = ∬ |γΦ|²`; the discrete realization preserves these
//! identities to roundoff because the one-step maps are symplectic and
//! sources are injected with trapezoid weights. `Λ Φd = target` is solved by
//! preconditioned conjugate gradients in the dual-space geometry, and the
//! nonlinear local control is a Picard iteration on
//! `B(Φd) = Λ⁻¹[(z0,z1) − K(Φd)]`.

use std::sync::Arc;

use ndarray::Array1;

use crate::dynamics::{Force, SimOptions, Simulator, Trajectory};
use crate::error::{Error, Result};
use crate::model::{DampingProfile, NonlinearitySpec};
use crate::observability::{plate_gramian, PlateObsMode};
use crate::spectral::{Geometry, ModalState};

/// Configuration of a HUM solve.
#[derive(Debug, Clone)]
pub struct HumConfig {
    /// Control horizon.
    pub t_final: f64,
    pub dt: f64,
    /// Relative residual tolerance of the conjugate-gradient iteration,
    /// measured in the dual-space norm.
    pub cg_tol: f64,
    pub max_cg_iterations: usize,
    /// Run the plate-Gramian observability diagnostic before solving.
    pub check_observability: bool,
}

impl HumConfig {
    pub fn new(t_final: f64, dt: f64) -> HumConfig {
        HumConfig {
            t_final,
            dt,
            cg_tol: 1e-10,
            max_cg_iterations: 600,
            check_observability: false,
        }
    }

    fn validate(&self) -> Result<usize> {
        if !(self.cg_tol > 0.0 && self.cg_tol < 1.0) {
            return Err(Error::Options(format!("cg_tol must lie in (0,1), got {}", self.cg_tol)));
        }
        if self.t_final <= 0.0 {
            return Err(Error::Options("control horizon must be positive".into()));
        }
        SimOptions::new(self.dt, self.t_final).n_steps()
    }
}

/// One uniformly sampled span of a control: `samples.len() − 1` steps of
/// size `dt`, sampled on the base grid at every step boundary.
#[derive(Debug, Clone)]
pub struct ControlSegment {
    pub dt: f64,
    pub samples: Vec<Array1<f64>>,
}

impl ControlSegment {
    pub fn duration(&self) -> f64 {
        self.dt * (self.samples.len().saturating_sub(1)) as f64
    }

    pub fn zero(geom: &Geometry, dt: f64, n_steps: usize) -> ControlSegment {
        let m = geom.base().grid_len();
        ControlSegment { dt, samples: vec![Array1::zeros(m); n_steps + 1] }
    }
}

/// A synthesized control with its diagnostics. The control is the
/// concatenation of the segments; the re-simulation helpers walk them in
/// order so that seam steps keep each segment's own endpoint samples.
#[derive(Debug, Clone)]
pub struct ControlSolution {
    pub segments: Vec<ControlSegment>,
    /// Adjoint data `(Φ0, Φ1)` of a single-phase HUM solve.
    pub adjoint_data: Option<ModalState>,
    pub iterations: usize,
    pub terminal_error: f64,
    pub residual_history: Vec<f64>,
    /// CG objective `½⟨x, Ax⟩ − ⟨b, x⟩` per iteration; decreases
    /// monotonically (the Λ-energy norm of the CG error does).
    pub objective_history: Vec<f64>,
}

impl ControlSolution {
    pub fn duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration()).sum()
    }

    /// Largest |g| over grid points where the weight vanishes (support leak).
    pub fn support_leak(&self, gamma_sq: &Array1<f64>) -> f64 {
        let mut worst: f64 = 0.0;
        for seg in &self.segments {
            for s in &seg.samples {
                for (g, &w) in s.iter().zip(gamma_sq.iter()) {
                    if w == 0.0 {
                        worst = worst.max(g.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Runs a simulator under a (possibly multi-segment) control, chaining
/// segments; returns the concatenated trajectory.
pub fn resimulate(
    sim: &Simulator,
    state0: &ModalState,
    control: &ControlSolution,
) -> Result<Trajectory> {
    let mut state = state0.clone();
    let mut times = vec![state.t];
    let mut states = vec![state.clone()];
    let mut energy = vec![sim.energy_of(&state)?];
    for seg in &control.segments {
        if seg.samples.len() < 2 {
            continue;
        }
        let opts = SimOptions {
            control: Some(&seg.samples),
            ..SimOptions::new(seg.dt, seg.duration())
        };
        let traj = sim.simulate(&state, &opts)?;
        state = traj.final_state().clone();
        times.extend_from_slice(&traj.times[1..]);
        states.extend_from_slice(&traj.states[1..]);
        energy.extend_from_slice(&traj.energy[1..]);
    }
    Ok(Trajectory { times, states, energy, dissipation_steps: Vec::new() })
}

/// The linear control problem: geometry, control weight `γ²`, and the
/// time-independent potential of the linearized plate.
#[derive(Debug, Clone)]
pub struct HumProblem {
    geom: Arc<Geometry>,
    gamma_sq: Array1<f64>,
    potential: Array1<f64>,
    sim: Simulator,
}

impl HumProblem {
    pub fn new(
        geom: Arc<Geometry>,
        damping: &DampingProfile,
        potential: Option<Array1<f64>>,
    ) -> Result<HumProblem> {
        let m = geom.base().grid_len();
        let gamma_sq = damping.gamma_sq_on(geom.base());
        let potential = match potential {
            Some(p) => {
                if p.len() != m {
                    return Err(Error::LengthMismatch { expected: m, got: p.len() });
                }
                p
            }
            None => Array1::zeros(m),
        };
        let sim = Simulator::new(geom.clone(), Force::Potential(potential.clone()), None)?;
        Ok(HumProblem { geom, gamma_sq, potential, sim })
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn gamma_sq(&self) -> &Array1<f64> {
        &self.gamma_sq
    }

    /// Adjoint observation `S*(Φ0, Φ1) = γ²Φ`: solves the adjoint system
    /// forward from the data and multiplies by `γ²` per sample.
    pub fn apply_s_star(&self, phi: &ModalState, cfg: &HumConfig) -> Result<Vec<Array1<f64>>> {
        cfg.validate()?;
        let traj =
            self.sim.simulate(phi, &SimOptions::new(cfg.dt, cfg.t_final))?;
        let tf = self.geom.base();
        traj.states
            .iter()
            .map(|s| Ok(&self.gamma_sq * &tf.to_physical(&s.u)?))
            .collect()
    }

    /// Control-to-state map `S g = (v, ∂t v)(0)`: solves the linear system
    /// backward from zero terminal data under the plain source `g` (a HUM
    /// source carries its `γ²` factor already).
    pub fn apply_s(&self, samples: &[Array1<f64>], cfg: &HumConfig) -> Result<ModalState> {
        let n_steps = cfg.validate()?;
        if samples.len() != n_steps + 1 {
            return Err(Error::Options(format!(
                "source needs {} samples, got {}",
                n_steps + 1,
                samples.len()
            )));
        }
        let traj = solve_backward(&self.sim, &ModalState::zero(self.geom.clone()), samples, cfg.dt)?;
        Ok(traj.states[0].clone())
    }

    /// `Λ = S ∘ S*`.
    pub fn apply_lambda(&self, phi: &ModalState, cfg: &HumConfig) -> Result<ModalState> {
        let obs = self.apply_s_star(phi, cfg)?;
        self.apply_s(&obs, cfg)
    }

    /// Observability diagnostic used as the HUM precondition.
    pub fn observability_mu(&self, cfg: &HumConfig) -> Result<f64> {
        let weight = self.gamma_sq.mapv(f64::sqrt);
        let dt_gram = (cfg.t_final / 512.0).max(cfg.dt);
        let rep = plate_gramian(
            &self.geom,
            &weight,
            cfg.t_final,
            Some(&self.potential),
            PlateObsMode::DampedField,
            0.0,
            dt_gram,
        )?;
        Ok(rep.mu_min)
    }

    /// HUM solve: finds `g = γ²Φ` with `Λ(Φ0,Φ1) = target` by preconditioned
    /// conjugate gradients, so that the system started at `target` and driven
    /// by `g` reaches zero at `T`. The returned terminal error is certified
    /// by re-simulation.
    pub fn solve(&self, target: &ModalState, cfg: &HumConfig) -> Result<ControlSolution> {
        let n_steps = cfg.validate()?;
        target.check_finite()?;
        if cfg.check_observability {
            let mu = self.observability_mu(cfg)?;
            if mu <= 1e-10 {
                return Err(Error::NotObservable(format!(
                    "plate Gramian mu_min = {mu:.3e} at the working truncation"
                )));
            }
        }
        if target.x_norm() == 0.0 {
            return Ok(ControlSolution {
                segments: vec![ControlSegment::zero(&self.geom, cfg.dt, n_steps)],
                adjoint_data: Some(ModalState::zero(self.geom.clone())),
                iterations: 0,
                terminal_error: 0.0,
                residual_history: Vec::new(),
                objective_history: Vec::new(),
            });
        }
        let x0 = ModalState::zero(self.geom.clone());
        let (phi, iterations, residual_history, objective_history) = self.pcg(target, &x0, cfg)?;
        self.package(target, phi, iterations, residual_history, objective_history, cfg)
    }

    fn package(
        &self,
        target: &ModalState,
        phi: ModalState,
        iterations: usize,
        residual_history: Vec<f64>,
        objective_history: Vec<f64>,
        cfg: &HumConfig,
    ) -> Result<ControlSolution> {
        let samples = self.apply_s_star(&phi, cfg)?;
        let segment = ControlSegment { dt: cfg.dt, samples };
        let solution = ControlSolution {
            segments: vec![segment],
            adjoint_data: Some(phi),
            iterations,
            terminal_error: 0.0,
            residual_history,
            objective_history,
        };
        let traj = resimulate(&self.sim, target, &solution)?;
        let terminal_error = traj.final_state().x_norm();
        Ok(ControlSolution { terminal_error, ..solution })
    }

    /// Preconditioned CG on `QΛ x = Q target` in the dual-space geometry;
    /// warm-startable. Returns the iterate, iteration count, and residual
    /// history (the objective decrease is monotone by the CG structure).
    fn pcg(
        &self,
        target: &ModalState,
        x0: &ModalState,
        cfg: &HumConfig,
    ) -> Result<(ModalState, usize, Vec<f64>, Vec<f64>)> {
        // Q maps an X-element (c, d) to the dual coordinate vector (−d, c);
        // QΛ is then symmetric positive semidefinite.
        let q = |w: &ModalState| -> (Array1<f64>, Array1<f64>) {
            (w.v.mapv(|x| -x), w.u.clone())
        };
        // dual-space preconditioner: z = (r_a, (1+λ)² r_b)
        let precond_w: Array1<f64> =
            Array1::from_iter(self.geom.eigenvalues().iter().map(|&l| (1.0 + l) * (1.0 + l)));
        let apply_precond = |ra: &Array1<f64>, rb: &Array1<f64>| -> (Array1<f64>, Array1<f64>) {
            (ra.clone(), rb * &precond_w)
        };
        let dot = |a: &(Array1<f64>, Array1<f64>), b: &(Array1<f64>, Array1<f64>)| -> f64 {
            a.0.dot(&b.0) + a.1.dot(&b.1)
        };
        let apply_a = |x: &ModalState| -> Result<(Array1<f64>, Array1<f64>)> {
            Ok(q(&self.apply_lambda(x, cfg)?))
        };

        let b = q(target);
        let zb = apply_precond(&b.0, &b.1);
        let b_norm = dot(&b, &zb).sqrt();
        if b_norm == 0.0 {
            return Ok((ModalState::zero(self.geom.clone()), 0, Vec::new(), Vec::new()));
        }

        let mut x = x0.clone();
        let ax = apply_a(&x)?;
        let x_vec = (x.u.clone(), x.v.clone());
        let mut objective = 0.5 * dot(&x_vec, &ax) - dot(&b, &x_vec);
        let mut r = (&b.0 - &ax.0, &b.1 - &ax.1);
        let mut z = apply_precond(&r.0, &r.1);
        let mut rz = dot(&r, &z);
        let mut p = z.clone();
        let mut history = vec![rz.sqrt()];
        let mut objectives = vec![objective];
        if rz.sqrt() <= cfg.cg_tol * b_norm {
            return Ok((x, 0, history, objectives));
        }
        for iter in 1..=cfg.max_cg_iterations {
            let p_state = ModalState::new(p.0.clone(), p.1.clone(), self.geom.clone(), 0.0)?;
            let ap = apply_a(&p_state)?;
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                return Err(Error::NonConvergence(format!(
                    "CG curvature p·Ap = {pap:.3e} at iteration {iter}; the duality operator \
                     is singular at this truncation"
                )));
            }
            let alpha = rz / pap;
            x.u.scaled_add(alpha, &p.0);
            x.v.scaled_add(alpha, &p.1);
            r.0.scaled_add(-alpha, &ap.0);
            r.1.scaled_add(-alpha, &ap.1);
            objective -= 0.5 * alpha * rz;
            objectives.push(objective);
            z = apply_precond(&r.0, &r.1);
            let rz_new = dot(&r, &z);
            history.push(rz_new.sqrt());
            if rz_new.sqrt() <= cfg.cg_tol * b_norm {
                return Ok((x, iter, history, objectives));
            }
            let beta = rz_new / rz;
            rz = rz_new;
            p = (&z.0 + &(&p.0 * beta), &z.1 + &(&p.1 * beta));
        }
        Err(Error::NonConvergence(format!(
            "CG exceeded {} iterations; residuals {:?} .. {:?}",
            cfg.max_cg_iterations,
            history.first(),
            history.last()
        )))
    }
}

/// Solves a system backward from terminal data under a sampled source by
/// running the velocity-flipped system forward on the reversed samples.
/// The returned trajectory is in forward time order.
pub fn solve_backward(
    sim: &Simulator,
    terminal: &ModalState,
    samples: &[Array1<f64>],
    dt: f64,
) -> Result<Trajectory> {
    let reversed: Vec<Array1<f64>> = samples.iter().rev().cloned().collect();
    let duration = dt * (samples.len() - 1) as f64;
    let opts = SimOptions { control: Some(&reversed), ..SimOptions::new(dt, duration) };
    let w = sim.simulate(&terminal.flip_velocity(), &opts)?;
    let n = w.states.len();
    let mut states: Vec<ModalState> = Vec::with_capacity(n);
    let mut times = Vec::with_capacity(n);
    let mut energy = Vec::with_capacity(n);
    for i in 0..n {
        let j = n - 1 - i;
        let mut s = w.states[j].flip_velocity();
        s.t = dt * i as f64;
        times.push(s.t);
        energy.push(w.energy[j]);
        states.push(s);
    }
    Ok(Trajectory { times, states, energy, dissipation_steps: Vec::new() })
}

/// Configuration of the nonlinear local control fixed point.
#[derive(Debug, Clone)]
pub struct PicardConfig {
    pub hum: HumConfig,
    /// Terminal-error tolerance certified by nonlinear re-simulation.
    pub tol: f64,
    pub max_iterations: usize,
}

impl PicardConfig {
    pub fn new(t_final: f64, dt: f64) -> PicardConfig {
        PicardConfig { hum: HumConfig::new(t_final, dt), tol: 1e-8, max_iterations: 25 }
    }
}

/// The perturbation operator `K(Φ0, Φ1) = (v, ∂t v)(0)`: solves the
/// nonlinear system backward from zero terminal data with source `γ²Φ`,
/// forms the superlinear remainder `R(z) = 𝔣(x,z) − 𝔣'_s(x,0) z`, and solves
/// the linearized system backward with source `−R(z)`.
pub fn operator_k(
    phi: &ModalState,
    shifted: &NonlinearitySpec,
    hum: &HumProblem,
    cfg: &HumConfig,
) -> Result<ModalState> {
    let geom = hum.geometry().clone();
    let tf = geom.base();
    let obs = hum.apply_s_star(phi, cfg)?;

    let nl_sim = Simulator::new(geom.clone(), Force::Nonlinear(shifted.clone()), None)?;
    let z_traj = solve_backward(&nl_sim, &ModalState::zero(geom.clone()), &obs, cfg.dt)?;

    // R(z) on the grid per sample
    let zero_grid = Array1::zeros(tf.grid_len());
    let deriv0 = shifted.deriv_on_grid(tf, &zero_grid);
    let minus_r: Vec<Array1<f64>> = z_traj
        .states
        .iter()
        .map(|s| {
            let z_grid = tf.to_physical(&s.u)?;
            let f_grid = shifted.eval_on_grid(tf, &z_grid);
            Ok((&deriv0 * &z_grid) - f_grid)
        })
        .collect::<Result<Vec<_>>>()?;

    let lin_sim = Simulator::new(
        geom.clone(),
        Force::Potential(deriv0),
        None,
    )?;
    let v_traj = solve_backward(&lin_sim, &ModalState::zero(geom.clone()), &minus_r, cfg.dt)?;
    Ok(v_traj.states[0].clone())
}

/// Nonlinear null control around the shifted origin: finds `g = γ²Φ` such
/// that the nonlinear `z`-system started at `z_data` reaches zero at `T`.
/// Picard iteration on `B(Φd) = Λ⁻¹[(z0,z1) − K(Φd)]` with warm-started CG
/// and relaxation on stall; divergence is reported as an out-of-radius error.
fn picard_null_control(
    z_data: &ModalState,
    shifted: &NonlinearitySpec,
    hum: &HumProblem,
    cfg: &PicardConfig,
) -> Result<ControlSolution> {
    let geom = hum.geometry().clone();
    let n_steps = cfg.hum.validate()?;
    if z_data.x_norm() == 0.0 {
        return Ok(ControlSolution {
            segments: vec![ControlSegment::zero(&geom, cfg.hum.dt, n_steps)],
            adjoint_data: Some(ModalState::zero(geom.clone())),
            iterations: 0,
            terminal_error: 0.0,
            residual_history: Vec::new(),
            objective_history: Vec::new(),
        });
    }
    let nl_sim = Simulator::new(geom.clone(), Force::Nonlinear(shifted.clone()), None)?;

    let mut phi = ModalState::zero(geom.clone());
    let mut best_err = f64::INFINITY;
    let mut growth_streak = 0usize;
    let mut residual_history = Vec::new();
    for iter in 1..=cfg.max_iterations {
        let k_phi = operator_k(&phi, shifted, hum, &cfg.hum)?;
        let target = ModalState::new(
            &z_data.u - &k_phi.u,
            &z_data.v - &k_phi.v,
            geom.clone(),
            0.0,
        )?;
        let (phi_new, _, _, _) = hum.pcg(&target, &phi, &cfg.hum)?;

        // certify by nonlinear re-simulation under g = γ²Φ
        let samples = hum.apply_s_star(&phi_new, &cfg.hum)?;
        let candidate = ControlSolution {
            segments: vec![ControlSegment { dt: cfg.hum.dt, samples }],
            adjoint_data: Some(phi_new.clone()),
            iterations: iter,
            terminal_error: 0.0,
            residual_history: Vec::new(),
            objective_history: Vec::new(),
        };
        let traj = resimulate(&nl_sim, z_data, &candidate)?;
        let err = traj.final_state().x_norm();
        residual_history.push(err);
        if err <= cfg.tol {
            return Ok(ControlSolution {
                terminal_error: err,
                residual_history,
                ..candidate
            });
        }
        if err > best_err * (1.0 + 1e-12) {
            growth_streak += 1;
            if growth_streak >= 3 {
                return Err(Error::OutOfRadius(format!(
                    "Picard residual grew over 3 consecutive iterations \
                     (last contraction estimate {:.3e})",
                    err / best_err
                )));
            }
            // relaxation on stall
            phi = ModalState::new(
                0.5 * (&phi.u + &phi_new.u),
                0.5 * (&phi.v + &phi_new.v),
                geom.clone(),
                0.0,
            )?;
        } else {
            growth_streak = 0;
            best_err = best_err.min(err);
            phi = phi_new;
        }
    }
    Err(Error::NonConvergence(format!(
        "Picard exceeded {} iterations; residuals {:?}",
        cfg.max_iterations, residual_history
    )))
}

/// Local exact control around an equilibrium `(e, 0)`, two phases on
/// `[0, 2T]`: phase 1 steers `start → (e, 0)` by null control of the shifted
/// system; phase 2 steers `(e, 0) → end` by reversing the null control of
/// the velocity-flipped endpoint. Certified by nonlinear re-simulation of
/// the controlled plate.
pub fn local_control(
    spec: &NonlinearitySpec,
    damping: &DampingProfile,
    e_hat: &Array1<f64>,
    start: &ModalState,
    end: &ModalState,
    cfg: &PicardConfig,
) -> Result<ControlSolution> {
    let geom = spec.geometry().clone();
    let shifted = crate::model::shifted_nonlinearity(spec, e_hat)?;
    let tf = geom.base();
    let zero_grid = Array1::zeros(tf.grid_len());
    let potential = shifted.deriv_on_grid(tf, &zero_grid);
    let hum = HumProblem::new(geom.clone(), damping, Some(potential))?;
    if cfg.hum.check_observability {
        let mu = hum.observability_mu(&cfg.hum)?;
        if mu <= 1e-10 {
            return Err(Error::NotObservable(format!(
                "plate Gramian mu_min = {mu:.3e} at the working truncation"
            )));
        }
    }
    let mut inner = cfg.clone();
    inner.hum.check_observability = false;

    let shift_state = |s: &ModalState| -> Result<ModalState> {
        ModalState::new(&s.u - e_hat, s.v.clone(), geom.clone(), 0.0)
    };
    let z_start = shift_state(start)?;
    let z_end = shift_state(end)?;

    // phase 1: z_start -> 0
    let phase1 = picard_null_control(&z_start, &shifted, &hum, &inner)?;
    // phase 2: 0 -> z_end, realized as the reversal of (flip z_end) -> 0
    let reversed_end = z_end.flip_velocity();
    let phase2_null = picard_null_control(&reversed_end, &shifted, &hum, &inner)?;
    let phase2 = ControlSegment {
        dt: inner.hum.dt,
        samples: phase2_null.segments[0].samples.iter().rev().cloned().collect(),
    };

    let solution = ControlSolution {
        segments: vec![phase1.segments[0].clone(), phase2],
        adjoint_data: None,
        iterations: phase1.iterations + phase2_null.iterations,
        terminal_error: 0.0,
        residual_history: phase1
            .residual_history
            .iter()
            .chain(phase2_null.residual_history.iter())
            .copied()
            .collect(),
        objective_history: Vec::new(),
    };
    // end-to-end certification on the unshifted controlled plate
    let sim = Simulator::new(geom.clone(), Force::Nonlinear(spec.clone()), None)?;
    let traj = resimulate(&sim, start, &solution)?;
    let terminal_error = traj.final_state().x_dist(end);
    Ok(ControlSolution { terminal_error, ..solution })
}

/// Probes the controllability radius around `(e, 0)` by bisection on the
/// data norm: starts at 1e−1, halves on divergence, gives up below 1e−6.
pub fn probe_radius(
    spec: &NonlinearitySpec,
    damping: &DampingProfile,
    e_hat: &Array1<f64>,
    cfg: &PicardConfig,
    seed: u64,
) -> Result<f64> {
    let geom = spec.geometry().clone();
    let e_state = ModalState::new(e_hat.clone(), Array1::zeros(geom.mode_count()), geom.clone(), 0.0)?;
    let mut r = 0.1;
    while r >= 1e-6 {
        let probe = crate::spectral::random_state(&geom, seed, r);
        let start = ModalState::new(
            &e_state.u + &probe.u,
            probe.v.clone(),
            geom.clone(),
            0.0,
        )?;
        match local_control(spec, damping, e_hat, &start, &e_state, cfg) {
            Ok(sol) if sol.terminal_error <= cfg.tol.max(1e-6) => return Ok(r),
            Ok(_) | Err(Error::OutOfRadius(_)) | Err(Error::NonConvergence(_)) => {
                r *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::OutOfRadius(
        "no controllable radius found above 1e-6".into(),
    ))
}
