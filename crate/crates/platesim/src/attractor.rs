//! Equilibria, gradient-structure diagnostics, and the semiglobal steering
//! planner over the attractor.
//!
//! Steering concatenates three kinds of legs. Damped coasts are integrated by
//! a feedback form of the damped flow: the damping enters as the control
//! `g = −γ² ∂t u` sampled at step boundaries (implicit at the right
//! endpoint), so a recorded coast replays *exactly* on the undamped
//! controlled system — forward with the recorded samples, backward with the
//! samples reversed and the velocity flipped. Local controls jump between
//! nearby states inside an equilibrium's controllability ball. Routes
//! between equilibria follow recorded probe coasts, which connect unstable
//! equilibria to the stable ones they feed.

use std::sync::Arc;

use ndarray::Array1;

use crate::control::{
    local_control, probe_radius, resimulate, ControlSegment, ControlSolution, PicardConfig,
};
use crate::dynamics::{fit_energy_decay, Force, SimOptions, Simulator, Trajectory};
use crate::error::{Error, Result};
use crate::model::{total_energy, DampingProfile, NonlinearitySpec};
use crate::spectral::{Geometry, ModalState};

/// A certified equilibrium of `Δ²e + βe + f(x, e) = 0`.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub e_hat: Array1<f64>,
    /// L² norm of the residual `Δ²e + βe + f(·, e)`.
    pub residual: f64,
    pub newton_iterations: usize,
    /// Controllability radius once probed.
    pub radius: Option<f64>,
    /// `f'_s(·, e)` on the base grid.
    pub potential: Array1<f64>,
}

impl Equilibrium {
    pub fn state(&self, geom: &Arc<Geometry>) -> ModalState {
        ModalState {
            u: self.e_hat.clone(),
            v: Array1::zeros(geom.mode_count()),
            geom: geom.clone(),
            t: 0.0,
        }
    }
}

/// Newton solve options; the inner linear solves are conjugate-gradient with
/// a negative-curvature escape.
#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub cg_max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> NewtonOptions {
        NewtonOptions { tol: 1e-10, max_iterations: 50, cg_max_iterations: 200 }
    }
}

fn equilibrium_residual(spec: &NonlinearitySpec, e: &Array1<f64>) -> Result<Array1<f64>> {
    let geom = spec.geometry();
    let beta = geom.beta();
    let f = crate::model::eval_f(spec, e)?;
    Ok(Array1::from_iter(
        e.iter()
            .zip(geom.eigenvalues().iter())
            .zip(f.iter())
            .map(|((&c, &l), &fk)| (l * l + beta) * c + fk),
    ))
}

/// Jacobian-vector product `(λ²+β)w + P(f'_s(·,e) w)` applied
/// pseudospectrally.
fn jacobian_apply(
    spec: &NonlinearitySpec,
    deriv_grid: &Array1<f64>,
    w: &Array1<f64>,
) -> Result<Array1<f64>> {
    let geom = spec.geometry();
    let tf = spec.transform();
    let beta = geom.beta();
    let w_grid = tf.to_physical(w)?;
    let prod = tf.from_physical(&(deriv_grid * &w_grid))?;
    Ok(Array1::from_iter(
        w.iter()
            .zip(geom.eigenvalues().iter())
            .zip(prod.iter())
            .map(|((&c, &l), &p)| (l * l + beta) * c + p),
    ))
}

/// Inexact Newton step by CG on the (symmetric, possibly indefinite)
/// Jacobian; returns the best direction found when negative curvature shows
/// up.
fn newton_direction(
    spec: &NonlinearitySpec,
    deriv_grid: &Array1<f64>,
    residual: &Array1<f64>,
    opts: &NewtonOptions,
) -> Result<Array1<f64>> {
    let n = residual.len();
    let b = residual.mapv(|x| -x);
    let mut x = Array1::zeros(n);
    let mut r = b.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let target = (0.1f64 * rr.sqrt()).min(rr) * rr.sqrt();
    if rr == 0.0 {
        return Ok(x);
    }
    for _ in 0..opts.cg_max_iterations {
        let jp = jacobian_apply(spec, deriv_grid, &p)?;
        let pjp = p.dot(&jp);
        if pjp <= 1e-14 * p.dot(&p) {
            // negative curvature: fall back to the steepest-descent-flavored
            // direction accumulated so far
            if x.iter().all(|&c| c == 0.0) {
                return Ok(b);
            }
            return Ok(x);
        }
        let alpha = rr / pjp;
        x.scaled_add(alpha, &p);
        r.scaled_add(-alpha, &jp);
        let rr_new = r.dot(&r);
        if rr_new.sqrt() * rr.sqrt() <= target || rr_new <= 1e-30 {
            return Ok(x);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        p = &r + &(&p * beta);
    }
    Ok(x)
}

/// Newton iteration on the modal equilibrium residual with backtracking line
/// search; converges to residual ≤ `opts.tol` or reports failure.
pub fn solve_equilibrium(
    spec: &NonlinearitySpec,
    guess: &Array1<f64>,
    opts: &NewtonOptions,
) -> Result<Equilibrium> {
    let geom = spec.geometry().clone();
    if guess.len() != geom.mode_count() {
        return Err(Error::LengthMismatch { expected: geom.mode_count(), got: guess.len() });
    }
    let tf = spec.transform().clone();
    let mut e = guess.clone();
    let mut res = equilibrium_residual(spec, &e)?;
    let mut norm = res.dot(&res).sqrt();
    for iter in 0..=opts.max_iterations {
        if norm <= opts.tol {
            let base = geom.base();
            let e_grid_base = base.to_physical(&e)?;
            let potential = spec.deriv_on_grid(base, &e_grid_base);
            return Ok(Equilibrium {
                e_hat: e,
                residual: norm,
                newton_iterations: iter,
                radius: None,
                potential,
            });
        }
        if iter == opts.max_iterations {
            break;
        }
        let e_grid = tf.to_physical(&e)?;
        let deriv = spec.deriv_on_grid(&tf, &e_grid);
        let dir = newton_direction(spec, &deriv, &res, opts)?;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &e + &(&dir * t);
            if let Ok(r2) = equilibrium_residual(spec, &cand) {
                let n2 = r2.dot(&r2).sqrt();
                if n2 < norm * (1.0 - 1e-4 * t) || n2 < opts.tol {
                    e = cand;
                    res = r2;
                    norm = n2;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence(format!(
                "Newton line search stalled at residual {norm:.3e}"
            )));
        }
    }
    Err(Error::NonConvergence(format!(
        "Newton exceeded {} iterations (residual {norm:.3e})",
        opts.max_iterations
    )))
}

/// Converged, deduplicated equilibria from a seed list; failed solves are
/// dropped. When `f` is odd, the sign-mirrored partner of every find is
/// solved for as well. Results are sorted by mean value for determinism.
pub fn enumerate_equilibria(
    spec: &NonlinearitySpec,
    seeds: &[Array1<f64>],
    opts: &NewtonOptions,
) -> Vec<Equilibrium> {
    let geom = spec.geometry().clone();
    let mut found: Vec<Equilibrium> = Vec::new();
    let push_unique = |eq: Equilibrium, found: &mut Vec<Equilibrium>| {
        let state = eq.state(&geom);
        if found.iter().all(|f| f.state(&geom).x_dist(&state) > 1e-6) {
            found.push(eq);
        }
    };
    for seed in seeds {
        if let Ok(eq) = solve_equilibrium(spec, seed, opts) {
            push_unique(eq, &mut found);
        }
    }
    if spec.is_odd() {
        let mirrored: Vec<Array1<f64>> = found.iter().map(|e| e.e_hat.mapv(|x| -x)).collect();
        for m in mirrored {
            if let Ok(eq) = solve_equilibrium(spec, &m, opts) {
                push_unique(eq, &mut found);
            }
        }
    }
    found.sort_by(|a, b| {
        a.e_hat[0]
            .partial_cmp(&b.e_hat[0])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    found
}

/// Checks the a priori equilibrium bound
/// `½∫(|Δe|² + β|e|²) ≤ −meas(M)·inf s f(x, s)` by sampled evaluation.
pub fn equilibrium_bound(spec: &NonlinearitySpec, e_hat: &Array1<f64>) -> Result<(f64, f64)> {
    let geom = spec.geometry();
    let beta = geom.beta();
    let lhs = 0.5
        * e_hat
            .iter()
            .zip(geom.eigenvalues().iter())
            .map(|(&c, &l)| (l * l + beta) * c * c)
            .sum::<f64>();
    // inf of s f(x, s) over the grid and a dense s-range
    let tf = spec.transform();
    let mut inf_sf = 0.0f64;
    let n_s = 2001;
    let r = 10.0;
    for i in 0..n_s {
        let s = -r + 2.0 * r * i as f64 / (n_s - 1) as f64;
        let s_grid = Array1::from_elem(tf.grid_len(), s);
        let f = spec.eval_on_grid(tf, &s_grid);
        for &fx in f.iter() {
            inf_sf = inf_sf.min(s * fx);
        }
    }
    let meas = match geom.kind() {
        crate::spectral::DomainKind::HingedRectangle => std::f64::consts::PI.powi(geom.dim() as i32),
        crate::spectral::DomainKind::Torus => (2.0 * std::f64::consts::PI).powi(geom.dim() as i32),
    };
    Ok((lhs, -meas * inf_sf))
}

/// Damped coast integrated as a controlled system: the damping acts through
/// the recorded control `g_i = −γ² v(t_i)` (implicit at the right node of
/// each step), so replays on the undamped system are exact.
pub struct CoastRecord {
    pub trajectory: Trajectory,
    /// Control samples realizing the coast on the undamped system.
    pub samples: Vec<Array1<f64>>,
    pub dt: f64,
}

impl CoastRecord {
    pub fn duration(&self) -> f64 {
        self.dt * (self.samples.len() - 1) as f64
    }

    pub fn segment(&self) -> ControlSegment {
        ControlSegment { dt: self.dt, samples: self.samples.clone() }
    }

    /// Segment replaying the coast backward (start from the velocity-flipped
    /// end state; arrives at the velocity-flipped start state).
    pub fn reversed_segment(&self) -> ControlSegment {
        ControlSegment { dt: self.dt, samples: self.samples.iter().rev().cloned().collect() }
    }
}

/// Stop rule of a coast.
#[derive(Debug, Clone)]
pub struct CoastOptions {
    pub dt: f64,
    pub max_duration: f64,
    /// Enter within `ball_fraction · r(e)` of an equilibrium.
    pub ball_fraction: f64,
    /// Additionally require `‖∂t u‖_{L²}` below this ceiling, when set.
    pub velocity_ceiling: Option<f64>,
}

/// Outcome of a damped coast: where it stopped and the recorded replay.
pub struct CoastOutcome {
    pub record: CoastRecord,
    pub duration: f64,
    pub equilibrium: usize,
    pub end_state: ModalState,
    pub final_velocity_norm: f64,
}

/// Simulates the feedback-damped flow until the state enters some
/// controllability ball (the empirical hit time of the LaSalle argument), or
/// errors after the horizon cap.
pub fn lasalle_coast(
    spec: &NonlinearitySpec,
    damping: &DampingProfile,
    state0: &ModalState,
    equilibria: &[Equilibrium],
    opts: &CoastOptions,
) -> Result<CoastOutcome> {
    if equilibria.iter().any(|e| e.radius.is_none()) {
        return Err(Error::Options("all equilibria need probed radii before coasting".into()));
    }
    let geom = spec.geometry().clone();
    let tf = geom.base();
    let gamma_sq = damping.gamma_sq_on(tf);
    let rot = CoastRotation::new(&geom, opts.dt);
    let tau = 0.5 * opts.dt;

    let targets: Vec<(ModalState, f64)> = equilibria
        .iter()
        .map(|e| (e.state(&geom), e.radius.unwrap() * opts.ball_fraction))
        .collect();
    let hit = |s: &ModalState| -> Option<usize> {
        let vel = s.geom.sobolev_norm(&s.v, 0.0);
        if let Some(ceiling) = opts.velocity_ceiling {
            if vel > ceiling {
                return None;
            }
        }
        targets
            .iter()
            .position(|(t, r)| s.x_dist(t) <= *r)
    };

    let mut u = state0.u.clone();
    let mut v = state0.v.clone();
    let sample_of = |v: &Array1<f64>| -> Result<Array1<f64>> {
        Ok(-(&gamma_sq * &tf.to_physical(v)?))
    };
    let zero = NonlinearitySpec::zero(geom.clone());
    let spec_for_energy = if spec.is_zero() { &zero } else { spec };

    let mut samples = vec![sample_of(&v)?];
    let mut times = vec![0.0];
    let mut states = vec![ModalState { u: u.clone(), v: v.clone(), geom: geom.clone(), t: 0.0 }];
    let mut energy = vec![total_energy(spec_for_energy, &states[0])?.total];

    let max_steps = (opts.max_duration / opts.dt).ceil() as usize;
    let mut hit_index = hit(&states[0]);
    let mut step = 0usize;
    while hit_index.is_none() && step < max_steps {
        // left kick with the recorded sample
        let g_left = tf.from_physical(&samples[step])?;
        let f = force_modal(spec, &u)?;
        for k in 0..v.len() {
            v[k] += tau * (f[k] + g_left[k]);
        }
        rot.apply(&mut u, &mut v);
        // implicit right node: v = w − τ P(γ² v)
        let f = force_modal(spec, &u)?;
        let mut w = v.clone();
        w.scaled_add(tau, &f);
        let mut vr = w.clone();
        for _ in 0..8 {
            let damp = tf.from_physical(&(&gamma_sq * &tf.to_physical(&vr)?))?;
            vr = &w - &(damp * tau);
        }
        v = vr;
        step += 1;
        let t = step as f64 * opts.dt;
        let state = ModalState { u: u.clone(), v: v.clone(), geom: geom.clone(), t };
        state.check_finite().map_err(|_| Error::BlowUp { t, norm: f64::INFINITY })?;
        samples.push(sample_of(&v)?);
        times.push(t);
        energy.push(total_energy(spec_for_energy, &state)?.total);
        states.push(state);
        hit_index = hit(states.last().unwrap());
    }
    match hit_index {
        None => Err(Error::NonConvergence(format!(
            "coast did not enter any controllability ball within {} time units",
            opts.max_duration
        ))),
        Some(eq) => {
            let end_state = states.last().unwrap().clone();
            let final_velocity_norm = geom.sobolev_norm(&end_state.v, 0.0);
            let duration = times.last().copied().unwrap_or(0.0);
            Ok(CoastOutcome {
                record: CoastRecord {
                    trajectory: Trajectory {
                        times,
                        states,
                        energy,
                        dissipation_steps: Vec::new(),
                    },
                    samples,
                    dt: opts.dt,
                },
                duration,
                equilibrium: eq,
                end_state,
                final_velocity_norm,
            })
        }
    }
}

fn force_modal(spec: &NonlinearitySpec, u: &Array1<f64>) -> Result<Array1<f64>> {
    if spec.is_zero() {
        Ok(Array1::zeros(u.len()))
    } else {
        Ok(-crate::model::eval_f(spec, u)?)
    }
}

struct CoastRotation {
    cos: Array1<f64>,
    sinc: Array1<f64>,
    msin: Array1<f64>,
}

impl CoastRotation {
    fn new(geom: &Geometry, dt: f64) -> CoastRotation {
        let beta = geom.beta();
        let n = geom.mode_count();
        let (mut cos, mut sinc, mut msin) =
            (Array1::zeros(n), Array1::zeros(n), Array1::zeros(n));
        for (k, &l) in geom.eigenvalues().iter().enumerate() {
            let omega = (l * l + beta).sqrt();
            if omega == 0.0 {
                cos[k] = 1.0;
                sinc[k] = dt;
            } else {
                let (s, c) = (omega * dt).sin_cos();
                cos[k] = c;
                sinc[k] = s / omega;
                msin[k] = -omega * s;
            }
        }
        CoastRotation { cos, sinc, msin }
    }

    fn apply(&self, u: &mut Array1<f64>, v: &mut Array1<f64>) {
        for k in 0..u.len() {
            let (a, b) = (u[k], v[k]);
            u[k] = self.cos[k] * a + self.sinc[k] * b;
            v[k] = self.msin[k] * a + self.cos[k] * b;
        }
    }
}

/// Estimates the linear damped decay rate by a fit on a linear run; the
/// coast horizon cap defaults to ten times the fitted time constant.
pub fn linear_decay_rate(
    geom: &Arc<Geometry>,
    damping: &DampingProfile,
    dt: f64,
    t_probe: f64,
    seed: u64,
) -> Result<crate::dynamics::DecayFit> {
    let sim = Simulator::new(geom.clone(), Force::None, Some(damping))?;
    let state = crate::spectral::random_state(geom, seed, 1.0);
    let traj = sim.simulate(&state, &SimOptions::damped(dt, t_probe))?;
    fit_energy_decay(&traj.times, &traj.energy, 0.1 * t_probe, t_probe)
}

/// Velocity U-turn: local control from a state near `(e, 0)` to its
/// velocity-flipped image, enabling the switch between forward and backward
/// coasting.
pub fn u_turn(
    spec: &NonlinearitySpec,
    damping: &DampingProfile,
    e_hat: &Array1<f64>,
    state: &ModalState,
    cfg: &PicardConfig,
) -> Result<ControlSolution> {
    local_control(spec, damping, e_hat, state, &state.flip_velocity(), cfg)
}

/// One leg of a steering plan.
#[derive(Debug, Clone, serde::Serialize)]
pub enum LegKind {
    DampedCoast,
    BackwardCoast,
    LocalControl,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct Leg {
    pub kind: LegKind,
    pub duration: f64,
    /// Equilibrium ball this leg starts from or coasts into.
    pub equilibrium: Option<usize>,
    /// Planned chaining defect against the previous leg's end state.
    pub handoff_defect: f64,
    #[serde(skip)]
    pub planned_end: Option<ModalState>,
}

/// Control-time budget `T_max = 2T_0 + 2T_A + N(T_A + τ)` assembled from
/// measured quantities.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BudgetReport {
    pub t0: f64,
    pub t_attractor: f64,
    pub tau: f64,
    pub n_equilibria: usize,
    pub t_max: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct SteeringPlan {
    pub legs: Vec<Leg>,
    pub total_duration: f64,
    pub budget: BudgetReport,
    pub terminal_error: f64,
}

/// Steering configuration.
#[derive(Debug, Clone)]
pub struct PlanConfig {
    pub picard: PicardConfig,
    pub coast_dt: f64,
    /// Enter balls within this fraction of the radius.
    pub ball_fraction: f64,
    /// Probe offsets sit at this fraction of the source ball's radius.
    pub probe_fraction: f64,
    /// Coast horizon cap; estimated from the linear decay rate when absent.
    pub coast_cap: Option<f64>,
    pub handoff_tol: f64,
    pub seed: u64,
}

impl PlanConfig {
    pub fn new(t_control: f64, dt: f64) -> PlanConfig {
        PlanConfig {
            picard: PicardConfig::new(t_control, dt),
            coast_dt: dt,
            ball_fraction: 0.5,
            // strictly between the entry threshold and the radius, so probe
            // points are reachable by local control yet outside every ball
            probe_fraction: 0.75,
            coast_cap: None,
            handoff_tol: 1e-6,
            seed: 1,
        }
    }
}

struct Edge {
    from: usize,
    to: usize,
    record: CoastRecord,
    probe_start: ModalState,
}

/// Plans and certifies a route `u0 ⇝ u1`: a damped coast into an equilibrium
/// ball, attractor legs alternating local controls with recorded coasts
/// (forward or replayed backward), and the backward replay of the target's
/// own damped coast. Returns the plan, the concatenated control, and the
/// end-to-end re-simulated trajectory.
pub fn plan_steering(
    spec: &NonlinearitySpec,
    damping: &DampingProfile,
    u0: &ModalState,
    u1: &ModalState,
    equilibria: &mut [Equilibrium],
    cfg: &PlanConfig,
) -> Result<(SteeringPlan, ControlSolution, Trajectory)> {
    let geom = spec.geometry().clone();
    if equilibria.is_empty() {
        return Err(Error::PlanFailed { leg: 0, reason: "no equilibria supplied".into() });
    }
    // trivial plan
    if u0.x_dist(u1) <= cfg.handoff_tol {
        let plan = SteeringPlan {
            legs: Vec::new(),
            total_duration: 0.0,
            budget: BudgetReport {
                t0: 0.0,
                t_attractor: 0.0,
                tau: 2.0 * cfg.picard.hum.t_final,
                n_equilibria: equilibria.len(),
                t_max: equilibria.len() as f64
                    * (2.0 * cfg.picard.hum.t_final)
                    .max(1.0),
            },
            terminal_error: 0.0,
        };
        let control = ControlSolution {
            segments: Vec::new(),
            adjoint_data: None,
            iterations: 0,
            terminal_error: 0.0,
            residual_history: Vec::new(),
            objective_history: Vec::new(),
        };
        let traj = Trajectory {
            times: vec![u0.t],
            states: vec![u0.clone()],
            energy: vec![total_energy(spec, u0)?.total],
            dissipation_steps: Vec::new(),
        };
        return Ok((plan, control, traj));
    }

    // radii
    for (i, eq) in equilibria.iter_mut().enumerate() {
        if eq.radius.is_none() {
            let r = probe_radius(spec, damping, &eq.e_hat, &cfg.picard, cfg.seed + i as u64)?;
            eq.radius = Some(r);
        }
    }
    let coast_cap = match cfg.coast_cap {
        Some(c) => c,
        None => {
            let fit = linear_decay_rate(&geom, damping, cfg.coast_dt, 20.0, cfg.seed)?;
            (10.0 / fit.rate.max(1e-3)).min(400.0)
        }
    };
    let coast_opts = CoastOptions {
        dt: cfg.coast_dt,
        max_duration: coast_cap,
        ball_fraction: cfg.ball_fraction,
        velocity_ceiling: None,
    };

    // endpoint coasts
    let coast_a = lasalle_coast(spec, damping, u0, equilibria, &coast_opts)?;
    let coast_z = lasalle_coast(spec, damping, &u1.flip_velocity(), equilibria, &coast_opts)?;
    let (ball_a, ball_z) = (coast_a.equilibrium, coast_z.equilibrium);

    // probe coasts between equilibrium balls
    let mut edges: Vec<Edge> = Vec::new();
    if ball_a != ball_z {
        for i in 0..equilibria.len() {
            let r_i = equilibria[i].radius.unwrap();
            for j in 0..equilibria.len() {
                if i == j {
                    continue;
                }
                let mut dir = &equilibria[j].e_hat - &equilibria[i].e_hat;
                let norm = dir.dot(&dir).sqrt();
                if norm == 0.0 {
                    continue;
                }
                dir /= norm;
                let delta = cfg.probe_fraction * r_i;
                let probe_u = &equilibria[i].e_hat + &(&dir * delta);
                let probe =
                    ModalState::new(probe_u, Array1::zeros(geom.mode_count()), geom.clone(), 0.0)?;
                if let Ok(out) = lasalle_coast(spec, damping, &probe, equilibria, &coast_opts) {
                    if out.equilibrium != i {
                        edges.push(Edge {
                            from: i,
                            to: out.equilibrium,
                            record: out.record,
                            probe_start: probe,
                        });
                    }
                }
            }
        }
    }

    // BFS route over the undirected edge graph
    let route = bfs_route(equilibria.len(), &edges, ball_a, ball_z).ok_or_else(|| {
        Error::PlanFailed {
            leg: 0,
            reason: format!("no coast route between equilibrium balls {ball_a} and {ball_z}"),
        }
    })?;

    // Legs are assembled closed-loop: each local control is solved from the
    // state actually reached by rolling the concatenation forward on the
    // undamped controlled plate, so drift picked up crossing the
    // saddle-neighborhood legs (where open-loop perturbations grow at the
    // undamped rate) is absorbed by the next local control instead of
    // compounding.
    let sim = Simulator::new(geom.clone(), Force::Nonlinear(spec.clone()), None)?;
    struct Assembler<'s> {
        sim: &'s Simulator,
        legs: Vec<Leg>,
        segments: Vec<ControlSegment>,
        actual: ModalState,
    }
    impl Assembler<'_> {
        fn advance(&mut self, segment: &ControlSegment) -> Result<()> {
            if segment.samples.len() < 2 {
                return Ok(());
            }
            let opts = SimOptions {
                control: Some(&segment.samples),
                ..SimOptions::new(segment.dt, segment.duration())
            };
            self.actual = self.sim.simulate(&self.actual, &opts)?.final_state().clone();
            Ok(())
        }

        fn coast(
            &mut self,
            kind: LegKind,
            segment: ControlSegment,
            eq: usize,
            planned_end: ModalState,
        ) -> Result<()> {
            self.advance(&segment)?;
            self.legs.push(Leg {
                kind,
                duration: segment.duration(),
                equilibrium: Some(eq),
                handoff_defect: self.actual.x_dist(&planned_end),
                planned_end: Some(planned_end),
            });
            if segment.samples.len() >= 2 {
                self.segments.push(segment);
            }
            Ok(())
        }
    }
    let mut asm = Assembler { sim: &sim, legs: Vec::new(), segments: Vec::new(), actual: u0.clone() };
    let mut t_attractor: f64 = 0.0;

    let local = |asm: &mut Assembler, target: &ModalState, ball: usize| -> Result<()> {
        let sol =
            local_control(spec, damping, &equilibria[ball].e_hat, &asm.actual, target, &cfg.picard)?;
        if sol.terminal_error > cfg.handoff_tol {
            return Err(Error::PlanFailed {
                leg: asm.legs.len(),
                reason: format!(
                    "local control terminal error {:.3e} above the handoff tolerance",
                    sol.terminal_error
                ),
            });
        }
        let duration: f64 = sol.segments.iter().map(|s| s.duration()).sum();
        for seg in sol.segments {
            asm.advance(&seg)?;
            asm.segments.push(seg);
        }
        asm.legs.push(Leg {
            kind: LegKind::LocalControl,
            duration,
            equilibrium: Some(ball),
            handoff_defect: asm.actual.x_dist(target),
            planned_end: Some(target.clone()),
        });
        Ok(())
    };

    // leg 1: coast from u0 into the first ball
    if coast_a.duration > 0.0 {
        asm.coast(
            LegKind::DampedCoast,
            coast_a.record.segment(),
            ball_a,
            coast_a.end_state.clone(),
        )?;
    }

    // attractor hops: local control onto the recorded coast's entry point,
    // then replay it (forward as recorded, or backward from the flipped end)
    let mut here = ball_a;
    for &edge_idx in &route {
        let edge = &edges[edge_idx];
        let forward = edge.from == here;
        let (target_state, coast_segment, landing, landing_state) = if forward {
            (
                edge.probe_start.clone(),
                edge.record.segment(),
                edge.to,
                edge.record.trajectory.states.last().unwrap().clone(),
            )
        } else {
            (
                edge.record.trajectory.states.last().unwrap().flip_velocity(),
                edge.record.reversed_segment(),
                edge.from,
                edge.probe_start.flip_velocity(),
            )
        };
        local(&mut asm, &target_state, here)?;
        t_attractor = t_attractor.max(coast_segment.duration());
        asm.coast(
            if forward { LegKind::DampedCoast } else { LegKind::BackwardCoast },
            coast_segment,
            landing,
            landing_state,
        )?;
        here = landing;
    }

    // final U-turn onto the target's own coast, then replay it backward
    let final_target = if coast_z.duration > 0.0 {
        coast_z.end_state.flip_velocity()
    } else {
        u1.clone()
    };
    local(&mut asm, &final_target, ball_z)?;
    if coast_z.duration > 0.0 {
        asm.coast(
            LegKind::BackwardCoast,
            coast_z.record.reversed_segment(),
            ball_z,
            u1.clone(),
        )?;
    }
    let Assembler { legs, segments, actual, .. } = asm;

    // budget
    let t0 = coast_a.duration.max(coast_z.duration);
    let tau = 2.0 * cfg.picard.hum.t_final;
    let n_eq = equilibria.len();
    let t_max = 2.0 * t0 + 2.0 * t_attractor + n_eq as f64 * (t_attractor + tau);
    let total_duration: f64 = legs.iter().map(|l| l.duration).sum();

    // end-to-end certification on the undamped controlled plate; the rollout
    // above is the same discrete system, so this replays it
    let control = ControlSolution {
        segments,
        adjoint_data: None,
        iterations: 0,
        terminal_error: 0.0,
        residual_history: Vec::new(),
        objective_history: Vec::new(),
    };
    let traj = resimulate(&sim, u0, &control)?;
    let terminal_error = traj.final_state().x_dist(u1);
    debug_assert!(traj.final_state().x_dist(&actual) <= 1e-9);

    let plan = SteeringPlan {
        legs,
        total_duration,
        budget: BudgetReport { t0, t_attractor, tau, n_equilibria: n_eq, t_max },
        terminal_error,
    };
    let control = ControlSolution { terminal_error, ..control };
    Ok((plan, control, traj))
}

/// Shortest hop route (edge indices) between equilibrium balls; edges are
/// traversable both ways. Ties break toward smaller edge indices, which were
/// generated in deterministic order.
fn bfs_route(n: usize, edges: &[Edge], from: usize, to: usize) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    visited[from] = true;
    queue.push_back(from);
    while let Some(node) = queue.pop_front() {
        for (ei, e) in edges.iter().enumerate() {
            for (a, b) in [(e.from, e.to), (e.to, e.from)] {
                if a == node && !visited[b] {
                    visited[b] = true;
                    prev[b] = Some((node, ei));
                    queue.push_back(b);
                }
            }
        }
        if visited[to] {
            break;
        }
    }
    if !visited[to] {
        return None;
    }
    let mut route = Vec::new();
    let mut node = to;
    while node != from {
        let (p, ei) = prev[node].expect("bfs backtrack");
        route.push(ei);
        node = p;
    }
    route.reverse();
    Some(route)
}
