//! Nonlinearity catalog, smooth localized damping profiles, and the
//! nonlinear energy functional.

use std::sync::Arc;

use ndarray::Array1;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectral::{DomainKind, Geometry, ModalState, Transform};

/// Values of `u` on the evaluation grid beyond this magnitude signal blow-up
/// upstream and abort the nonlinear evaluation.
pub const OVERFLOW_GUARD: f64 = 1e8;

/// Structural class of the nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum NonlinearityClass {
    /// `s·f(x,s) ≥ 0` everywhere (and `≥ α s²` with `α > 0` on a
    /// boundaryless domain).
    Defocusing { alpha: f64 },
    /// `s·f(x,s) ≥ 0` only for `|s| ≥ radius`.
    AsymptoticDefocusing { radius: f64 },
}

/// A polynomial coefficient `a_j(x)`: spatially constant or a band-limited
/// field stored as modal coefficients.
#[derive(Debug, Clone)]
pub enum Coefficient {
    Constant(f64),
    Modal(Array1<f64>),
}

/// One monomial term `a_j(x) u^j`, `j ≥ 1`.
#[derive(Debug, Clone)]
pub struct Term {
    pub degree: usize,
    pub coeff: Coefficient,
}

/// Polynomial nonlinearity `f(x, u) = Σ_{j≥1} a_j(x) u^j` with its class tag,
/// primitive `V(x, u) = ∫_0^u f(x, s) ds` and derivative `f'_s`, evaluated
/// pseudospectrally on a grid padded for the polynomial degree.
///
/// An optional shift `e` turns the spec into `𝔣(x, z) = f(x, z+e) − f(x, e)`,
/// which vanishes at `z = 0`; evaluation composes with the shift exactly
/// instead of re-expanding coefficients.
#[derive(Debug, Clone)]
pub struct NonlinearitySpec {
    geom: Arc<Geometry>,
    terms: Vec<Term>,
    class: NonlinearityClass,
    shift: Option<Array1<f64>>,
    degree: usize,
    transform: Arc<Transform>,
}

/// Number of sample points of `s` used to verify the class tag.
const CLASS_SAMPLES: usize = 10_000;

impl NonlinearitySpec {
    pub fn new(
        geom: Arc<Geometry>,
        terms: Vec<Term>,
        class: NonlinearityClass,
    ) -> Result<NonlinearitySpec> {
        for t in &terms {
            if t.degree == 0 {
                return Err(Error::Nonlinearity(
                    "constant terms are not allowed: f(x, 0) must vanish".into(),
                ));
            }
            if let Coefficient::Modal(c) = &t.coeff {
                if c.len() != geom.mode_count() {
                    return Err(Error::LengthMismatch {
                        expected: geom.mode_count(),
                        got: c.len(),
                    });
                }
            }
        }
        let degree = terms.iter().map(|t| t.degree).max().unwrap_or(1);
        let transform = Arc::new(geom.dealiased(degree));
        let spec = NonlinearitySpec { geom, terms, class, shift: None, degree, transform };
        spec.verify_class()?;
        Ok(spec)
    }

    /// Builds a spec without verifying the class tag against samples. For
    /// algebraic manipulation of polynomials that satisfy neither class;
    /// dynamical guarantees tied to the tag do not apply.
    pub fn new_unchecked(
        geom: Arc<Geometry>,
        terms: Vec<Term>,
        class: NonlinearityClass,
    ) -> Result<NonlinearitySpec> {
        for t in &terms {
            if t.degree == 0 {
                return Err(Error::Nonlinearity(
                    "constant terms are not allowed: f(x, 0) must vanish".into(),
                ));
            }
        }
        let degree = terms.iter().map(|t| t.degree).max().unwrap_or(1);
        let transform = Arc::new(geom.dealiased(degree));
        Ok(NonlinearitySpec { geom, terms, class, shift: None, degree, transform })
    }

    /// The zero nonlinearity (f = 0), valid on any geometry.
    pub fn zero(geom: Arc<Geometry>) -> NonlinearitySpec {
        let transform = Arc::new(geom.base().clone());
        NonlinearitySpec {
            geom,
            terms: Vec::new(),
            class: NonlinearityClass::Defocusing { alpha: 0.0 },
            shift: None,
            degree: 1,
            transform,
        }
    }

    /// Polynomial with constant coefficients: `coeffs[j]` multiplies `u^(j+1)`.
    pub fn polynomial(
        geom: Arc<Geometry>,
        coeffs: &[f64],
        class: NonlinearityClass,
    ) -> Result<NonlinearitySpec> {
        let terms = coeffs
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(i, &a)| Term { degree: i + 1, coeff: Coefficient::Constant(a) })
            .collect();
        NonlinearitySpec::new(geom, terms, class)
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn class(&self) -> NonlinearityClass {
        self.class
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// An unshifted polynomial with only odd powers is odd in `u`.
    pub fn is_odd(&self) -> bool {
        self.shift.is_none() && self.terms.iter().all(|t| t.degree % 2 == 1)
    }

    /// The transform whose grid dealiases products of this degree.
    pub fn transform(&self) -> &Arc<Transform> {
        &self.transform
    }

    pub fn shift(&self) -> Option<&Array1<f64>> {
        self.shift.as_ref()
    }

    /// Dense sampling check of the class tag: `s f(x,s)` on a `s`-grid over
    /// `[−10R, 10R]` for every collocation point.
    fn verify_class(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Ok(());
        }
        let (r, alpha, asymptotic) = match self.class {
            NonlinearityClass::Defocusing { alpha } => {
                if alpha < 0.0 {
                    return Err(Error::Nonlinearity("alpha must be >= 0".into()));
                }
                if self.geom.kind() == DomainKind::Torus && alpha <= 0.0 {
                    return Err(Error::Nonlinearity(
                        "defocusing on a boundaryless domain requires s f >= alpha s^2 with \
                         alpha > 0"
                            .into(),
                    ));
                }
                (1.0, alpha, None)
            }
            NonlinearityClass::AsymptoticDefocusing { radius } => {
                if radius <= 0.0 {
                    return Err(Error::Nonlinearity("asymptotic radius must be > 0".into()));
                }
                (radius, 0.0, Some(radius))
            }
        };
        let grids = self.coeff_grids(&self.transform);
        let m = self.transform.grid_len();
        let tol = 1e-12;
        for i in 0..CLASS_SAMPLES {
            let s = -10.0 * r + 20.0 * r * (i as f64) / (CLASS_SAMPLES - 1) as f64;
            if let Some(rad) = asymptotic {
                if s.abs() < rad {
                    continue;
                }
            }
            for x in 0..m {
                let mut f = 0.0;
                for (t, g) in self.terms.iter().zip(grids.iter()) {
                    f += g[x] * s.powi(t.degree as i32);
                }
                if s * f < alpha * s * s - tol * (1.0 + s * s) {
                    return Err(Error::Nonlinearity(format!(
                        "class check failed at s = {s:.4e}: s f = {:.4e}",
                        s * f
                    )));
                }
            }
        }
        Ok(())
    }

    /// Coefficient fields sampled on a transform's grid.
    fn coeff_grids(&self, tf: &Transform) -> Vec<Array1<f64>> {
        self.terms
            .iter()
            .map(|t| match &t.coeff {
                Coefficient::Constant(a) => Array1::from_elem(tf.grid_len(), *a),
                Coefficient::Modal(c) => tf.to_physical(c).expect("coefficient length"),
            })
            .collect()
    }

    fn shift_grid(&self, tf: &Transform) -> Option<Array1<f64>> {
        self.shift.as_ref().map(|e| tf.to_physical(e).expect("shift length"))
    }

    /// Pointwise `f(x, u)` (or the shifted `𝔣`) over grid values of `u`.
    pub fn eval_on_grid(&self, tf: &Transform, u_grid: &Array1<f64>) -> Array1<f64> {
        let grids = self.coeff_grids(tf);
        match self.shift_grid(tf) {
            None => self.eval_base(&grids, u_grid),
            Some(e) => {
                let shifted = u_grid + &e;
                let at_shift = self.eval_base(&grids, &shifted);
                let at_e = self.eval_base(&grids, &e);
                at_shift - at_e
            }
        }
    }

    fn eval_base(&self, grids: &[Array1<f64>], u: &Array1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(u.len());
        for (t, g) in self.terms.iter().zip(grids.iter()) {
            for (o, (&gu, &uu)) in out.iter_mut().zip(g.iter().zip(u.iter())) {
                *o += gu * uu.powi(t.degree as i32);
            }
        }
        out
    }

    /// Pointwise `f'_s(x, u)` (shift composed when present).
    pub fn deriv_on_grid(&self, tf: &Transform, u_grid: &Array1<f64>) -> Array1<f64> {
        let grids = self.coeff_grids(tf);
        let shifted;
        let arg = match self.shift_grid(tf) {
            None => u_grid,
            Some(e) => {
                shifted = u_grid + &e;
                &shifted
            }
        };
        let mut out = Array1::zeros(arg.len());
        for (t, g) in self.terms.iter().zip(grids.iter()) {
            let j = t.degree as f64;
            for (o, (&gu, &uu)) in out.iter_mut().zip(g.iter().zip(arg.iter())) {
                *o += j * gu * uu.powi(t.degree as i32 - 1);
            }
        }
        out
    }

    /// Pointwise primitive `V(x, u)`; for a shifted spec this is the
    /// primitive of `𝔣`, namely `V(z+e) − V(e) − f(e) z`.
    pub fn potential_on_grid(&self, tf: &Transform, u_grid: &Array1<f64>) -> Array1<f64> {
        let grids = self.coeff_grids(tf);
        match self.shift_grid(tf) {
            None => self.potential_base(&grids, u_grid),
            Some(e) => {
                let shifted = u_grid + &e;
                let v_shift = self.potential_base(&grids, &shifted);
                let v_e = self.potential_base(&grids, &e);
                let f_e = self.eval_base(&grids, &e);
                v_shift - v_e - &(f_e * u_grid)
            }
        }
    }

    fn potential_base(&self, grids: &[Array1<f64>], u: &Array1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(u.len());
        for (t, g) in self.terms.iter().zip(grids.iter()) {
            let p = t.degree as i32 + 1;
            for (o, (&gu, &uu)) in out.iter_mut().zip(g.iter().zip(u.iter())) {
                *o += gu * uu.powi(p) / p as f64;
            }
        }
        out
    }
}

/// Modal coefficients of `x ↦ f(x, u(x))`, computed on the dealiased grid and
/// projected back. Errors if grid values of `u` exceed the overflow guard.
pub fn eval_f(spec: &NonlinearitySpec, u_hat: &Array1<f64>) -> Result<Array1<f64>> {
    let tf = spec.transform();
    let u_grid = tf.to_physical(u_hat)?;
    let max = u_grid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if !max.is_finite() || max > OVERFLOW_GUARD {
        return Err(Error::Overflow(max));
    }
    let f_grid = spec.eval_on_grid(tf, &u_grid);
    tf.from_physical(&f_grid)
}

/// Grid values (on the base grid) of `f'_s(x, e(x))`, the time-independent
/// potential of the linearization around `e`.
pub fn linearized_potential(spec: &NonlinearitySpec, e_hat: &Array1<f64>) -> Result<Array1<f64>> {
    let tf = spec.geometry().base();
    let e_grid = tf.to_physical(e_hat)?;
    Ok(spec.deriv_on_grid(tf, &e_grid))
}

/// The spec for `𝔣(x, z) = f(x, z+e) − f(x, e)`; vanishes at `z = 0`.
/// Shifting an already shifted spec composes the shifts.
pub fn shifted_nonlinearity(spec: &NonlinearitySpec, e_hat: &Array1<f64>) -> Result<NonlinearitySpec> {
    if e_hat.len() != spec.geometry().mode_count() {
        return Err(Error::LengthMismatch {
            expected: spec.geometry().mode_count(),
            got: e_hat.len(),
        });
    }
    let shift = match &spec.shift {
        None => e_hat.clone(),
        Some(prev) => prev + e_hat,
    };
    let mut out = spec.clone();
    out.shift = if shift.iter().all(|&c| c == 0.0) { None } else { Some(shift) };
    Ok(out)
}

/// Decomposition of the nonlinear energy
/// `E = ½‖v‖² + ½‖Δu‖² + ½β‖u‖² + ∫ V(x, u)`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub bending: f64,
    pub mass: f64,
    pub potential: f64,
    pub total: f64,
}

/// Energy of a state; the potential part is quadrature of `V` on the
/// spec's dealiased grid.
pub fn total_energy(spec: &NonlinearitySpec, state: &ModalState) -> Result<EnergyReport> {
    state.check_finite()?;
    let geom = &state.geom;
    let kinetic = 0.5 * state.v.iter().map(|&c| c * c).sum::<f64>();
    let bending = 0.5
        * state
            .u
            .iter()
            .zip(geom.eigenvalues().iter())
            .map(|(&c, &l)| l * l * c * c)
            .sum::<f64>();
    let mass = 0.5 * geom.beta() * state.u.iter().map(|&c| c * c).sum::<f64>();
    let potential = if spec.is_zero() {
        0.0
    } else {
        let tf = spec.transform();
        let u_grid = tf.to_physical(&state.u)?;
        let max = u_grid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if !max.is_finite() || max > OVERFLOW_GUARD {
            return Err(Error::Overflow(max));
        }
        tf.integrate(&spec.potential_on_grid(tf, &u_grid))
    };
    let total = kinetic + bending + mass + potential;
    Ok(EnergyReport { kinetic, bending, mass, potential, total })
}

/// Axis-aligned box inside the domain.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoxRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxRegion {
    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(self.hi.iter()))
            .all(|(&x, (&lo, &hi))| x >= lo && x <= hi)
    }
}

/// C-infinity ramp: 0 at t ≤ 0, 1 at t ≥ 1, all derivatives vanishing at the
/// junctions (quotient-of-bumps smoothstep).
fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let b = |x: f64| (-1.0 / x).exp();
        b(t) / (b(t) + b(1.0 - t))
    }
}

/// Value of the smooth plateau bump for one box at point `p`: 1 inside the
/// box, 0 outside its δ-enlargement. On the torus the bump is periodized.
fn box_bump(geom: &Geometry, b: &BoxRegion, delta: f64, p: &[f64]) -> f64 {
    let period = match geom.kind() {
        DomainKind::Torus => Some(2.0 * std::f64::consts::PI),
        DomainKind::HingedRectangle => None,
    };
    let mut val = 1.0;
    for j in 0..geom.dim() {
        let f = |x: f64| -> f64 {
            if x < b.lo[j] {
                smoothstep((x - (b.lo[j] - delta)) / delta)
            } else if x > b.hi[j] {
                smoothstep(((b.hi[j] + delta) - x) / delta)
            } else {
                1.0
            }
        };
        let fj = match period {
            None => f(p[j]),
            Some(l) => f(p[j]).max(f(p[j] - l)).max(f(p[j] + l)),
        };
        val *= fj;
    }
    val
}

/// Smooth cutoff equal to 1 on the union of boxes, supported in their
/// δ-enlargement, sampled on a transform's grid. Used for `b_ω`-style
/// observation weights; multiple boxes combine by soft union.
pub fn bump_field(geom: &Geometry, tf: &Transform, boxes: &[BoxRegion], delta: f64) -> Array1<f64> {
    tf.sample(|p| {
        let mut miss = 1.0;
        for b in boxes {
            miss *= 1.0 - box_bump(geom, b, delta, p);
        }
        1.0 - miss
    })
}

/// Indicator of the union of boxes on a transform's grid.
pub fn indicator_field(tf: &Transform, boxes: &[BoxRegion]) -> Array1<f64> {
    tf.sample(|p| if boxes.iter().any(|b| b.contains(p)) { 1.0 } else { 0.0 })
}

/// Smooth damping profile `γ²(x)` built from plateau bumps over the region ω,
/// with `γ = γ0` on ω and support in the δ-enlargement.
#[derive(Debug, Clone)]
pub struct DampingProfile {
    geom: Arc<Geometry>,
    boxes: Vec<BoxRegion>,
    gamma0: f64,
    delta: f64,
}

impl DampingProfile {
    pub fn new(
        geom: Arc<Geometry>,
        boxes: Vec<BoxRegion>,
        gamma0: f64,
        delta: f64,
    ) -> Result<DampingProfile> {
        if gamma0 <= 0.0 {
            return Err(Error::Damping(format!("gamma0 must be > 0, got {gamma0}")));
        }
        if delta <= 0.0 {
            return Err(Error::Damping(format!("delta must be > 0, got {delta}")));
        }
        if boxes.is_empty() {
            return Err(Error::Damping("damping region is empty".into()));
        }
        let side = match geom.kind() {
            DomainKind::HingedRectangle => std::f64::consts::PI,
            DomainKind::Torus => 2.0 * std::f64::consts::PI,
        };
        for b in &boxes {
            if b.lo.len() != geom.dim() || b.hi.len() != geom.dim() {
                return Err(Error::Damping("box dimension mismatch".into()));
            }
            for j in 0..geom.dim() {
                if !(b.lo[j] < b.hi[j]) {
                    return Err(Error::Damping("box must have positive extent".into()));
                }
                if b.hi[j] - b.lo[j] + 2.0 * delta >= side {
                    // an over-wide bump would self-overlap on the torus and
                    // spill past the rectangle boundary
                    if geom.kind() == DomainKind::Torus {
                        return Err(Error::Damping(
                            "box plus transition width must fit inside one period".into(),
                        ));
                    }
                }
            }
        }
        Ok(DampingProfile { geom, boxes, gamma0, delta })
    }

    /// Constant damping `γ ≡ γ0` over the whole domain.
    pub fn uniform(geom: Arc<Geometry>, gamma0: f64) -> Result<DampingProfile> {
        if gamma0 <= 0.0 {
            return Err(Error::Damping(format!("gamma0 must be > 0, got {gamma0}")));
        }
        let side = match geom.kind() {
            DomainKind::HingedRectangle => std::f64::consts::PI,
            DomainKind::Torus => 2.0 * std::f64::consts::PI,
        };
        let dim = geom.dim();
        let boxes = vec![BoxRegion { lo: vec![-1.0; dim], hi: vec![side + 1.0; dim] }];
        Ok(DampingProfile { geom, boxes, gamma0, delta: 1.0 })
    }

    pub fn geometry(&self) -> &Arc<Geometry> {
        &self.geom
    }

    pub fn boxes(&self) -> &[BoxRegion] {
        &self.boxes
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `γ²(x)` sampled on a transform's grid.
    pub fn gamma_sq_on(&self, tf: &Transform) -> Array1<f64> {
        let g0sq = self.gamma0 * self.gamma0;
        tf.sample(|p| {
            let mut miss = 1.0;
            for b in &self.boxes {
                miss *= 1.0 - box_bump(&self.geom, b, self.delta, p);
            }
            g0sq * (1.0 - miss)
        })
    }

    /// `γ²(x)` on the geometry's base grid.
    pub fn gamma_sq(&self) -> Array1<f64> {
        self.gamma_sq_on(self.geom.base())
    }

    /// Grid mask of the declared region ω itself.
    pub fn omega_mask(&self, tf: &Transform) -> Vec<bool> {
        (0..tf.grid_len())
            .map(|i| {
                let p = tf.point(i);
                self.boxes.iter().any(|b| b.contains(&p))
            })
            .collect()
    }
}

/// Empirical composition-estimate report: ratios `‖f(u)‖_{H^s}/‖u‖_{H^s}` and
/// `‖f(u) − f'_s(·,0)u‖_{L²}/(‖u‖_∞ ‖u‖_{L²})` over random bounded fields.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CompositionReport {
    pub s: f64,
    pub linf_radius: f64,
    pub hs_ratios: Vec<f64>,
    pub remainder_ratios: Vec<f64>,
    pub max_hs_ratio: f64,
    pub max_remainder_ratio: f64,
}

/// Samples random fields in a fixed L∞ ball and reports the composition
/// ratios; the maxima stay bounded over the family for a polynomial `f`.
pub fn check_composition_bound(
    spec: &NonlinearitySpec,
    samples: usize,
    s: f64,
    linf_radius: f64,
    seed: u64,
) -> Result<CompositionReport> {
    if samples == 0 {
        return Err(Error::Options("samples must be >= 1".into()));
    }
    if !(0.0..=2.0).contains(&s) || s == 0.0 {
        return Err(Error::Options(format!("s must lie in (0, 2], got {s}")));
    }
    let geom = spec.geometry();
    let tf = spec.transform();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = geom.mode_count();

    // grid values of the linearization coefficient f'_s(x, 0)
    let zero_grid = Array1::zeros(tf.grid_len());
    let deriv0 = spec.deriv_on_grid(tf, &zero_grid);

    let mut hs_ratios = Vec::with_capacity(samples);
    let mut remainder_ratios = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut u = Array1::zeros(n);
        for (c, &l) in u.iter_mut().zip(geom.eigenvalues().iter()) {
            let g: f64 = {
                use rand::Rng;
                let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            };
            *c = g / (1.0 + l);
        }
        let grid = tf.to_physical(&u)?;
        let linf = grid.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if linf == 0.0 {
            continue;
        }
        let scale = linf_radius / linf;
        let u = u * scale;
        let u_grid = &grid * scale;

        let f_hat = eval_f(spec, &u)?;
        let hs_u = geom.sobolev_norm(&u, s);
        let hs_f = geom.sobolev_norm(&f_hat, s);
        hs_ratios.push(if hs_u > 0.0 { hs_f / hs_u } else { 0.0 });

        let f_grid = spec.eval_on_grid(tf, &u_grid);
        let rem = &f_grid - &(&deriv0 * &u_grid);
        let rem_l2 = tf.inner(&rem, &rem).sqrt();
        let u_l2 = tf.inner(&u_grid, &u_grid).sqrt();
        remainder_ratios.push(if u_l2 > 0.0 { rem_l2 / (linf_radius * u_l2) } else { 0.0 });
    }
    let max_hs_ratio = hs_ratios.iter().fold(0.0f64, |m, &x| m.max(x));
    let max_remainder_ratio = remainder_ratios.iter().fold(0.0f64, |m, &x| m.max(x));
    if !max_hs_ratio.is_finite() || !max_remainder_ratio.is_finite() {
        return Err(Error::NonFinite("composition ratios"));
    }
    Ok(CompositionReport {
        s,
        linf_radius,
        hs_ratios,
        remainder_ratios,
        max_hs_ratio,
        max_remainder_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_state;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn hinged(n: usize) -> Arc<Geometry> {
        Arc::new(Geometry::build(DomainKind::HingedRectangle, 1, &[n], 0.0).unwrap())
    }

    fn torus(n: usize) -> Arc<Geometry> {
        Arc::new(Geometry::build(DomainKind::Torus, 1, &[n], 1.0).unwrap())
    }

    fn cubic(geom: &Arc<Geometry>) -> NonlinearitySpec {
        NonlinearitySpec::polynomial(
            geom.clone(),
            &[0.0, 0.0, 1.0],
            NonlinearityClass::Defocusing { alpha: 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn eval_f_zero_is_zero() {
        let g = hinged(8);
        let spec = cubic(&g);
        let out = eval_f(&spec, &Array1::zeros(8)).unwrap();
        assert!(out.iter().all(|&c| c == 0.0));
    }

    /// sin³x = (3 sin x − sin 3x)/4; coefficients checked in the orthonormal
    /// basis where sin(kx) has coefficient sqrt(π/2).
    #[test]
    fn eval_f_cubic_of_sine() {
        let g = hinged(8);
        let spec = cubic(&g);
        let a = (PI / 2.0).sqrt();
        let mut u = Array1::zeros(8);
        u[0] = a; // u = sin(x)
        let out = eval_f(&spec, &u).unwrap();
        assert_abs_diff_eq!(out[0], 0.75 * a, epsilon = 1e-12);
        assert_abs_diff_eq!(out[2], -0.25 * a, epsilon = 1e-12);
        for k in [1usize, 3, 4, 5, 6, 7] {
            assert_abs_diff_eq!(out[k], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eval_f_constant_on_torus() {
        let g = torus(5);
        let spec = NonlinearitySpec::polynomial(
            g.clone(),
            &[-2.0, 0.0, 1.0],
            NonlinearityClass::AsymptoticDefocusing { radius: 2.0_f64.sqrt() },
        )
        .unwrap();
        // u ≡ 1: modal coefficient sqrt(2π) on the constant mode
        let mut u = Array1::zeros(5);
        u[0] = (2.0 * PI).sqrt();
        let out = eval_f(&spec, &u).unwrap();
        // f(1) = 1 − 2 = −1, constant
        assert_abs_diff_eq!(out[0], -(2.0 * PI).sqrt(), epsilon = 1e-12);
        for k in 1..5 {
            assert_abs_diff_eq!(out[k], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn eval_f_overflow_guard() {
        let g = hinged(4);
        let spec = cubic(&g);
        let mut u = Array1::zeros(4);
        u[0] = 1e9;
        assert!(matches!(eval_f(&spec, &u), Err(Error::Overflow(_))));
    }

    #[test]
    fn energy_of_sine_bending_only() {
        let g = hinged(8);
        let spec = NonlinearitySpec::zero(g.clone());
        let mut u = Array1::zeros(8);
        u[0] = (PI / 2.0).sqrt(); // u = sin(x)
        let state = ModalState::new(u, Array1::zeros(8), g, 0.0).unwrap();
        let e = total_energy(&spec, &state).unwrap();
        assert_abs_diff_eq!(e.bending, PI / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.total, PI / 4.0, epsilon = 1e-12);
        assert_eq!(e.kinetic, 0.0);
        assert_eq!(e.potential, 0.0);
    }

    #[test]
    fn energy_of_zero_state() {
        let g = hinged(8);
        let spec = cubic(&g);
        let e = total_energy(&spec, &ModalState::zero(g)).unwrap();
        assert_eq!(e.total, 0.0);
    }

    /// ∫ sin⁴/4 over (0, π) is 3π/32.
    #[test]
    fn energy_cubic_potential_of_sine() {
        let g = hinged(8);
        let spec = cubic(&g);
        let mut u = Array1::zeros(8);
        u[0] = (PI / 2.0).sqrt();
        let state = ModalState::new(u, Array1::zeros(8), g, 0.0).unwrap();
        let e = total_energy(&spec, &state).unwrap();
        assert_abs_diff_eq!(e.potential, 3.0 * PI / 32.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.total, PI / 4.0 + 3.0 * PI / 32.0, epsilon = 1e-12);
    }

    #[test]
    fn linearized_potential_examples() {
        let g = hinged(8);
        let spec = cubic(&g);
        // e = 0 -> zero grid
        let p = linearized_potential(&spec, &Array1::zeros(8)).unwrap();
        assert!(p.iter().all(|&x| x == 0.0));

        // f = u³, e = sin(x) -> 3 sin²x pointwise
        let mut e_hat = Array1::zeros(8);
        e_hat[0] = (PI / 2.0).sqrt();
        let p = linearized_potential(&spec, &e_hat).unwrap();
        let tf = g.base();
        for i in 0..tf.grid_len() {
            let x = tf.point(i)[0];
            assert_abs_diff_eq!(p[i], 3.0 * x.sin() * x.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn linearized_potential_constant_shift() {
        let g = torus(5);
        let spec = NonlinearitySpec::polynomial(
            g.clone(),
            &[-2.0, 0.0, 1.0],
            NonlinearityClass::AsymptoticDefocusing { radius: 2.0_f64.sqrt() },
        )
        .unwrap();
        let mut e_hat = Array1::zeros(5);
        e_hat[0] = (2.0 * PI).sqrt(); // e ≡ 1
        let p = linearized_potential(&spec, &e_hat).unwrap();
        for &x in p.iter() {
            assert_abs_diff_eq!(x, 1.0, epsilon = 1e-12); // 3·1 − 2
        }
    }

    #[test]
    fn shifted_by_zero_behaves_identically() {
        let g = hinged(6);
        let spec = cubic(&g);
        let sh = shifted_nonlinearity(&spec, &Array1::zeros(6)).unwrap();
        assert!(sh.shift().is_none());
        let u = random_state(&g, 1, 1.0).u;
        assert_eq!(eval_f(&spec, &u).unwrap(), eval_f(&sh, &u).unwrap());
    }

    /// f(u) = u², e ≡ c: the shifted map is z² + 2cz. The square satisfies
    /// neither class tag, so this algebra test uses the unchecked builder.
    #[test]
    fn shifted_square_constant() {
        let g = torus(5);
        let spec = NonlinearitySpec::new_unchecked(
            g.clone(),
            vec![Term { degree: 2, coeff: Coefficient::Constant(1.0) }],
            NonlinearityClass::AsymptoticDefocusing { radius: 1.0 },
        )
        .unwrap();
        let c = 0.7;
        let mut e_hat = Array1::zeros(5);
        e_hat[0] = c * (2.0 * PI).sqrt();
        let sh = shifted_nonlinearity(&spec, &e_hat).unwrap();
        let tf = sh.transform().clone();
        let z = tf.sample(|p| 0.3 * p[0].sin() - 0.1);
        let out = sh.eval_on_grid(&tf, &z);
        for i in 0..z.len() {
            assert_abs_diff_eq!(out[i], z[i] * z[i] + 2.0 * c * z[i], epsilon = 1e-12);
        }
    }

    /// Shifted cubic against the pointwise composition oracle f(z+e) − f(e).
    #[test]
    fn shifted_cubic_matches_composition() {
        let g = hinged(8);
        let spec = cubic(&g);
        let mut e_hat = Array1::zeros(8);
        e_hat[0] = (PI / 2.0).sqrt(); // e = sin x
        let sh = shifted_nonlinearity(&spec, &e_hat).unwrap();
        let tf = sh.transform().clone();
        let z = tf.sample(|p| 0.4 * (2.0 * p[0]).cos() + 0.2);
        let out = sh.eval_on_grid(&tf, &z);
        for i in 0..z.len() {
            let x = tf.point(i)[0];
            let e = x.sin();
            let expect = (z[i] + e).powi(3) - e.powi(3);
            assert_abs_diff_eq!(out[i], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn shift_composition_adds() {
        let g = hinged(6);
        let spec = cubic(&g);
        let e1 = random_state(&g, 5, 0.5).u;
        let e2 = random_state(&g, 6, 0.5).u;
        let once = shifted_nonlinearity(&shifted_nonlinearity(&spec, &e1).unwrap(), &e2).unwrap();
        let both = shifted_nonlinearity(&spec, &(&e1 + &e2)).unwrap();
        let u = random_state(&g, 7, 0.3).u;
        let a = eval_f(&once, &u).unwrap();
        let b = eval_f(&both, &u).unwrap();
        for k in 0..6 {
            assert_abs_diff_eq!(a[k], b[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn defocusing_rejects_wrong_sign() {
        let g = hinged(6);
        // u³ − 2u changes the sign of s·f near the origin
        let res = NonlinearitySpec::polynomial(
            g,
            &[-2.0, 0.0, 1.0],
            NonlinearityClass::Defocusing { alpha: 0.0 },
        );
        assert!(res.is_err());

        let g = hinged(6);
        let ok = NonlinearitySpec::polynomial(
            g,
            &[-2.0, 0.0, 1.0],
            NonlinearityClass::AsymptoticDefocusing { radius: 2.0_f64.sqrt() },
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn torus_defocusing_needs_alpha() {
        let g = torus(5);
        // pure cubic: s f = s⁴ < α s² near 0 for any α > 0, and α = 0 is
        // rejected outright on a boundaryless domain
        assert!(NonlinearitySpec::polynomial(
            g.clone(),
            &[0.0, 0.0, 1.0],
            NonlinearityClass::Defocusing { alpha: 0.0 }
        )
        .is_err());
        // cubic plus linear passes with α = 1
        assert!(NonlinearitySpec::polynomial(
            g,
            &[1.0, 0.0, 1.0],
            NonlinearityClass::Defocusing { alpha: 1.0 }
        )
        .is_ok());
    }

    /// Defocusing potential sign: V(x, s) ≥ 0 on sampled grids.
    #[test]
    fn defocusing_potential_nonnegative() {
        let g = hinged(8);
        let spec = cubic(&g);
        let tf = spec.transform().clone();
        for seed in 0..5 {
            let u = random_state(&g, seed, 1.5).u;
            let grid = tf.to_physical(&u).unwrap();
            let v = spec.potential_on_grid(&tf, &grid);
            assert!(v.iter().all(|&x| x >= -1e-14));
        }
    }

    /// Energy lower bound E ≥ ½‖U‖_X² for defocusing specs.
    #[test]
    fn energy_lower_bound() {
        let g = hinged(8);
        let spec = cubic(&g);
        for seed in 0..8 {
            let state = random_state(&g, seed, 2.0);
            let e = total_energy(&spec, &state).unwrap();
            let half = 0.5 * state.x_norm().powi(2);
            assert!(e.total >= half - 1e-12, "E = {} < {half}", e.total);
        }
    }

    /// Dealiasing exactness: eval_f with the degree-based padding matches a
    /// fine-quadrature projection oracle.
    #[test]
    fn dealiasing_exactness_quintic() {
        let g = hinged(10);
        let spec = NonlinearitySpec::polynomial(
            g.clone(),
            &[0.5, 0.0, 0.0, 0.0, 1.0],
            NonlinearityClass::Defocusing { alpha: 0.0 },
        )
        .unwrap();
        let u = random_state(&g, 3, 1.0).u;
        let out = eval_f(&spec, &u).unwrap();

        // oracle: project on a much finer grid
        let fine = g.padded(8.0);
        let u_grid = fine.to_physical(&u).unwrap();
        let f_grid = spec.eval_on_grid(&fine, &u_grid);
        let oracle = fine.from_physical(&f_grid).unwrap();
        for k in 0..10 {
            assert_abs_diff_eq!(out[k], oracle[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn damping_profile_floor_and_support() {
        let g = hinged(8);
        let prof = DampingProfile::new(
            g.clone(),
            vec![BoxRegion { lo: vec![PI / 4.0], hi: vec![3.0 * PI / 4.0] }],
            2.0,
            0.3,
        )
        .unwrap();
        let gsq = prof.gamma_sq();
        let tf = g.base();
        let mask = prof.omega_mask(tf);
        for i in 0..tf.grid_len() {
            let x = tf.point(i)[0];
            assert!(gsq[i].is_finite());
            if mask[i] {
                assert!(gsq[i].sqrt() >= 2.0 - 1e-12, "gamma below floor inside omega");
            }
            if x < PI / 4.0 - 0.3 || x > 3.0 * PI / 4.0 + 0.3 {
                assert_eq!(gsq[i], 0.0, "support leaks past the delta enlargement");
            }
        }
    }

    #[test]
    fn damping_union_of_boxes() {
        let g = torus(9);
        let prof = DampingProfile::new(
            g.clone(),
            vec![
                BoxRegion { lo: vec![0.5], hi: vec![1.5] },
                BoxRegion { lo: vec![4.0], hi: vec![5.0] },
            ],
            1.0,
            0.25,
        )
        .unwrap();
        let gsq = prof.gamma_sq();
        let tf = g.base();
        for i in 0..tf.grid_len() {
            let x = tf.point(i)[0];
            let inside = (0.5..=1.5).contains(&x) || (4.0..=5.0).contains(&x);
            if inside {
                assert_abs_diff_eq!(gsq[i], 1.0, epsilon = 1e-12);
            }
            assert!(gsq[i] <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn uniform_damping_is_constant() {
        let g = torus(5);
        let prof = DampingProfile::uniform(g.clone(), 1.5).unwrap();
        let gsq = prof.gamma_sq();
        for &x in gsq.iter() {
            assert_abs_diff_eq!(x, 2.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn composition_ratios_linear() {
        let g = hinged(10);
        let spec = NonlinearitySpec::polynomial(
            g,
            &[1.0],
            NonlinearityClass::Defocusing { alpha: 0.0 },
        )
        .unwrap();
        let rep = check_composition_bound(&spec, 10, 1.0, 1.0, 42).unwrap();
        for &r in &rep.hs_ratios {
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-10);
        }
        for &r in &rep.remainder_ratios {
            assert_abs_diff_eq!(r, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn composition_ratios_zero_f() {
        let g = hinged(10);
        let spec = NonlinearitySpec::zero(g);
        let rep = check_composition_bound(&spec, 5, 1.0, 1.0, 1).unwrap();
        assert_eq!(rep.max_hs_ratio, 0.0);
        assert_eq!(rep.max_remainder_ratio, 0.0);
    }

    /// Small-amplitude cubic: the remainder ratio scales like ε times a
    /// bounded factor.
    #[test]
    fn composition_ratio_small_amplitude() {
        let g = hinged(10);
        let spec = cubic(&g);
        let big = check_composition_bound(&spec, 8, 1.0, 1.0, 7).unwrap();
        let small = check_composition_bound(&spec, 8, 1.0, 1e-3, 7).unwrap();
        assert!(small.max_remainder_ratio < 1e-2 * big.max_remainder_ratio.max(1e-6));
        assert!(big.max_remainder_ratio.is_finite());
    }
}
