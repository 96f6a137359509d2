//! Domain geometry: eigenbasis enumeration, eigenvalue tables, quadrature
//! grids, and modal <-> physical transforms.

use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayD, IxDyn};

use crate::error::{Error, Result};

/// Supported flat domains.
///
/// The hinged rectangle is `(0, π)^d` with the sine basis, which satisfies
/// `u = Δu = 0` on the boundary identically. The torus has side `2π` per
/// direction with the real cosine/sine basis and requires `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DomainKind {
    HingedRectangle,
    Torus,
}

/// One direction of the tensor-product eigenbasis.
///
/// Modes are enumerated in a frozen order per direction:
/// - hinged: `sin((m+1) x)` for `m = 0..n`, frequency `m+1`;
/// - torus: constant, then `cos(r x), sin(r x)` pairs for `r = 1, 2, ...`
///   (an unpaired top cosine closes the count when `n` is even).
#[derive(Debug, Clone)]
struct DirBasis {
    kind: DomainKind,
    n_modes: usize,
    /// Squared frequency of each mode, in enumeration order.
    freq_sq: Vec<f64>,
}

impl DirBasis {
    fn new(kind: DomainKind, n_modes: usize) -> Self {
        let freq_sq = (0..n_modes)
            .map(|m| {
                let k = match kind {
                    DomainKind::HingedRectangle => (m + 1) as f64,
                    DomainKind::Torus => ((m + 1) / 2) as f64,
                };
                k * k
            })
            .collect();
        DirBasis { kind, n_modes, freq_sq }
    }

    fn max_freq(&self) -> usize {
        match self.kind {
            DomainKind::HingedRectangle => self.n_modes,
            DomainKind::Torus => self.n_modes / 2,
        }
    }

    /// Orthonormal basis function `m` evaluated at `x`.
    fn eval(&self, m: usize, x: f64) -> f64 {
        match self.kind {
            DomainKind::HingedRectangle => {
                let k = (m + 1) as f64;
                (2.0 / PI).sqrt() * (k * x).sin()
            }
            DomainKind::Torus => {
                if m == 0 {
                    1.0 / (2.0 * PI).sqrt()
                } else {
                    let r = ((m + 1) / 2) as f64;
                    if m % 2 == 1 {
                        (r * x).cos() / PI.sqrt()
                    } else {
                        (r * x).sin() / PI.sqrt()
                    }
                }
            }
        }
    }

    /// Collocation points and the uniform quadrature weight for `m_pts`.
    fn grid(&self, m_pts: usize) -> (Vec<f64>, f64) {
        match self.kind {
            DomainKind::HingedRectangle => {
                let h = PI / (m_pts + 1) as f64;
                ((1..=m_pts).map(|i| i as f64 * h).collect(), h)
            }
            DomainKind::Torus => {
                let h = 2.0 * PI / m_pts as f64;
                ((0..m_pts).map(|i| i as f64 * h).collect(), h)
            }
        }
    }
}

/// Modal <-> physical transform on a tensor grid with a fixed padding factor.
///
/// Holds the per-direction basis evaluation tables. `from_physical` is the
/// quadrature realization of the L²-orthogonal projection onto the retained
/// modes; the round trip `from_physical ∘ to_physical` is exact on the
/// retained band as long as the grid resolves it.
#[derive(Debug, Clone)]
pub struct Transform {
    modes_per_dim: Vec<usize>,
    grid_per_dim: Vec<usize>,
    /// `basis[j]` is `M_j × N_j`: basis function values at collocation points.
    basis: Vec<Array2<f64>>,
    coords: Vec<Vec<f64>>,
    /// Product of the per-direction quadrature weights (one cell's measure).
    cell_weight: f64,
}

impl Transform {
    fn build(dirs: &[DirBasis], factor: f64) -> Transform {
        let mut basis = Vec::new();
        let mut coords = Vec::new();
        let mut grid_per_dim = Vec::new();
        let mut cell_weight = 1.0;
        for dir in dirs {
            let min_pts = match dir.kind {
                DomainKind::HingedRectangle => dir.n_modes,
                DomainKind::Torus => 2 * dir.max_freq() + 1,
            };
            let m_pts = ((factor * dir.n_modes as f64).ceil() as usize).max(min_pts);
            let (xs, w) = dir.grid(m_pts);
            let mut b = Array2::zeros((m_pts, dir.n_modes));
            for (i, &x) in xs.iter().enumerate() {
                for m in 0..dir.n_modes {
                    b[[i, m]] = dir.eval(m, x);
                }
            }
            cell_weight *= w;
            grid_per_dim.push(m_pts);
            coords.push(xs);
            basis.push(b);
        }
        Transform {
            modes_per_dim: dirs.iter().map(|d| d.n_modes).collect(),
            grid_per_dim,
            basis,
            coords,
            cell_weight,
        }
    }

    pub fn mode_len(&self) -> usize {
        self.modes_per_dim.iter().product()
    }

    pub fn grid_len(&self) -> usize {
        self.grid_per_dim.iter().product()
    }

    pub fn grid_shape(&self) -> &[usize] {
        &self.grid_per_dim
    }

    /// Quadrature weight attached to every grid point.
    pub fn cell_weight(&self) -> f64 {
        self.cell_weight
    }

    /// Per-direction collocation coordinates.
    pub fn coords(&self) -> &[Vec<f64>] {
        &self.coords
    }

    /// Decodes a flat grid index into point coordinates.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut rem = flat;
        let d = self.grid_per_dim.len();
        let mut out = vec![0.0; d];
        for j in (0..d).rev() {
            let m = self.grid_per_dim[j];
            out[j] = self.coords[j][rem % m];
            rem /= m;
        }
        out
    }

    /// Samples a function of the point coordinates on the whole grid.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Array1<f64> {
        let n = self.grid_len();
        let mut out = Array1::zeros(n);
        for i in 0..n {
            out[i] = f(&self.point(i));
        }
        out
    }

    /// Quadrature of a grid function: `cell_weight · Σ g_i`.
    pub fn integrate(&self, grid: &Array1<f64>) -> f64 {
        self.cell_weight * grid.sum()
    }

    /// Quadrature inner product of two grid functions.
    pub fn inner(&self, a: &Array1<f64>, b: &Array1<f64>) -> f64 {
        self.cell_weight * a.dot(b)
    }

    /// Evaluates `Σ c_k φ_k` at the collocation points.
    pub fn to_physical(&self, modal: &Array1<f64>) -> Result<Array1<f64>> {
        if modal.len() != self.mode_len() {
            return Err(Error::LengthMismatch { expected: self.mode_len(), got: modal.len() });
        }
        let mut a = modal
            .clone()
            .into_shape(IxDyn(&self.modes_per_dim))
            .expect("modal shape");
        for (axis, b) in self.basis.iter().enumerate() {
            a = apply_along_axis(&a, b, axis);
        }
        Ok(a.into_shape(self.grid_len()).expect("grid shape").into_dimensionality().unwrap())
    }

    /// Batched `to_physical` over the columns of a `modes × batch` matrix.
    pub fn to_physical_batch(&self, modal: &Array2<f64>) -> Result<Array2<f64>> {
        if modal.nrows() != self.mode_len() {
            return Err(Error::LengthMismatch { expected: self.mode_len(), got: modal.nrows() });
        }
        let batch = modal.ncols();
        let mut shape = self.modes_per_dim.clone();
        shape.push(batch);
        let mut a = modal.clone().into_shape(IxDyn(&shape)).expect("modal batch shape");
        for (axis, b) in self.basis.iter().enumerate() {
            a = apply_along_axis(&a, b, axis);
        }
        Ok(a.into_shape((self.grid_len(), batch)).expect("grid batch shape").into_dimensionality().unwrap())
    }

    /// Batched `from_physical` over the columns of a `grid × batch` matrix.
    pub fn from_physical_batch(&self, grid: &Array2<f64>) -> Result<Array2<f64>> {
        if grid.nrows() != self.grid_len() {
            return Err(Error::LengthMismatch { expected: self.grid_len(), got: grid.nrows() });
        }
        let batch = grid.ncols();
        let mut shape = self.grid_per_dim.clone();
        shape.push(batch);
        let mut a = grid.clone().into_shape(IxDyn(&shape)).expect("grid batch shape");
        for (axis, b) in self.basis.iter().enumerate() {
            let bt = b.t().to_owned();
            a = apply_along_axis(&a, &bt, axis);
        }
        let mut modal: Array2<f64> = a
            .into_shape((self.mode_len(), batch))
            .expect("modal batch shape")
            .into_dimensionality()
            .unwrap();
        modal *= self.cell_weight;
        Ok(modal)
    }

    /// Quadrature projection of a grid function onto the retained modes.
    pub fn from_physical(&self, grid: &Array1<f64>) -> Result<Array1<f64>> {
        if grid.len() != self.grid_len() {
            return Err(Error::LengthMismatch { expected: self.grid_len(), got: grid.len() });
        }
        let mut a = grid
            .clone()
            .into_shape(IxDyn(&self.grid_per_dim))
            .expect("grid shape");
        for (axis, b) in self.basis.iter().enumerate() {
            let bt = b.t().to_owned();
            a = apply_along_axis(&a, &bt, axis);
        }
        let mut modal: Array1<f64> =
            a.into_shape(self.mode_len()).expect("modal shape").into_dimensionality().unwrap();
        modal *= self.cell_weight;
        Ok(modal)
    }
}

/// Contracts `mat` (P × Q) against axis `axis` (length Q) of `a`.
fn apply_along_axis(a: &ArrayD<f64>, mat: &Array2<f64>, axis: usize) -> ArrayD<f64> {
    let mut view = a.view();
    view.swap_axes(0, axis);
    let moved = view.as_standard_layout().into_owned();
    let mut shape: Vec<usize> = moved.shape().to_vec();
    let q = shape[0];
    let rest: usize = moved.len() / q;
    let flat = moved.into_shape((q, rest)).expect("contiguous after to_owned");
    let prod = mat.dot(&flat);
    shape[0] = mat.nrows();
    let mut out = prod.into_shape(IxDyn(&shape)).expect("product shape");
    out.swap_axes(0, axis);
    out.as_standard_layout().to_owned()
}

/// Immutable description of the discretized domain: eigenbasis enumeration,
/// eigenvalue table, and the dealiased quadrature grid.
#[derive(Debug, Clone)]
pub struct Geometry {
    kind: DomainKind,
    dim: usize,
    modes_per_dim: Vec<usize>,
    beta: f64,
    dirs: Vec<DirBasis>,
    /// λ_k of −Δ per retained multi-index, in lexicographic flattening order.
    eigenvalues: Array1<f64>,
    base: Transform,
}

impl Geometry {
    /// Builds a geometry. The quadrature grid uses padding factor 2 per
    /// direction (enough for cubic dealiasing, above the 3/2 floor).
    pub fn build(
        kind: DomainKind,
        dim: usize,
        modes_per_dim: &[usize],
        beta: f64,
    ) -> Result<Geometry> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Geometry(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if modes_per_dim.len() != dim {
            return Err(Error::Geometry(format!(
                "expected {dim} per-direction mode counts, got {}",
                modes_per_dim.len()
            )));
        }
        if let Some(&n) = modes_per_dim.iter().find(|&&n| n < 2) {
            return Err(Error::Geometry(format!("modes_per_dim must be >= 2, got {n}")));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::Geometry(format!("beta must be finite and >= 0, got {beta}")));
        }
        if kind == DomainKind::Torus && beta == 0.0 {
            return Err(Error::Geometry(
                "torus requires beta > 0 (Poincaré-like inequality fails on a boundaryless \
                 domain otherwise)"
                    .into(),
            ));
        }
        let dirs: Vec<DirBasis> =
            modes_per_dim.iter().map(|&n| DirBasis::new(kind, n)).collect();
        let mode_count: usize = modes_per_dim.iter().product();
        let mut eigenvalues = Array1::zeros(mode_count);
        for (flat, lambda) in eigenvalues.iter_mut().enumerate() {
            let mut rem = flat;
            let mut sum = 0.0;
            for j in (0..dim).rev() {
                let n = modes_per_dim[j];
                sum += dirs[j].freq_sq[rem % n];
                rem /= n;
            }
            *lambda = sum;
        }
        let base = Transform::build(&dirs, 2.0);
        Ok(Geometry { kind, dim, modes_per_dim: modes_per_dim.to_vec(), beta, dirs, eigenvalues, base })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes_per_dim(&self) -> &[usize] {
        &self.modes_per_dim
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mode_count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues of −Δ in enumeration order.
    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.eigenvalues
    }

    /// The default (factor-2) quadrature grid and transform.
    pub fn base(&self) -> &Transform {
        &self.base
    }

    /// Builds a transform padded for products of the given polynomial degree:
    /// factor `max(2, (degree + 1) / 2)` per direction.
    pub fn dealiased(&self, degree: usize) -> Transform {
        let factor = ((degree as f64 + 1.0) / 2.0).max(2.0);
        Transform::build(&self.dirs, factor)
    }

    /// Transform with an explicit padding factor (≥ 1).
    pub fn padded(&self, factor: f64) -> Transform {
        Transform::build(&self.dirs, factor.max(1.0))
    }

    /// `(Σ_k (1 + λ_k)^s c_k²)^{1/2}`, the `H_D^s` norm of a modal array.
    /// `s = 0` is the L² norm by orthonormality.
    pub fn sobolev_norm(&self, coeffs: &Array1<f64>, s: f64) -> f64 {
        coeffs
            .iter()
            .zip(self.eigenvalues.iter())
            .map(|(&c, &l)| (1.0 + l).powf(s) * c * c)
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise rescale by `(1 + λ_k)^{(s_from − s_to)/2}`, the Riesz
    /// isometry from `H_D^{s_from}` onto `H_D^{s_to}`.
    pub fn riesz_scale(&self, coeffs: &Array1<f64>, s_from: f64, s_to: f64) -> Array1<f64> {
        let e = (s_from - s_to) / 2.0;
        Array1::from_iter(
            coeffs
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(&c, &l)| (1.0 + l).powf(e) * c),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::Array1;
    use rand::{Rng, SeedableRng};

    fn geo(kind: DomainKind, n: usize) -> Geometry {
        let beta = if kind == DomainKind::Torus { 1.0 } else { 0.0 };
        Geometry::build(kind, 1, &[n], beta).unwrap()
    }

    #[test]
    fn hinged_eigenvalues() {
        let g = geo(DomainKind::HingedRectangle, 4);
        assert_eq!(g.eigenvalues().to_vec(), vec![1.0, 4.0, 9.0, 16.0]);
    }

    #[test]
    fn torus_eigenvalues() {
        let g = geo(DomainKind::Torus, 5);
        assert_eq!(g.eigenvalues().to_vec(), vec![0.0, 1.0, 1.0, 4.0, 4.0]);
    }

    #[test]
    fn torus_even_mode_count() {
        let g = geo(DomainKind::Torus, 4);
        // constant, cos 1, sin 1, unpaired cos 2
        assert_eq!(g.eigenvalues().to_vec(), vec![0.0, 1.0, 1.0, 4.0]);
    }

    #[test]
    fn torus_rejects_zero_beta() {
        assert!(Geometry::build(DomainKind::Torus, 1, &[5], 0.0).is_err());
    }

    #[test]
    fn rejects_small_mode_count() {
        assert!(Geometry::build(DomainKind::HingedRectangle, 1, &[1], 0.0).is_err());
    }

    #[test]
    fn eigenvalues_2d_lexicographic() {
        let g = Geometry::build(DomainKind::HingedRectangle, 2, &[2, 3], 0.0).unwrap();
        // (k1,k2) lex with k2 fastest: (1,1)(1,2)(1,3)(2,1)(2,2)(2,3)
        assert_eq!(g.eigenvalues().to_vec(), vec![2.0, 5.0, 10.0, 5.0, 8.0, 13.0]);
    }

    #[test]
    fn single_mode_is_sine_samples() {
        let g = geo(DomainKind::HingedRectangle, 4);
        let mut c = Array1::zeros(4);
        c[0] = 1.0;
        let grid = g.base().to_physical(&c).unwrap();
        for (i, &x) in g.base().coords()[0].iter().enumerate() {
            assert_abs_diff_eq!(grid[i], (2.0 / PI).sqrt() * x.sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_modal_gives_zero_grid() {
        let g = geo(DomainKind::Torus, 5);
        let grid = g.base().to_physical(&Array1::zeros(5)).unwrap();
        assert!(grid.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_on_torus_projects_to_zero_frequency() {
        let g = geo(DomainKind::Torus, 5);
        let grid = Array1::from_elem(g.base().grid_len(), 1.0);
        let c = g.base().from_physical(&grid).unwrap();
        assert_abs_diff_eq!(c[0], (2.0 * PI).sqrt(), epsilon = 1e-12);
        for k in 1..5 {
            assert_abs_diff_eq!(c[k], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sine_sample_projects_to_single_mode() {
        let g = geo(DomainKind::HingedRectangle, 4);
        let grid = g.base().sample(|p| (2.0 * p[0]).sin());
        let c = g.base().from_physical(&grid).unwrap();
        assert_abs_diff_eq!(c[1], (PI / 2.0).sqrt(), epsilon = 1e-12);
        for k in [0usize, 2, 3] {
            assert_abs_diff_eq!(c[k], 0.0, epsilon = 1e-12);
        }
    }

    /// Projection of sin(x)·sin(2x) samples against a direct
    /// composite-quadrature oracle of the inner products ⟨·, φ_k⟩: an
    /// explicit loop over the collocation grid, independent of the tensor
    /// transform machinery.
    #[test]
    fn from_physical_matches_quadrature_oracle() {
        let g = geo(DomainKind::HingedRectangle, 6);
        let tf = g.base();
        let grid = tf.sample(|p| p[0].sin() * (2.0 * p[0]).sin());
        let c = tf.from_physical(&grid).unwrap();

        let h = PI / (tf.grid_len() + 1) as f64;
        for k in 0..6 {
            let mut acc = 0.0;
            for i in 0..tf.grid_len() {
                let x = tf.point(i)[0];
                acc += grid[i] * (2.0 / PI).sqrt() * ((k as f64 + 1.0) * x).sin();
            }
            assert_abs_diff_eq!(c[k], acc * h, epsilon = 1e-12);
        }
    }

    /// Round trip against the direct O(N²) summation oracle for to_physical,
    /// then back; exact on the retained band.
    #[test]
    fn round_trip_is_identity() {
        for kind in [DomainKind::HingedRectangle, DomainKind::Torus] {
            let g = geo(kind, 9);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
            let c = Array1::from_iter((0..9).map(|_| rng.gen_range(-1.0..1.0)));
            let grid = g.base().to_physical(&c).unwrap();

            // direct summation oracle
            let dir = DirBasis::new(kind, 9);
            for (i, &x) in g.base().coords()[0].iter().enumerate() {
                let direct: f64 = (0..9).map(|m| c[m] * dir.eval(m, x)).sum();
                assert_abs_diff_eq!(grid[i], direct, epsilon = 1e-12);
            }

            let back = g.base().from_physical(&grid).unwrap();
            for k in 0..9 {
                assert_abs_diff_eq!(back[k], c[k], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn batch_transform_matches_columns() {
        let g = Geometry::build(DomainKind::Torus, 2, &[5, 4], 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let batch = ndarray::Array2::from_shape_fn((20, 3), |_| rng.gen_range(-1.0..1.0));
        let grid = g.base().to_physical_batch(&batch).unwrap();
        let back = g.base().from_physical_batch(&grid).unwrap();
        for col in 0..3 {
            let single = g.base().to_physical(&batch.column(col).to_owned()).unwrap();
            for i in 0..single.len() {
                assert_abs_diff_eq!(grid[[i, col]], single[i], epsilon = 1e-13);
            }
            for k in 0..20 {
                assert_abs_diff_eq!(back[[k, col]], batch[[k, col]], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_2d() {
        let g = Geometry::build(DomainKind::Torus, 2, &[5, 4], 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c = Array1::from_iter((0..20).map(|_| rng.gen_range(-1.0..1.0)));
        let grid = g.base().to_physical(&c).unwrap();
        let back = g.base().from_physical(&grid).unwrap();
        for k in 0..20 {
            assert_abs_diff_eq!(back[k], c[k], epsilon = 1e-12);
        }
    }

    /// Parseval: the modal L² norm equals the grid quadrature L² norm.
    #[test]
    fn parseval_on_grid() {
        let g = Geometry::build(DomainKind::HingedRectangle, 2, &[6, 5], 0.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let c = Array1::from_iter((0..30).map(|_| rng.gen_range(-1.0..1.0)));
        let grid = g.base().to_physical(&c).unwrap();
        let l2_grid = g.base().inner(&grid, &grid).sqrt();
        assert_abs_diff_eq!(g.sobolev_norm(&c, 0.0), l2_grid, epsilon = 1e-10);
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = geo(DomainKind::HingedRectangle, 4);
        let mut e1 = Array1::zeros(4);
        e1[0] = 1.0;
        assert_abs_diff_eq!(g.sobolev_norm(&e1, 2.0), 2.0, epsilon = 1e-14);
        let mut c = Array1::zeros(4);
        c[0] = 1.0;
        c[1] = 1.0;
        let expect = (1.0 / 4.0f64 + 1.0 / 25.0).sqrt();
        assert_abs_diff_eq!(g.sobolev_norm(&c, -2.0), expect, epsilon = 1e-14);
    }

    #[test]
    fn norm_monotone_in_s() {
        let g = geo(DomainKind::Torus, 7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let c = Array1::from_iter((0..7).map(|_| rng.gen_range(-1.0..1.0)));
        let mut prev = g.sobolev_norm(&c, -3.0);
        for i in -2..=4 {
            let cur = g.sobolev_norm(&c, i as f64);
            assert!(prev <= cur + 1e-12);
            prev = cur;
        }
    }

    #[test]
    fn riesz_examples() {
        let g = geo(DomainKind::HingedRectangle, 4);
        let mut e1 = Array1::zeros(4);
        e1[0] = 1.0;
        let scaled = g.riesz_scale(&e1, -2.0, 2.0);
        assert_abs_diff_eq!(scaled[0], 0.25, epsilon = 1e-15);
        let back = g.riesz_scale(&scaled, 2.0, -2.0);
        assert_abs_diff_eq!(back[0], 1.0, epsilon = 1e-14);
    }
}
