use std::f64::consts::PI;

use faer::{Mat, Side};

use super::EndProfile;
use crate::error::{Error, Result};
use crate::spectral::{WeightedMeasureSpace, DENSE_SIZE_LIMIT};
use crate::C64;

/// Oscillations `e^{ir/ε}` count as resolved when `h_r ≤ ε / RESOLUTION_FACTOR`.
pub const RESOLUTION_FACTOR: f64 = 10.0;

/// Grid on `(R1, R2) × T^{n-1}` for the metric `dr² + w(r)^{-2} |dy|²`.
///
/// Radial nodes are `r_i = R1 + i h_r`, `i = 1..=N_r`, with Dirichlet
/// conditions at `R1` and `R2`. Each circle factor of the torus carries
/// `N_θ` equispaced points. Points are ordered radius-major: the flat index
/// of `(i, α)` is `i * N_θ^{n-1} + Σ_d α_d N_θ^d`.
#[derive(Debug, Clone)]
pub struct WarpedProductGrid {
    dim: usize,
    r_min: f64,
    r_max: f64,
    radial_points: usize,
    angular_points: usize,
    profile: EndProfile,
}

impl WarpedProductGrid {
    pub fn new(
        dim: usize,
        r_min: f64,
        r_max: f64,
        radial_points: usize,
        angular_points: usize,
        profile: EndProfile,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("dimension", format!("need n >= 2, got {dim}")));
        }
        if !(r_min.is_finite() && r_max.is_finite() && r_max > r_min) {
            return Err(Error::invalid("radial interval", format!("need R1 < R2, got [{r_min}, {r_max}]")));
        }
        if radial_points == 0 || angular_points == 0 {
            return Err(Error::invalid("grid", "point counts must be positive"));
        }
        let grid = Self { dim, r_min, r_max, radial_points, angular_points, profile };
        let mut samples = grid.radii();
        samples.extend(grid.face_radii());
        if !grid.profile.check(&samples).positive {
            return Err(Error::invalid("profile", format!("w must be positive and finite on [{r_min}, {r_max}]")));
        }
        Ok(grid)
    }

    /// Grid with the fewest radial points such that `h_r ≤ max_spacing`.
    pub fn with_max_spacing(
        dim: usize,
        r_min: f64,
        r_max: f64,
        max_spacing: f64,
        angular_points: usize,
        profile: EndProfile,
    ) -> Result<Self> {
        if !(max_spacing.is_finite() && max_spacing > 0.0) {
            return Err(Error::invalid("spacing", format!("must be positive, got {max_spacing}")));
        }
        let intervals = ((r_max - r_min) / max_spacing).ceil().max(2.0) as usize;
        Self::new(dim, r_min, r_max, intervals - 1, angular_points, profile)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn radial_points(&self) -> usize {
        self.radial_points
    }

    pub fn angular_points(&self) -> usize {
        self.angular_points
    }

    pub fn profile(&self) -> &EndProfile {
        &self.profile
    }

    /// `h_r = (R2 - R1)/(N_r + 1)`.
    pub fn radial_spacing(&self) -> f64 {
        (self.r_max - self.r_min) / (self.radial_points + 1) as f64
    }

    /// `h_θ = 2π / N_θ`.
    pub fn angular_spacing(&self) -> f64 {
        2.0 * PI / self.angular_points as f64
    }

    /// Number of torus points, `N_θ^{n-1}`.
    pub fn angular_size(&self) -> usize {
        self.angular_points.pow((self.dim - 1) as u32)
    }

    pub fn size(&self) -> usize {
        self.radial_points * self.angular_size()
    }

    pub fn radii(&self) -> Vec<f64> {
        let h = self.radial_spacing();
        (1..=self.radial_points).map(|i| self.r_min + h * i as f64).collect()
    }

    /// Midpoints `r_{i+1/2}`, `i = 0..=N_r`, including the two boundary faces.
    fn face_radii(&self) -> Vec<f64> {
        let h = self.radial_spacing();
        (0..=self.radial_points).map(|i| self.r_min + h * (i as f64 + 0.5)).collect()
    }

    /// Angle tuple of torus point `α`.
    pub fn angles(&self, alpha: usize) -> Vec<f64> {
        let h = self.angular_spacing();
        self.multi_index(alpha).into_iter().map(|a| h * a as f64).collect()
    }

    pub(crate) fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim - 1);
        for _ in 0..self.dim - 1 {
            out.push(flat % self.angular_points);
            flat /= self.angular_points;
        }
        out
    }

    fn shifted(&self, alpha: usize, d: usize, forward: bool) -> usize {
        let n = self.angular_points;
        let stride = n.pow(d as u32);
        let a = (alpha / stride) % n;
        let b = if forward { (a + 1) % n } else { (a + n - 1) % n };
        alpha - a * stride + b * stride
    }

    pub fn resolved(&self, epsilon: f64) -> bool {
        self.radial_spacing() <= epsilon / RESOLUTION_FACTOR
    }

    /// Radial masses `w(r_i)^{1-n} h_r`.
    pub fn radial_weights(&self) -> Vec<f64> {
        let h = self.radial_spacing();
        let e = 1.0 - self.dim as f64;
        self.radii().iter().map(|&r| self.profile.w(r).powf(e) * h).collect()
    }

    /// Mass `h_θ^{n-1}` of each torus point.
    pub fn angular_weight(&self) -> f64 {
        self.angular_spacing().powi((self.dim - 1) as i32)
    }

    /// Volume weights `w(r_i)^{-(n-1)} h_r h_θ^{n-1}`.
    pub fn measure(&self) -> WeightedMeasureSpace {
        let ang = self.angular_weight();
        let m = self.angular_size();
        let weights = self.radial_weights().into_iter().flat_map(|wr| std::iter::repeat_n(wr * ang, m)).collect();
        WeightedMeasureSpace::new(weights).expect("profile checked positive at construction")
    }

    /// Discrete eigenvalue of `-Δ_{T^{n-1}}` for the angular mode `m`.
    pub fn angular_eigenvalue(&self, mode: &[usize]) -> f64 {
        let n = self.angular_points as f64;
        let h = self.angular_spacing();
        mode.iter().map(|&m| (2.0 * (PI * m as f64 / n).sin() / h).powi(2)).sum()
    }

    /// Tridiagonal radial operator `-w^{n-1} ∂_r(w^{1-n} ∂_r ·) + λ w²`,
    /// coefficients `w^{1-n}` taken at the faces.
    pub(crate) fn radial_stencil(&self, angular_eigenvalue: f64) -> RadialStencil {
        let h2 = self.radial_spacing().powi(2);
        let e = self.dim as f64 - 1.0;
        let face: Vec<f64> = self.face_radii().iter().map(|&r| self.profile.w(r).powf(-e)).collect();
        let w: Vec<f64> = self.radii().iter().map(|&r| self.profile.w(r)).collect();
        let nr = self.radial_points;
        let mut diag = Vec::with_capacity(nr);
        let mut lower = Vec::with_capacity(nr);
        let mut upper = Vec::with_capacity(nr);
        for i in 0..nr {
            let g = w[i].powf(e) / h2;
            diag.push(g * (face[i] + face[i + 1]) + angular_eigenvalue * w[i] * w[i]);
            lower.push(-g * face[i]);
            upper.push(-g * face[i + 1]);
        }
        RadialStencil { diag, lower, upper }
    }
}

/// Rows of a tridiagonal operator: `(L u)_i = lower_i u_{i-1} + diag_i u_i + upper_i u_{i+1}`.
#[derive(Debug, Clone)]
pub(crate) struct RadialStencil {
    pub diag: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Dense `-Δ_g` on the grid together with its volume measure.
pub fn assemble_laplacian(grid: &WarpedProductGrid) -> Result<(WeightedMeasureSpace, Mat<C64>)> {
    let n = grid.size();
    if n > DENSE_SIZE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: DENSE_SIZE_LIMIT });
    }
    let m = grid.angular_size();
    let stencil = grid.radial_stencil(0.0);
    let w: Vec<f64> = grid.radii().iter().map(|&r| grid.profile().w(r)).collect();
    let h2 = grid.angular_spacing().powi(2);
    let mut a = Mat::<C64>::zeros(n, n);
    for i in 0..grid.radial_points() {
        for alpha in 0..m {
            let row = i * m + alpha;
            a[(row, row)] += C64::new(stencil.diag[i], 0.0);
            if i > 0 {
                a[(row, row - m)] += C64::new(stencil.lower[i], 0.0);
            }
            if i + 1 < grid.radial_points() {
                a[(row, row + m)] += C64::new(stencil.upper[i], 0.0);
            }
            let g = w[i] * w[i] / h2;
            for d in 0..grid.dim() - 1 {
                a[(row, row)] += C64::new(2.0 * g, 0.0);
                a[(row, i * m + grid.shifted(alpha, d, true))] -= C64::new(g, 0.0);
                a[(row, i * m + grid.shifted(alpha, d, false))] -= C64::new(g, 0.0);
            }
        }
    }
    Ok((grid.measure(), a))
}

/// One angular Fourier mode of the separable Laplacian.
#[derive(Debug, Clone)]
pub struct RadialBlock {
    pub mode: Vec<usize>,
    pub angular_eigenvalue: f64,
    stencil: RadialStencil,
    radial_weights: Vec<f64>,
}

impl RadialBlock {
    pub fn size(&self) -> usize {
        self.stencil.diag.len()
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    /// The radial operator as a dense matrix in the nodal basis.
    pub fn matrix(&self) -> Mat<f64> {
        let n = self.size();
        Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.stencil.diag[i]
            } else if j + 1 == i {
                self.stencil.lower[i]
            } else if i + 1 == j {
                self.stencil.upper[i]
            } else {
                0.0
            }
        })
    }

    /// Ascending eigenvalues and radial eigenvectors, orthonormal for the
    /// radial weights (column-major, `size()` entries per vector).
    pub fn eigen(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.size();
        let sw: Vec<f64> = self.radial_weights.iter().map(|m| m.sqrt()).collect();
        // D^{1/2} L D^{-1/2} is symmetric; average the two off-diagonals against roundoff.
        let sym = Mat::from_fn(n, n, |i, j| {
            if i == j {
                self.stencil.diag[i]
            } else if i + 1 == j {
                0.5 * (self.stencil.upper[i] * sw[i] / sw[j] + self.stencil.lower[j] * sw[j] / sw[i])
            } else if j + 1 == i {
                0.5 * (self.stencil.lower[i] * sw[i] / sw[j] + self.stencil.upper[j] * sw[j] / sw[i])
            } else {
                0.0
            }
        });
        let evd = sym.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
        let s = evd.S().column_vector();
        let u = evd.U();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
        let values = order.iter().map(|&j| s[j]).collect();
        let mut vectors = Vec::with_capacity(n * n);
        for &j in &order {
            vectors.extend((0..n).map(|i| u[(i, j)] / sw[i]));
        }
        Ok((values, vectors))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigen()?.0)
    }
}

/// All angular modes of the grid, each with its radial operator. The union of
/// the block spectra is the spectrum of [`assemble_laplacian`].
pub fn block_diagonalize(grid: &WarpedProductGrid) -> Vec<RadialBlock> {
    (0..grid.angular_size()).map(|flat| radial_block(grid, grid.multi_index(flat))).collect()
}

pub(crate) fn radial_block(grid: &WarpedProductGrid, mode: Vec<usize>) -> RadialBlock {
    let lambda = grid.angular_eigenvalue(&mode);
    RadialBlock {
        angular_eigenvalue: lambda,
        stencil: grid.radial_stencil(lambda),
        radial_weights: grid.radial_weights(),
        mode,
    }
}
