use std::sync::Arc;

use faer::{Mat, MatRef, Side};

use super::{Expansion, Spectrum, WeightedMeasureSpace};
use crate::error::{Error, Result};
use crate::C64;

/// Largest matrix accepted by the dense eigensolver.
pub const DENSE_SIZE_LIMIT: usize = 4096;

const SELF_ADJOINT_TOL: f64 = 1e-8;
const ZERO_THRESHOLD_REL: f64 = 1e-10;

/// Dense spectral decomposition `A = Σ λ_j ⟨φ_j, ·⟩_μ φ_j` with eigenvalues
/// sorted ascending and eigenvectors orthonormal in the μ-inner product.
#[derive(Debug, Clone)]
pub struct SelfAdjointOperator {
    space: WeightedMeasureSpace,
    eigenvalues: Arc<[f64]>,
    // Column-major: eigenvector j occupies [j*n, (j+1)*n).
    eigenvectors: Vec<C64>,
    zero_threshold: f64,
    kernel_dim: usize,
}

impl SelfAdjointOperator {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> &[C64] {
        let n = self.space.size();
        &self.eigenvectors[j * n..(j + 1) * n]
    }

    pub fn kernel_dim(&self) -> usize {
        self.kernel_dim
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    /// `A u`.
    pub fn apply(&self, u: &[C64]) -> Result<Vec<C64>> {
        let e = self.expand(u)?.map(|l| C64::new(l, 0.0));
        Ok(self.synthesize(&e))
    }

    /// The operator `g(A)` for a nonnegative, nondecreasing `g` with `g(0) = 0`
    /// (for instance `g = sqrt` turns `-Δ` into `(-Δ)^{1/2}`). Eigenvectors
    /// and the kernel are kept; the zero threshold is recomputed.
    pub fn map_spectrum(&self, g: impl Fn(f64) -> f64) -> Self {
        let eigenvalues: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        let lmax = eigenvalues.iter().copied().fold(0.0, f64::max);
        let zero_threshold = ZERO_THRESHOLD_REL * lmax.max(1.0);
        Self {
            space: self.space.clone(),
            eigenvalues: eigenvalues.into(),
            eigenvectors: self.eigenvectors.clone(),
            zero_threshold,
            kernel_dim: self.kernel_dim,
        }
    }

    /// Dense matrix of the operator in the standard basis.
    pub fn to_matrix(&self) -> Mat<C64> {
        let n = self.size();
        let w = self.space.weights();
        Mat::from_fn(n, n, |r, c| {
            (0..n)
                .map(|j| {
                    let phi = self.eigenvector(j);
                    phi[r] * phi[c].conj() * (self.eigenvalues[j] * w[c])
                })
                .sum()
        })
    }
}

impl Spectrum for SelfAdjointOperator {
    fn space(&self) -> &WeightedMeasureSpace {
        &self.space
    }

    fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    fn expand(&self, u: &[C64]) -> Result<Expansion> {
        self.space.check_len(u)?;
        let w = self.space.weights();
        let weighted: Vec<C64> = u.iter().zip(w).map(|(z, &m)| z * m).collect();
        let n = self.size();
        let coefficients =
            (0..n).map(|j| self.eigenvector(j).iter().zip(&weighted).map(|(p, z)| p.conj() * z).sum()).collect();
        Ok(Expansion::new(Arc::clone(&self.eigenvalues), coefficients, self.zero_threshold))
    }

    fn synthesize(&self, expansion: &Expansion) -> Vec<C64> {
        let n = self.size();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, c) in expansion.coefficients().iter().enumerate() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            for (o, p) in out.iter_mut().zip(self.eigenvector(j)) {
                *o += p * c;
            }
        }
        out
    }
}

/// Spectral decomposition of a matrix that is self-adjoint for `⟨·,·⟩_μ`.
///
/// The problem is reduced to the Hermitian matrix `D^{1/2} A D^{-1/2}`,
/// `D = diag(μ)`; its unit eigenvectors `q_j` give `φ_j = D^{-1/2} q_j`.
pub fn eigendecompose(matrix: MatRef<'_, C64>, space: &WeightedMeasureSpace) -> Result<SelfAdjointOperator> {
    let n = space.size();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if matrix.nrows() != n { matrix.nrows() } else { matrix.ncols() },
        });
    }
    if n > DENSE_SIZE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: DENSE_SIZE_LIMIT });
    }
    let sqrt_w: Vec<f64> = space.weights().iter().map(|m| m.sqrt()).collect();
    let sym = Mat::from_fn(n, n, |i, j| matrix[(i, j)] * (sqrt_w[i] / sqrt_w[j]));

    let mut scale = 0.0f64;
    let mut asym = 0.0f64;
    let mut finite = true;
    for i in 0..n {
        for j in 0..n {
            finite &= sym[(i, j)].re.is_finite() && sym[(i, j)].im.is_finite();
            scale = scale.max(sym[(i, j)].norm());
            asym = asym.max((sym[(i, j)] - sym[(j, i)].conj()).norm());
        }
    }
    if finite && scale > 0.0 && asym > SELF_ADJOINT_TOL * scale {
        return Err(Error::NotSelfAdjoint { asymmetry: asym / scale });
    }
    if !finite {
        return Err(Error::Eigensolver("matrix has nonfinite entries".into()));
    }
    let hermitian = Mat::from_fn(n, n, |i, j| (sym[(i, j)] + sym[(j, i)].conj()) * 0.5);

    let evd = hermitian.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let vals = evd.S().column_vector();
    let vecs = evd.U();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].re.total_cmp(&vals[b].re));

    let lmax = order.last().map_or(0.0, |&j| vals[j].re).max(0.0);
    let zero_threshold = ZERO_THRESHOLD_REL * lmax.max(1.0);
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n * n);
    let mut kernel_dim = 0;
    for &j in &order {
        let l = vals[j].re;
        if !l.is_finite() {
            return Err(Error::Eigensolver(format!("nonfinite eigenvalue {l}")));
        }
        if l < -zero_threshold {
            return Err(Error::NotNonnegative { eigenvalue: l });
        }
        if l <= zero_threshold {
            kernel_dim += 1;
            eigenvalues.push(0.0);
        } else {
            eigenvalues.push(l);
        }
        eigenvectors.extend((0..n).map(|i| vecs[(i, j)] / sqrt_w[i]));
    }

    Ok(SelfAdjointOperator {
        space: space.clone(),
        eigenvalues: eigenvalues.into(),
        eigenvectors,
        zero_threshold,
        kernel_dim,
    })
}
