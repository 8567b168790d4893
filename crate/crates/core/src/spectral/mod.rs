//! Weighted measure spaces, nonnegative self-adjoint operators given by their
//! spectral decomposition, and the functional calculus `f(A)`.

mod bump;
mod operator;
mod space;

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::C64;

pub use bump::{make_bump, BumpFunction};
pub use operator::{eigendecompose, SelfAdjointOperator, DENSE_SIZE_LIMIT};
pub use space::{make_space, WeightedMeasureSpace};

/// Relative size below which a kernel projection is treated as zero.
pub const KERNEL_PROJECTION_TOL: f64 = 1e-10;

/// A nonnegative self-adjoint operator on a [`WeightedMeasureSpace`], known
/// through a μ-orthonormal eigenbasis.
pub trait Spectrum: Send + Sync {
    fn space(&self) -> &WeightedMeasureSpace;

    /// Eigenvalues at or below this value are exactly zero (kernel).
    fn zero_threshold(&self) -> f64;

    /// Coefficients `⟨φ_j, u⟩_μ` together with the matching eigenvalues.
    fn expand(&self, u: &[C64]) -> Result<Expansion>;

    /// `Σ_j c_j φ_j` for coefficients laid out as returned by [`Spectrum::expand`].
    fn synthesize(&self, expansion: &Expansion) -> Vec<C64>;
}

/// A vector written in an operator's eigenbasis.
#[derive(Debug, Clone)]
pub struct Expansion {
    eigenvalues: Arc<[f64]>,
    coefficients: Vec<C64>,
    zero_threshold: f64,
}

impl Expansion {
    pub(crate) fn new(eigenvalues: Arc<[f64]>, coefficients: Vec<C64>, zero_threshold: f64) -> Self {
        debug_assert_eq!(eigenvalues.len(), coefficients.len());
        Self { eigenvalues, coefficients, zero_threshold }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coefficients
    }

    pub fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    pub fn is_kernel(&self, eigenvalue: f64) -> bool {
        eigenvalue <= self.zero_threshold
    }

    /// L² norm of the vector, by Parseval.
    pub fn norm(&self) -> f64 {
        self.weighted_norm(|_| 1.0)
    }

    /// `(Σ |m(λ_j)|² |c_j|²)^{1/2}`, the L² norm of `m(A) u`.
    pub fn weighted_norm(&self, multiplier: impl Fn(f64) -> f64) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.coefficients)
            .map(|(&l, c)| {
                let m = multiplier(l);
                m * m * c.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    /// L² norm of the projection onto `ker A`.
    pub fn kernel_norm(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.coefficients)
            .filter(|(l, _)| self.is_kernel(**l))
            .map(|(_, c)| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Whether the kernel projection is nonzero beyond [`KERNEL_PROJECTION_TOL`].
    pub fn has_kernel_component(&self) -> bool {
        let k = self.kernel_norm();
        k > 0.0 && k > KERNEL_PROJECTION_TOL * self.norm()
    }

    /// Same vector with the kernel projection removed.
    pub fn without_kernel(&self) -> Self {
        self.map(|l| if self.is_kernel(l) { C64::new(0.0, 0.0) } else { C64::new(1.0, 0.0) })
    }

    /// Coefficient-wise multiplication `c_j ↦ f(λ_j) c_j`, i.e. `f(A) u`.
    /// Nonfinite multipliers are not checked; see [`Expansion::try_map`].
    pub fn map(&self, f: impl Fn(f64) -> C64) -> Self {
        let coefficients = self
            .eigenvalues
            .iter()
            .zip(&self.coefficients)
            .map(|(&l, &c)| if c == C64::new(0.0, 0.0) { c } else { f(l) * c })
            .collect();
        Self { eigenvalues: Arc::clone(&self.eigenvalues), coefficients, zero_threshold: self.zero_threshold }
    }

    /// Like [`Expansion::map`] but rejects a multiplier that is not finite on
    /// an eigenvalue carrying weight. Kernel terms are dropped instead when the
    /// kernel projection vanishes.
    pub fn try_map(&self, f: impl Fn(f64) -> C64) -> Result<Self> {
        let kernel_vanishes = !self.has_kernel_component();
        let mut coefficients = Vec::with_capacity(self.coefficients.len());
        for (&l, &c) in self.eigenvalues.iter().zip(&self.coefficients) {
            let m = f(l);
            if m.re.is_finite() && m.im.is_finite() {
                coefficients.push(if c == C64::new(0.0, 0.0) { c } else { m * c });
            } else if c == C64::new(0.0, 0.0) || (self.is_kernel(l) && kernel_vanishes) {
                coefficients.push(C64::new(0.0, 0.0));
            } else {
                return Err(Error::NonFiniteSpectralFunction { eigenvalue: l });
            }
        }
        Ok(Self { eigenvalues: Arc::clone(&self.eigenvalues), coefficients, zero_threshold: self.zero_threshold })
    }

    /// Same eigenvalues with the coefficients replaced.
    pub fn map_coefficients(&self, coefficients: &[C64]) -> Self {
        assert_eq!(coefficients.len(), self.coefficients.len());
        Self {
            eigenvalues: Arc::clone(&self.eigenvalues),
            coefficients: coefficients.to_vec(),
            zero_threshold: self.zero_threshold,
        }
    }

    /// Largest eigenvalue present in the expansion.
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest eigenvalue above the zero threshold, if any.
    pub fn min_positive_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.iter().copied().filter(|&l| !self.is_kernel(l)).reduce(f64::min)
    }
}

/// `f(A) u = Σ_j f(λ_j) ⟨φ_j, u⟩_μ φ_j`.
pub fn apply_spectral_function<S, F>(op: &S, f: F, u: &[C64]) -> Result<Vec<C64>>
where
    S: Spectrum + ?Sized,
    F: Fn(f64) -> C64,
{
    let e = op.expand(u)?.try_map(f)?;
    Ok(op.synthesize(&e))
}

/// `θ(2^{-k} A) u`.
pub fn spectral_localize<S>(op: &S, theta: &BumpFunction, k: i32, u: &[C64]) -> Result<Vec<C64>>
where
    S: Spectrum + ?Sized,
{
    let e = op.expand(u)?;
    Ok(op.synthesize(&localize(&e, theta, k)))
}

pub(crate) fn localize(e: &Expansion, theta: &BumpFunction, k: i32) -> Expansion {
    let scale = dyadic(-k);
    e.map(|l| C64::new(theta.eval(scale * l), 0.0))
}

/// `2^k` without rounding for any representable exponent.
pub(crate) fn dyadic(k: i32) -> f64 {
    2f64.powi(k)
}

pub(crate) fn sup_abs(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
