//! Spectral functional calculus on finite weighted measure spaces, the
//! Sobolev and Besov type norms built on it, and numerical checks of refined
//! Sobolev inequalities, both for abstract nonnegative self-adjoint operators
//! and for discretized warped-product manifolds with ends.
//!
//! Everything is built around the [`Spectrum`] trait: an operator `A` known
//! through an orthonormal eigenbasis. Functions of `A` (localizations
//! `θ(2^{-k} A)`, powers `A^s`, Bessel potentials `(1 + A²)^{s/2}`) are then
//! evaluated coefficient-wise.
//!
//! ```
//! use specnorm::{eigendecompose, make_space, norms, BumpFunction, Mat, C64};
//!
//! let space = make_space(&[1.0, 1.0]).unwrap();
//! let a = Mat::from_fn(2, 2, |i, j| if i == j { C64::new(i as f64 * 2.0, 0.0) } else { C64::new(0.0, 0.0) });
//! let op = eigendecompose(a.as_ref(), &space).unwrap();
//! assert_eq!(op.kernel_dim(), 1);
//!
//! let u = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
//! let h = norms::sobolev_homogeneous(&op, &u, 1.0).unwrap();
//! assert!((h - 2.0).abs() < 1e-12);
//! let b = norms::besov_homogeneous(&op, &BumpFunction::default(), &u, 1.0).unwrap();
//! assert!(b.is_finite());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod inequalities;
pub mod manifolds;
pub mod norms;
pub mod spectral;

pub use error::{Error, Result};
pub use faer::Mat;
pub use norms::ExtendedNorm;
pub use spectral::{
    apply_spectral_function, eigendecompose, make_bump, make_space, spectral_localize, BumpFunction, Expansion,
    SelfAdjointOperator, Spectrum, WeightedMeasureSpace,
};

/// Complex scalar used for every vector in the crate.
pub type C64 = num_complex::Complex64;
