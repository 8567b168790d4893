//! Warped-product manifolds with ends, `(R1, R2) × T^{n-1}` with metric
//! `dr² + w(r)^{-2} |dy|²`, discretized by divergence-form finite
//! differences; the oscillating family `e^{ir/ε} w^{(n-1)/2} ψ(r) γ(y)` and
//! the scaling and Theorem-ratio experiments built on it.

mod blocks;
mod experiment;
mod family;
mod grid;
mod profile;

pub use blocks::{active_modes, BlockSpectrum};
pub use experiment::{
    fit_slope, scaling_experiment, theorem_exponents, verify_theorem_manifold, ScalingReport, ScalingRow, SlopeFit,
    TheoremReport,
};
pub use family::{make_oscillating_family, AngularProfile, RadialBump, SUPPORT_MARGIN_STEPS};
pub use grid::{assemble_laplacian, block_diagonalize, RadialBlock, WarpedProductGrid, RESOLUTION_FACTOR};
pub use profile::{CustomProfile, EndProfile, ProfileCheck};
