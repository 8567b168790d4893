use super::WarpedProductGrid;
use crate::error::{Error, Result};
use crate::spectral::BumpFunction;
use crate::C64;

/// Minimum distance, in radial steps, between the support of ψ and the
/// Dirichlet boundary.
pub const SUPPORT_MARGIN_STEPS: f64 = 5.0;

/// Radial cutoff `ψ(r) = θ((r - center)/half_width)` with the default bump θ,
/// supported in `[center - half_width, center + half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    pub center: f64,
    pub half_width: f64,
}

impl RadialBump {
    /// Centered in the radial interval, ten radial steps away from each end.
    pub fn centered(grid: &WarpedProductGrid) -> Self {
        let h = grid.radial_spacing();
        Self {
            center: 0.5 * (grid.r_min() + grid.r_max()),
            half_width: 0.5 * (grid.r_max() - grid.r_min()) - 2.0 * SUPPORT_MARGIN_STEPS * h,
        }
    }

    pub fn eval(&self, r: f64) -> f64 {
        BumpFunction::default().eval((r - self.center) / self.half_width)
    }
}

/// Angular factor γ on the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularProfile {
    Constant,
    /// `Π_d (1 + cos y_d)/2`: only the modes 0 and ±1 in each factor.
    TrigBump,
}

impl AngularProfile {
    pub fn name(&self) -> &'static str {
        match self {
            AngularProfile::Constant => "constant",
            AngularProfile::TrigBump => "bump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "constant" => Some(AngularProfile::Constant),
            "bump" => Some(AngularProfile::TrigBump),
            _ => None,
        }
    }

    pub fn eval(&self, angles: &[f64]) -> f64 {
        match self {
            AngularProfile::Constant => 1.0,
            AngularProfile::TrigBump => angles.iter().map(|y| 0.5 * (1.0 + y.cos())).product(),
        }
    }
}

/// Samples of `u_ε(r, y) = e^{ir/ε} w(r)^{(n-1)/2} ψ(r) γ(y)`.
///
/// `ε = +∞` gives the unmodulated profile.
pub fn make_oscillating_family(
    grid: &WarpedProductGrid,
    epsilon: f64,
    psi: &RadialBump,
    gamma: AngularProfile,
) -> Result<Vec<C64>> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid("epsilon", format!("must be positive, got {epsilon}")));
    }
    let h = grid.radial_spacing();
    if !grid.resolved(epsilon) {
        return Err(Error::Unresolved { epsilon, spacing: h, required_spacing: epsilon / super::RESOLUTION_FACTOR });
    }
    check_support(grid, psi)?;
    let e = 0.5 * (grid.dim() as f64 - 1.0);
    let angular: Vec<f64> = (0..grid.angular_size()).map(|a| gamma.eval(&grid.angles(a))).collect();
    let mut u = Vec::with_capacity(grid.size());
    for r in grid.radii() {
        let amplitude = grid.profile().w(r).powf(e) * psi.eval(r);
        let phase = if epsilon.is_finite() { r / epsilon } else { 0.0 };
        u.extend(angular.iter().map(|g| C64::from_polar(amplitude * g, phase)));
    }
    Ok(u)
}

fn check_support(grid: &WarpedProductGrid, psi: &RadialBump) -> Result<()> {
    let margin = SUPPORT_MARGIN_STEPS * grid.radial_spacing();
    let lo = psi.center - psi.half_width;
    let hi = psi.center + psi.half_width;
    if !(psi.half_width > 0.0) || lo < grid.r_min() + margin || hi > grid.r_max() - margin {
        return Err(Error::invalid(
            "radial bump",
            format!("support [{lo}, {hi}] must lie in [{}, {}]", grid.r_min() + margin, grid.r_max() - margin),
        ));
    }
    Ok(())
}
