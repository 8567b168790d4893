use super::{make_oscillating_family, AngularProfile, BlockSpectrum, RadialBump, WarpedProductGrid};
use crate::error::{Error, Result};
use crate::norms;
use crate::spectral::{BumpFunction, Spectrum};
use crate::C64;

/// Least-squares fit of `log(norm) = slope · log(ε) + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFit {
    pub eps_values: Vec<f64>,
    pub norm_values: Vec<f64>,
    pub slope: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

pub fn fit_slope(eps_values: &[f64], norm_values: &[f64]) -> Result<SlopeFit> {
    if eps_values.len() != norm_values.len() {
        return Err(Error::DimensionMismatch { expected: eps_values.len(), found: norm_values.len() });
    }
    if eps_values.len() < 2 {
        return Err(Error::invalid("epsilon sequence", "need at least two points to fit a slope"));
    }
    if eps_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("epsilon sequence", "must be strictly decreasing"));
    }
    if eps_values.iter().chain(norm_values).any(|&v| !(v.is_finite() && v > 0.0)) {
        return Err(Error::invalid("slope fit", "values must be positive and finite"));
    }
    let x: Vec<f64> = eps_values.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = norm_values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x.iter().zip(&y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / n).sqrt();
    Ok(SlopeFit { eps_values: eps_values.to_vec(), norm_values: norm_values.to_vec(), slope, residual })
}

/// `||u||_{L^p} ≤ C_p ||u||_{B̃^{-σ}}^{1-2/p} ||u||_{H^s}^{2/p}` with
/// `p = 2n/(n-2s)`, `σ = n/2 - s`; the constant is unknown so only the
/// ratio of the two sides is recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub p: f64,
    pub s: f64,
    pub sigma: f64,
    pub lhs: f64,
    pub besov_modified: f64,
    pub sobolev: f64,
    /// `lhs / (besov^{1-2/p} sobolev^{2/p})`, zero for `u = 0`.
    pub ratio: f64,
}

/// `(p, σ)` for dimension `n` and `0 < s < n/2`.
pub fn theorem_exponents(dim: usize, s: f64) -> Result<(f64, f64)> {
    let n = dim as f64;
    if !(s > 0.0 && s < n / 2.0) {
        return Err(Error::invalid("s", format!("need 0 < s < n/2 = {}, got {s}", n / 2.0)));
    }
    Ok((2.0 * n / (n - 2.0 * s), n / 2.0 - s))
}

pub fn verify_theorem_manifold<S: Spectrum + ?Sized>(
    op: &S,
    theta: &BumpFunction,
    dim: usize,
    s: f64,
    u: &[C64],
) -> Result<TheoremReport> {
    let (p, sigma) = theorem_exponents(dim, s)?;
    let lhs = norms::lp_norm(op.space(), u, p)?;
    let e = op.expand(u)?;
    let besov_modified = norms::besov_modified_of(op, theta, &e, sigma);
    let sobolev = norms::inhomogeneous_of(&e, s);
    let denom = besov_modified.powf(1.0 - 2.0 / p) * sobolev.powf(2.0 / p);
    Ok(TheoremReport { p, s, sigma, lhs, besov_modified, sobolev, ratio: if lhs == 0.0 { 0.0 } else { lhs / denom } })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub lp: f64,
    pub h_minus_sigma: f64,
    pub besov_modified: f64,
    pub h_s: f64,
    pub theorem_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub s: f64,
    pub sigma: f64,
    pub p: f64,
    pub rows: Vec<ScalingRow>,
    pub h_minus_sigma: SlopeFit,
    pub besov_modified: SlopeFit,
    pub h_s: SlopeFit,
    /// `max/min` of the Theorem ratio across ε.
    pub theorem_ratio_spread: f64,
    /// `max/min - 1` of the L^p norm across ε (zero up to roundoff).
    pub lp_variation: f64,
}

/// Norms of `u_ε` over a decreasing ε sequence and their log-log slopes.
///
/// `H^{-σ}` and `B̃^{-σ}` use the given `σ`; the Theorem ratio always uses
/// `σ = n/2 - s` and `p = 2n/(n-2s)`.
pub fn scaling_experiment(
    grid: &WarpedProductGrid,
    theta: &BumpFunction,
    s: f64,
    sigma: f64,
    eps_sequence: &[f64],
    psi: &RadialBump,
    gamma: AngularProfile,
) -> Result<ScalingReport> {
    if eps_sequence.len() < 3 {
        return Err(Error::invalid("epsilon sequence", format!("need at least 3 values, got {}", eps_sequence.len())));
    }
    if eps_sequence.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("epsilon sequence", "must be strictly decreasing"));
    }
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("sigma", format!("must be nonnegative, got {sigma}")));
    }
    let (p, sigma_thm) = theorem_exponents(grid.dim(), s)?;
    let family: Vec<Vec<C64>> =
        eps_sequence.iter().map(|&eps| make_oscillating_family(grid, eps, psi, gamma)).collect::<Result<_>>()?;
    // The phase is radial, so every member shares the angular modes of the first.
    let op = BlockSpectrum::for_vector(grid, &family[0])?;

    let mut rows = Vec::with_capacity(eps_sequence.len());
    for (&epsilon, u) in eps_sequence.iter().zip(&family) {
        let e = op.expand(u)?;
        let lp = norms::lp_norm(op.space(), u, p)?;
        let besov_modified = norms::besov_modified_of(&op, theta, &e, sigma);
        let besov_thm =
            if sigma == sigma_thm { besov_modified } else { norms::besov_modified_of(&op, theta, &e, sigma_thm) };
        let h_s = norms::inhomogeneous_of(&e, s);
        rows.push(ScalingRow {
            epsilon,
            lp,
            h_minus_sigma: norms::inhomogeneous_of(&e, -sigma),
            besov_modified,
            h_s,
            theorem_ratio: lp / (besov_thm.powf(1.0 - 2.0 / p) * h_s.powf(2.0 / p)),
        });
    }

    let column = |f: fn(&ScalingRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let spread = |v: &[f64]| {
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        hi / lo
    };
    Ok(ScalingReport {
        s,
        sigma,
        p,
        h_minus_sigma: fit_slope(eps_sequence, &column(|r| r.h_minus_sigma))?,
        besov_modified: fit_slope(eps_sequence, &column(|r| r.besov_modified))?,
        h_s: fit_slope(eps_sequence, &column(|r| r.h_s))?,
        theorem_ratio_spread: spread(&column(|r| r.theorem_ratio)),
        lp_variation: spread(&column(|r| r.lp)) - 1.0,
        rows,
    })
}
