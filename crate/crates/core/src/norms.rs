//! L^p, Sobolev and Besov type norms over a [`Spectrum`], and the layer-cake
//! evaluation of L^p norms through the distribution function.

use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::{dyadic, localize, sup_abs, BumpFunction, Expansion, Spectrum, WeightedMeasureSpace};
use crate::C64;

/// A norm value that may be `+∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedNorm {
    Finite(f64),
    Infinite,
}

impl ExtendedNorm {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtendedNorm::Finite(_))
    }

    /// The value as an `f64`, with `+∞` mapped to `f64::INFINITY`.
    pub fn value(&self) -> f64 {
        match *self {
            ExtendedNorm::Finite(v) => v,
            ExtendedNorm::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtendedNorm::Finite(v) => Some(v),
            ExtendedNorm::Infinite => None,
        }
    }
}

impl fmt::Display for ExtendedNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedNorm::Finite(v) => write!(f, "{v}"),
            ExtendedNorm::Infinite => f.write_str("inf"),
        }
    }
}

/// `(Σ μ_i |u_i|^p)^{1/p}`, or `max |u_i|` at `p = ∞` (no weighting: every
/// atom has positive mass, so the essential supremum is the plain maximum).
pub fn lp_norm(space: &WeightedMeasureSpace, u: &[C64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    space.check_len(u)?;
    let top = sup_abs(u);
    if p == f64::INFINITY || top == 0.0 {
        return Ok(top);
    }
    let sum: f64 = space.weights().iter().zip(u).map(|(&m, z)| m * (z.norm() / top).powf(p)).sum();
    Ok(top * sum.powf(1.0 / p))
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::invalid("exponent p", format!("need p >= 1, got {p}")));
    }
    Ok(())
}

/// `||A^s u||_{L²}`; kernel modes contribute zero.
pub fn sobolev_homogeneous<S: Spectrum + ?Sized>(op: &S, u: &[C64], s: f64) -> Result<f64> {
    check_positive("s", s)?;
    Ok(homogeneous_of(&op.expand(u)?, s))
}

pub fn homogeneous_of(e: &Expansion, s: f64) -> f64 {
    e.weighted_norm(|l| if e.is_kernel(l) { 0.0 } else { l.powf(s) })
}

/// `||(1 + A²)^{s/2} u||_{L²}` for any real `s`.
pub fn sobolev_inhomogeneous<S: Spectrum + ?Sized>(op: &S, u: &[C64], s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::invalid("s", format!("must be finite, got {s}")));
    }
    Ok(inhomogeneous_of(&op.expand(u)?, s))
}

pub fn inhomogeneous_of(e: &Expansion, s: f64) -> f64 {
    if s == 0.0 {
        return e.norm();
    }
    e.weighted_norm(|l| (1.0 + l * l).powf(0.5 * s))
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

fn check_nonnegative(name: &'static str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::invalid(name, format!("must be nonnegative, got {v}")));
    }
    Ok(())
}

/// Dyadic window `[k_lo, k_hi]` outside of which the localized terms are
/// known in closed form: above `k_hi` the plateau covers the spectrum, below
/// `k_lo` only the kernel projection survives. Padded by one on each side so
/// that rounding in `log2` cannot drop a boundary term.
fn dyadic_window(e: &Expansion, theta: &BumpFunction) -> Option<(i32, i32)> {
    let lmin = e.min_positive_eigenvalue()?;
    let lmax = e.max_eigenvalue();
    let k_hi = (lmax / theta.plateau()).log2().ceil() as i32 + 1;
    let k_lo = (lmin / theta.support()).log2().floor() as i32 - 1;
    Some((k_lo, k_hi))
}

fn localized_sup<S: Spectrum + ?Sized>(op: &S, theta: &BumpFunction, e: &Expansion, k: i32) -> f64 {
    sup_abs(&op.synthesize(&localize(e, theta, k)))
}

/// `sup_{k ∈ Z} 2^{-kσ} ||θ(2^{-k} A) u||_∞`, exactly.
///
/// Infinite when `σ > 0` and `u` has a kernel component, since the kernel
/// part is left untouched by every `θ(2^{-k} A)` while `2^{-kσ}` blows up as
/// `k → -∞`.
pub fn besov_homogeneous<S: Spectrum + ?Sized>(
    op: &S,
    theta: &BumpFunction,
    u: &[C64],
    sigma: f64,
) -> Result<ExtendedNorm> {
    check_nonnegative("sigma", sigma)?;
    Ok(besov_homogeneous_of(op, theta, &op.expand(u)?, sigma))
}

pub fn besov_homogeneous_of<S: Spectrum + ?Sized>(
    op: &S,
    theta: &BumpFunction,
    e: &Expansion,
    sigma: f64,
) -> ExtendedNorm {
    let has_kernel = e.has_kernel_component();
    if sigma > 0.0 && has_kernel {
        return ExtendedNorm::Infinite;
    }
    let e = if has_kernel { e.clone() } else { e.without_kernel() };
    let Some((k_lo, k_hi)) = dyadic_window(&e, theta) else {
        // Pure kernel: every localization is the identity (σ = 0 here).
        return ExtendedNorm::Finite(sup_abs(&op.synthesize(&e)));
    };
    let sup = (k_lo..=k_hi).map(|k| dyadic(-k).powf(sigma) * localized_sup(op, theta, &e, k)).fold(0.0, f64::max);
    ExtendedNorm::Finite(sup)
}

/// `max( sup_{k ≥ 0} 2^{-kσ} ||θ(2^{-k} A) u||_∞, ||u||_{H^{-σ}} )`.
pub fn besov_modified<S: Spectrum + ?Sized>(op: &S, theta: &BumpFunction, u: &[C64], sigma: f64) -> Result<f64> {
    check_nonnegative("sigma", sigma)?;
    Ok(besov_modified_of(op, theta, &op.expand(u)?, sigma))
}

pub fn besov_modified_of<S: Spectrum + ?Sized>(op: &S, theta: &BumpFunction, e: &Expansion, sigma: f64) -> f64 {
    let k_hi = dyadic_window(e, theta).map_or(0, |(_, hi)| hi.max(0));
    let high = (0..=k_hi).map(|k| dyadic(-k).powf(sigma) * localized_sup(op, theta, e, k)).fold(0.0, f64::max);
    high.max(inhomogeneous_of(e, -sigma))
}

/// `μ({|u| > λ})`, strict inequality.
pub fn distribution_function(space: &WeightedMeasureSpace, u: &[C64], lambda: f64) -> f64 {
    space.weights().iter().zip(u).filter(|(_, z)| z.norm() > lambda).map(|(m, _)| m).sum()
}

/// L^p norm from `p ∫_0^∞ λ^{p-1} μ({|u| > λ}) dλ`, integrated exactly: the
/// distribution function is constant between consecutive distinct values of
/// `|u|`.
pub fn layer_cake_lp(space: &WeightedMeasureSpace, u: &[C64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    space.check_len(u)?;
    let top = sup_abs(u);
    if top == 0.0 || p == f64::INFINITY {
        return Ok(top);
    }
    let mut atoms: Vec<(f64, f64)> =
        u.iter().zip(space.weights()).map(|(z, &m)| (z.norm() / top, m)).filter(|(a, _)| *a > 0.0).collect();
    atoms.sort_by(|a, b| b.0.total_cmp(&a.0));

    // Walk the distinct levels downward; `tail` is μ({|u| > level}) just
    // below the current level.
    let mut integral = 0.0;
    let mut tail = 0.0;
    let mut i = 0;
    while i < atoms.len() {
        let level = atoms[i].0;
        while i < atoms.len() && atoms[i].0 == level {
            tail += atoms[i].1;
            i += 1;
        }
        let next = atoms.get(i).map_or(0.0, |a| a.0);
        integral += (level.powf(p) - next.powf(p)) * tail;
    }
    Ok(top * integral.powf(1.0 / p))
}
