//! Refined Sobolev inequality with explicit constant for an arbitrary
//! nonnegative self-adjoint operator, randomized instances to exercise it,
//! and the spectral-localization stability ratios of the modified Besov norm.

use std::ops::RangeInclusive;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::norms::{self, ExtendedNorm};
use crate::spectral::{
    dyadic, eigendecompose, sup_abs, BumpFunction, SelfAdjointOperator, Spectrum, WeightedMeasureSpace,
};
use crate::{Mat, C64};

/// Relative slack allowed on the left-hand side before an inequality counts as violated.
pub const HOLDS_REL_TOL: f64 = 1e-9;

/// `s_p = n/2 - n/p`, the Sobolev exponent embedding into `L^p` in dimension `n`.
pub fn sobolev_exponent(n: u32, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("dimension", "must be at least 1"));
    }
    if p.is_nan() || p < 2.0 {
        return Err(Error::invalid("exponent p", format!("need p >= 2, got {p}")));
    }
    let n = f64::from(n);
    Ok(n / 2.0 - n / p)
}

/// `p = 2(σ + s)/σ`.
pub fn refined_exponent(s: f64, sigma: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::invalid("s", format!("must be positive, got {s}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    Ok(2.0 * (sigma + s) / sigma)
}

/// `C = 2 ||1 - θ||_∞^{2/p} (p/(p-2))^{1/p} (2/c)^{σ(p-2)/p}`.
pub fn refined_constant(p: f64, sigma: f64, theta: &BumpFunction) -> Result<f64> {
    if !(p.is_finite() && p > 2.0) {
        return Err(Error::invalid("exponent p", format!("need p > 2, got {p}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let c = theta.plateau();
    Ok(2.0
        * theta.sup_one_minus().powf(2.0 / p)
        * (p / (p - 2.0)).powf(1.0 / p)
        * (2.0 / c).powf(sigma * (p - 2.0) / p))
}

/// Both sides of `||u||_p ≤ C ||u||_{Ḃ^{-σ}}^{1-2/p} ||u||_{Ḣ^s}^{2/p}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedReport {
    pub p: f64,
    pub s: f64,
    pub sigma: f64,
    pub lhs: f64,
    pub besov: ExtendedNorm,
    pub sobolev: f64,
    pub constant: f64,
    /// `+∞` when the Besov norm is.
    pub rhs: f64,
    /// `rhs / lhs`, `+∞` when `lhs = 0` or the bound is vacuous.
    pub margin: f64,
    /// The bound is `+∞` (kernel component with `σ > 0`).
    pub vacuous: bool,
    pub holds: bool,
}

pub fn verify_refined_abstract<S: Spectrum + ?Sized>(
    op: &S,
    theta: &BumpFunction,
    u: &[C64],
    s: f64,
    sigma: f64,
) -> Result<RefinedReport> {
    let p = refined_exponent(s, sigma)?;
    let constant = refined_constant(p, sigma, theta)?;
    let lhs = norms::lp_norm(op.space(), u, p)?;
    let e = op.expand(u)?;
    let besov = norms::besov_homogeneous_of(op, theta, &e, sigma);
    let sobolev = norms::homogeneous_of(&e, s);
    let rhs = match besov {
        ExtendedNorm::Infinite => f64::INFINITY,
        ExtendedNorm::Finite(b) => constant * b.powf(1.0 - 2.0 / p) * sobolev.powf(2.0 / p),
    };
    let margin = if lhs == 0.0 { f64::INFINITY } else { rhs / lhs };
    Ok(RefinedReport {
        p,
        s,
        sigma,
        lhs,
        besov,
        sobolev,
        constant,
        rhs,
        margin,
        vacuous: !besov.is_finite(),
        holds: rhs == f64::INFINITY || lhs <= rhs * (1.0 + HOLDS_REL_TOL),
    })
}

/// Shape of a random instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstanceParams {
    pub size: usize,
    pub spectral_radius: f64,
    /// Weights are log-uniform in `[1/spread, spread]`.
    pub weight_spread: f64,
    /// Probability of planting one exact zero eigenvalue.
    pub zero_probability: f64,
}

/// Seeded random space, operator and vector.
///
/// The operator is `D^{-1/2} Q Λ Q^* D^{1/2}` with `Q` a random unitary
/// (Gram-Schmidt on a complex Gaussian matrix) and `Λ` log-uniform in
/// `[1e-3, spectral_radius]`; the vector has independent standard complex
/// Gaussian coefficients in the eigenbasis.
pub fn random_instance(seed: u64, params: InstanceParams) -> (WeightedMeasureSpace, SelfAdjointOperator, Vec<C64>) {
    let n = params.size.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let log_spread = params.weight_spread.max(1.0).ln();
    let weights: Vec<f64> =
        (0..n).map(|_| if log_spread > 0.0 { rng.random_range(-log_spread..=log_spread).exp() } else { 1.0 }).collect();
    let space = WeightedMeasureSpace::new(weights).expect("log-uniform weights are positive");

    let q = random_unitary(&mut rng, n);
    let hi = params.spectral_radius.max(f64::MIN_POSITIVE);
    let lo = 1e-3f64.min(hi);
    let mut lambda: Vec<f64> = (0..n).map(|_| rng.random_range(lo.ln()..=hi.ln()).exp()).collect();
    if rng.random_bool(params.zero_probability.clamp(0.0, 1.0)) {
        let j = rng.random_range(0..n);
        lambda[j] = 0.0;
    }

    let sqrt_w: Vec<f64> = space.weights().iter().map(|m| m.sqrt()).collect();
    let a = Mat::from_fn(n, n, |i, j| {
        let h: C64 = (0..n).map(|k| q[(i, k)] * q[(j, k)].conj() * lambda[k]).sum();
        h * (sqrt_w[j] / sqrt_w[i])
    });
    let op =
        eigendecompose(a.as_ref(), &space).expect("random instance is μ-self-adjoint and nonnegative by construction");

    let coefficients: Vec<C64> = (0..n).map(|_| complex_gaussian(&mut rng)).collect();
    let e = op.expand(&vec![C64::new(0.0, 0.0); n]).expect("length matches");
    let u = op.synthesize(&e.map_coefficients(&coefficients));
    (space, op, u)
}

fn complex_gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn random_unitary(rng: &mut impl Rng, n: usize) -> Mat<C64> {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for q in &cols {
                let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    Mat::from_fn(n, n, |i, j| cols[j][i])
}

/// Localization ratios for `χ_j = χ(2^{-2j} A²)`, `χ(λ) = χ_source(|λ|^{1/2})`.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub j_values: Vec<i32>,
    /// `||χ_j u||_{B̃^{-σ}} / ||u||_{B̃^{-σ}}` per j.
    pub ratio_modified: Vec<f64>,
    /// `||χ_j u||_∞ / (2^{jσ} ||u||_{B̃^{-σ}})` per j.
    pub ratio_localized: Vec<f64>,
    pub sup_ratio_modified: f64,
    pub sup_ratio_localized: f64,
}

pub fn verify_localization_stability<S: Spectrum + ?Sized>(
    op: &S,
    theta: &BumpFunction,
    chi_source: &BumpFunction,
    u: &[C64],
    sigma: f64,
    j_range: RangeInclusive<i32>,
) -> Result<StabilityReport> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(Error::invalid("sigma", format!("must be nonnegative, got {sigma}")));
    }
    let e = op.expand(u)?;
    let base = norms::besov_modified_of(op, theta, &e, sigma);
    if base == 0.0 {
        return Err(Error::invalid("u", "modified Besov norm is zero"));
    }
    let mut report = StabilityReport {
        j_values: Vec::new(),
        ratio_modified: Vec::new(),
        ratio_localized: Vec::new(),
        sup_ratio_modified: 0.0,
        sup_ratio_localized: 0.0,
    };
    for j in j_range {
        let scale = dyadic(-2 * j);
        let ej = e.map(|l| C64::new(chi_source.eval((scale * l * l).abs().sqrt()), 0.0));
        let modified = norms::besov_modified_of(op, theta, &ej, sigma) / base;
        let localized = sup_abs(&op.synthesize(&ej)) / (dyadic(j).powf(sigma) * base);
        report.sup_ratio_modified = report.sup_ratio_modified.max(modified);
        report.sup_ratio_localized = report.sup_ratio_localized.max(localized);
        report.j_values.push(j);
        report.ratio_modified.push(modified);
        report.ratio_localized.push(localized);
    }
    Ok(report)
}

/// `||u||_{B̃^{-σ}, θ} / ||u||_{B̃^{-σ}, θ₁}`.
pub fn theta_swap_ratio<S: Spectrum + ?Sized>(
    op: &S,
    theta: &BumpFunction,
    theta1: &BumpFunction,
    u: &[C64],
    sigma: f64,
) -> Result<f64> {
    let e = op.expand(u)?;
    let a = norms::besov_modified_of(op, theta, &e, sigma);
    let b = norms::besov_modified_of(op, theta1, &e, sigma);
    if b == 0.0 {
        return Err(Error::invalid("u", "modified Besov norm is zero"));
    }
    Ok(a / b)
}

/// Seeded ensemble of abstract instances.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub instances: usize,
    pub seed: u64,
    pub min_size: usize,
    pub max_size: usize,
    pub spectral_radii: Vec<f64>,
    pub weight_spreads: Vec<f64>,
    pub exponents: Vec<f64>,
    pub zero_probability: f64,
    pub theta: BumpFunction,
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        Self {
            instances: 1000,
            seed: 0x5eed_0001,
            min_size: 2,
            max_size: 64,
            spectral_radii: vec![1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3],
            weight_spreads: vec![1.0, 1e1, 1e2, 1e3],
            exponents: vec![0.25, 0.5, 1.0, 2.0, 4.0],
            zero_probability: 0.2,
            theta: BumpFunction::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleRow {
    pub index: usize,
    pub seed: u64,
    pub size: usize,
    pub kernel_dim: usize,
    pub report: RefinedReport,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.instances == 0 {
            return Err(Error::invalid("ensemble", "empty ensemble"));
        }
        if self.min_size == 0 || self.min_size > self.max_size {
            return Err(Error::invalid(
                "size range",
                format!("need 1 <= min <= max, got {}..={}", self.min_size, self.max_size),
            ));
        }
        if self.max_size > crate::spectral::DENSE_SIZE_LIMIT {
            return Err(Error::TooLarge { size: self.max_size, limit: crate::spectral::DENSE_SIZE_LIMIT });
        }
        let positive = |name: &'static str, v: &[f64]| -> Result<()> {
            if v.is_empty() || v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::invalid(name, "need a nonempty list of positive values"));
            }
            Ok(())
        };
        positive("spectral radii", &self.spectral_radii)?;
        positive("weight spreads", &self.weight_spreads)?;
        positive("exponents", &self.exponents)?;
        if self.weight_spreads.iter().any(|&w| w < 1.0) {
            return Err(Error::invalid("weight spreads", "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.zero_probability) {
            return Err(Error::invalid("zero probability", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Seed of instance `index`, a function of the master seed and the index only.
    pub fn instance_seed(&self, index: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(index as u64))
    }

    pub fn run_instance(&self, index: usize) -> EnsembleRow {
        let seed = self.instance_seed(index);
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
        let size = rng.random_range(self.min_size..=self.max_size);
        let pick = |rng: &mut ChaCha8Rng, v: &[f64]| *v.choose(rng).expect("validated nonempty");
        let spectral_radius = pick(&mut rng, &self.spectral_radii);
        let weight_spread = pick(&mut rng, &self.weight_spreads);
        let s = pick(&mut rng, &self.exponents);
        let sigma = pick(&mut rng, &self.exponents);
        let (_, op, u) = random_instance(
            seed,
            InstanceParams { size, spectral_radius, weight_spread, zero_probability: self.zero_probability },
        );
        let report = verify_refined_abstract(&op, &self.theta, &u, s, sigma).expect("parameters validated");
        EnsembleRow { index, seed, size, kernel_dim: op.kernel_dim(), report }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_bump;
    use proptest::prelude::*;

    fn params(size: usize, zero_probability: f64) -> InstanceParams {
        InstanceParams { size, spectral_radius: 30.0, weight_spread: 20.0, zero_probability }
    }

    #[test]
    fn exponents() {
        assert_eq!(sobolev_exponent(2, 4.0).unwrap(), 0.5);
        assert_eq!(sobolev_exponent(3, 2.0).unwrap(), 0.0);
        assert_eq!(sobolev_exponent(4, f64::INFINITY).unwrap(), 2.0);
        assert!(sobolev_exponent(3, 1.5).is_err());

        assert_eq!(refined_exponent(1.0, 1.0).unwrap(), 4.0);
        assert_eq!(refined_exponent(0.37, 0.37).unwrap(), 4.0);
        assert_eq!(refined_exponent(3.0, 1.0).unwrap(), 8.0);
        assert!(refined_exponent(0.0, 1.0).is_err());
        assert!(refined_exponent(1.0, -1.0).is_err());
    }

    #[test]
    fn constant_formula() {
        let c = refined_constant(4.0, 1.0, &make_bump(0.5, 1.0).unwrap()).unwrap();
        assert!((c - 4.0 * 2f64.powf(0.25)).abs() < 1e-12 * c);
        assert!((c - 4.7568).abs() < 1e-4);
        let c2 = refined_constant(4.0, 1.0, &make_bump(2.0, 3.0).unwrap()).unwrap();
        assert!((c2 - 2.0 * 2f64.powf(0.25)).abs() < 1e-12 * c2);
        let c3 = refined_constant(4.0, 2.0, &make_bump(2.0, 3.0).unwrap()).unwrap();
        assert!((c3 - 2.0 * 2f64.powf(0.25)).abs() < 1e-12 * c3);
        assert!(refined_constant(2.0, 1.0, &BumpFunction::default()).is_err());
    }

    #[test]
    fn zero_vector_holds_trivially() {
        let (_, op, u) = random_instance(3, params(5, 0.0));
        let zero = vec![C64::new(0.0, 0.0); u.len()];
        let r = verify_refined_abstract(&op, &BumpFunction::default(), &zero, 1.0, 1.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds && !r.vacuous);
    }

    #[test]
    fn kernel_component_is_vacuous() {
        let (_, op, u) = random_instance(5, params(6, 1.0));
        assert!(op.kernel_dim() >= 1);
        let r = verify_refined_abstract(&op, &BumpFunction::default(), &u, 0.5, 2.0).unwrap();
        assert!(r.vacuous && r.holds);
        assert_eq!(r.rhs, f64::INFINITY);
        assert_eq!(r.besov, ExtendedNorm::Infinite);

        let kernel = op.eigenvector(0).to_vec();
        let b = norms::besov_homogeneous(&op, &BumpFunction::default(), &kernel, 0.5).unwrap();
        assert_eq!(b, ExtendedNorm::Infinite);
        assert!(norms::besov_modified(&op, &BumpFunction::default(), &kernel, 0.5).unwrap().is_finite());
    }

    #[test]
    fn random_32_dimensional_instance_has_room() {
        let (_, op, u) = random_instance(2024, params(32, 0.0));
        let r = verify_refined_abstract(&op, &BumpFunction::default(), &u, 1.0, 1.0).unwrap();
        assert_eq!(r.p, 4.0);
        assert!(r.holds && !r.vacuous);
        assert!(r.margin > 1.0, "margin {}", r.margin);
    }

    #[test]
    fn instances_are_reproducible() {
        let a = random_instance(77, params(9, 0.5));
        let b = random_instance(77, params(9, 0.5));
        assert_eq!(a.0, b.0);
        assert_eq!(a.1.eigenvalues(), b.1.eigenvalues());
        assert_eq!(a.2, b.2);

        let (_, one, _) = random_instance(1, params(1, 0.0));
        assert_eq!(one.eigenvalues().len(), 1);
        assert!(one.eigenvalues()[0] > 0.0);
        for seed in 0..10 {
            assert!(random_instance(seed, params(4, 1.0)).1.kernel_dim() >= 1);
        }
    }

    #[test]
    fn plateau_covering_cutoff_leaves_norm_unchanged() {
        let (_, op, u) = random_instance(8, params(10, 0.0));
        let lmax = op.eigenvalues().last().copied().unwrap();
        let chi = make_bump(2.0 * lmax, 4.0 * lmax).unwrap();
        let r = verify_localization_stability(&op, &BumpFunction::default(), &chi, &u, 0.5, 0..=3).unwrap();
        assert!((r.ratio_modified[0] - 1.0).abs() < 1e-12);
        assert!(r.sup_ratio_modified.is_finite() && r.sup_ratio_localized.is_finite());
        assert_eq!(r.j_values, vec![0, 1, 2, 3]);

        let zero = vec![C64::new(0.0, 0.0); u.len()];
        assert!(verify_localization_stability(&op, &BumpFunction::default(), &chi, &zero, 0.5, 0..=3).is_err());
    }

    #[test]
    fn small_ensemble_all_hold() {
        let spec = EnsembleSpec { instances: 150, ..EnsembleSpec::default() };
        spec.validate().unwrap();
        for i in 0..spec.instances {
            let row = spec.run_instance(i);
            assert!(row.report.holds, "instance {i}: {:?}", row.report);
            if row.report.vacuous {
                assert!(row.kernel_dim > 0);
            }
        }
        assert!(EnsembleSpec { instances: 0, ..EnsembleSpec::default() }.validate().is_err());
    }

    #[test]
    fn dyadic_dilation_is_exact() {
        let theta = BumpFunction::default();
        for seed in 0..6 {
            let (_, op, u) = random_instance(seed, params(12, 0.0));
            let sigma = 0.8;
            let s = 1.3;
            let base_b = norms::besov_homogeneous(&op, &theta, &u, sigma).unwrap().value();
            let base_h = norms::sobolev_homogeneous(&op, &u, s).unwrap();
            for beta in [0.25, 2.0, 8.0] {
                let scaled = op.map_spectrum(|l| beta * l);
                let b = norms::besov_homogeneous(&scaled, &theta, &u, sigma).unwrap().value();
                assert!((b - beta.powf(-sigma) * base_b).abs() <= 1e-12 * b);
                let h = norms::sobolev_homogeneous(&scaled, &u, s).unwrap();
                assert!((h - beta.powf(s) * base_h).abs() <= 1e-12 * h);
            }
            for beta in [0.3, 1.7, 5.1] {
                let scaled = op.map_spectrum(|l| beta * l);
                let b = norms::besov_homogeneous(&scaled, &theta, &u, sigma).unwrap().value();
                assert!(b <= 2f64.powf(sigma) * beta.powf(-sigma) * base_b * (1.0 + 1e-12));
            }
        }
    }

    proptest! {
        #[test]
        fn report_scales_with_vector(seed in 0u64..5000, alpha in 1e-3f64..1e3) {
            let (_, op, u) = random_instance(seed, params(8, 0.0));
            let theta = BumpFunction::default();
            let r = verify_refined_abstract(&op, &theta, &u, 0.5, 1.5).unwrap();
            let scaled: Vec<C64> = u.iter().map(|z| z * alpha).collect();
            let q = verify_refined_abstract(&op, &theta, &scaled, 0.5, 1.5).unwrap();
            prop_assert!((q.lhs - alpha * r.lhs).abs() <= 1e-12 * q.lhs);
            prop_assert!((q.rhs - alpha * r.rhs).abs() <= 1e-12 * q.rhs);
            prop_assert!((q.margin - r.margin).abs() <= 1e-11 * r.margin);
        }
    }
}
