use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use specnorm::inequalities::{
    theta_swap_ratio, verify_localization_stability, EnsembleRow, EnsembleSpec, StabilityReport,
};
use specnorm::manifolds::{
    make_oscillating_family, scaling_experiment, BlockSpectrum, RadialBump, ScalingReport, WarpedProductGrid,
};
use specnorm::{eigendecompose, make_bump, make_space, norms, BumpFunction, Spectrum, C64};

use crate::config::{NormsConfig, ScalingPlan, StabilityPlan};
use crate::error::CliResult;
use crate::input::OperatorFile;

/// Whether a run met its acceptance bands, with one line per band.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub checks: Vec<(String, bool)>,
}

impl Outcome {
    fn new(checks: Vec<(String, bool)>) -> Self {
        Self { passed: checks.iter().all(|(_, ok)| *ok), checks }
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(out)
}

pub fn run_ensemble(spec: &EnsembleSpec) -> Vec<EnsembleRow> {
    (0..spec.instances).into_par_iter().map(|i| spec.run_instance(i)).collect()
}

pub const ABSTRACT_HEADER: [&str; 13] =
    ["seed", "N", "s", "sigma", "p", "lhs", "besov", "sobolev", "constant", "rhs", "margin", "vacuous", "holds"];

pub fn verify_abstract<W: Write>(spec: &EnsembleSpec, out: W) -> CliResult<Outcome> {
    let rows = run_ensemble(spec);
    let mut w = csv_writer(out);
    w.write_record(ABSTRACT_HEADER)?;
    for row in &rows {
        let r = &row.report;
        w.write_record([
            row.seed.to_string(),
            row.size.to_string(),
            num(r.s),
            num(r.sigma),
            num(r.p),
            num(r.lhs),
            r.besov.to_string(),
            num(r.sobolev),
            num(r.constant),
            num(r.rhs),
            num(r.margin),
            r.vacuous.to_string(),
            r.holds.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::error::CliError::Io("output".into(), e))?;

    let failed = rows.iter().filter(|r| !r.report.holds).count();
    let vacuous = rows.iter().filter(|r| r.report.vacuous).count();
    let stray_vacuous = rows.iter().filter(|r| r.report.vacuous && r.kernel_dim == 0).count();
    Ok(Outcome::new(vec![
        (format!("{} of {} instances hold ({vacuous} vacuous)", rows.len() - failed, rows.len()), failed == 0),
        (format!("{stray_vacuous} vacuous instances without a kernel"), stray_vacuous == 0),
    ]))
}

pub const SCALING_HEADER: [&str; 6] = ["epsilon", "lp", "h_minus_sigma", "besov_modified", "h_s", "theorem_ratio"];

pub fn run_scaling(plan: &ScalingPlan, theta: &BumpFunction) -> CliResult<ScalingReport> {
    Ok(scaling_experiment(&plan.grid, theta, plan.s, plan.sigma, &plan.epsilons, &plan.psi, plan.gamma)?)
}

pub fn scaling_checks(plan: &ScalingPlan, report: &ScalingReport) -> Outcome {
    let tol = plan.slope_tolerance;
    let (s, sigma) = (plan.s, plan.sigma);
    Outcome::new(vec![
        (
            format!("slope(H^s) = {:.4} within {:.2} of {}", report.h_s.slope, tol, -s),
            (report.h_s.slope + s).abs() <= tol,
        ),
        (
            format!("slope(H^-sigma) = {:.4} >= {}", report.h_minus_sigma.slope, sigma - tol),
            report.h_minus_sigma.slope >= sigma - tol,
        ),
        (
            format!("slope(B~^-sigma) = {:.4} >= {}", report.besov_modified.slope, sigma - tol),
            report.besov_modified.slope >= sigma - tol,
        ),
        (format!("L^p variation {:.3e}", report.lp_variation), report.lp_variation.abs() <= 1e-12),
        (
            format!("theorem ratio spread {:.4} <= {}", report.theorem_ratio_spread, plan.ratio_spread_max),
            report.theorem_ratio_spread <= plan.ratio_spread_max,
        ),
    ])
}

pub fn write_scaling<W: Write>(report: &ScalingReport, out: W) -> CliResult<()> {
    let mut w = csv_writer(out);
    w.write_record(SCALING_HEADER)?;
    for r in &report.rows {
        w.write_record([r.epsilon, r.lp, r.h_minus_sigma, r.besov_modified, r.h_s, r.theorem_ratio].map(num))?;
    }
    let fits = [&report.h_minus_sigma, &report.besov_modified, &report.h_s];
    w.write_record(
        ["slope".into(), String::new()].into_iter().chain(fits.iter().map(|f| num(f.slope))).chain([String::new()]),
    )?;
    w.write_record(
        ["residual".into(), String::new()]
            .into_iter()
            .chain(fits.iter().map(|f| num(f.residual)))
            .chain([String::new()]),
    )?;
    w.write_record([
        "spread".into(),
        num(report.lp_variation),
        String::new(),
        String::new(),
        String::new(),
        num(report.theorem_ratio_spread),
    ])?;
    w.flush().map_err(|e| crate::error::CliError::Io("output".into(), e))?;
    Ok(())
}

pub fn scaling<W: Write>(plan: &ScalingPlan, theta: &BumpFunction, out: W) -> CliResult<Outcome> {
    let report = run_scaling(plan, theta)?;
    write_scaling(&report, out)?;
    Ok(scaling_checks(plan, &report))
}

/// One grid's worth of localization ratios.
#[derive(Debug, Clone)]
pub struct StabilityGridResult {
    pub label: &'static str,
    pub instances: Vec<(String, StabilityReport)>,
    /// Ratio at `j = 0` for a cutoff whose plateau covers the whole spectrum.
    pub plateau_cover_ratio: f64,
    pub sup_ratio_modified: f64,
    pub sup_ratio_localized: f64,
    /// Smallest and largest `||u||_{θ} / ||u||_{θ₁}` over the sample.
    pub theta_swap_range: (f64, f64),
}

impl StabilityGridResult {
    pub fn theta_swap_k(&self) -> f64 {
        let (lo, hi) = self.theta_swap_range;
        hi.max(1.0 / lo)
    }
}

fn random_spectral_vector(op: &BlockSpectrum, rng: &mut ChaCha8Rng) -> CliResult<Vec<C64>> {
    let template = op.expand(&vec![C64::new(0.0, 0.0); op.space().size()])?;
    let coefficients: Vec<C64> = (0..template.coefficients().len())
        .map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    Ok(op.synthesize(&template.map_coefficients(&coefficients)))
}

pub fn stability_on_grid(
    plan: &StabilityPlan,
    theta: &BumpFunction,
    grid: &WarpedProductGrid,
    label: &'static str,
    seed: u64,
) -> CliResult<StabilityGridResult> {
    let op = BlockSpectrum::full(grid)?;
    let psi = RadialBump::centered(grid);
    let mut family = Vec::new();
    for &gamma in &plan.gammas {
        for &eps in &plan.epsilons {
            let name = format!("{}@{}", gamma.name(), num(eps));
            family.push((name, make_oscillating_family(grid, eps, &psi, gamma)?));
        }
    }
    let m = grid.angular_size();
    let radii = grid.radii();
    for peak in &plan.peaks {
        let u = (0..grid.size())
            .map(|x| {
                let angular: f64 =
                    grid.angles(x % m).iter().map(|y| ((1.0 + y.cos()) / 2.0).powi(plan.peak_angular_power)).product();
                C64::new(peak.eval(radii[x / m]) * angular, 0.0)
            })
            .collect();
        family.push((format!("peak@{}", num(peak.half_width)), u));
    }
    let instances = family
        .par_iter()
        .map(|(name, u)| {
            let report = verify_localization_stability(&op, theta, &plan.chi, u, plan.sigma, plan.j_min..=plan.j_max)?;
            Ok((name.clone(), report))
        })
        .collect::<CliResult<Vec<_>>>()?;

    let top = op.eigenvalues().iter().copied().fold(0.0, f64::max);
    let cover = make_bump(2.0 * top.max(1.0), 4.0 * top.max(1.0))?;
    let plateau_cover_ratio =
        verify_localization_stability(&op, theta, &cover, &family[0].1, plan.sigma, 0..=0)?.ratio_modified[0];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample: Vec<Vec<C64>> = family.iter().map(|(_, u)| u.clone()).collect();
    for _ in 0..plan.random_vectors {
        sample.push(random_spectral_vector(&op, &mut rng)?);
    }
    let ratios = sample
        .par_iter()
        .map(|u| Ok(theta_swap_ratio(&op, theta, &plan.theta_swap, u, plan.sigma)?))
        .collect::<CliResult<Vec<f64>>>()?;
    let theta_swap_range = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));

    let sup = |f: fn(&StabilityReport) -> f64| instances.iter().map(|(_, r)| f(r)).fold(0.0, f64::max);
    Ok(StabilityGridResult {
        label,
        sup_ratio_modified: sup(|r| r.sup_ratio_modified),
        sup_ratio_localized: sup(|r| r.sup_ratio_localized),
        instances,
        plateau_cover_ratio,
        theta_swap_range,
    })
}

pub fn run_stability(plan: &StabilityPlan, theta: &BumpFunction) -> CliResult<[StabilityGridResult; 2]> {
    let fine = stability_on_grid(plan, theta, &plan.grid, "fine", plan.seed)?;
    let calibration = stability_on_grid(plan, theta, &plan.calibration, "calibration", plan.seed.wrapping_add(1))?;
    Ok([fine, calibration])
}

pub fn stability_checks(plan: &StabilityPlan, results: &[StabilityGridResult; 2]) -> Outcome {
    let [fine, cal] = results;
    let f = plan.calibration_factor;
    let mut checks = vec![];
    for r in results {
        checks.push((
            format!("{}: plateau-covering cutoff ratio {}", r.label, r.plateau_cover_ratio),
            (r.plateau_cover_ratio - 1.0).abs() <= 1e-12,
        ));
        checks.push((
            format!("{}: sup ratios {:.4} / {:.4} finite", r.label, r.sup_ratio_modified, r.sup_ratio_localized),
            r.sup_ratio_modified.is_finite() && r.sup_ratio_localized.is_finite(),
        ));
    }
    checks.push((
        format!("sup ratio_modified {:.4} <= {f} x calibration {:.4}", fine.sup_ratio_modified, cal.sup_ratio_modified),
        fine.sup_ratio_modified <= f * cal.sup_ratio_modified,
    ));
    checks.push((
        format!(
            "sup ratio_localized {:.4} <= {f} x calibration {:.4}",
            fine.sup_ratio_localized, cal.sup_ratio_localized
        ),
        fine.sup_ratio_localized <= f * cal.sup_ratio_localized,
    ));
    checks.push((
        format!("theta-swap K {:.4} <= {f} x calibration {:.4}", fine.theta_swap_k(), cal.theta_swap_k()),
        fine.theta_swap_k() <= f * cal.theta_swap_k(),
    ));
    Outcome::new(checks)
}

pub const STABILITY_HEADER: [&str; 5] = ["grid", "instance", "j", "ratio_modified", "ratio_localized"];

pub fn write_stability<W: Write>(results: &[StabilityGridResult; 2], out: W) -> CliResult<()> {
    let mut w = csv_writer(out);
    w.write_record(STABILITY_HEADER)?;
    for r in results {
        for (name, rep) in &r.instances {
            for ((j, m), l) in rep.j_values.iter().zip(&rep.ratio_modified).zip(&rep.ratio_localized) {
                w.write_record([r.label.to_string(), name.clone(), j.to_string(), num(*m), num(*l)])?;
            }
        }
        w.write_record([
            r.label.to_string(),
            "plateau_cover".into(),
            "0".into(),
            num(r.plateau_cover_ratio),
            String::new(),
        ])?;
        w.write_record([
            r.label.to_string(),
            "sup".into(),
            String::new(),
            num(r.sup_ratio_modified),
            num(r.sup_ratio_localized),
        ])?;
        let k = r.theta_swap_k();
        w.write_record([r.label.to_string(), "theta_swap_interval".into(), String::new(), num(1.0 / k), num(k)])?;
    }
    w.flush().map_err(|e| crate::error::CliError::Io("output".into(), e))?;
    Ok(())
}

pub fn stability<W: Write>(plan: &StabilityPlan, theta: &BumpFunction, out: W) -> CliResult<Outcome> {
    let results = run_stability(plan, theta)?;
    write_stability(&results, out)?;
    Ok(stability_checks(plan, &results))
}

pub const NORMS_HEADER: [&str; 6] =
    ["vector", "lp", "sobolev_homogeneous", "sobolev_inhomogeneous", "besov_homogeneous", "besov_modified"];

pub fn norms_dump<W: Write>(
    file: &OperatorFile,
    params: &NormsConfig,
    theta: &BumpFunction,
    out: W,
) -> CliResult<Outcome> {
    params.validate()?;
    let space = make_space(&file.weights)?;
    let op = eigendecompose(file.matrix.as_ref(), &space)?;
    let mut w = csv_writer(out);
    w.write_record(NORMS_HEADER)?;
    for (i, u) in file.vectors.iter().enumerate() {
        let e = op.expand(u)?;
        w.write_record([
            i.to_string(),
            num(norms::lp_norm(&space, u, params.p)?),
            num(norms::homogeneous_of(&e, params.s)),
            num(norms::inhomogeneous_of(&e, params.s)),
            norms::besov_homogeneous_of(&op, theta, &e, params.sigma).to_string(),
            num(norms::besov_modified_of(&op, theta, &e, params.sigma)),
        ])?;
    }
    w.flush().map_err(|e| crate::error::CliError::Io("output".into(), e))?;
    Ok(Outcome::new(vec![(format!("{} vectors", file.vectors.len()), true)]))
}
