//! Experiment configuration, read from a TOML file with one section per
//! subcommand. Every field has a default, so an empty file (or no file) runs
//! the reference experiments.

use std::path::Path;

use serde::Deserialize;
use specnorm::inequalities::EnsembleSpec;
use specnorm::manifolds::{AngularProfile, EndProfile, RadialBump, WarpedProductGrid};
use specnorm::{make_bump, BumpFunction};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theta: ThetaConfig,
    pub verify_abstract: AbstractConfig,
    pub scaling: ScalingConfig,
    pub stability: StabilityConfig,
    pub norms: NormsConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    /// Overrides every seeded section.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.verify_abstract.seed = seed;
        self.stability.seed = seed;
        self
    }
}

/// Cutoff θ with plateau `c` and support `S`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThetaConfig {
    pub plateau: f64,
    pub support: f64,
}

impl Default for ThetaConfig {
    fn default() -> Self {
        let theta = BumpFunction::default();
        Self { plateau: theta.plateau(), support: theta.support() }
    }
}

impl ThetaConfig {
    pub fn build(&self) -> CliResult<BumpFunction> {
        Ok(make_bump(self.plateau, self.support)?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AbstractConfig {
    pub instances: usize,
    pub seed: u64,
    pub min_size: usize,
    pub max_size: usize,
    pub spectral_radii: Vec<f64>,
    pub weight_spreads: Vec<f64>,
    /// Candidate values for both `s` and `σ`.
    pub exponents: Vec<f64>,
    pub zero_probability: f64,
}

impl Default for AbstractConfig {
    fn default() -> Self {
        let spec = EnsembleSpec::default();
        Self {
            instances: spec.instances,
            seed: spec.seed,
            min_size: spec.min_size,
            max_size: spec.max_size,
            spectral_radii: spec.spectral_radii,
            weight_spreads: spec.weight_spreads,
            exponents: spec.exponents,
            zero_probability: spec.zero_probability,
        }
    }
}

impl AbstractConfig {
    pub fn build(&self, theta: BumpFunction) -> CliResult<EnsembleSpec> {
        let spec = EnsembleSpec {
            instances: self.instances,
            seed: self.seed,
            min_size: self.min_size,
            max_size: self.max_size,
            spectral_radii: self.spectral_radii.clone(),
            weight_spreads: self.weight_spreads.clone(),
            exponents: self.exponents.clone(),
            zero_probability: self.zero_probability,
            theta,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Radial interval, profile and angular resolution of a warped-product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub profile: String,
    pub dim: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub angular_points: usize,
    /// Interior radial points; derived from the finest ε when absent.
    pub radial_points: Option<usize>,
}

fn parse_profile(name: &str) -> CliResult<EndProfile> {
    EndProfile::from_name(name).ok_or_else(|| {
        CliError::Config(format!("unknown profile {name:?} (expected hyperbolic, euclidean_like or cylindrical)"))
    })
}

fn parse_gamma(name: &str) -> CliResult<AngularProfile> {
    AngularProfile::from_name(name)
        .ok_or_else(|| CliError::Config(format!("unknown angular profile {name:?} (expected constant or bump)")))
}

impl GridConfig {
    pub fn build(&self, finest_epsilon: Option<f64>) -> CliResult<WarpedProductGrid> {
        let profile = parse_profile(&self.profile)?;
        let grid = match (self.radial_points, finest_epsilon) {
            (Some(n), _) => WarpedProductGrid::new(self.dim, self.r_min, self.r_max, n, self.angular_points, profile)?,
            (None, Some(eps)) if eps.is_finite() => WarpedProductGrid::with_max_spacing(
                self.dim,
                self.r_min,
                self.r_max,
                eps / specnorm::manifolds::RESOLUTION_FACTOR,
                self.angular_points,
                profile,
            )?,
            (None, _) => return Err(CliError::Config("radial_points is required without a finite epsilon".into())),
        };
        let check = grid.profile().check(&grid.radii());
        if !check.satisfied() {
            return Err(CliError::Config(format!(
                "profile {} fails its hypotheses on this grid: {check:?}",
                self.profile
            )));
        }
        Ok(grid)
    }

    /// Same interval and profile with the radial and angular spacing doubled.
    pub fn coarsened(grid: &WarpedProductGrid) -> CliResult<WarpedProductGrid> {
        let nr = grid.radial_points().div_ceil(2);
        let nt = grid.angular_points().div_ceil(2);
        if nr < 2 {
            return Err(CliError::Config("grid too coarse to halve".into()));
        }
        Ok(WarpedProductGrid::new(grid.dim(), grid.r_min(), grid.r_max(), nr - 1, nt, grid.profile().clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub profile: String,
    pub dim: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub angular_points: usize,
    /// Interior radial points; derived from the finest ε when absent.
    pub radial_points: Option<usize>,
    pub s: f64,
    /// Defaults to `n/2 - s`.
    pub sigma: Option<f64>,
    pub epsilons: Vec<f64>,
    /// `constant` or `bump`.
    pub gamma: String,
    /// Half-width of the acceptance bands around the predicted slopes.
    pub slope_tolerance: f64,
    /// Bound on max/min of the Theorem ratio across ε.
    pub ratio_spread_max: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            profile: "hyperbolic".into(),
            dim: 2,
            r_min: 1.0,
            r_max: 2.5,
            angular_points: 4,
            radial_points: None,
            s: 0.5,
            sigma: None,
            epsilons: (3..=7).map(|k| 2f64.powi(-k)).collect(),
            gamma: "constant".into(),
            slope_tolerance: 0.15,
            ratio_spread_max: 5.0,
        }
    }
}

/// Fully validated scaling run.
#[derive(Debug, Clone)]
pub struct ScalingPlan {
    pub grid: WarpedProductGrid,
    pub s: f64,
    pub sigma: f64,
    pub epsilons: Vec<f64>,
    pub psi: RadialBump,
    pub gamma: AngularProfile,
    pub slope_tolerance: f64,
    pub ratio_spread_max: f64,
}

impl ScalingConfig {
    pub fn grid(&self) -> GridConfig {
        GridConfig {
            profile: self.profile.clone(),
            dim: self.dim,
            r_min: self.r_min,
            r_max: self.r_max,
            angular_points: self.angular_points,
            radial_points: self.radial_points,
        }
    }

    pub fn plan(&self) -> CliResult<ScalingPlan> {
        if self.epsilons.len() < 3 {
            return Err(CliError::Config(format!(
                "epsilon sequence needs at least 3 values, got {}",
                self.epsilons.len()
            )));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(CliError::Config("epsilons must be positive and finite".into()));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(CliError::Config("epsilons must be strictly decreasing".into()));
        }
        let (_, sigma_thm) = specnorm::manifolds::theorem_exponents(self.dim, self.s)?;
        let sigma = self.sigma.unwrap_or(sigma_thm);
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(CliError::Config(format!("sigma must be nonnegative, got {sigma}")));
        }
        if !(self.slope_tolerance >= 0.0 && self.ratio_spread_max >= 1.0) {
            return Err(CliError::Config("need slope_tolerance >= 0 and ratio_spread_max >= 1".into()));
        }
        let gamma = parse_gamma(&self.gamma)?;
        let finest = *self.epsilons.last().expect("nonempty");
        let grid = self.grid().build(Some(finest))?;
        if !grid.resolved(finest) {
            return Err(CliError::Core(specnorm::Error::Unresolved {
                epsilon: finest,
                spacing: grid.radial_spacing(),
                required_spacing: finest / specnorm::manifolds::RESOLUTION_FACTOR,
            }));
        }
        Ok(ScalingPlan {
            psi: RadialBump::centered(&grid),
            grid,
            s: self.s,
            sigma,
            epsilons: self.epsilons.clone(),
            gamma,
            slope_tolerance: self.slope_tolerance,
            ratio_spread_max: self.ratio_spread_max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StabilityConfig {
    pub profile: String,
    pub dim: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub angular_points: usize,
    /// Interior radial points; required.
    pub radial_points: Option<usize>,
    pub seed: u64,
    pub sigma: f64,
    /// Oscillation scales of the test vectors; `inf` is the unmodulated profile.
    pub epsilons: Vec<f64>,
    pub gammas: Vec<String>,
    /// Radial half-widths of concentrated test vectors
    /// `ψ_δ(r) ((1 + cos y)/2)^q`, centered in the interval.
    pub peak_half_widths: Vec<f64>,
    pub peak_angular_power: i32,
    /// Source cutoff χ, applied as `χ(2^{-j} A)`.
    pub chi_plateau: f64,
    pub chi_support: f64,
    pub j_min: i32,
    pub j_max: i32,
    /// Alternative cutoff for the θ-swap sub-experiment.
    pub theta_swap_plateau: f64,
    pub theta_swap_support: f64,
    /// Random spectral-coefficient vectors added to the θ-swap sample.
    pub random_vectors: usize,
    /// Allowed growth of every measured quantity from the calibration grid
    /// (spacing doubled) to the configured grid.
    pub calibration_factor: f64,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        Self {
            profile: "hyperbolic".into(),
            dim: 2,
            r_min: -3.0,
            r_max: 0.0,
            angular_points: 16,
            radial_points: Some(127),
            seed: 0x5eed_0002,
            sigma: 0.5,
            epsilons: vec![f64::INFINITY, 1.0, 0.5],
            gammas: vec!["constant".into(), "bump".into()],
            peak_half_widths: vec![1.0, 0.5],
            peak_angular_power: 8,
            chi_plateau: 1.0,
            chi_support: 2.0,
            j_min: 0,
            j_max: 6,
            theta_swap_plateau: 0.25,
            theta_swap_support: 1.5,
            random_vectors: 20,
            calibration_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StabilityPlan {
    pub grid: WarpedProductGrid,
    pub calibration: WarpedProductGrid,
    pub seed: u64,
    pub sigma: f64,
    pub epsilons: Vec<f64>,
    pub gammas: Vec<AngularProfile>,
    pub peaks: Vec<RadialBump>,
    pub peak_angular_power: i32,
    pub chi: BumpFunction,
    pub j_min: i32,
    pub j_max: i32,
    pub theta_swap: BumpFunction,
    pub random_vectors: usize,
    pub calibration_factor: f64,
}

impl StabilityConfig {
    pub fn grid(&self) -> GridConfig {
        GridConfig {
            profile: self.profile.clone(),
            dim: self.dim,
            r_min: self.r_min,
            r_max: self.r_max,
            angular_points: self.angular_points,
            radial_points: self.radial_points,
        }
    }

    pub fn plan(&self) -> CliResult<StabilityPlan> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(CliError::Config(format!("sigma must be nonnegative, got {}", self.sigma)));
        }
        if self.j_min > self.j_max {
            return Err(CliError::Config(format!("empty j range {}..={}", self.j_min, self.j_max)));
        }
        if self.epsilons.is_empty() || self.gammas.is_empty() {
            return Err(CliError::Config("need at least one epsilon and one gamma".into()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(CliError::Config("epsilons must be positive".into()));
        }
        if self.peak_angular_power < 0 {
            return Err(CliError::Config("peak_angular_power must be nonnegative".into()));
        }
        if !(self.calibration_factor >= 1.0) {
            return Err(CliError::Config("calibration_factor must be >= 1".into()));
        }
        let gammas = self.gammas.iter().map(|g| parse_gamma(g)).collect::<CliResult<Vec<_>>>()?;
        if self.radial_points.is_none() {
            return Err(CliError::Config("stability needs radial_points".into()));
        }
        let grid = self.grid().build(None)?;
        let calibration = GridConfig::coarsened(&grid)?;
        let center = 0.5 * (self.r_min + self.r_max);
        let margin = specnorm::manifolds::SUPPORT_MARGIN_STEPS * calibration.radial_spacing();
        let peaks = self
            .peak_half_widths
            .iter()
            .map(|&half_width| {
                if !(half_width > 0.0 && center - half_width >= self.r_min + margin) {
                    return Err(CliError::Config(format!(
                        "peak half-width {half_width} must be positive and leave {margin} to the boundary"
                    )));
                }
                Ok(RadialBump { center, half_width })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let finest = self.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
        for g in [&grid, &calibration] {
            if !g.resolved(finest) {
                return Err(CliError::Core(specnorm::Error::Unresolved {
                    epsilon: finest,
                    spacing: g.radial_spacing(),
                    required_spacing: finest / specnorm::manifolds::RESOLUTION_FACTOR,
                }));
            }
        }
        Ok(StabilityPlan {
            grid,
            calibration,
            seed: self.seed,
            sigma: self.sigma,
            epsilons: self.epsilons.clone(),
            gammas,
            peaks,
            peak_angular_power: self.peak_angular_power,
            chi: make_bump(self.chi_plateau, self.chi_support)?,
            j_min: self.j_min,
            j_max: self.j_max,
            theta_swap: make_bump(self.theta_swap_plateau, self.theta_swap_support)?,
            random_vectors: self.random_vectors,
            calibration_factor: self.calibration_factor,
        })
    }
}

/// Exponents for the one-off norm dump.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsConfig {
    pub p: f64,
    pub s: f64,
    pub sigma: f64,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { p: 2.0, s: 1.0, sigma: 1.0 }
    }
}

impl NormsConfig {
    pub fn validate(&self) -> CliResult<()> {
        if !(self.p >= 1.0) {
            return Err(CliError::Config(format!("p must be >= 1, got {}", self.p)));
        }
        if !self.s.is_finite() || !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(CliError::Config("need finite s and nonnegative finite sigma".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::from_toml("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_and_overrides() {
        let cfg = ExperimentConfig::from_toml(
            "[theta]\nplateau = 0.25\n[verify_abstract]\ninstances = 5\nexponents = [1.0]\n[scaling]\nprofile = \"euclidean_like\"\n",
        )
        .unwrap()
        .with_seed(9);
        assert_eq!(cfg.theta.plateau, 0.25);
        assert_eq!(cfg.theta.support, 1.0);
        assert_eq!(cfg.verify_abstract.instances, 5);
        assert_eq!(cfg.verify_abstract.seed, 9);
        assert_eq!(cfg.stability.seed, 9);
        assert_eq!(cfg.scaling.profile, "euclidean_like");
        assert_eq!(cfg.scaling.r_max, 2.5);
    }

    #[test]
    fn documented_defaults_match() {
        let readme = include_str!("../../../README.md");
        let start = readme.find("```toml\n").unwrap() + "```toml\n".len();
        let len = readme[start..].find("```").unwrap();
        assert_eq!(ExperimentConfig::from_toml(&readme[start..start + len]).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_toml("[scaling]\nepsilon = 1.0\n").is_err());
        assert!(ExperimentConfig::from_toml("[bogus]\n").is_err());
    }

    #[test]
    fn empty_ensemble_is_rejected() {
        let cfg = AbstractConfig { instances: 0, ..Default::default() };
        let err = cfg.build(BumpFunction::default()).unwrap_err();
        assert!(err.to_string().contains("empty ensemble"), "{err}");
    }

    #[test]
    fn scaling_plan_validation() {
        let plan = ScalingConfig::default().plan().unwrap();
        assert_eq!(plan.grid.radial_points(), 1919);
        assert_eq!(plan.sigma, 0.5);
        let short = ScalingConfig { epsilons: vec![0.25, 0.125], ..Default::default() };
        assert!(short.plan().unwrap_err().to_string().contains("at least 3"));
        let bad_s = ScalingConfig { s: 1.0, ..Default::default() };
        assert!(bad_s.plan().is_err());
        let coarse = ScalingConfig { radial_points: Some(20), ..Default::default() };
        assert!(matches!(coarse.plan(), Err(CliError::Core(specnorm::Error::Unresolved { .. }))));
        let bad_profile = ScalingConfig { profile: "funnel".into(), ..Default::default() };
        assert!(bad_profile.plan().unwrap_err().to_string().contains("funnel"));
    }

    #[test]
    fn stability_calibration_grid_has_double_spacing() {
        let plan = StabilityConfig::default().plan().unwrap();
        assert_eq!(plan.calibration.radial_points(), 63);
        assert_eq!(plan.calibration.angular_points(), 8);
        let ratio = plan.calibration.radial_spacing() / plan.grid.radial_spacing();
        assert!((ratio - 2.0).abs() < 1e-12);
        let wide = StabilityConfig { peak_half_widths: vec![1.5], ..Default::default() };
        assert!(wide.plan().is_err());
        let unresolved = StabilityConfig { epsilons: vec![0.1], ..Default::default() };
        assert!(matches!(unresolved.plan(), Err(CliError::Core(specnorm::Error::Unresolved { .. }))));
    }
}
