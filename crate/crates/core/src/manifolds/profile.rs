use std::fmt;
use std::sync::Arc;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Warping profile `w(r)` of an end `(R, ∞) × Γ` with metric `dr² + w(r)^{-2} |dy|²`.
#[derive(Clone)]
pub enum EndProfile {
    /// `w(r) = e^{-r}`: exponentially large ends.
    Hyperbolic,
    /// `w(r) = (1 + r)^{-1}`: polynomial ends (shifted away from `r = 0`).
    EuclideanLike,
    /// `w ≡ 1`.
    Cylindrical,
    Custom(CustomProfile),
}

/// A user-supplied profile with its first two derivatives.
#[derive(Clone)]
pub struct CustomProfile {
    pub name: String,
    pub w: RealFn,
    pub dw: RealFn,
    pub d2w: RealFn,
}

impl CustomProfile {
    pub fn new(
        name: impl Into<String>,
        w: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dw: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2w: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), w: Arc::new(w), dw: Arc::new(dw), d2w: Arc::new(d2w) }
    }
}

impl fmt::Debug for EndProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl EndProfile {
    pub fn name(&self) -> &str {
        match self {
            EndProfile::Hyperbolic => "hyperbolic",
            EndProfile::EuclideanLike => "euclidean_like",
            EndProfile::Cylindrical => "cylindrical",
            EndProfile::Custom(c) => &c.name,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "hyperbolic" => Some(EndProfile::Hyperbolic),
            "euclidean_like" => Some(EndProfile::EuclideanLike),
            "cylindrical" => Some(EndProfile::Cylindrical),
            _ => None,
        }
    }

    pub fn w(&self, r: f64) -> f64 {
        match self {
            EndProfile::Hyperbolic => (-r).exp(),
            EndProfile::EuclideanLike => 1.0 / (1.0 + r),
            EndProfile::Cylindrical => 1.0,
            EndProfile::Custom(c) => (c.w)(r),
        }
    }

    pub fn dw(&self, r: f64) -> f64 {
        match self {
            EndProfile::Hyperbolic => -(-r).exp(),
            EndProfile::EuclideanLike => -1.0 / (1.0 + r).powi(2),
            EndProfile::Cylindrical => 0.0,
            EndProfile::Custom(c) => (c.dw)(r),
        }
    }

    pub fn d2w(&self, r: f64) -> f64 {
        match self {
            EndProfile::Hyperbolic => (-r).exp(),
            EndProfile::EuclideanLike => 2.0 / (1.0 + r).powi(3),
            EndProfile::Cylindrical => 0.0,
            EndProfile::Custom(c) => (c.d2w)(r),
        }
    }

    /// Measures the end hypotheses on sample radii: `0 < w ≤ C`,
    /// `w(r)/w(r') ≤ C'` for `|r - r'| ≤ 1`, `|∂^k w| ≤ C_k w` for `k = 1, 2`.
    pub fn check(&self, radii: &[f64]) -> ProfileCheck {
        let w: Vec<f64> = radii.iter().map(|&r| self.w(r)).collect();
        let positive = w.iter().all(|&x| x.is_finite() && x > 0.0);
        let sup_w = w.iter().copied().fold(0.0, f64::max);
        let mut neighbor_ratio: f64 = 1.0;
        for (i, (&ri, &wi)) in radii.iter().zip(&w).enumerate() {
            for (&rj, &wj) in radii[i + 1..].iter().zip(&w[i + 1..]) {
                if (rj - ri).abs() > 1.0 {
                    continue;
                }
                neighbor_ratio = neighbor_ratio.max(wi / wj).max(wj / wi);
            }
        }
        let bound = |d: &dyn Fn(f64) -> f64| radii.iter().zip(&w).map(|(&r, &wr)| d(r).abs() / wr).fold(0.0, f64::max);
        ProfileCheck {
            positive,
            sup_w,
            neighbor_ratio,
            derivative_bounds: [bound(&|r| self.dw(r)), bound(&|r| self.d2w(r))],
        }
    }
}

/// Measured constants of the end hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileCheck {
    pub positive: bool,
    /// `C` in `w ≤ C`.
    pub sup_w: f64,
    /// `C'` in `w(r)/w(r') ≤ C'`, `|r - r'| ≤ 1`.
    pub neighbor_ratio: f64,
    /// `C_1, C_2` in `|∂^k w| ≤ C_k w`.
    pub derivative_bounds: [f64; 2],
}

impl ProfileCheck {
    pub fn satisfied(&self) -> bool {
        self.positive
            && self.sup_w.is_finite()
            && self.neighbor_ratio.is_finite()
            && self.derivative_bounds.iter().all(|c| c.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_profiles_satisfy_hypotheses() {
        let radii: Vec<f64> = (0..400).map(|i| 1.0 + 0.1 * i as f64).collect();
        let hyp = EndProfile::Hyperbolic.check(&radii);
        assert!(hyp.satisfied());
        assert!((hyp.sup_w - (-1f64).exp()).abs() < 1e-15);
        assert!((hyp.neighbor_ratio - 1f64.exp()).abs() < 1e-9);
        assert!((hyp.derivative_bounds[0] - 1.0).abs() < 1e-12);
        assert!((hyp.derivative_bounds[1] - 1.0).abs() < 1e-12);

        let euc = EndProfile::EuclideanLike.check(&radii);
        assert!(euc.satisfied());
        assert!(euc.neighbor_ratio <= 1.5 + 1e-12);
        assert!(euc.derivative_bounds[0] <= 0.5 + 1e-12);

        let cyl = EndProfile::Cylindrical.check(&radii);
        assert!(cyl.satisfied());
        assert_eq!((cyl.sup_w, cyl.neighbor_ratio, cyl.derivative_bounds), (1.0, 1.0, [0.0, 0.0]));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for p in [EndProfile::Hyperbolic, EndProfile::EuclideanLike, EndProfile::Cylindrical] {
            for r in [0.5, 2.0, 7.5] {
                let fd1 = (p.w(r + h) - p.w(r - h)) / (2.0 * h);
                let fd2 = (p.w(r + h) - 2.0 * p.w(r) + p.w(r - h)) / (h * h);
                assert!((fd1 - p.dw(r)).abs() < 1e-8, "{p:?} {r}");
                assert!((fd2 - p.d2w(r)).abs() < 1e-4, "{p:?} {r}");
            }
        }
    }

    #[test]
    fn custom_profile_reports_violation() {
        let bad = EndProfile::Custom(CustomProfile::new("vanishing", |r| 1.0 - r, |_| -1.0, |_| 0.0));
        assert!(!bad.check(&[0.0, 0.5, 1.0]).satisfied());
        assert_eq!(bad.name(), "vanishing");
        assert!(EndProfile::from_name("hyperbolic").is_some());
        assert!(EndProfile::from_name("cusp").is_none());
    }
}
