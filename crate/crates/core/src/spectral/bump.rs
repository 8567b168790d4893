use crate::error::{Error, Result};

/// Smooth even cutoff equal to one on `[-c, c]` and vanishing outside `(-S, S)`.
///
/// The transition is the `C^∞` smoothstep `g(x) = e(x) / (e(x) + e(1 - x))`
/// with `e(x) = exp(-1/x)` for `x > 0`, evaluated at `x = (S - |t|)/(S - c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFunction {
    plateau: f64,
    support: f64,
}

impl BumpFunction {
    pub fn new(plateau: f64, support: f64) -> Result<Self> {
        if !(plateau.is_finite() && plateau > 0.0) {
            return Err(Error::invalid("bump plateau", format!("c must be positive, got {plateau}")));
        }
        if !(support.is_finite() && support > plateau) {
            return Err(Error::invalid("bump support", format!("need S > c, got c = {plateau}, S = {support}")));
        }
        Ok(Self { plateau, support })
    }

    /// Plateau half-width `c`.
    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    /// Support radius `S`.
    pub fn support(&self) -> f64 {
        self.support
    }

    /// `sup |1 - θ|`, which is one since θ reaches zero.
    pub fn sup_one_minus(&self) -> f64 {
        1.0
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = (self.support - t.abs()) / (self.support - self.plateau);
        smoothstep(x).clamp(0.0, 1.0)
    }
}

impl Default for BumpFunction {
    fn default() -> Self {
        Self { plateau: 0.5, support: 1.0 }
    }
}

pub fn make_bump(plateau: f64, support: f64) -> Result<BumpFunction> {
    BumpFunction::new(plateau, support)
}

fn flat_exp(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn smoothstep(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let a = flat_exp(x);
    a / (a + flat_exp(1.0 - x))
}
