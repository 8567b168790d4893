use crate::error::{Error, Result};
use crate::C64;

/// A finite measure space: `N` atoms with strictly positive masses.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasureSpace {
    weights: Vec<f64>,
    total_mass: f64,
}

impl WeightedMeasureSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptySpace);
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::NonPositiveWeight { index, value });
        }
        let total_mass = weights.iter().sum();
        Ok(Self { weights, total_mass })
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `⟨u, v⟩_μ = Σ μ_x conj(u_x) v_x`.
    pub fn inner(&self, u: &[C64], v: &[C64]) -> C64 {
        self.weights.iter().zip(u.iter().zip(v)).map(|(&m, (a, b))| a.conj() * b * m).sum()
    }

    pub fn l2_norm(&self, u: &[C64]) -> f64 {
        self.weights.iter().zip(u).map(|(&m, a)| m * a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn check_len(&self, u: &[C64]) -> Result<()> {
        if u.len() != self.size() {
            return Err(Error::DimensionMismatch { expected: self.size(), found: u.len() });
        }
        Ok(())
    }
}

/// Builds a measure space from atom masses, rejecting empty or nonpositive input.
pub fn make_space(weights: &[f64]) -> Result<WeightedMeasureSpace> {
    WeightedMeasureSpace::new(weights.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_mass_is_stored() {
        assert_eq!(make_space(&[1.0, 1.0]).unwrap().total_mass(), 2.0);
        assert_eq!(make_space(&[1.0, 4.0]).unwrap().total_mass(), 5.0);
    }

    #[test]
    fn rejects_nonpositive_weight_with_index() {
        let err = make_space(&[1.0, 0.0]).unwrap_err();
        assert_eq!(err, Error::NonPositiveWeight { index: 1, value: 0.0 });
        assert_eq!(err.to_string(), "nonpositive weight at index 1 (value 0)");
        assert!(matches!(make_space(&[2.0, 3.0, -1.0]), Err(Error::NonPositiveWeight { index: 2, .. })));
        assert_eq!(make_space(&[]), Err(Error::EmptySpace));
    }

    #[test]
    fn weighted_inner_product() {
        let space = make_space(&[1.0, 3.0]).unwrap();
        let u = [C64::new(1.0, 1.0), C64::new(0.0, 2.0)];
        let v = [C64::new(2.0, 0.0), C64::new(1.0, 0.0)];
        // conj(1+i)*2*1 + conj(2i)*1*3 = 2 - 2i - 6i
        assert_eq!(space.inner(&u, &v), C64::new(2.0, -8.0));
        assert!((space.l2_norm(&u) - (2.0f64 + 12.0).sqrt()).abs() < 1e-15);
    }
}
