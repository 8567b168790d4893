use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use super::grid::radial_block;
use super::WarpedProductGrid;
use crate::error::{Error, Result};
use crate::spectral::{Expansion, Spectrum, WeightedMeasureSpace};
use crate::C64;

const UNRESOLVED_MODE_TOL: f64 = 1e-6;

struct RadialEigen {
    sqrt_eigenvalues: Vec<f64>,
    vectors: Vec<f64>,
}

struct Mode {
    /// `e_m(α)`, orthonormal for the angular weight.
    character: Vec<C64>,
    block: Arc<RadialEigen>,
}

/// `A = (-Δ_g)^{1/2}` on a [`WarpedProductGrid`], diagonalized mode by mode:
/// eigenvectors are `φ_j(r_i) e_m(α)` with `e_m` a discrete torus character
/// and `φ_j` an eigenvector of the radial block of mode `m`.
///
/// Only the requested angular modes are materialized, so a radially
/// oscillating vector with a few angular modes costs a handful of `N_r × N_r`
/// eigensolves instead of one of size `N_r N_θ^{n-1}`. Expanding a vector
/// with energy outside those modes is an error.
pub struct BlockSpectrum {
    grid: WarpedProductGrid,
    space: WeightedMeasureSpace,
    modes: Vec<Mode>,
    eigenvalues: Arc<[f64]>,
    zero_threshold: f64,
}

impl BlockSpectrum {
    /// Every angular mode of the grid.
    pub fn full(grid: &WarpedProductGrid) -> Result<Self> {
        let modes = (0..grid.angular_size()).map(|f| grid.multi_index(f)).collect();
        Self::with_modes(grid, modes)
    }

    /// Only the modes carrying energy in `u` (relative L² share above `1e-12`).
    pub fn for_vector(grid: &WarpedProductGrid, u: &[C64]) -> Result<Self> {
        Self::with_modes(grid, active_modes(grid, u)?)
    }

    pub fn with_modes(grid: &WarpedProductGrid, modes: Vec<Vec<usize>>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::invalid("modes", "at least one angular mode is required"));
        }
        let nth = grid.angular_points();
        for m in &modes {
            if m.len() != grid.dim() - 1 || m.iter().any(|&x| x >= nth) {
                return Err(Error::invalid("modes", format!("{m:?} is not an angular mode of the grid")));
            }
        }
        // Modes m and N - m (per factor, in any order) share a radial block.
        let key = |m: &[usize]| {
            let mut k: Vec<usize> = m.iter().map(|&x| x.min(nth - x)).collect();
            k.sort_unstable();
            k
        };
        let mut cache: BTreeMap<Vec<usize>, Arc<RadialEigen>> = BTreeMap::new();
        let mut built = Vec::with_capacity(modes.len());
        let scale = (2.0 * PI).powf(-0.5 * (grid.dim() - 1) as f64);
        for mode in modes {
            let k = key(&mode);
            let block = match cache.get(&k) {
                Some(b) => Arc::clone(b),
                None => {
                    let (values, vectors) = radial_block(grid, mode.clone()).eigen()?;
                    let lmax = values.iter().copied().fold(0.0, f64::max);
                    if let Some(&bad) = values.iter().find(|&&l| l < -1e-10 * lmax.max(1.0)) {
                        return Err(Error::NotNonnegative { eigenvalue: bad });
                    }
                    let b = Arc::new(RadialEigen {
                        sqrt_eigenvalues: values.iter().map(|&l| l.max(0.0).sqrt()).collect(),
                        vectors,
                    });
                    cache.insert(k, Arc::clone(&b));
                    b
                }
            };
            let character = (0..grid.angular_size())
                .map(|alpha| {
                    let phase: f64 =
                        grid.multi_index(alpha).iter().zip(&mode).map(|(&a, &m)| (a * m) as f64).sum::<f64>()
                            * (2.0 * PI / nth as f64);
                    C64::from_polar(scale, phase)
                })
                .collect();
            built.push(Mode { character, block });
        }

        let mut eigenvalues: Vec<f64> = built.iter().flat_map(|m| m.block.sqrt_eigenvalues.iter().copied()).collect();
        let amax = eigenvalues.iter().copied().fold(0.0, f64::max);
        let zero_threshold = 1e-10 * amax.max(1.0);
        for l in &mut eigenvalues {
            if *l <= zero_threshold {
                *l = 0.0;
            }
        }
        Ok(Self {
            grid: grid.clone(),
            space: grid.measure(),
            modes: built,
            eigenvalues: eigenvalues.into(),
            zero_threshold,
        })
    }

    pub fn grid(&self) -> &WarpedProductGrid {
        &self.grid
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Eigenvalues of `A` in expansion order (mode-major, ascending within a mode).
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

impl Spectrum for BlockSpectrum {
    fn space(&self) -> &WeightedMeasureSpace {
        &self.space
    }

    fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    fn expand(&self, u: &[C64]) -> Result<Expansion> {
        self.space.check_len(u)?;
        let nr = self.grid.radial_points();
        let m = self.grid.angular_size();
        let ang_w = self.grid.angular_weight();
        let rad_w = self.grid.radial_weights();
        let mut coefficients = Vec::with_capacity(self.eigenvalues.len());
        for mode in &self.modes {
            // Weighted angular projection per radius.
            let proj: Vec<C64> = (0..nr)
                .map(|i| {
                    let row = &u[i * m..(i + 1) * m];
                    row.iter().zip(&mode.character).map(|(z, e)| e.conj() * z).sum::<C64>() * (ang_w * rad_w[i])
                })
                .collect();
            for j in 0..nr {
                let v = &mode.block.vectors[j * nr..(j + 1) * nr];
                coefficients.push(v.iter().zip(&proj).map(|(&a, z)| z * a).sum());
            }
        }
        let total = self.space.l2_norm(u);
        let captured = coefficients.iter().map(|c: &C64| c.norm_sqr()).sum::<f64>();
        if total > 0.0 {
            let residual = (total * total - captured).max(0.0).sqrt() / total;
            if residual > UNRESOLVED_MODE_TOL {
                return Err(Error::UnresolvedModes { residual });
            }
        }
        Ok(Expansion::new(Arc::clone(&self.eigenvalues), coefficients, self.zero_threshold))
    }

    fn synthesize(&self, expansion: &Expansion) -> Vec<C64> {
        let nr = self.grid.radial_points();
        let m = self.grid.angular_size();
        let mut out = vec![C64::new(0.0, 0.0); nr * m];
        let coefficients = expansion.coefficients();
        for (k, mode) in self.modes.iter().enumerate() {
            let c = &coefficients[k * nr..(k + 1) * nr];
            let mut radial = vec![C64::new(0.0, 0.0); nr];
            for (j, cj) in c.iter().enumerate() {
                if *cj == C64::new(0.0, 0.0) {
                    continue;
                }
                let v = &mode.block.vectors[j * nr..(j + 1) * nr];
                for (r, &a) in radial.iter_mut().zip(v) {
                    *r += cj * a;
                }
            }
            for (i, r) in radial.iter().enumerate() {
                for (o, e) in out[i * m..(i + 1) * m].iter_mut().zip(&mode.character) {
                    *o += r * e;
                }
            }
        }
        out
    }
}

/// Angular modes whose share of `||u||²` exceeds `1e-24` (amplitude `1e-12`).
pub fn active_modes(grid: &WarpedProductGrid, u: &[C64]) -> Result<Vec<Vec<usize>>> {
    let space = grid.measure();
    space.check_len(u)?;
    let total = space.l2_norm(u).powi(2);
    let nr = grid.radial_points();
    let m = grid.angular_size();
    let nth = grid.angular_points() as f64;
    let rad_w = grid.radial_weights();
    let ang_w = grid.angular_weight();
    let scale = (2.0 * PI).powf(-0.5 * (grid.dim() - 1) as f64);
    let mut modes = Vec::new();
    for flat in 0..m {
        let mode = grid.multi_index(flat);
        let character: Vec<C64> = (0..m)
            .map(|alpha| {
                let phase: f64 = grid.multi_index(alpha).iter().zip(&mode).map(|(&a, &k)| (a * k) as f64).sum::<f64>()
                    * (2.0 * PI / nth);
                C64::from_polar(scale, phase)
            })
            .collect();
        let energy: f64 = (0..nr)
            .map(|i| {
                let p: C64 =
                    u[i * m..(i + 1) * m].iter().zip(&character).map(|(z, e)| e.conj() * z).sum::<C64>() * ang_w;
                rad_w[i] * p.norm_sqr()
            })
            .sum();
        if energy > 1e-24 * total {
            modes.push(mode);
        }
    }
    if modes.is_empty() {
        modes.push(vec![0; grid.dim() - 1]);
    }
    Ok(modes)
}
