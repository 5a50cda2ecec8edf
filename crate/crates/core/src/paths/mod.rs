//! Brownian and fractional Brownian path generation.
//!
//! Three fBm generators share one law:
//!
//! * [`CholeskyFbm`] factors the covariance matrix `R_H(t_i, t_j)`, exact on
//!   any grid, `O(n^3)` setup and `O(n^2)` per path;
//! * [`CirculantFbm`] embeds the fractional Gaussian noise covariance in a
//!   circulant matrix, exact on uniform grids, `O(n log n)` per path;
//! * [`VolterraFbm`] evaluates `B^H_t = ∫_0^t K_H(t,s) dB_s` against an
//!   explicit Brownian motion `B`, which is what the conditional-Gaussian
//!   experiments need.

mod cholesky;
mod circulant;
mod volterra;

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::rng::{self, Channel};

pub use cholesky::{CholeskyFbm, CHOLESKY_MAX_STEPS};
pub use circulant::{CirculantFbm, EIGENVALUE_TOLERANCE};
pub use volterra::{
    kernel_cell_averages, kernel_constant, kernel_squared_integral, volterra_kernel,
    VolterraCorrection, VolterraFbm,
};

/// Hurst index restricted to the long-memory range `(1/2, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Hurst(f64);

impl Hurst {
    pub fn new(h: f64) -> Result<Self> {
        if h > 0.5 && h < 1.0 {
            Ok(Hurst(h))
        } else {
            Err(Error::Config(format!(
                "Hurst index must lie in (1/2, 1), got {h}"
            )))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl<'de> Deserialize<'de> for Hurst {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h = f64::deserialize(d)?;
        Hurst::new(h).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FbmMethod {
    Cholesky,
    Circulant,
    Volterra,
}

impl FbmMethod {
    /// Circulant from 256 steps up (or whenever the cholesky cap is
    /// exceeded), cholesky below. Non-uniform grids always use cholesky.
    pub fn default_for(grid: &TimeGrid) -> FbmMethod {
        if grid.is_uniform() && (grid.steps() >= 256 || grid.steps() > CHOLESKY_MAX_STEPS) {
            FbmMethod::Circulant
        } else {
            FbmMethod::Cholesky
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbmConfig {
    pub hurst: Hurst,
    pub method: FbmMethod,
    pub seed: u64,
}

impl FbmConfig {
    pub fn new(hurst: f64, method: FbmMethod, seed: u64) -> Result<Self> {
        Ok(FbmConfig {
            hurst: Hurst::new(hurst)?,
            method,
            seed,
        })
    }
}

/// `R_H(t, s) = (|t|^{2H} + |s|^{2H} - |t-s|^{2H}) / 2`, for any `H ∈ (0, 1)`.
pub fn fbm_covariance(t: f64, s: f64, hurst: f64) -> Result<f64> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::domain(
            "Hurst index",
            format!("{hurst} not in (0, 1)"),
        ));
    }
    Ok(covariance_unchecked(t, s, hurst))
}

pub(crate) fn covariance_unchecked(t: f64, s: f64, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    0.5 * (t.abs().powf(h2) + s.abs().powf(h2) - (t - s).abs().powf(h2))
}

/// Brownian path with `W_0 = 0` from an explicit generator.
pub fn sample_bm_with<R: Rng + ?Sized>(grid: &Arc<TimeGrid>, rng: &mut R) -> SampledPath {
    let increments: Vec<f64> = (0..grid.steps())
        .map(|k| grid.dt(k).sqrt() * rng.sample::<f64, _>(StandardNormal))
        .collect();
    SampledPath::from_increments(grid.clone(), &increments).expect("gaussian draws are finite")
}

/// Brownian path for `seed` (path index 0 of the Brownian channel).
pub fn sample_bm(grid: &Arc<TimeGrid>, seed: u64) -> SampledPath {
    sample_bm_with(grid, &mut rng::stream(seed, 0, Channel::Brownian))
}

pub fn sample_fbm_cholesky(grid: &Arc<TimeGrid>, hurst: f64, seed: u64) -> Result<SampledPath> {
    let gen = CholeskyFbm::new(grid.clone(), Hurst::new(hurst)?)?;
    Ok(gen.sample(&mut rng::stream(seed, 0, Channel::Fractional)))
}

pub fn sample_fbm_circulant(grid: &Arc<TimeGrid>, hurst: f64, seed: u64) -> Result<SampledPath> {
    let gen = CirculantFbm::new(grid.clone(), Hurst::new(hurst)?)?;
    Ok(gen.sample(&mut rng::stream(seed, 0, Channel::Fractional)))
}

/// fBm measurably coupled to `bm_path` through the discretized Volterra
/// representation (no independent correction).
pub fn sample_fbm_volterra(
    grid: &Arc<TimeGrid>,
    hurst: f64,
    bm_path: &SampledPath,
) -> Result<SampledPath> {
    let gen = VolterraFbm::new(grid.clone(), Hurst::new(hurst)?, VolterraCorrection::None)?;
    gen.coupled(bm_path)
}

/// A ready-to-sample fBm generator of any method.
#[derive(Debug, Clone)]
pub enum FbmGenerator {
    Cholesky(CholeskyFbm),
    Circulant(CirculantFbm),
    Volterra(VolterraFbm),
}

impl FbmGenerator {
    pub fn new(grid: Arc<TimeGrid>, hurst: Hurst, method: FbmMethod) -> Result<Self> {
        Ok(match method {
            FbmMethod::Cholesky => FbmGenerator::Cholesky(CholeskyFbm::new(grid, hurst)?),
            FbmMethod::Circulant => FbmGenerator::Circulant(CirculantFbm::new(grid, hurst)?),
            FbmMethod::Volterra => {
                FbmGenerator::Volterra(VolterraFbm::new(grid, hurst, VolterraCorrection::Exact)?)
            }
        })
    }

    pub fn auto(grid: Arc<TimeGrid>, hurst: Hurst) -> Result<Self> {
        let method = FbmMethod::default_for(&grid);
        FbmGenerator::new(grid, hurst, method)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        match self {
            FbmGenerator::Cholesky(g) => g.grid(),
            FbmGenerator::Circulant(g) => g.grid(),
            FbmGenerator::Volterra(g) => g.grid(),
        }
    }

    /// One fBm path for `(seed, path)`.
    pub fn sample_path(&self, seed: u64, path: u64) -> SampledPath {
        let mut frac = rng::stream(seed, path, Channel::Fractional);
        match self {
            FbmGenerator::Cholesky(g) => g.sample(&mut frac),
            FbmGenerator::Circulant(g) => g.sample(&mut frac),
            FbmGenerator::Volterra(g) => {
                let bm = sample_bm_with(g.grid(), &mut rng::stream(seed, path, Channel::Kernel));
                let mut corr = rng::stream(seed, path, Channel::Correction);
                g.sample(&bm, &mut corr)
                    .expect("kernel Brownian motion lives on the generator grid")
            }
        }
    }
}

/// Independent `(W, B^H)` driving noise for Monte Carlo path `path`.
#[derive(Debug, Clone)]
pub struct DrivingNoise {
    fbm: FbmGenerator,
    seed: u64,
}

impl DrivingNoise {
    pub fn new(fbm: FbmGenerator, seed: u64) -> Self {
        DrivingNoise { fbm, seed }
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        self.fbm.grid()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample(&self, path: u64) -> (SampledPath, SampledPath) {
        let w = sample_bm_with(
            self.grid(),
            &mut rng::stream(self.seed, path, Channel::Brownian),
        );
        let bh = self.fbm.sample_path(self.seed, path);
        (w, bh)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        assert_eq!(fbm_covariance(1.0, 1.0, 0.3).unwrap(), 1.0);
        let t: f64 = 0.7;
        assert!((fbm_covariance(t, t, 0.8).unwrap() - t.powf(1.6)).abs() < 1e-15);
        assert!((fbm_covariance(2.0, 1.0, 0.75).unwrap() - 1.414_214).abs() < 1e-6);
        assert_eq!(
            fbm_covariance(0.3, 0.9, 0.6).unwrap(),
            fbm_covariance(0.9, 0.3, 0.6).unwrap()
        );
        assert!(fbm_covariance(1.0, 1.0, 1.0).is_err());
        assert!(fbm_covariance(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn hurst_range() {
        assert!(Hurst::new(0.5).is_err());
        assert!(Hurst::new(1.0).is_err());
        assert!(Hurst::new(0.4).is_err());
        assert!(FbmConfig::new(0.75, FbmMethod::Circulant, 1).is_ok());
    }

    #[test]
    fn bm_single_step_and_determinism() {
        let g = Arc::new(TimeGrid::uniform(2.0, 1).unwrap());
        let p = sample_bm(&g, 11);
        assert_eq!(p.values()[0], 0.0);
        assert_eq!(p.values().len(), 2);
        assert_eq!(p, sample_bm(&g, 11));
        assert_ne!(p, sample_bm(&g, 12));
    }

    #[test]
    fn bm_terminal_variance() {
        let g = Arc::new(TimeGrid::uniform(2.0, 16).unwrap());
        let m = 10_000;
        let xs: Vec<f64> = (0..m)
            .map(|i| sample_bm_with(&g, &mut rng::stream(5, i, Channel::Brownian)).terminal())
            .collect();
        let v = crate::stats::variance(&xs);
        assert!((v / 2.0 - 1.0).abs() < 0.05, "variance {v}");
    }

    #[test]
    fn default_method_switch() {
        assert_eq!(
            FbmMethod::default_for(&TimeGrid::uniform(1.0, 255).unwrap()),
            FbmMethod::Cholesky
        );
        assert_eq!(
            FbmMethod::default_for(&TimeGrid::uniform(1.0, 256).unwrap()),
            FbmMethod::Circulant
        );
        let irregular = TimeGrid::from_nodes(vec![0.0, 0.3, 1.0]).unwrap();
        assert_eq!(FbmMethod::default_for(&irregular), FbmMethod::Cholesky);
    }
}
