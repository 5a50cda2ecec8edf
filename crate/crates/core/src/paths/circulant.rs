use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::Hurst;
use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};

/// Embedding eigenvalues in `[-EIGENVALUE_TOLERANCE, 0)` are clamped to zero;
/// anything more negative is an error.
pub const EIGENVALUE_TOLERANCE: f64 = 1e-10;

/// Circulant embedding of fractional Gaussian noise on a uniform grid.
#[derive(Clone)]
pub struct CirculantFbm {
    grid: Arc<TimeGrid>,
    hurst: Hurst,
    // sqrt(λ_k / 2n)
    scale: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CirculantFbm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantFbm")
            .field("steps", &self.grid.steps())
            .field("hurst", &self.hurst)
            .finish()
    }
}

/// Autocovariance of unit-step fGn at lag `k`.
fn fgn_autocovariance(k: usize, hurst: f64) -> f64 {
    let h2 = 2.0 * hurst;
    let k = k as f64;
    0.5 * ((k + 1.0).powf(h2) - 2.0 * k.powf(h2) + (k - 1.0).abs().powf(h2))
}

impl CirculantFbm {
    pub fn new(grid: Arc<TimeGrid>, hurst: Hurst) -> Result<Self> {
        let dt = grid
            .step()
            .ok_or_else(|| Error::Parameter("circulant embedding needs a uniform grid".into()))?;
        let n = grid.steps();
        let h = hurst.get();
        let m = 2 * n;
        let mut row: Vec<Complex64> = (0..m)
            .map(|k| {
                let lag = if k <= n { k } else { m - k };
                Complex64::new(fgn_autocovariance(lag, h), 0.0)
            })
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let var = dt.powf(2.0 * h);
        let mut scale = Vec::with_capacity(m);
        for c in &row {
            let mut lambda = c.re;
            if lambda < 0.0 {
                if lambda < -EIGENVALUE_TOLERANCE {
                    return Err(Error::NegativeEigenvalue {
                        value: lambda,
                        n,
                        hurst: h,
                    });
                }
                lambda = 0.0;
            }
            scale.push((lambda * var / m as f64).sqrt());
        }
        Ok(CirculantFbm {
            grid,
            hurst,
            scale,
            fft,
        })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledPath {
        let n = self.grid.steps();
        let mut buf: Vec<Complex64> = self
            .scale
            .iter()
            .map(|s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(s * re, s * im)
            })
            .collect();
        self.fft.process(&mut buf);
        let increments: Vec<f64> = buf[..n].iter().map(|c| c.re).collect();
        SampledPath::from_increments(self.grid.clone(), &increments).expect("finite fgn")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Channel};

    #[test]
    fn requires_uniform_grid() {
        let g = Arc::new(TimeGrid::from_nodes(vec![0.0, 0.2, 1.0]).unwrap());
        assert!(CirculantFbm::new(g, Hurst::new(0.7).unwrap()).is_err());
    }

    #[test]
    fn embedding_is_nonnegative_for_long_memory() {
        for &h in &[0.51, 0.75, 0.99] {
            let g = Arc::new(TimeGrid::uniform(1.0, 1000).unwrap());
            let gen = CirculantFbm::new(g, Hurst::new(h).unwrap()).unwrap();
            let p = gen.sample(&mut stream(1, 0, Channel::Fractional));
            assert_eq!(p.values()[0], 0.0);
        }
    }
}
