use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{covariance_unchecked, Hurst};
use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};

/// Largest step count accepted by the cholesky generator (`O(n^3)` setup).
pub const CHOLESKY_MAX_STEPS: usize = 1 << 11;

/// Exact fBm on an arbitrary grid through the lower Cholesky factor of
/// `R_H(t_i, t_j)`, `i, j = 1..n`.
#[derive(Debug, Clone)]
pub struct CholeskyFbm {
    grid: Arc<TimeGrid>,
    hurst: Hurst,
    // Row-major packed lower triangle.
    factor: Vec<f64>,
}

impl CholeskyFbm {
    pub fn new(grid: Arc<TimeGrid>, hurst: Hurst) -> Result<Self> {
        let n = grid.steps();
        if n > CHOLESKY_MAX_STEPS {
            return Err(Error::Parameter(format!(
                "cholesky generator is capped at {CHOLESKY_MAX_STEPS} steps, got {n}"
            )));
        }
        let t = &grid.nodes()[1..];
        let h = hurst.get();
        let cov = DMatrix::from_fn(n, n, |i, j| covariance_unchecked(t[i], t[j], h));
        let factor = lower_factor(cov, n, h)?;
        Ok(CholeskyFbm {
            grid,
            hurst,
            factor,
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
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        self.apply(&z)
    }

    /// Map standard normals `z` to an fBm path.
    pub fn apply(&self, z: &[f64]) -> SampledPath {
        let n = self.grid.steps();
        assert_eq!(z.len(), n);
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        let mut offset = 0;
        for i in 0..n {
            let row = &self.factor[offset..offset + i + 1];
            values.push(row.iter().zip(z).map(|(l, z)| l * z).sum());
            offset += i + 1;
        }
        SampledPath::new(self.grid.clone(), values).expect("finite factor times finite normals")
    }
}

/// Packed lower Cholesky factor of a symmetric positive definite matrix.
pub(crate) fn lower_factor(cov: DMatrix<f64>, n: usize, hurst: f64) -> Result<Vec<f64>> {
    let chol = cov.cholesky().ok_or_else(|| Error::Factorization {
        n,
        hurst,
        reason: "covariance matrix is not numerically positive definite".into(),
    })?;
    let l = chol.l();
    let mut packed = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            packed.push(l[(i, j)]);
        }
    }
    Ok(packed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Channel};

    #[test]
    fn path_starts_at_zero_and_is_bit_stable() {
        let g = Arc::new(TimeGrid::uniform(1.0, 32).unwrap());
        let gen = CholeskyFbm::new(g, Hurst::new(0.7).unwrap()).unwrap();
        let a = gen.sample(&mut stream(3, 0, Channel::Fractional));
        let b = gen.sample(&mut stream(3, 0, Channel::Fractional));
        assert_eq!(a.values()[0], 0.0);
        let bits = |p: &SampledPath| p.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn cap_is_enforced() {
        let g = Arc::new(TimeGrid::uniform(1.0, CHOLESKY_MAX_STEPS + 1).unwrap());
        assert!(matches!(
            CholeskyFbm::new(g, Hurst::new(0.7).unwrap()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn factorization_failure_names_size_and_hurst() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let err = lower_factor(m, 2, 0.9).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n = 2") && msg.contains("H = 0.9"), "{msg}");
        assert!(err.is_numerical());
    }
}
