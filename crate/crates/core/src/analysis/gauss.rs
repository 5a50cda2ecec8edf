//! The one-step Gaussian closure
//! `Y(ε) = X_{T-ε} + b(X_{T-ε})(W_T - W_{T-ε}) + c(X_{T-ε})(B^H_T - B^H_{T-ε})`.
//!
//! With `B^H` built as a Volterra sum over Brownian increments, `B^H_T - B^H_{T-ε}`
//! splits into a part measurable at `T - ε` and an independent innovation, so
//! `Y(ε)` is conditionally Gaussian with mean `X_{T-ε} + c(X_{T-ε}) I` and
//! variance `b² ε + c² ∫_{T-ε}^T K_H(T, s)² ds`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::par::{self, Execution};
use crate::paths::{sample_bm_with, volterra_kernel, VolterraCorrection, VolterraFbm};
use crate::quad::{integrate_singular, Tolerance};
use crate::rng::{self, Channel};
use crate::solver::{euler_mixed, MixedSdeProblem, PathSolution, Scheme, Solver};
use crate::stats;

/// `∫_{t-ε}^t K_H(t, s)² ds`.
pub fn kernel_tail_integral(t: f64, eps: f64, hurst: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= t) {
        return Err(Error::Parameter(format!("need 0 < eps <= t, got eps = {eps}, t = {t}")));
    }
    let lo = t - eps;
    let p = if lo == 0.0 { 1.0 - 2.0 * hurst } else { 0.0 };
    let tol = Tolerance::new(1e-10, 1e-8);
    integrate_singular(
        |s| volterra_kernel(t, s, hurst).map(|k| k * k).unwrap_or(f64::NAN),
        lo,
        t,
        p,
        2.0 * hurst - 1.0,
        tol,
    )
}

/// Index `n - k` of the node `T - ε` when `ε` is `k` whole steps.
fn split_index(grid: &TimeGrid, eps: f64) -> Result<usize> {
    let steps = eps / grid.horizon() * grid.steps() as f64;
    let k = steps.round();
    if !(eps > 0.0 && eps < grid.horizon()) || (steps - k).abs() > 1e-9 || k < 1.0 {
        return Err(Error::Parameter(format!(
            "eps = {eps} must be a positive whole number of steps of {} and below the horizon",
            grid.horizon() / grid.steps() as f64
        )));
    }
    Ok(grid.steps() - k as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YEpsilon {
    pub y: f64,
    pub conditional_mean: f64,
    pub variance: f64,
}

/// Volterra-coupled noise and the fixed quantities of the closure at one `ε`.
#[derive(Debug, Clone)]
pub struct ClosureSampler {
    volterra: VolterraFbm,
    eps: f64,
    split: usize,
    tail: f64,
}

impl ClosureSampler {
    pub fn new(problem: &MixedSdeProblem, steps: usize, eps: f64) -> Result<Self> {
        let grid = problem.grid(steps)?;
        let split = split_index(&grid, eps)?;
        let volterra = VolterraFbm::new(grid, problem.hurst, VolterraCorrection::None)?;
        let tail = kernel_tail_integral(problem.horizon, eps, problem.hurst.get())?;
        Ok(ClosureSampler { volterra, eps, split, tail })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        self.volterra.grid()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `∫_{T-ε}^T K_H(T, s)² ds`.
    pub fn kernel_tail(&self) -> f64 {
        self.tail
    }

    /// `(W, B, B^H, X)` for path `path`, `B` the Brownian motion behind `B^H`.
    pub fn draw(&self, problem: &MixedSdeProblem, seed: u64, path: u64) -> Result<(PathSolution, SampledPath)> {
        let grid = self.grid();
        let w = sample_bm_with(grid, &mut rng::stream(seed, path, Channel::Brownian));
        let bm = sample_bm_with(grid, &mut rng::stream(seed, path, Channel::Kernel));
        let bh = self.volterra.coupled(&bm)?;
        Ok((euler_mixed(problem, &w, &bh)?, bm))
    }

    /// The closure along `solution`, whose `B^H` is the Volterra sum over `bm`.
    pub fn closure(&self, problem: &MixedSdeProblem, solution: &PathSolution, bm: &SampledPath) -> Result<YEpsilon> {
        if !(bm.same_grid(&solution.bh) && solution.x.same_grid(&solution.bh)) {
            return Err(Error::Missing("the Brownian motion coupled to B^H on the solution grid".into()));
        }
        let (n, m) = (self.grid().steps(), self.split);
        let eta = solution.x.values()[m];
        let t = &problem.triple;
        let (b, c) = (t.b.eval(eta), t.c.eval(eta));
        let (w, bh) = (solution.w.values(), solution.bh.values());
        let y = eta + b * (w[n] - w[m]) + c * (bh[n] - bh[m]);
        let db = bm.increments();
        let (top, mid) = (self.volterra.row(n), self.volterra.row(m));
        // Left-point sum of (K(T, s) - K(T - ε, s)) dB_s over [0, T - ε].
        let past: f64 = (0..m).map(|j| (top[j] - mid[j]) * db[j]).sum();
        Ok(YEpsilon {
            y,
            conditional_mean: eta + c * past,
            variance: b * b * self.eps + c * c * self.tail,
        })
    }
}

pub fn y_epsilon(problem: &MixedSdeProblem, solution: &PathSolution, bm: &SampledPath, eps: f64) -> Result<YEpsilon> {
    ClosureSampler::new(problem, solution.grid().steps(), eps)?.closure(problem, solution, bm)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMoments {
    pub eps: f64,
    pub steps: usize,
    pub samples: usize,
    pub kernel_tail: f64,
    /// Moments of `(Y(ε) - mean) / σ`.
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// `E[(Y(ε) - mean)²] / E[σ²]`.
    pub variance_ratio: f64,
}

pub fn conditional_moments(
    problem: &MixedSdeProblem,
    eps: f64,
    steps: usize,
    paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<ConditionalMoments> {
    let sampler = ClosureSampler::new(problem, steps, eps)?;
    let draws = par::try_map_indexed(paths, exec, |p| {
        let (sol, bm) = sampler.draw(problem, seed, p as u64)?;
        sampler.closure(problem, &sol, &bm)
    })?;
    if let Some(d) = draws.iter().find(|d| !(d.variance > 0.0)) {
        return Err(Error::Domain { what: "conditional variance", detail: format!("{} is not positive", d.variance) });
    }
    let z: Vec<f64> = draws.iter().map(|d| (d.y - d.conditional_mean) / d.variance.sqrt()).collect();
    let sq: Vec<f64> = draws.iter().map(|d| (d.y - d.conditional_mean).powi(2)).collect();
    let var: Vec<f64> = draws.iter().map(|d| d.variance).collect();
    let m = stats::moments(&z);
    Ok(ConditionalMoments {
        eps,
        steps,
        samples: paths,
        kernel_tail: sampler.kernel_tail(),
        mean: m.mean,
        variance: m.variance,
        skewness: m.skewness,
        excess_kurtosis: m.excess_kurtosis,
        variance_ratio: stats::mean(&sq) / stats::mean(&var),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub scheme: Scheme,
    pub reference_steps: usize,
    pub samples: usize,
    pub seed: u64,
    /// Decreasing.
    pub eps: Vec<f64>,
    /// `E|X_T - Y(ε)|`.
    pub errors: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub slope: f64,
    pub beta: f64,
    pub beta_prime: f64,
    /// `min(1, β' + β, β' + 1/2)`, the exponent of the upper bound.
    pub bound_exponent: f64,
    /// Engineering threshold for the fitted slope; the bound's constant is unknown.
    pub slope_threshold: f64,
}

pub const RATE_SLOPE_THRESHOLD: f64 = 0.7;

/// `E|X_T - Y(ε)|` with `X` from a fine reference solve on the same noise.
#[allow(clippy::too_many_arguments)]
pub fn y_epsilon_rate(
    problem: &MixedSdeProblem,
    scheme: Scheme,
    eps: &[f64],
    n_ref: usize,
    paths: usize,
    seed: u64,
    beta: f64,
    beta_prime: f64,
    exec: Execution,
) -> Result<RateReport> {
    let h = problem.hurst.get();
    if !(beta > 0.0 && beta < h && beta_prime > 0.0 && beta_prime < 0.5) {
        return Err(Error::Parameter(format!(
            "need beta in (0, {h}) and beta' in (0, 1/2), got {beta}, {beta_prime}"
        )));
    }
    if eps.is_empty() || eps.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::Parameter("eps list must be non-empty and decreasing".into()));
    }
    let grid = problem.grid(n_ref)?;
    let splits = eps.iter().map(|&e| split_index(&grid, e)).collect::<Result<Vec<_>>>()?;
    let solver = Solver::new(problem, scheme)?;
    let noise = problem.noise(grid, seed)?;
    let t = &problem.triple;
    let rows = par::try_map_indexed(paths, exec, |p| {
        let (w, bh) = noise.sample(p as u64);
        let sol = solver.solve(problem, &w, &bh)?;
        let (x, w, bh) = (sol.x.values(), sol.w.values(), sol.bh.values());
        Ok(splits
            .iter()
            .map(|&m| {
                let eta = x[m];
                let y = eta + t.b.eval(eta) * (w[n_ref] - w[m]) + t.c.eval(eta) * (bh[n_ref] - bh[m]);
                (x[n_ref] - y).abs()
            })
            .collect::<Vec<_>>())
    })?;
    let cols: Vec<Vec<f64>> = (0..eps.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    let errors: Vec<f64> = cols.iter().map(|c| stats::mean(c)).collect();
    Ok(RateReport {
        scheme,
        reference_steps: n_ref,
        samples: paths,
        seed,
        eps: eps.to_vec(),
        slope: stats::log_log_slope(eps, &errors),
        std_errors: cols.iter().map(|c| stats::std_error(c)).collect(),
        errors,
        beta,
        beta_prime,
        bound_exponent: 1.0f64.min(beta_prime + beta).min(beta_prime + 0.5),
        slope_threshold: RATE_SLOPE_THRESHOLD,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalGaussReport {
    pub moments: Vec<ConditionalMoments>,
    pub rate: Option<RateReport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{constant, linear, CoefficientTriple};

    fn problem(a: f64, b: f64, c: Option<f64>) -> MixedSdeProblem {
        let c = match c {
            Some(v) => constant(v),
            None => linear(1.0, 0.0),
        };
        MixedSdeProblem::new(CoefficientTriple { a: constant(a), b: constant(b), c }, 1.0, 1.0, 0.75).unwrap()
    }

    #[test]
    fn tail_integral_matches_full_integral() {
        let full = kernel_tail_integral(1.0, 1.0, 0.75).unwrap();
        assert!((full - 1.0).abs() < 1e-7, "{full}");
        let part = kernel_tail_integral(1.0, 0.1, 0.75).unwrap();
        assert!(part > 0.0 && part < 1.0);
    }

    #[test]
    fn no_fractional_part() {
        let p = problem(0.0, 1.0, Some(0.0));
        let s = ClosureSampler::new(&p, 200, 0.1).unwrap();
        let (sol, bm) = s.draw(&p, 1, 0).unwrap();
        let y = s.closure(&p, &sol, &bm).unwrap();
        let eta = sol.x.values()[180];
        assert_eq!(y.conditional_mean, eta);
        assert!((y.variance - 0.1).abs() < 1e-15);
        assert!((y.y - sol.terminal()).abs() < 1e-12);
    }

    #[test]
    fn pure_fractional_innovation_variance() {
        let p = problem(0.0, 0.0, Some(1.0));
        let m = conditional_moments(&p, 0.1, 200, 10_000, 3, Execution::Auto).unwrap();
        assert!((m.variance_ratio - 1.0).abs() < 0.05, "{m:?}");
    }

    #[test]
    fn closure_error_vanishes_without_fractional_noise() {
        let p = problem(0.0, 1.0, Some(0.0));
        let r = y_epsilon_rate(&p, Scheme::Direct, &[0.25, 0.125], 64, 8, 0, 0.5, 0.45, Execution::Auto).unwrap();
        assert!(r.errors.iter().all(|&e| e < 1e-12));
        assert!(y_epsilon_rate(&p, Scheme::Direct, &[0.3], 64, 8, 0, 0.5, 0.45, Execution::Auto).is_err());
    }
}
