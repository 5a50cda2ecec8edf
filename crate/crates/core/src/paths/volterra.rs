use std::sync::Arc;

use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::gamma;

use super::{covariance_unchecked, Hurst, CHOLESKY_MAX_STEPS};
use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::par::{self, Execution};
use crate::quad::{integrate_singular, Tolerance};

const KERNEL_TOL: Tolerance = Tolerance {
    abs: 1e-10,
    rel: 1e-10,
    max_intervals: 2000,
};

fn check_kernel_hurst(hurst: f64) -> Result<()> {
    if (0.5..1.0).contains(&hurst) {
        Ok(())
    } else {
        Err(Error::domain(
            "Hurst index",
            format!("{hurst} not in [1/2, 1) for the kernel"),
        ))
    }
}

/// `c_H` with `∫_0^t K_H(t, s)^2 ds = t^{2H}`; equals 1 at `H = 1/2`.
pub fn kernel_constant(hurst: f64) -> f64 {
    let h = hurst;
    (2.0 * h * gamma(1.5 - h) / (gamma(h + 0.5) * gamma(2.0 - 2.0 * h))).sqrt()
}

/// The square-integrable kernel with `B^H_t = ∫_0^t K_H(t, s) dB_s`, for
/// `0 < s < t` and `H ∈ [1/2, 1)`.
pub fn volterra_kernel(t: f64, s: f64, hurst: f64) -> Result<f64> {
    check_kernel_hurst(hurst)?;
    if !(s > 0.0 && s < t) {
        return Err(Error::domain(
            "kernel argument",
            format!("need 0 < s < t, got s = {s}, t = {t}"),
        ));
    }
    kernel_unchecked(t, s, hurst, kernel_constant(hurst))
}

fn kernel_unchecked(t: f64, s: f64, h: f64, c: f64) -> Result<f64> {
    let e = h - 0.5;
    let lead = (t / s).powf(e) * (t - s).powf(e);
    if e == 0.0 {
        return Ok(c * lead);
    }
    let inner = integrate_singular(
        |u: f64| u.powf(h - 1.5) * (u - s).powf(e),
        s,
        t,
        e,
        0.0,
        KERNEL_TOL,
    )?;
    Ok(c * (lead - e * s.powf(-e) * inner))
}

/// `∫_0^t K_H(t, s)^2 ds` by adaptive quadrature (should equal `t^{2H}`).
pub fn kernel_squared_integral(t: f64, hurst: f64) -> Result<f64> {
    check_kernel_hurst(hurst)?;
    let c = kernel_constant(hurst);
    let e = hurst - 0.5;
    let tol = Tolerance {
        abs: 1e-9,
        rel: 1e-9,
        ..Tolerance::default()
    };
    let k2 = |s: f64| {
        kernel_unchecked(t, s, hurst, c)
            .map(|k| k * k)
            .unwrap_or(f64::NAN)
    };
    integrate_singular(k2, 0.0, t, -2.0 * e, 2.0 * e, tol)
}

/// Fast evaluation of `k(y) = K_H(1, y)` and its cell integrals, used to
/// build the Volterra weights.
///
/// With `e = H - 1/2` and `w = v^e`,
/// `k(y) = c_H y^{-e} (1-y)^e ∫_0^1 (y + (1-y) w^{1/e})^e dw`,
/// and the remaining integral is smooth enough for a fixed Gauss rule.
/// Kernel values agree with [`volterra_kernel`] to about `1e-7` relative.
struct KernelRule {
    e: f64,
    c: f64,
    // (w^{1/e}, weight) on [0, 1]
    core: Vec<(f64, f64)>,
    legendre: Vec<(f64, f64)>,
    right: Vec<(f64, f64)>,
}

fn legendre(deg: usize) -> Vec<(f64, f64)> {
    GaussLegendre::new(NonZeroUsize::new(deg).expect("positive degree"))
        .as_node_weight_pairs()
        .to_vec()
}

// Nodes and weights for the weight (1-x)^alpha (1+x)^beta on [-1, 1].
fn jacobi(deg: usize, alpha: f64, beta: f64) -> Vec<(f64, f64)> {
    if alpha == 0.0 && beta == 0.0 {
        return legendre(deg);
    }
    let a = FiniteAboveNegOneF64::new(alpha).expect("exponent above -1");
    let b = FiniteAboveNegOneF64::new(beta).expect("exponent above -1");
    GaussJacobi::new(NonZeroUsize::new(deg).expect("positive degree"), a, b)
        .as_node_weight_pairs()
        .to_vec()
}

impl KernelRule {
    fn new(hurst: f64) -> Self {
        let e = hurst - 0.5;
        let core = if e == 0.0 {
            Vec::new()
        } else {
            legendre(32)
                .into_iter()
                .map(|(x, w)| ((0.5 * (x + 1.0)).powf(1.0 / e), 0.5 * w))
                .collect()
        };
        KernelRule {
            e,
            c: kernel_constant(hurst),
            core,
            legendre: legendre(8),
            right: jacobi(16, e, 0.0),
        }
    }

    // k(y) y^e (1-y)^{-e}
    fn smooth(&self, y: f64) -> f64 {
        let e = self.e;
        let acc: f64 = self
            .core
            .iter()
            .map(|&(p, w)| w * (y + (1.0 - y) * p).powf(e))
            .sum();
        self.c * acc
    }

    fn k(&self, y: f64) -> f64 {
        let e = self.e;
        y.powf(-e) * (1.0 - y).powf(e) * self.smooth(y)
    }

    /// `∫_a^b K_H(t, s) ds` over one grid cell; `first` means `a = 0`,
    /// `last` means `b = t`.
    fn cell(&self, t: f64, a: f64, b: f64, first: bool, last: bool) -> f64 {
        let e = self.e;
        if e == 0.0 {
            return b - a;
        }
        let (ya, yb) = (a / t, b / t);
        if first {
            // k(y) = A y^{-e} + B y^{e} + ... near 0, too rough for a fixed rule.
            let q = if last { e } else { 0.0 };
            let tol = Tolerance {
                abs: 1e-13,
                rel: 1e-11,
                ..Tolerance::default()
            };
            let v = integrate_singular(|y| self.k(y), ya, yb, -e, q, tol).unwrap_or(f64::NAN);
            return t.powf(1.0 + e) * v;
        }
        let h = 0.5 * (yb - ya);
        let node = |x: f64| ya + h * (x + 1.0);
        let integral = if last {
            // 1 - y = h (1 - x), so the Jacobi weight carries (1-y)^e.
            let sum: f64 = self
                .right
                .iter()
                .map(|&(x, w)| {
                    let y = node(x);
                    w * y.powf(-e) * self.smooth(y)
                })
                .sum();
            sum * h.powf(1.0 + e)
        } else {
            let sum: f64 = self
                .legendre
                .iter()
                .map(|&(x, w)| w * self.k(node(x)))
                .sum();
            sum * h
        };
        t.powf(1.0 + e) * integral
    }
}

/// Cell-averaged kernel weights `(1/Δ_i) ∫_{t_i}^{t_{i+1}} K_H(t_j, s) ds`,
/// `i = 0..j`, for row `j ≥ 1` of the grid.
///
/// These are the coefficients of `E[B^H_{t_j} | ΔB_0, ..., ΔB_{n-1}]`, so
/// the discrete sum has the exact covariance with `B`.
pub fn kernel_cell_averages(grid: &TimeGrid, hurst: f64, j: usize) -> Result<Vec<f64>> {
    check_kernel_hurst(hurst)?;
    if j == 0 || j > grid.steps() {
        return Err(Error::Parameter(format!(
            "row {j} outside 1..={}",
            grid.steps()
        )));
    }
    Ok(cell_row(&KernelRule::new(hurst), grid, j))
}

fn cell_row(rule: &KernelRule, grid: &TimeGrid, j: usize) -> Vec<f64> {
    let nodes = grid.nodes();
    let t = nodes[j];
    (0..j)
        .map(|i| {
            let (a, b) = (nodes[i], nodes[i + 1]);
            rule.cell(t, a, b, i == 0, i + 1 == j) / (b - a)
        })
        .collect()
}

/// How the Volterra generator treats the part of `B^H` not explained by the
/// discrete Brownian increments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VolterraCorrection {
    /// Conditional mean only; slightly under-dispersed on coarse grids.
    None,
    /// Add an independent Gaussian with the residual covariance, giving the
    /// exact joint law of `(B, B^H)` on the grid.
    Exact,
}

#[derive(Debug, Clone)]
pub struct VolterraFbm {
    grid: Arc<TimeGrid>,
    hurst: Hurst,
    // Packed rows j = 1..n, row j holds j weights.
    weights: Vec<f64>,
    // Dense n×n row-major square root of the residual covariance.
    correction: Option<Vec<f64>>,
}

impl VolterraFbm {
    pub fn new(grid: Arc<TimeGrid>, hurst: Hurst, correction: VolterraCorrection) -> Result<Self> {
        let n = grid.steps();
        let h = hurst.get();
        let rule = KernelRule::new(h);
        let rows = par::map_indexed(n, Execution::Auto, |r| cell_row(&rule, &grid, r + 1));
        let weights: Vec<f64> = rows.into_iter().flatten().collect();
        let mut gen = VolterraFbm {
            grid,
            hurst,
            weights,
            correction: None,
        };
        if correction == VolterraCorrection::Exact {
            gen.correction = Some(gen.residual_root()?);
        }
        Ok(gen)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn hurst(&self) -> Hurst {
        self.hurst
    }

    pub fn has_correction(&self) -> bool {
        self.correction.is_some()
    }

    /// Weights of row `j` (`1 ≤ j ≤ n`).
    pub fn row(&self, j: usize) -> &[f64] {
        let start = j * (j - 1) / 2;
        &self.weights[start..start + j]
    }

    fn residual_root(&self) -> Result<Vec<f64>> {
        let n = self.grid.steps();
        let h = self.hurst.get();
        if n > CHOLESKY_MAX_STEPS {
            return Err(Error::Parameter(format!(
                "exact volterra correction is capped at {CHOLESKY_MAX_STEPS} steps, got {n}"
            )));
        }
        let t = &self.grid.nodes()[1..];
        let dt: Vec<f64> = (0..n).map(|k| self.grid.dt(k)).collect();
        let resid = DMatrix::from_fn(n, n, |a, b| {
            let (ra, rb) = (self.row(a + 1), self.row(b + 1));
            let explained: f64 = ra
                .iter()
                .zip(rb)
                .zip(&dt)
                .map(|((x, y), d)| x * y * d)
                .sum();
            covariance_unchecked(t[a], t[b], h) - explained
        });
        let scale = resid.diagonal().amax().max(f64::MIN_POSITIVE);
        let eig = SymmetricEigen::new(resid);
        let lowest = eig.eigenvalues.min();
        if lowest < -1e-6 * scale.max(1.0) {
            return Err(Error::Factorization {
                n,
                hurst: h,
                reason: format!("residual covariance has eigenvalue {lowest:e}"),
            });
        }
        let mut root = vec![0.0; n * n];
        for k in 0..n {
            let s = eig.eigenvalues[k].max(0.0).sqrt();
            if s == 0.0 {
                continue;
            }
            for a in 0..n {
                root[a * n + k] = eig.eigenvectors[(a, k)] * s;
            }
        }
        Ok(root)
    }

    /// The discrete Volterra sum `Σ_{i<j} w_{j,i} ΔB_i` against `bm`.
    pub fn coupled(&self, bm: &SampledPath) -> Result<SampledPath> {
        if !(Arc::ptr_eq(bm.grid(), &self.grid) || **bm.grid() == *self.grid) {
            return Err(Error::GridMismatch(
                "Brownian path is not on the generator grid".into(),
            ));
        }
        let db = bm.increments();
        let n = self.grid.steps();
        let mut values = Vec::with_capacity(n + 1);
        values.push(0.0);
        for j in 1..=n {
            values.push(self.row(j).iter().zip(&db).map(|(w, d)| w * d).sum());
        }
        SampledPath::new(self.grid.clone(), values)
    }

    /// Coupled sum plus, if configured, the independent residual drawn from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, bm: &SampledPath, rng: &mut R) -> Result<SampledPath> {
        let base = self.coupled(bm)?;
        let Some(root) = &self.correction else {
            return Ok(base);
        };
        let n = self.grid.steps();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut values = base.into_values();
        for a in 0..n {
            let row = &root[a * n..(a + 1) * n];
            values[a + 1] += row.iter().zip(&z).map(|(r, z)| r * z).sum::<f64>();
        }
        SampledPath::new(self.grid.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brownian_degenerate_kernel() {
        assert!((kernel_constant(0.5) - 1.0).abs() < 1e-14);
        for &(t, s) in &[(1.0, 0.3), (2.0, 1.9), (0.5, 1e-6)] {
            assert!((volterra_kernel(t, s, 0.5).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(volterra_kernel(1.0, 0.0, 0.7).is_err());
        assert!(volterra_kernel(1.0, 1.0, 0.7).is_err());
        assert!(volterra_kernel(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn kernel_blows_up_near_zero() {
        let a = volterra_kernel(1.0, 1e-3, 0.75).unwrap();
        let b = volterra_kernel(1.0, 1e-6, 0.75).unwrap();
        assert!(b > a && b > 10.0);
    }

    #[test]
    fn fast_rule_matches_adaptive_kernel() {
        for &h in &[0.55, 0.75, 0.9] {
            let rule = KernelRule::new(h);
            for &y in &[1e-6, 1e-3, 0.1, 0.5, 0.99] {
                let exact = volterra_kernel(1.0, y, h).unwrap();
                assert!((rule.k(y) / exact - 1.0).abs() < 1e-6, "H = {h}, y = {y}");
            }
        }
    }

    #[test]
    fn cell_averages_match_adaptive_integrals() {
        let h = 0.8;
        let exact_cell = |t: f64, a: f64, b: f64, p: f64, q: f64| {
            integrate_singular(
                |s| volterra_kernel(t, s, h).unwrap(),
                a,
                b,
                p,
                q,
                Tolerance::default(),
            )
            .unwrap()
                / (b - a)
        };
        let g = TimeGrid::uniform(2.0, 6).unwrap();
        let row = kernel_cell_averages(&g, h, 6).unwrap();
        let nodes = g.nodes();
        for (i, w) in row.iter().enumerate() {
            let p = if i == 0 { 0.5 - h } else { 0.0 };
            let q = if i == 5 { h - 0.5 } else { 0.0 };
            let exact = exact_cell(nodes[6], nodes[i], nodes[i + 1], p, q);
            assert!((w / exact - 1.0).abs() < 1e-6, "cell {i}: {w} vs {exact}");
        }
        let single = kernel_cell_averages(&TimeGrid::uniform(1.0, 1).unwrap(), h, 1).unwrap()[0];
        let exact = exact_cell(1.0, 0.0, 1.0, 0.5 - h, h - 0.5);
        assert!((single / exact - 1.0).abs() < 1e-6, "{single} vs {exact}");
    }

    #[test]
    fn zero_brownian_gives_zero() {
        let g = Arc::new(TimeGrid::uniform(1.0, 16).unwrap());
        let gen = VolterraFbm::new(
            g.clone(),
            Hurst::new(0.7).unwrap(),
            VolterraCorrection::None,
        )
        .unwrap();
        let out = gen.coupled(&SampledPath::zeros(g)).unwrap();
        assert!(out.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let g = Arc::new(TimeGrid::uniform(1.0, 8).unwrap());
        let other = Arc::new(TimeGrid::uniform(1.0, 4).unwrap());
        let gen = VolterraFbm::new(g, Hurst::new(0.7).unwrap(), VolterraCorrection::None).unwrap();
        assert!(matches!(
            gen.coupled(&SampledPath::zeros(other)),
            Err(Error::GridMismatch(_))
        ));
    }
}
