//! Fractional calculus on sampled paths: Hölder and fractional norms, Weyl
//! derivatives, the generalized Stieltjes integral and the pathwise Young
//! bound.
//!
//! Integrals with algebraic kernels are evaluated by product integration
//! against the piecewise-linear interpolant of the samples. The cell next to
//! the kernel singularity is integrated in closed form under a local power
//! model `|f(x) - f(y)| ~ C |x - y|^λ`, where `λ` is the Hölder hint of the
//! function (1 when absent, which is exact for the interpolant).

use std::sync::Arc;

use serde::Serialize;
use statrs::function::beta::beta as beta_function;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::par::{self, Execution};
use crate::quad::{integrate_singular, Tolerance};

/// Largest step count for which [`holder_norm`] scans all node pairs.
pub const HOLDER_EXACT_MAX_STEPS: usize = 1 << 13;

/// Samples of a function on a grid with an optional Hölder exponent hint.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
    holder_hint: Option<f64>,
}

fn check_hint(hint: Option<f64>) -> Result<()> {
    match hint {
        Some(l) if !(l > 0.0 && l <= 1.0) => {
            Err(Error::Parameter(format!("Hölder hint must lie in (0, 1], got {l}")))
        }
        _ => Ok(()),
    }
}

impl SampledFunction {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>, holder_hint: Option<f64>) -> Result<Self> {
        check_hint(holder_hint)?;
        SampledFunction::from_path(SampledPath::new(grid, values)?, holder_hint)
    }

    pub fn from_path(path: SampledPath, holder_hint: Option<f64>) -> Result<Self> {
        check_hint(holder_hint)?;
        let grid = path.grid().clone();
        Ok(SampledFunction { grid, values: path.into_values(), holder_hint })
    }

    pub fn from_fn(grid: Arc<TimeGrid>, f: impl Fn(f64) -> f64, holder_hint: Option<f64>) -> Result<Self> {
        SampledFunction::from_path(SampledPath::from_fn(grid, f)?, holder_hint)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn holder_hint(&self) -> Option<f64> {
        self.holder_hint
    }

    pub fn with_hint(mut self, holder_hint: Option<f64>) -> Result<Self> {
        check_hint(holder_hint)?;
        self.holder_hint = holder_hint;
        Ok(self)
    }

    /// Exponent of the singular-cell power model. Hints not above `order`
    /// would make the model integral diverge; the interpolant is used then.
    fn cell_exponent(&self, order: f64) -> f64 {
        match self.holder_hint {
            Some(l) if l > order => l,
            _ => 1.0,
        }
    }

    fn same_grid(&self, other: &SampledFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// `self + other` pointwise; the hint is the smaller of the two.
    pub fn add(&self, other: &SampledFunction) -> Result<SampledFunction> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("cannot add functions on different grids".into()));
        }
        let hint = match (self.holder_hint, other.holder_hint) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(SampledFunction { grid: self.grid.clone(), values, holder_hint: hint })
    }

    pub fn scale(&self, c: f64) -> SampledFunction {
        SampledFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            holder_hint: self.holder_hint,
        }
    }
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("fractional order must lie in (0, 1), got {alpha}")))
    }
}

fn sup_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

// ---------------------------------------------------------------------------
// Hölder norms

fn quotient(f: &[f64], t: &[f64], i: usize, j: usize, lambda: f64) -> f64 {
    (f[j] - f[i]).abs() / (t[j] - t[i]).powf(lambda)
}

/// `max_{i<j} |f(t_j) - f(t_i)| / (t_j - t_i)^λ` over all node pairs up to
/// [`HOLDER_EXACT_MAX_STEPS`] steps. Larger grids scan only the pairs
/// `(i, i + 2^k)`, which yields a lower bound.
pub fn holder_seminorm(f: &SampledFunction, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Parameter(format!("Hölder exponent must lie in (0, 1], got {lambda}")));
    }
    let n = f.grid.steps();
    if n < 2 {
        return Err(Error::Parameter("Hölder norm needs at least two steps".into()));
    }
    let t = f.grid.nodes();
    let v = &f.values;
    let rows: Vec<f64> = if n <= HOLDER_EXACT_MAX_STEPS {
        par::map_indexed(n, Execution::Auto, |i| {
            (i + 1..=n).fold(0.0f64, |m, j| m.max(quotient(v, t, i, j, lambda)))
        })
    } else {
        par::map_indexed(n, Execution::Auto, |i| {
            let mut m = 0.0f64;
            let mut step = 1;
            while i + step <= n {
                m = m.max(quotient(v, t, i, i + step, lambda));
                step *= 2;
            }
            m
        })
    };
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// `‖f‖_λ = sup |f| + sup |f(t) - f(s)| / (t - s)^λ` on the grid.
pub fn holder_norm(f: &SampledFunction, lambda: f64) -> Result<f64> {
    Ok(sup_abs(&f.values) + holder_seminorm(f, lambda)?)
}

// ---------------------------------------------------------------------------
// Product integration kernels

/// `∫_{u1}^{u0} (A + m u) u^{-q-1} du` for `0 < u1 < u0`, `q ∈ (0, 1)`,
/// given `p0 = u0^{-q}`, `p1 = u1^{-q}`.
fn linear_moment(a: f64, m: f64, u0: f64, u1: f64, p0: f64, p1: f64, q: f64) -> f64 {
    a * (p1 - p0) / q + m * (u0 * p0 - u1 * p1) / (1.0 - q)
}

/// Same with `|A + m u|`, splitting at a sign change inside the cell.
fn abs_linear_moment(a: f64, m: f64, u0: f64, u1: f64, p0: f64, p1: f64, q: f64) -> f64 {
    let (n0, n1) = (a + m * u0, a + m * u1);
    if n0 * n1 >= 0.0 {
        return linear_moment(a, m, u0, u1, p0, p1, q).abs();
    }
    let root = -a / m;
    let pr = root.powf(-q);
    linear_moment(a, m, u0, root, p0, pr, q).abs() + linear_moment(a, m, root, u1, pr, p1, q).abs()
}

/// `∫_a^x (f(x) - f(y)) / (x - y)^{q+1} dy` for node `x = t[j]`, `a = t[lo]`.
/// With `absolute` the numerator is `|f(x) - f(y)|`.
fn left_singular_integral(t: &[f64], f: &[f64], lo: usize, j: usize, q: f64, lambda: f64, absolute: bool) -> f64 {
    if j <= lo {
        return 0.0;
    }
    let x = t[j];
    let fx = f[j];
    let h = x - t[j - 1];
    let d = fx - f[j - 1];
    let cell = if absolute { d.abs() } else { d };
    let mut acc = cell * h.powf(-q) / (lambda - q);
    if j >= lo + 2 {
        let mut u1 = h;
        let mut p1 = h.powf(-q);
        for k in (lo..j - 1).rev() {
            let u0 = x - t[k];
            let p0 = u0.powf(-q);
            let m = (f[k + 1] - f[k]) / (t[k + 1] - t[k]);
            let a = fx - f[k] - m * u0;
            acc += if absolute {
                abs_linear_moment(a, m, u0, u1, p0, p1, q)
            } else {
                linear_moment(a, m, u0, u1, p0, p1, q)
            };
            u1 = u0;
            p1 = p0;
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// Fractional Sobolev-type norms

/// `‖f‖_{α,∞} = sup_t ( |f(t)| + ∫_0^t |f(t) - f(s)| / (t - s)^{α+1} ds )`
/// over grid nodes.
pub fn w_alpha_norm(f: &SampledFunction, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    let t = f.grid.nodes();
    let v = &f.values;
    let lambda = f.cell_exponent(alpha);
    let row = |j: usize| v[j].abs() + left_singular_integral(t, v, 0, j, alpha, lambda, true);
    let rows = par::map_indexed(t.len(), Execution::Auto, row);
    Ok(rows.into_iter().fold(0.0, f64::max))
}

/// `‖g‖_{1-α,∞,T} = sup_{s<t} ( |g(t) - g(s)| / (t - s)^{1-α}
/// + ∫_s^t |g(y) - g(s)| / (y - s)^{2-α} dy )` over node pairs, `α ∈ (0, 1/2)`.
pub fn w_t_norm(g: &SampledFunction, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Parameter(format!("order must lie in (0, 1/2), got {alpha}")));
    }
    let t = g.grid.nodes();
    let v = &g.values;
    let n = g.grid.steps();
    let q = 1.0 - alpha;
    let lambda = g.cell_exponent(q);
    // For fixed s = t_i the integral accumulates cell by cell in t.
    let rows = par::map_indexed(n, Execution::Auto, |i| {
        let s = t[i];
        let gs = v[i];
        let h = t[i + 1] - s;
        let mut integral = (v[i + 1] - gs).abs() * h.powf(-q) / (lambda - q);
        let mut best = (v[i + 1] - gs).abs() / h.powf(q) + integral;
        let mut u0 = h;
        let mut p0 = h.powf(-q);
        for j in i + 2..=n {
            let u1 = t[j] - s;
            let p1 = u1.powf(-q);
            // numerator g(y) - g(s) = A + m u on [t_{j-1}, t_j], u = y - s
            let m = (v[j] - v[j - 1]) / (t[j] - t[j - 1]);
            let a = v[j - 1] - gs - m * u0;
            integral += abs_linear_moment(a, m, u1, u0, p1, p0, q);
            best = best.max((v[j] - gs).abs() * p1 + integral);
            u0 = u1;
            p0 = p1;
        }
        best
    });
    Ok(rows.into_iter().fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// Weyl derivatives

/// Values of a fractional derivative at the interior nodes of `[a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteriorValues {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl InteriorValues {
    pub fn sup_abs(&self) -> f64 {
        sup_abs(&self.values)
    }
}

fn node_of(grid: &TimeGrid, t: f64, what: &str) -> Result<usize> {
    grid.node_index(t)
        .ok_or_else(|| Error::Parameter(format!("{what} = {t} is not a grid node")))
}

fn interval(grid: &TimeGrid, a: f64, b: f64) -> Result<(usize, usize)> {
    let lo = node_of(grid, a, "a")?;
    let hi = node_of(grid, b, "b")?;
    if hi < lo + 2 {
        return Err(Error::Parameter(format!("need at least one interior node in [{a}, {b}]")));
    }
    Ok((lo, hi))
}

fn left_derivative_nodes(t: &[f64], f: &[f64], lo: usize, hi: usize, alpha: f64, lambda: f64) -> Vec<f64> {
    let a = t[lo];
    let scale = 1.0 / gamma(1.0 - alpha);
    par::map_indexed(hi - lo - 1, Execution::Auto, |k| {
        let j = lo + 1 + k;
        let x = t[j];
        let integral = left_singular_integral(t, f, lo, j, alpha, lambda, false);
        scale * (f[j] / (x - a).powf(alpha) + alpha * integral)
    })
}

/// `D^α_{a+} f` at the grid nodes strictly inside `(a, T)`; `a` must be a
/// grid node.
pub fn weyl_left(f: &SampledFunction, alpha: f64, a: f64) -> Result<InteriorValues> {
    weyl_left_on(f, alpha, a, f.grid.horizon())
}

/// `D^α_{a+} f` at the grid nodes strictly inside `(a, b)`.
pub fn weyl_left_on(f: &SampledFunction, alpha: f64, a: f64, b: f64) -> Result<InteriorValues> {
    check_order(alpha)?;
    let (lo, hi) = interval(&f.grid, a, b)?;
    let t = f.grid.nodes();
    let values = left_derivative_nodes(t, &f.values, lo, hi, alpha, f.cell_exponent(alpha));
    Ok(InteriorValues { times: t[lo + 1..hi].to_vec(), values })
}

fn right_boundary_nodes(t: &[f64], g: &[f64], lo: usize, hi: usize, alpha: f64, lambda: f64) -> Vec<f64> {
    // Reflect y -> b - y; the right derivative becomes a left one from 0.
    let b = t[hi];
    let gb = g[hi];
    let rt: Vec<f64> = t[lo..=hi].iter().rev().map(|s| b - s).collect();
    let rg: Vec<f64> = g[lo..=hi].iter().rev().map(|v| v - gb).collect();
    let m = hi - lo;
    let mut vals = left_derivative_nodes(&rt, &rg, 0, m, 1.0 - alpha, lambda);
    vals.reverse();
    vals
}

/// `D^{1-α}_{b-} g_{b-}` at the interior nodes of `(0, b)` with
/// `g_{b-} = g - g(b)`, in the real-valued convention (the `(-1)^{1-α}`
/// factor is dropped).
pub fn weyl_right_boundary(g: &SampledFunction, alpha: f64, b: f64) -> Result<InteriorValues> {
    weyl_right_boundary_on(g, alpha, g.grid.nodes()[0], b)
}

/// As [`weyl_right_boundary`] on the subinterval `(a, b)`.
pub fn weyl_right_boundary_on(g: &SampledFunction, alpha: f64, a: f64, b: f64) -> Result<InteriorValues> {
    check_order(alpha)?;
    let (lo, hi) = interval(&g.grid, a, b)?;
    let t = g.grid.nodes();
    let values = right_boundary_nodes(t, &g.values, lo, hi, alpha, g.cell_exponent(1.0 - alpha));
    Ok(InteriorValues { times: t[lo + 1..hi].to_vec(), values })
}

// ---------------------------------------------------------------------------
// Integrals

/// Left-point Riemann–Stieltjes sum `Σ f(t_i) (g(t_{i+1}) - g(t_i))`.
pub fn rs_integral(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("integrand and integrator live on different grids".into()));
    }
    Ok(f.values.windows(2).zip(g.values.windows(2)).map(|(fv, gv)| fv[0] * (gv[1] - gv[0])).sum())
}

/// Generalized Stieltjes integral `∫_0^T f dg`.
///
/// Computed as `-∫ D^α_{0+} f · D^{1-α}_{T-} g_{T-} dx` (real-valued sign
/// convention) by the trapezoid rule on interior nodes, with power-model end
/// cells. `α` must lie in `(1 - λ_g, λ_f)` for the hints (1 when absent).
pub fn frac_integral(f: &SampledFunction, g: &SampledFunction, alpha: f64) -> Result<f64> {
    let t = f.grid.nodes();
    frac_integral_on(f, g, alpha, t[0], f.grid.horizon())
}

/// [`frac_integral`] over `[a, b]`, both grid nodes.
pub fn frac_integral_on(f: &SampledFunction, g: &SampledFunction, alpha: f64, a: f64, b: f64) -> Result<f64> {
    check_order(alpha)?;
    if !f.same_grid(g) {
        return Err(Error::GridMismatch("integrand and integrator live on different grids".into()));
    }
    let lf = f.holder_hint.unwrap_or(1.0);
    let lg = g.holder_hint.unwrap_or(1.0);
    if !(alpha > 1.0 - lg && alpha < lf) {
        return Err(Error::Parameter(format!(
            "order {alpha} outside the admissible window ({}, {lf})",
            1.0 - lg
        )));
    }
    let (lo, hi) = interval(&f.grid, a, b)?;
    let t = f.grid.nodes();
    // The outer products do not care about the singular-cell model; the
    // interpolant keeps both derivatives consistent with the end cells.
    let df = left_derivative_nodes(t, &f.values, lo, hi, alpha, 1.0);
    let dg = right_boundary_nodes(t, &g.values, lo, hi, alpha, 1.0);
    let p: Vec<f64> = df.iter().zip(&dg).map(|(x, y)| x * y).collect();
    let x = &t[lo + 1..hi];
    let mut acc = 0.0;
    for k in 0..p.len() - 1 {
        acc += 0.5 * (p[k] + p[k + 1]) * (x[k + 1] - x[k]);
    }
    // Near a the product behaves like (x-a)^{-α}; near b like (b-x)^{α}.
    acc += p[0] * (x[0] - t[lo]) / (1.0 - alpha);
    acc += p[p.len() - 1] * (t[hi] - x[x.len() - 1]) / (1.0 + alpha);
    Ok(-acc)
}

// ---------------------------------------------------------------------------
// Young bound

/// Inputs of the pathwise estimate for `|∫_s^t c(Y_r) dB^H_r|`.
#[derive(Debug, Clone)]
pub struct YoungBoundInput<'a> {
    /// `c(Y_r)` sampled on the grid.
    pub c_path: &'a SampledFunction,
    /// Lipschitz constant `‖c‖_1` of `c`.
    pub c_lipschitz: f64,
    /// Hölder exponent `λ` of `Y`.
    pub lambda: f64,
    /// `‖Y‖_λ`.
    pub y_holder_norm: f64,
    /// `‖B^H‖_β`.
    pub bh_holder_norm: f64,
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
    pub t: f64,
    /// Overrides [`young_constant`].
    pub constant: Option<f64>,
}

/// Constant of the estimate obtained by bounding both Weyl derivatives
/// directly: `β / (Γ(α)Γ(1-α)(α+β-1)) · max(1, α/(λ-α))`.
pub fn young_constant(alpha: f64, beta: f64, lambda: f64) -> f64 {
    beta / (gamma(alpha) * gamma(1.0 - alpha) * (alpha + beta - 1.0)) * (alpha / (lambda - alpha)).max(1.0)
}

fn interpolate(grid: &TimeGrid, values: &[f64], x: f64) -> f64 {
    let t = grid.nodes();
    let k = t.partition_point(|&s| s <= x).clamp(1, t.len() - 1);
    let (t0, t1) = (t[k - 1], t[k]);
    let w = (x - t0) / (t1 - t0);
    values[k - 1] * (1.0 - w) + values[k] * w
}

/// `K ‖B^H‖_β ( ∫_s^t |c(Y_r)| (r-s)^{-α} (t-r)^{α+β-1} dr
/// + ‖c‖_1 ‖Y‖_λ ∫_s^t (r-s)^{λ-α} (t-r)^{α+β-1} dr )`.
pub fn young_bound(input: &YoungBoundInput<'_>) -> Result<f64> {
    let YoungBoundInput { c_path, c_lipschitz, lambda, y_holder_norm, bh_holder_norm, alpha, beta, s, t, .. } =
        *input;
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::Parameter(format!("α must lie in (0, 1/2), got {alpha}")));
    }
    if !(beta > 0.0 && beta < 1.0 && alpha + beta > 1.0) {
        return Err(Error::Parameter(format!("need β ∈ (0, 1) with α + β > 1, got α = {alpha}, β = {beta}")));
    }
    if !(lambda > alpha && lambda <= 1.0) {
        return Err(Error::Parameter(format!("need λ ∈ (α, 1], got λ = {lambda}")));
    }
    let grid = c_path.grid();
    let (t0, horizon) = (grid.nodes()[0], grid.horizon());
    if !(t0 <= s && s < t && t <= horizon) {
        return Err(Error::Parameter(format!("interval [{s}, {t}] not inside the grid")));
    }
    let k = input.constant.unwrap_or_else(|| young_constant(alpha, beta, lambda));
    let abs_c: Vec<f64> = c_path.values.iter().map(|v| v.abs()).collect();
    let e = alpha + beta - 1.0;
    let tol = Tolerance { abs: 1e-12, rel: 1e-9, max_intervals: 4000 };
    let first = integrate_singular(
        |r| interpolate(grid, &abs_c, r) * (r - s).powf(-alpha) * (t - r).powf(e),
        s,
        t,
        -alpha,
        e,
        tol,
    )?;
    let second = (t - s).powf(lambda + beta) * beta_function(lambda - alpha + 1.0, alpha + beta);
    Ok(k * bh_holder_norm * (first + c_lipschitz * y_holder_norm * second))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::uniform(1.0, n).unwrap())
    }

    #[test]
    fn holder_norm_examples() {
        let f = SampledFunction::from_fn(grid(64), |t| t, None).unwrap();
        assert!((holder_norm(&f, 1.0).unwrap() - 2.0).abs() < 1e-12);
        let c = SampledFunction::from_fn(grid(64), |_| -3.0, None).unwrap();
        assert_eq!(holder_norm(&c, 0.5).unwrap(), 3.0);
        assert!(holder_norm(&c, 0.0).is_err());
        let tiny = SampledFunction::from_fn(grid(1), |t| t, None).unwrap();
        assert!(holder_norm(&tiny, 0.5).is_err());
    }

    #[test]
    fn w_alpha_norm_of_identity() {
        let f = SampledFunction::from_fn(grid(200), |t| t, None).unwrap();
        let v = w_alpha_norm(&f, 0.4).unwrap();
        assert!((v - (1.0 + 1.0 / 0.6)).abs() < 1e-10, "{v}");
        let z = SampledFunction::from_fn(grid(10), |_| 0.0, None).unwrap();
        assert_eq!(w_alpha_norm(&z, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn w_t_norm_of_identity() {
        let g = SampledFunction::from_fn(grid(100), |t| t, None).unwrap();
        let v = w_t_norm(&g, 0.4).unwrap();
        assert!((v - (1.0 + 1.0 / 0.4)).abs() < 1e-10, "{v}");
        let c = SampledFunction::from_fn(grid(10), |_| 2.0, None).unwrap();
        assert_eq!(w_t_norm(&c, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn weyl_of_constant_and_linear() {
        let one = SampledFunction::from_fn(grid(50), |_| 1.0, None).unwrap();
        let d = weyl_left(&one, 0.3, 0.0).unwrap();
        for (x, v) in d.times.iter().zip(&d.values) {
            let exact = x.powf(-0.3) / gamma(0.7);
            assert!((v - exact).abs() < 1e-12 * exact);
        }
        // Riemann–Liouville derivative of x is x^{1-α}/Γ(2-α); exact for the interpolant.
        let lin = SampledFunction::from_fn(grid(50), |t| t, None).unwrap();
        let d = weyl_left(&lin, 0.3, 0.0).unwrap();
        for (x, v) in d.times.iter().zip(&d.values) {
            let exact = x.powf(0.7) / gamma(1.7);
            assert!((v - exact).abs() < 1e-12, "{x}: {v} vs {exact}");
        }
        let r = weyl_right_boundary(&one, 0.4, 1.0).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn frac_integral_reduces_to_stieltjes() {
        let g = grid(400);
        let one = SampledFunction::from_fn(g.clone(), |_| 1.0, None).unwrap();
        let sq = SampledFunction::from_fn(g.clone(), |t| t * t, None).unwrap();
        let v = frac_integral(&one, &sq, 0.4).unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
        let id = SampledFunction::from_fn(g, |t| t, None).unwrap();
        let w = frac_integral(&id, &sq, 0.4).unwrap();
        assert!((w - 2.0 / 3.0).abs() < 1e-3, "{w}");
    }

    #[test]
    fn order_window_is_enforced() {
        let g = grid(20);
        let f = SampledFunction::from_fn(g.clone(), |t| t, Some(0.6)).unwrap();
        let h = SampledFunction::from_fn(g, |t| t, Some(0.6)).unwrap();
        assert!(frac_integral(&f, &h, 0.3).is_err());
        assert!(frac_integral(&f, &h, 0.45).is_ok());
    }

    #[test]
    fn rs_integral_identities() {
        let g = grid(16);
        let one = SampledFunction::from_fn(g.clone(), |_| 1.0, None).unwrap();
        let h = SampledFunction::from_fn(g.clone(), |t| (3.0 * t).sin(), None).unwrap();
        let v = rs_integral(&one, &h).unwrap();
        assert!((v - 3.0f64.sin()).abs() < 1e-15);
        let other = SampledFunction::from_fn(grid(8), |t| t, None).unwrap();
        assert!(matches!(rs_integral(&one, &other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn young_bound_zero_and_homogeneous() {
        let g = grid(64);
        let zero = SampledFunction::from_fn(g.clone(), |_| 0.0, None).unwrap();
        let mut input = YoungBoundInput {
            c_path: &zero,
            c_lipschitz: 0.0,
            lambda: 0.7,
            y_holder_norm: 1.0,
            bh_holder_norm: 1.5,
            alpha: 0.35,
            beta: 0.7,
            s: 0.25,
            t: 0.75,
            constant: None,
        };
        assert_eq!(young_bound(&input).unwrap(), 0.0);
        let c = SampledFunction::from_fn(g, |t| 1.0 + t, None).unwrap();
        input.c_path = &c;
        input.c_lipschitz = 1.0;
        let b1 = young_bound(&input).unwrap();
        input.bh_holder_norm *= 2.0;
        let b2 = young_bound(&input).unwrap();
        assert!(b1 > 0.0);
        assert_eq!(b2, 2.0 * b1);
        input.beta = 0.6;
        assert!(young_bound(&input).is_err());
    }
}
