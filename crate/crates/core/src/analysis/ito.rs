//! Itô-formula residuals for `f(X)` along Euler paths.
//!
//! Only left-point sums are used, so for `f(x) = x` the residual telescopes
//! to zero against the Euler recursion itself.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeffs::{Evaluator, PiecewiseLipschitzFn};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::solver::{coupled_paths, MixedSdeProblem, PathSolution, Solver, Scheme};
use crate::stats;
use crate::transform::DIFFUSION_FLOOR;

/// `f` with `f'` and `f''`; `f''` may jump at `second_breaks`, where it
/// takes the midpoint value.
#[derive(Clone)]
pub struct ItoFunction {
    label: String,
    f: Evaluator,
    first: Evaluator,
    second: Evaluator,
    second_breaks: Vec<f64>,
}

impl std::fmt::Debug for ItoFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ItoFunction")
            .field("label", &self.label)
            .field("second_breaks", &self.second_breaks)
            .finish()
    }
}

impl ItoFunction {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second_breaks: Vec<f64>,
    ) -> Self {
        ItoFunction {
            label: label.into(),
            f: Arc::new(f),
            first: Arc::new(first),
            second: Arc::new(second),
            second_breaks,
        }
    }

    /// From a piecewise function carrying at least its first derivative.
    pub fn from_piecewise(f: &PiecewiseLipschitzFn) -> Result<Self> {
        let d1 = f
            .derivative()
            .cloned()
            .ok_or_else(|| Error::Missing(format!("{} has no derivative", f.label())))?;
        let mut breaks = d1.breakpoints().to_vec();
        let second: Evaluator = match d1.derivative().cloned() {
            Some(d2) => {
                breaks.extend_from_slice(d2.breakpoints());
                Arc::new(move |x| d2.eval_midpoint(x))
            }
            None => {
                let d1 = d1.clone();
                Arc::new(move |x| d1.eval_derivative(x))
            }
        };
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let (fv, d1v) = (f.clone(), d1);
        Ok(ItoFunction {
            label: f.label().to_string(),
            f: Arc::new(move |x| fv.eval(x)),
            first: Arc::new(move |x| d1v.eval(x)),
            second,
            second_breaks: breaks,
        })
    }

    pub fn identity() -> Self {
        ItoFunction::new("x", |x| x, |_| 1.0, |_| 0.0, Vec::new())
    }

    pub fn square() -> Self {
        ItoFunction::new("x^2", |x| x * x, |x| 2.0 * x, |_| 2.0, Vec::new())
    }

    /// `x|x|/2` with `f'' = sign`, extended by 0 at the origin.
    pub fn signed_half_square() -> Self {
        ItoFunction::new(
            "x|x|/2",
            |x| 0.5 * x * x.abs(),
            f64::abs,
            |x| if x == 0.0 { 0.0 } else { x.signum() },
            vec![0.0],
        )
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn second_breaks(&self) -> &[f64] {
        &self.second_breaks
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn first(&self, x: f64) -> f64 {
        (self.first)(x)
    }

    pub fn second(&self, x: f64) -> f64 {
        (self.second)(x)
    }

    pub fn add(&self, other: &ItoFunction) -> ItoFunction {
        let (a, b) = (self.clone(), other.clone());
        let (a1, b1) = (self.clone(), other.clone());
        let (a2, b2) = (self.clone(), other.clone());
        let mut breaks = [self.second_breaks.clone(), other.second_breaks.clone()].concat();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        ItoFunction::new(
            format!("{} + {}", self.label, other.label),
            move |x| a.value(x) + b.value(x),
            move |x| a1.first(x) + b1.first(x),
            move |x| a2.second(x) + b2.second(x),
            breaks,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItoTerms {
    pub initial: f64,
    pub terminal: f64,
    /// `Σ f'(X_k) b(X_k) ΔW_k`.
    pub brownian: f64,
    /// `Σ f'(X_k) c(X_k) ΔB^H_k`.
    pub fractional: f64,
    /// `Σ (a f' + b² f''/2)(X_k) Δt_k`.
    pub lebesgue: f64,
    pub residual: f64,
}

/// All terms of the Itô expansion of `f(X_T)` along `solution`.
pub fn ito_terms(problem: &MixedSdeProblem, solution: &PathSolution, f: &ItoFunction) -> Result<ItoTerms> {
    let (x, w, bh) = (solution.x.values(), solution.w.values(), solution.bh.values());
    if !(solution.x.same_grid(&solution.w) && solution.x.same_grid(&solution.bh)) {
        return Err(Error::GridMismatch("solution and driving paths differ in grid".into()));
    }
    let grid = solution.grid();
    let t = &problem.triple;
    let (mut brownian, mut fractional, mut lebesgue) = (0.0, 0.0, 0.0);
    for k in 0..grid.steps() {
        let xk = x[k];
        let (fp, fpp) = (f.first(xk), f.second(xk));
        let b = t.b.eval(xk);
        brownian += fp * b * (w[k + 1] - w[k]);
        fractional += fp * t.c.eval(xk) * (bh[k + 1] - bh[k]);
        lebesgue += (t.a.eval(xk) * fp + 0.5 * b * b * fpp) * grid.dt(k);
    }
    let initial = f.value(x[0]);
    let terminal = f.value(x[grid.steps()]);
    Ok(ItoTerms {
        initial,
        terminal,
        brownian,
        fractional,
        lebesgue,
        residual: terminal - initial - brownian - fractional - lebesgue,
    })
}

pub fn ito_residual(problem: &MixedSdeProblem, solution: &PathSolution, f: &ItoFunction) -> Result<f64> {
    Ok(ito_terms(problem, solution, f)?.residual)
}

/// Refuses `f` if the diffusion vanishes where `f''` jumps.
pub fn check_generalized(problem: &MixedSdeProblem, f: &ItoFunction) -> Result<()> {
    for &xi in f.second_breaks() {
        let b = problem.triple.b.eval_midpoint(xi);
        if !(b.abs() > DIFFUSION_FLOOR) {
            return Err(Error::Hypothesis(format!(
                "diffusion vanishes at {xi} (b = {b}), where the second derivative of {} jumps",
                f.label()
            )));
        }
    }
    Ok(())
}

pub fn generalized_ito_residual(problem: &MixedSdeProblem, solution: &PathSolution, f: &ItoFunction) -> Result<f64> {
    check_generalized(problem, f)?;
    ito_residual(problem, solution, f)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItoReport {
    pub function: String,
    pub generalized: bool,
    pub scheme: Scheme,
    pub paths: usize,
    pub seed: u64,
    pub steps: Vec<usize>,
    pub mean_abs_residual: Vec<f64>,
    pub max_abs_residual: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub mean_brownian: Vec<f64>,
    pub mean_fractional: Vec<f64>,
    pub mean_lebesgue: Vec<f64>,
    /// `E|f(X_T)|` per mesh.
    pub mean_abs_terminal: Vec<f64>,
    pub strictly_decreasing: bool,
}

/// Monte Carlo residual statistics on noise coupled across `steps`.
pub fn ito_check(
    problem: &MixedSdeProblem,
    scheme: Scheme,
    f: &ItoFunction,
    steps: &[usize],
    paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<ItoReport> {
    let generalized = !f.second_breaks().is_empty();
    if generalized {
        check_generalized(problem, f)?;
    }
    let n_fine = steps.iter().copied().max().ok_or_else(|| Error::Parameter("no meshes".into()))?;
    let solver = Solver::new(problem, scheme)?;
    let rows = coupled_paths(problem, steps, n_fine, paths, seed, exec, |noise, _, _| {
        noise
            .iter()
            .map(|(w, bh)| ito_terms(problem, &solver.solve(problem, w, bh)?, f))
            .collect::<Result<Vec<_>>>()
    })?;
    let column = |j: usize, g: &dyn Fn(&ItoTerms) -> f64| rows.iter().map(|r| g(&r[j])).collect::<Vec<_>>();
    let mut report = ItoReport {
        function: f.label().to_string(),
        generalized,
        scheme,
        paths,
        seed,
        steps: steps.to_vec(),
        mean_abs_residual: Vec::new(),
        max_abs_residual: Vec::new(),
        std_errors: Vec::new(),
        mean_brownian: Vec::new(),
        mean_fractional: Vec::new(),
        mean_lebesgue: Vec::new(),
        mean_abs_terminal: Vec::new(),
        strictly_decreasing: false,
    };
    for j in 0..steps.len() {
        let abs = column(j, &|t| t.residual.abs());
        report.mean_abs_residual.push(stats::mean(&abs));
        report.max_abs_residual.push(abs.iter().fold(0.0, |m, &v| f64::max(m, v)));
        report.std_errors.push(stats::std_error(&abs));
        report.mean_brownian.push(stats::mean(&column(j, &|t| t.brownian)));
        report.mean_fractional.push(stats::mean(&column(j, &|t| t.fractional)));
        report.mean_lebesgue.push(stats::mean(&column(j, &|t| t.lebesgue)));
        report.mean_abs_terminal.push(stats::mean(&column(j, &|t| t.terminal.abs())));
    }
    report.strictly_decreasing = stats::strictly_decreasing(&report.mean_abs_residual);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{constant, linear, CoefficientTriple};
    use crate::solver::euler_mixed;

    fn solution(problem: &MixedSdeProblem, n: usize, seed: u64) -> PathSolution {
        let (w, bh) = problem.noise(problem.grid(n).unwrap(), seed).unwrap().sample(0);
        euler_mixed(problem, &w, &bh).unwrap()
    }

    #[test]
    fn identity_residual_vanishes() {
        let p = MixedSdeProblem::sign_drift();
        let s = solution(&p, 512, 1);
        assert!(ito_residual(&p, &s, &ItoFunction::identity()).unwrap().abs() < 1e-12);
    }

    #[test]
    fn square_residual_is_quadratic_variation_gap() {
        let t = CoefficientTriple { a: constant(0.0), b: constant(1.0), c: constant(0.0) };
        let p = MixedSdeProblem::new(t, 0.0, 1.0, 0.75).unwrap();
        let s = solution(&p, 1024, 2);
        let qv: f64 = s.w.increments().iter().map(|d| d * d).sum();
        let r = ito_residual(&p, &s, &ItoFunction::square()).unwrap();
        assert!((r - (qv - 1.0)).abs() < 1e-12, "{r} {qv}");
    }

    #[test]
    fn residual_is_linear_in_f() {
        let p = MixedSdeProblem::sign_drift();
        let s = solution(&p, 256, 3);
        let (f, g) = (ItoFunction::square(), ItoFunction::signed_half_square());
        let sum = ito_residual(&p, &s, &f.add(&g)).unwrap();
        let parts = ito_residual(&p, &s, &f).unwrap() + ito_residual(&p, &s, &g).unwrap();
        assert!((sum - parts).abs() < 1e-10);
    }

    #[test]
    fn piecewise_matches_builtin() {
        let p = MixedSdeProblem::sign_drift();
        let s = solution(&p, 256, 4);
        let f = ItoFunction::from_piecewise(&crate::coeffs::signed_half_square()).unwrap();
        let a = generalized_ito_residual(&p, &s, &f).unwrap();
        let b = generalized_ito_residual(&p, &s, &ItoFunction::signed_half_square()).unwrap();
        assert_eq!(a, b);
        let smooth = ItoFunction::from_piecewise(&crate::coeffs::polynomial(vec![0.0, 0.0, 1.0])).unwrap();
        let c = ito_residual(&p, &s, &smooth).unwrap();
        assert!((c - ito_residual(&p, &s, &ItoFunction::square()).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn degenerate_diffusion_is_refused() {
        let t = CoefficientTriple { a: constant(0.0), b: linear(1.0, 0.0), c: constant(0.0) };
        let p = MixedSdeProblem::new(t, 0.0, 1.0, 0.75).unwrap();
        let err = ito_check(&p, Scheme::Direct, &ItoFunction::signed_half_square(), &[16], 2, 0, Execution::Auto);
        assert!(matches!(err, Err(Error::Hypothesis(_))));
    }
}
