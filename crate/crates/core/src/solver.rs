//! Left-point Euler scheme for `dX = a(X)dt + b(X)dW + c(X)dB^H`, directly
//! or through the drift-regularizing transform, and a strong-error harness.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::coeffs::CoefficientTriple;
use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::par::{self, Execution};
use crate::paths::{DrivingNoise, FbmGenerator, Hurst};
use crate::stats;
use crate::transform::{build_transform, transformed_coeffs, TransformedCoefficients};

#[derive(Debug, Clone)]
pub struct MixedSdeProblem {
    pub triple: CoefficientTriple,
    pub initial: f64,
    pub horizon: f64,
    pub hurst: Hurst,
}

impl MixedSdeProblem {
    pub fn new(triple: CoefficientTriple, initial: f64, horizon: f64, hurst: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::Parameter(format!("horizon must be positive, got {horizon}")));
        }
        if !initial.is_finite() {
            return Err(Error::Parameter(format!("initial value must be finite, got {initial}")));
        }
        Ok(MixedSdeProblem { triple, initial, horizon, hurst: Hurst::new(hurst)? })
    }

    /// `a = -sign`, `b = 1`, `c(x) = x`, `H = 0.75`, `T = 1`, `X₀ = 0.5`.
    pub fn sign_drift() -> Self {
        MixedSdeProblem::new(CoefficientTriple::sign_drift(), 0.5, 1.0, 0.75).expect("valid")
    }

    pub fn grid(&self, steps: usize) -> Result<Arc<TimeGrid>> {
        Ok(Arc::new(TimeGrid::uniform(self.horizon, steps)?))
    }

    /// Independent driving noise on `grid` with the default fBm method.
    pub fn noise(&self, grid: Arc<TimeGrid>, seed: u64) -> Result<DrivingNoise> {
        Ok(DrivingNoise::new(FbmGenerator::auto(grid, self.hurst)?, seed))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Direct,
    Transformed,
}

#[derive(Debug, Clone)]
pub struct PathSolution {
    pub x: SampledPath,
    pub w: SampledPath,
    pub bh: SampledPath,
    /// `Z = G(X)` for the transformed scheme.
    pub z: Option<SampledPath>,
}

impl PathSolution {
    pub fn grid(&self) -> &Arc<TimeGrid> {
        self.x.grid()
    }

    pub fn terminal(&self) -> f64 {
        self.x.terminal()
    }
}

fn check_noise(w: &SampledPath, bh: &SampledPath, horizon: f64) -> Result<()> {
    if !w.same_grid(bh) {
        return Err(Error::GridMismatch("W and B^H live on different grids".into()));
    }
    if (w.grid().horizon() - horizon).abs() > 1e-12 * horizon {
        return Err(Error::GridMismatch(format!(
            "noise horizon {} differs from problem horizon {horizon}",
            w.grid().horizon()
        )));
    }
    Ok(())
}

/// Left-point Euler with coefficients `(a, b, c)` returned by `coeffs`.
fn euler_core(
    x0: f64,
    w: &SampledPath,
    bh: &SampledPath,
    coeffs: impl Fn(f64) -> (f64, f64, f64),
) -> Result<Vec<f64>> {
    let grid = w.grid();
    let (wv, bv) = (w.values(), bh.values());
    let mut x = Vec::with_capacity(grid.steps() + 1);
    x.push(x0);
    let mut cur = x0;
    for k in 0..grid.steps() {
        let (a, b, c) = coeffs(cur);
        cur += a * grid.dt(k) + b * (wv[k + 1] - wv[k]) + c * (bv[k + 1] - bv[k]);
        if !cur.is_finite() {
            return Err(Error::BlowUp { step: k + 1, time: grid.nodes()[k + 1] });
        }
        x.push(cur);
    }
    Ok(x)
}

/// Direct left-point Euler on the original coefficients.
pub fn euler_mixed(problem: &MixedSdeProblem, w: &SampledPath, bh: &SampledPath) -> Result<PathSolution> {
    check_noise(w, bh, problem.horizon)?;
    let t = &problem.triple;
    let x = euler_core(problem.initial, w, bh, |x| (t.a.eval(x), t.b.eval(x), t.c.eval(x)))?;
    Ok(PathSolution { x: SampledPath::new(w.grid().clone(), x)?, w: w.clone(), bh: bh.clone(), z: None })
}

/// Euler on the transformed equation for `Z = G(X)`, mapped back by `G^{-1}`.
#[derive(Debug, Clone)]
pub struct TransformedSolver {
    coeffs: TransformedCoefficients,
}

impl TransformedSolver {
    pub fn new(problem: &MixedSdeProblem) -> Result<Self> {
        let g = build_transform(&problem.triple)?;
        Ok(TransformedSolver { coeffs: transformed_coeffs(&g, &problem.triple) })
    }

    pub fn coefficients(&self) -> &TransformedCoefficients {
        &self.coeffs
    }

    pub fn solve(&self, problem: &MixedSdeProblem, w: &SampledPath, bh: &SampledPath) -> Result<PathSolution> {
        check_noise(w, bh, problem.horizon)?;
        let g = &self.coeffs.g;
        let z = euler_core(g.g(problem.initial), w, bh, |z| {
            let v = self.coeffs.eval(z);
            (v.a, v.b, v.c)
        })?;
        let x: Vec<f64> = z.iter().map(|&z| g.inverse(z)).collect();
        let grid = w.grid().clone();
        Ok(PathSolution {
            x: SampledPath::new(grid.clone(), x)?,
            w: w.clone(),
            bh: bh.clone(),
            z: Some(SampledPath::new(grid, z)?),
        })
    }
}

pub fn solve_transformed(problem: &MixedSdeProblem, w: &SampledPath, bh: &SampledPath) -> Result<PathSolution> {
    TransformedSolver::new(problem)?.solve(problem, w, bh)
}

/// A solver prepared once and reused across paths.
#[derive(Debug, Clone)]
pub enum Solver {
    Direct,
    Transformed(Box<TransformedSolver>),
}

impl Solver {
    pub fn new(problem: &MixedSdeProblem, scheme: Scheme) -> Result<Self> {
        Ok(match scheme {
            Scheme::Direct => Solver::Direct,
            Scheme::Transformed => Solver::Transformed(Box::new(TransformedSolver::new(problem)?)),
        })
    }

    pub fn solve(&self, problem: &MixedSdeProblem, w: &SampledPath, bh: &SampledPath) -> Result<PathSolution> {
        match self {
            Solver::Direct => euler_mixed(problem, w, bh),
            Solver::Transformed(s) => s.solve(problem, w, bh),
        }
    }
}

/// `paths` independent solutions on `grid`, in path order.
pub fn simulate(
    problem: &MixedSdeProblem,
    scheme: Scheme,
    grid: Arc<TimeGrid>,
    paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<PathSolution>> {
    let solver = Solver::new(problem, scheme)?;
    let noise = problem.noise(grid, seed)?;
    par::try_map_indexed(paths, exec, |p| {
        let (w, bh) = noise.sample(p as u64);
        solver.solve(problem, &w, &bh)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongErrorReport {
    pub scheme: Scheme,
    pub reference_steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub steps: Vec<usize>,
    pub mesh: Vec<f64>,
    pub errors: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log mesh`.
    pub slope: f64,
}

fn check_meshes(coarse: &[usize], n_ref: usize) -> Result<()> {
    let max = coarse.iter().copied().max().ok_or_else(|| Error::Parameter("no coarse meshes".into()))?;
    if coarse.iter().any(|&n| n == 0 || n_ref % n != 0) || n_ref < 4 * max {
        return Err(Error::GridMismatch(format!(
            "reference mesh {n_ref} must be a multiple of every coarse mesh and at least 4 x {max}"
        )));
    }
    Ok(())
}

/// One value per path computed from noise coupled across meshes.
///
/// The fine noise is sampled once per path on `n_fine` steps and restricted
/// to each coarse grid, so coarse increments are sums of fine increments.
/// `per_path` receives the restricted pairs (one per coarse mesh) and the
/// fine pair.
pub fn coupled_paths<T, F>(
    problem: &MixedSdeProblem,
    coarse: &[usize],
    n_fine: usize,
    paths: usize,
    seed: u64,
    exec: Execution,
    per_path: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[(SampledPath, SampledPath)], &SampledPath, &SampledPath) -> Result<T> + Sync + Send,
{
    if coarse.iter().any(|&n| n == 0 || n_fine % n != 0) {
        return Err(Error::GridMismatch(format!("every mesh must divide {n_fine}")));
    }
    let fine = problem.grid(n_fine)?;
    let grids = coarse
        .iter()
        .map(|&n| fine.coarsen(n_fine / n).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let noise = problem.noise(fine, seed)?;
    par::try_map_indexed(paths, exec, |p| {
        let (w, bh) = noise.sample(p as u64);
        let restricted = grids
            .iter()
            .map(|g| Ok((w.restrict(g)?, bh.restrict(g)?)))
            .collect::<Result<Vec<_>>>()?;
        per_path(&restricted, &w, &bh)
    })
}

/// [`coupled_paths`] with one number per mesh, transposed to one column
/// per mesh in path order.
pub fn coupled_statistic<F>(
    problem: &MixedSdeProblem,
    coarse: &[usize],
    n_fine: usize,
    paths: usize,
    seed: u64,
    exec: Execution,
    per_path: F,
) -> Result<Vec<Vec<f64>>>
where
    F: Fn(&[(SampledPath, SampledPath)], &SampledPath, &SampledPath) -> Result<Vec<f64>> + Sync + Send,
{
    let rows = coupled_paths(problem, coarse, n_fine, paths, seed, exec, per_path)?;
    Ok((0..coarse.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect())
}

/// Mean terminal error of coarse solutions against a self-refined reference.
pub fn strong_error(
    problem: &MixedSdeProblem,
    scheme: Scheme,
    coarse: &[usize],
    n_ref: usize,
    paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<StrongErrorReport> {
    check_meshes(coarse, n_ref)?;
    let solver = Solver::new(problem, scheme)?;
    let cols = coupled_statistic(problem, coarse, n_ref, paths, seed, exec, |noise, w, bh| {
        let reference = solver.solve(problem, w, bh)?.terminal();
        noise
            .iter()
            .map(|(w, bh)| Ok((solver.solve(problem, w, bh)?.terminal() - reference).abs()))
            .collect()
    })?;
    let errors: Vec<f64> = cols.iter().map(|c| stats::mean(c)).collect();
    let std_errors = cols.iter().map(|c| stats::std_error(c)).collect();
    let mesh: Vec<f64> = coarse.iter().map(|&n| problem.horizon / n as f64).collect();
    Ok(StrongErrorReport {
        scheme,
        reference_steps: n_ref,
        paths,
        seed,
        steps: coarse.to_vec(),
        slope: stats::log_log_slope(&mesh, &errors),
        mesh,
        errors,
        std_errors,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeGapReport {
    pub paths: usize,
    pub seed: u64,
    pub steps: Vec<usize>,
    /// Mean `|X^direct_T - X^transformed_T|` per mesh.
    pub gaps: Vec<f64>,
    pub std_errors: Vec<f64>,
}

/// Terminal gap between the direct and transformed schemes on identical noise.
pub fn scheme_gap(
    problem: &MixedSdeProblem,
    steps: &[usize],
    paths: usize,
    seed: u64,
    exec: Execution,
) -> Result<SchemeGapReport> {
    let n_fine = steps.iter().copied().max().ok_or_else(|| Error::Parameter("no meshes".into()))?;
    let transformed = TransformedSolver::new(problem)?;
    let cols = coupled_statistic(problem, steps, n_fine, paths, seed, exec, |noise, _, _| {
        noise
            .iter()
            .map(|(w, bh)| {
                let d = euler_mixed(problem, w, bh)?.terminal();
                let t = transformed.solve(problem, w, bh)?.terminal();
                Ok((d - t).abs())
            })
            .collect()
    })?;
    Ok(SchemeGapReport {
        paths,
        seed,
        steps: steps.to_vec(),
        gaps: cols.iter().map(|c| stats::mean(c)).collect(),
        std_errors: cols.iter().map(|c| stats::std_error(c)).collect(),
    })
}
