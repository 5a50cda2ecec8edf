//! One function per subcommand; each writes its tables and reports.

use mixfrac::analysis::{
    conditional_moments, density_diagnostics, ito_check, y_epsilon_rate, ConditionalGaussReport, ItoFunction,
};
use mixfrac::coeffs::validate_assumptions;
use mixfrac::par::{self, Execution};
use mixfrac::solver::{strong_error, MixedSdeProblem, Scheme, Solver};
use mixfrac::stats::{self, Moments};
use mixfrac::transform::{build_transform, transformed_coeffs};
use serde::Serialize;

use crate::config::{ExperimentConfig, TestFunctionName};
use crate::output::{num, Output};
use crate::CliError;

/// Terminal values of every path, full paths for the first `keep`.
fn terminal_values(
    config: &ExperimentConfig,
    problem: &MixedSdeProblem,
    keep: usize,
) -> Result<(Vec<f64>, Vec<Vec<[f64; 4]>>), CliError> {
    let solver = Solver::new(problem, config.scheme)?;
    let noise = problem.noise(problem.grid(config.steps)?, config.seed)?;
    let rows = par::try_map_indexed(config.paths, Execution::Auto, |p| {
        let (w, bh) = noise.sample(p as u64);
        let s = solver.solve(problem, &w, &bh)?;
        let full = (p < keep).then(|| {
            let t = s.grid().nodes();
            (0..t.len()).map(|k| [t[k], s.x.values()[k], s.w.values()[k], s.bh.values()[k]]).collect()
        });
        Ok((s.terminal(), full))
    })?;
    let terminal = rows.iter().map(|r| r.0).collect();
    let full = rows.into_iter().filter_map(|r| r.1).collect();
    Ok((terminal, full))
}

#[derive(Serialize)]
struct SimulateSummary {
    scheme: Scheme,
    paths: usize,
    steps: usize,
    seed: u64,
    terminal: Moments,
    terminal_min: f64,
    terminal_max: f64,
}

pub fn simulate(config: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let problem = config.problem.build()?;
    let keep = config.simulate.write_paths.min(config.paths);
    let (terminal, full) = terminal_values(config, &problem, keep)?;
    let rows = full.iter().enumerate().flat_map(|(p, path)| {
        path.iter().map(move |r| vec![p.to_string(), num(r[0]), num(r[1]), num(r[2]), num(r[3])])
    });
    out.csv("paths.csv", &["path_id", "t", "X", "W", "BH"], rows)?;
    out.json(
        "simulate.json",
        &SimulateSummary {
            scheme: config.scheme,
            paths: config.paths,
            steps: config.steps,
            seed: config.seed,
            terminal: stats::moments(&terminal),
            terminal_min: terminal.iter().copied().fold(f64::INFINITY, f64::min),
            terminal_max: terminal.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        },
    )
}

pub fn convergence(config: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let problem = config.problem.build()?;
    let c = &config.convergence;
    let finest = c.steps.iter().copied().max().unwrap_or(0);
    let n_ref = c.reference_steps.unwrap_or(16 * finest);
    let r = strong_error(&problem, config.scheme, &c.steps, n_ref, config.paths, config.seed, Execution::Auto)?;
    let rows = (0..r.steps.len())
        .map(|i| vec![r.steps[i].to_string(), num(r.mesh[i]), num(r.errors[i]), num(r.std_errors[i])]);
    out.csv("convergence.csv", &["steps", "mesh", "error", "std_error"], rows)?;
    out.json("convergence.json", &r)
}

pub fn ito_function(name: TestFunctionName) -> ItoFunction {
    match name {
        TestFunctionName::Identity => ItoFunction::identity(),
        TestFunctionName::Square => ItoFunction::square(),
        TestFunctionName::SignedHalfSquare => ItoFunction::signed_half_square(),
    }
}

pub fn ito(config: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let problem = config.problem.build()?;
    let f = ito_function(config.ito.function);
    let r = ito_check(&problem, config.scheme, &f, &config.ito.steps, config.paths, config.seed, Execution::Auto)?;
    let rows = (0..r.steps.len()).map(|i| {
        vec![
            r.steps[i].to_string(),
            num(r.mean_abs_residual[i]),
            num(r.max_abs_residual[i]),
            num(r.std_errors[i]),
        ]
    });
    out.csv("ito.csv", &["steps", "mean_abs_residual", "max_abs_residual", "std_error"], rows)?;
    out.json("ito.json", &r)
}

#[derive(Serialize)]
struct DensityOutput<'a> {
    scheme: Scheme,
    steps: usize,
    seed: u64,
    #[serde(flatten)]
    report: &'a mixfrac::analysis::DensityReport,
}

pub fn density(config: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let problem = config.problem.build()?;
    let (terminal, _) = terminal_values(config, &problem, 0)?;
    let r = density_diagnostics(&terminal, &problem.triple.b, &config.density)?;
    let h = &r.histogram;
    let rows = (0..h.masses.len()).map(|i| vec![num(h.edges[i]), num(h.edges[i + 1]), num(h.masses[i])]);
    out.csv("histogram.csv", &["left", "right", "mass"], rows)?;
    out.json("density.json", &DensityOutput { scheme: config.scheme, steps: config.steps, seed: config.seed, report: &r })
}

pub fn gauss(config: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let problem = config.problem.build()?;
    let g = &config.gauss;
    let moments = g
        .eps
        .iter()
        .map(|&e| conditional_moments(&problem, e, g.moment_steps, config.paths, config.seed, Execution::Auto))
        .collect::<mixfrac::Result<Vec<_>>>()?;
    let rate = if g.rate_eps.is_empty() {
        None
    } else {
        Some(y_epsilon_rate(
            &problem,
            config.scheme,
            &g.rate_eps,
            g.reference_steps,
            config.paths,
            config.seed,
            g.beta,
            g.beta_prime,
            Execution::Auto,
        )?)
    };
    let rows = moments.iter().map(|m| {
        vec![num(m.eps), num(m.mean), num(m.variance), num(m.skewness), num(m.excess_kurtosis), num(m.variance_ratio)]
    });
    out.csv("moments.csv", &["eps", "mean", "variance", "skewness", "excess_kurtosis", "variance_ratio"], rows)?;
    if let Some(r) = &rate {
        let rows = (0..r.eps.len()).map(|i| vec![num(r.eps[i]), num(r.errors[i]), num(r.std_errors[i])]);
        out.csv("rate.csv", &["eps", "error", "std_error"], rows)?;
    }
    out.json("gauss.json", &ConditionalGaussReport { moments, rate })
}

#[derive(Serialize)]
struct TransformSummary {
    breakpoints: Vec<f64>,
    alphas: Vec<f64>,
    radius: f64,
    derivative_min: f64,
    derivative_max: f64,
    roundtrip_max_error: f64,
    /// `|ã(ξ + 1e-6) - ã(ξ - 1e-6)|` per breakpoint.
    drift_gaps: Vec<f64>,
    /// Gap between the extrapolated one-sided limits of `ã` per breakpoint.
    drift_limit_gaps: Vec<f64>,
}

pub fn transform(config: &ExperimentConfig, out: &mut Output) -> Result<(), CliError> {
    let problem = config.problem.build()?;
    let g = build_transform(&problem.triple)?;
    let tc = transformed_coeffs(&g, &problem.triple);
    let t = &config.transform;
    if !(t.lo < t.hi) || t.points < 2 {
        return Err(CliError::Core(mixfrac::Error::Config("transform needs lo < hi and points >= 2".into())));
    }
    let xs: Vec<f64> = (0..t.points).map(|k| t.lo + (t.hi - t.lo) * k as f64 / (t.points - 1) as f64).collect();
    let rows = xs.iter().map(|&x| {
        let v = tc.eval(x);
        vec![
            num(x),
            num(g.g(x)),
            num(g.g_prime(x)),
            num(g.g_second(x)),
            num(v.a),
            num(v.b),
            num(v.c),
            num(tc.c_tilde_prime(x)),
        ]
    });
    out.csv("transform.csv", &["x", "G", "Gp", "Gpp", "a_t", "b_t", "c_t", "cp_t"], rows)?;
    let (derivative_min, derivative_max) = g.derivative_range(t.lo, t.hi, 10 * t.points);
    let summary = TransformSummary {
        breakpoints: g.breakpoints().to_vec(),
        alphas: g.alphas().to_vec(),
        radius: g.radius(),
        derivative_min,
        derivative_max,
        roundtrip_max_error: xs.iter().map(|&x| (g.g(g.inverse(x)) - x).abs()).fold(0.0, f64::max),
        drift_gaps: g.breakpoints().iter().map(|&xi| (tc.a_tilde(xi + 1e-6) - tc.a_tilde(xi - 1e-6)).abs()).collect(),
        drift_limit_gaps: g
            .breakpoints()
            .iter()
            .map(|&xi| {
                let (l, r) = tc.drift_one_sided_limits(xi, 1e-6);
                (r - l).abs()
            })
            .collect(),
    };
    out.json("transform.json", &summary)
}

/// Writes the report; returns the failed clause names.
pub fn validate(config: &ExperimentConfig, out: &mut Output) -> Result<Vec<String>, CliError> {
    let triple = config.problem.triple().build()?;
    let r = validate_assumptions(&triple, &config.probe)?;
    out.json("validate.json", &r)?;
    let mut failed = Vec::new();
    for (name, clause) in [("A1", &r.a1), ("A2", &r.a2), ("A3", &r.a3)] {
        if !clause.passed {
            failed.extend(clause.notes.iter().map(|n| format!("{name}: {n}")));
        }
    }
    Ok(failed)
}
