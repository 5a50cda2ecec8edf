//! Experiment configuration: a TOML file resolved against defaults and
//! command-line overrides.

use std::path::PathBuf;

use mixfrac::analysis::DensityConfig;
use mixfrac::coeffs::{CoefficientSpec, Probe, TripleSpec};
use mixfrac::solver::{MixedSdeProblem, Scheme};
use mixfrac::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub c: CoefficientSpec,
    pub initial: f64,
    pub horizon: f64,
    pub hurst: f64,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        let t = TripleSpec::sign_drift();
        ProblemConfig { a: t.a, b: t.b, c: t.c, initial: 0.5, horizon: 1.0, hurst: 0.75 }
    }
}

impl ProblemConfig {
    pub fn triple(&self) -> TripleSpec {
        TripleSpec { a: self.a.clone(), b: self.b.clone(), c: self.c.clone() }
    }

    pub fn build(&self) -> Result<MixedSdeProblem> {
        MixedSdeProblem::new(self.triple().build()?, self.initial, self.horizon, self.hurst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Paths written to the CSV; all `paths` enter the summary.
    pub write_paths: usize,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { write_paths: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub steps: Vec<usize>,
    /// Defaults to 16 times the finest mesh.
    pub reference_steps: Option<usize>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { steps: vec![32, 64, 128, 256], reference_steps: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunctionName {
    Identity,
    Square,
    SignedHalfSquare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ItoConfig {
    pub function: TestFunctionName,
    pub steps: Vec<usize>,
}

impl Default for ItoConfig {
    fn default() -> Self {
        ItoConfig { function: TestFunctionName::Square, steps: vec![256, 512, 1024, 2048, 4096] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussConfig {
    /// Windows for the conditional moment checks.
    pub eps: Vec<f64>,
    pub moment_steps: usize,
    /// Decreasing windows for the closure-error rate.
    pub rate_eps: Vec<f64>,
    pub reference_steps: usize,
    pub beta: f64,
    pub beta_prime: f64,
}

impl Default for GaussConfig {
    fn default() -> Self {
        GaussConfig {
            eps: vec![0.1],
            moment_steps: 200,
            rate_eps: vec![0.125, 0.0625, 0.03125, 0.015625],
            reference_steps: 1024,
            beta: 0.7,
            beta_prime: 0.45,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformConfig {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig { lo: -1.0, hi: 1.0, points: 401 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub paths: usize,
    pub steps: usize,
    pub scheme: Scheme,
    /// Where outputs go; not part of the experiment, so not serialized.
    #[serde(skip_serializing)]
    pub out: PathBuf,
    pub problem: ProblemConfig,
    pub simulate: SimulateConfig,
    pub convergence: ConvergenceConfig,
    pub ito: ItoConfig,
    pub density: DensityConfig,
    pub gauss: GaussConfig,
    pub transform: TransformConfig,
    pub probe: Probe,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            paths: 1000,
            steps: 256,
            scheme: Scheme::Transformed,
            out: PathBuf::from("out"),
            problem: ProblemConfig::default(),
            simulate: SimulateConfig::default(),
            convergence: ConvergenceConfig::default(),
            ito: ItoConfig::default(),
            density: DensityConfig::default(),
            gauss: GaussConfig::default(),
            transform: TransformConfig::default(),
            probe: Probe::default(),
        }
    }
}

/// Values given on the command line take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub hurst: Option<f64>,
    pub out: Option<PathBuf>,
    pub scheme: Option<Scheme>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: Option<&std::path::Path>, overrides: &Overrides) -> Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                ExperimentConfig::parse(&text)?
            }
            None => ExperimentConfig::default(),
        };
        let o = overrides.clone();
        config.seed = o.seed.unwrap_or(config.seed);
        config.paths = o.paths.unwrap_or(config.paths);
        config.steps = o.steps.unwrap_or(config.steps);
        config.problem.hurst = o.hurst.unwrap_or(config.problem.hurst);
        config.out = o.out.unwrap_or(config.out);
        config.scheme = o.scheme.unwrap_or(config.scheme);
        config.check()?;
        Ok(config)
    }

    pub fn check(&self) -> Result<()> {
        if self.paths == 0 || self.steps == 0 {
            return Err(Error::Config("paths and steps must be at least 1".into()));
        }
        self.problem.build().map(|_| ())
    }

    /// Canonical serialization: struct field order, shortest float form.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn coefficients_parse() {
        let c = ExperimentConfig::parse(
            "seed = 3\n[problem]\nhurst = 0.6\na = { kind = \"sin\", amplitude = 1.0, frequency = 2.0, phase = 0.0 }\n",
        )
        .unwrap();
        assert_eq!(c.seed, 3);
        assert!(c.problem.build().is_ok());
        assert!(ExperimentConfig::parse("[problem]\na = { kind = \"nope\" }\n").is_err());
        assert!(ExperimentConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn overrides_apply_and_validate() {
        let o = Overrides { hurst: Some(0.4), ..Overrides::default() };
        assert!(ExperimentConfig::load(None, &o).is_err());
        let o = Overrides { seed: Some(9), paths: Some(5), ..Overrides::default() };
        let c = ExperimentConfig::load(None, &o).unwrap();
        assert_eq!((c.seed, c.paths), (9, 5));
    }
}
