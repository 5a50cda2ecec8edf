//! No-atom diagnostics for terminal samples: histograms, the capped
//! distance `h_δ` to the degeneracy set `{|b| ≤ δ}`, finite differences and
//! the weighted smoothing statistic `E[h_δ(X) Δ_h^m φ(X)]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coeffs::PiecewiseLipschitzFn;
use crate::error::{Error, Result};
use crate::stats;

/// `Δ_h^m φ(x) = Σ_j (-1)^{m-j} C(m, j) φ(x + j h)`.
pub fn difference_operator(phi: impl Fn(f64) -> f64, x: f64, h: f64, m: u32) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for j in 0..=m {
        let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * phi(x + j as f64 * h);
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    sum
}

/// `Δ_h(Δ_h^{m-1} φ)`.
pub fn difference_operator_recursive(phi: &dyn Fn(f64) -> f64, x: f64, h: f64, m: u32) -> f64 {
    match m {
        0 => phi(x),
        _ => difference_operator_recursive(phi, x + h, h, m - 1) - difference_operator_recursive(phi, x, h, m - 1),
    }
}

/// `h_δ(x) = min(dist(x, D_δ), δ)` with `D_δ = {z : |b(z)| ≤ δ}` located on a bracket.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HDelta {
    delta: f64,
    intervals: Vec<(f64, f64)>,
}

impl HDelta {
    pub const DEFAULT_BRACKET: (f64, f64) = (-10.0, 10.0);
    pub const DEFAULT_SCAN: usize = 20_000;

    /// Dense scan of `[lo, hi]` with bisection refinement of every boundary.
    pub fn new(b: &PiecewiseLipschitzFn, delta: f64, lo: f64, hi: f64, scan: usize) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Parameter(format!("delta must be positive, got {delta}")));
        }
        if !(lo < hi) || scan < 2 {
            return Err(Error::Parameter("need lo < hi and at least two scan points".into()));
        }
        let inside = |z: f64| b.eval(z).abs() <= delta;
        let refine = |mut a: f64, mut c: f64| {
            // `inside(a) != inside(c)`; shrink to the switch point.
            let ia = inside(a);
            for _ in 0..100 {
                let m = 0.5 * (a + c);
                if m <= a || m >= c {
                    break;
                }
                if inside(m) == ia {
                    a = m;
                } else {
                    c = m;
                }
            }
            if ia { a } else { c }
        };
        let at = |k: usize| lo + (hi - lo) * k as f64 / scan as f64;
        let mut intervals = Vec::new();
        let mut start = inside(lo).then_some(lo);
        let mut prev = inside(lo);
        for k in 1..=scan {
            let z = at(k);
            let cur = inside(z);
            if cur != prev {
                let edge = refine(at(k - 1), z);
                match start.take() {
                    Some(s) => intervals.push((s, edge)),
                    None => start = Some(edge),
                }
            }
            prev = cur;
        }
        if let Some(s) = start {
            intervals.push((s, hi));
        }
        Ok(HDelta { delta, intervals })
    }

    pub fn with_defaults(b: &PiecewiseLipschitzFn, delta: f64) -> Result<Self> {
        let (lo, hi) = Self::DEFAULT_BRACKET;
        HDelta::new(b, delta, lo, hi, Self::DEFAULT_SCAN)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// True when no degenerate point was found; `h_δ` is then the cap.
    pub fn set_is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let d = self.intervals.iter().fold(f64::INFINITY, |m, &(a, c)| {
            let d = if x < a { a - x } else if x > c { x - c } else { 0.0 };
            m.min(d)
        });
        d.min(self.delta)
    }
}

pub fn h_delta(b: &PiecewiseLipschitzFn, delta: f64, x: f64) -> Result<f64> {
    Ok(HDelta::with_defaults(b, delta)?.eval(x))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub width: f64,
    pub edges: Vec<f64>,
    pub masses: Vec<f64>,
}

/// Bins `[k w, (k + 1) w)` covering the samples.
pub fn histogram(samples: &[f64], width: f64) -> Result<Histogram> {
    if !(width > 0.0) || samples.is_empty() {
        return Err(Error::Parameter("histogram needs samples and a positive width".into()));
    }
    let mut counts = BTreeMap::new();
    for &x in samples {
        if !x.is_finite() {
            return Err(Error::Domain { what: "sample", detail: format!("non-finite value {x}") });
        }
        *counts.entry((x / width).floor() as i64).or_insert(0usize) += 1;
    }
    let (&first, _) = counts.first_key_value().expect("non-empty");
    let (&last, _) = counts.last_key_value().expect("non-empty");
    let m = samples.len() as f64;
    let masses = (first..=last).map(|k| counts.get(&k).copied().unwrap_or(0) as f64 / m).collect();
    let edges = (first..=last + 1).map(|k| k as f64 * width).collect();
    Ok(Histogram { width, edges, masses })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeFunction {
    Cos { omega: f64 },
    /// `(1 - x²)³` on `[-1, 1]`.
    Bump,
}

impl ProbeFunction {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ProbeFunction::Cos { omega } => (omega * x).cos(),
            ProbeFunction::Bump => {
                let w = 1.0 - x * x;
                if w > 0.0 { w * w * w } else { 0.0 }
            }
        }
    }

    pub fn label(self) -> String {
        match self {
            ProbeFunction::Cos { omega } => format!("cos({omega}x)"),
            ProbeFunction::Bump => "bump".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    pub delta: f64,
    pub widths: Vec<f64>,
    pub shifts: Vec<f64>,
    pub order: u32,
    pub probes: Vec<ProbeFunction>,
    /// A width-halving ratio of the maximal bin mass below this flags an atom.
    pub atom_ratio: f64,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            delta: 0.5,
            widths: vec![0.2, 0.1, 0.05, 0.025],
            shifts: vec![0.4, 0.2, 0.1],
            order: 4,
            probes: vec![
                ProbeFunction::Cos { omega: 1.0 },
                ProbeFunction::Cos { omega: 2.0 },
                ProbeFunction::Cos { omega: 4.0 },
                ProbeFunction::Bump,
            ],
            atom_ratio: 1.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingEntry {
    pub probe: String,
    pub order: u32,
    pub shift: f64,
    /// `|E[h_δ(X) Δ_h^m φ(X)]|`.
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub samples: usize,
    pub delta: f64,
    pub degenerate_set_empty: bool,
    pub widths: Vec<f64>,
    pub max_bin_mass: Vec<f64>,
    /// `max_bin_mass[i] / max_bin_mass[i + 1]`.
    pub mass_ratios: Vec<f64>,
    pub strictly_decreasing: bool,
    pub atom: bool,
    /// Histogram at the finest width.
    pub histogram: Histogram,
    pub smoothing: Vec<SmoothingEntry>,
}

pub const MIN_DENSITY_SAMPLES: usize = 1000;

pub fn density_diagnostics(samples: &[f64], b: &PiecewiseLipschitzFn, config: &DensityConfig) -> Result<DensityReport> {
    if samples.len() < MIN_DENSITY_SAMPLES {
        return Err(Error::Parameter(format!(
            "density diagnostics need at least {MIN_DENSITY_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if config.widths.is_empty() || config.order == 0 {
        return Err(Error::Parameter("need at least one bin width and a positive order".into()));
    }
    let hists = config.widths.iter().map(|&w| histogram(samples, w)).collect::<Result<Vec<_>>>()?;
    let max_bin_mass: Vec<f64> = hists.iter().map(|h| h.masses.iter().copied().fold(0.0, f64::max)).collect();
    let mass_ratios: Vec<f64> = max_bin_mass.windows(2).map(|w| w[0] / w[1]).collect();
    let all_equal = samples.iter().all(|&x| x == samples[0]);
    let atom = all_equal || mass_ratios.last().is_some_and(|&r| r < config.atom_ratio);
    let h = HDelta::with_defaults(b, config.delta)?;
    let weights: Vec<f64> = samples.iter().map(|&x| h.eval(x)).collect();
    let mut smoothing = Vec::new();
    for &probe in &config.probes {
        for &shift in &config.shifts {
            let terms: Vec<f64> = samples
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| w * difference_operator(|y| probe.eval(y), x, shift, config.order))
                .collect();
            smoothing.push(SmoothingEntry {
                probe: probe.label(),
                order: config.order,
                shift,
                value: stats::mean(&terms).abs(),
                std_error: stats::std_error(&terms),
            });
        }
    }
    Ok(DensityReport {
        samples: samples.len(),
        delta: config.delta,
        degenerate_set_empty: h.set_is_empty(),
        widths: config.widths.clone(),
        strictly_decreasing: stats::strictly_decreasing(&max_bin_mass),
        max_bin_mass,
        mass_ratios,
        atom,
        histogram: hists.last().expect("non-empty").clone(),
        smoothing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{constant, linear};
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn difference_examples() {
        let sq = |x: f64| x * x;
        assert_eq!(difference_operator(sq, 1.5, 0.3, 1), sq(1.8) - sq(1.5));
        assert!((difference_operator(sq, 0.7, 0.25, 2) - 2.0 * 0.25 * 0.25).abs() < 1e-14);
        let cubic = |x: f64| 1.0 - 2.0 * x + x * x * x;
        assert!(difference_operator(cubic, 0.3, 0.1, 4).abs() < 1e-12);
        for m in 1..=6 {
            let a = difference_operator(f64::sin, 0.4, 0.3, m);
            let b = difference_operator_recursive(&f64::sin, 0.4, 0.3, m);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn h_delta_examples() {
        let b = linear(1.0, 0.0);
        assert_eq!(h_delta(&b, 0.5, 1.2).unwrap(), 0.5);
        assert_eq!(h_delta(&b, 0.5, 0.2).unwrap(), 0.0);
        assert!((h_delta(&b, 0.5, 0.8).unwrap() - 0.3).abs() < 1e-12);
        let h = HDelta::with_defaults(&constant(1.0), 0.5).unwrap();
        assert!(h.set_is_empty());
        assert_eq!(h.eval(3.0), 0.5);
    }

    #[test]
    fn gaussian_bins_halve() {
        let mut rng = crate::rng::stream(0, 0, crate::rng::Channel::Probe);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
        let r = density_diagnostics(&xs, &constant(1.0), &DensityConfig::default()).unwrap();
        assert!(r.strictly_decreasing && !r.atom);
        assert!(r.mass_ratios.iter().all(|&q| (1.7..=2.3).contains(&q)), "{:?}", r.mass_ratios);
        assert!((r.histogram.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn atoms_are_flagged() {
        let xs = vec![3.0; 2000];
        let r = density_diagnostics(&xs, &constant(1.0), &DensityConfig::default()).unwrap();
        assert!(r.atom && r.max_bin_mass.iter().all(|&m| m == 1.0));
        assert!(density_diagnostics(&xs[..10], &constant(1.0), &DensityConfig::default()).is_err());
    }
}
