//! Piecewise Lipschitz coefficients, assumption probing and the four-point
//! condition on the fractional coefficient.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Channel};

pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function with ordered breakpoints `ξ_1 < ... < ξ_k`, one
/// evaluator per piece and stored one-sided limits.
///
/// Each piece evaluator must be continuous on the closure of its interval so
/// that the limits at the breakpoints are its endpoint values. Plain
/// evaluation at a breakpoint returns the right limit.
#[derive(Clone)]
pub struct PiecewiseLipschitzFn {
    label: String,
    breakpoints: Vec<f64>,
    pieces: Vec<Evaluator>,
    left_limits: Vec<f64>,
    right_limits: Vec<f64>,
    derivative: Option<Arc<PiecewiseLipschitzFn>>,
}

impl fmt::Debug for PiecewiseLipschitzFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PiecewiseLipschitzFn")
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints)
            .field("left_limits", &self.left_limits)
            .field("right_limits", &self.right_limits)
            .field("has_derivative", &self.derivative.is_some())
            .finish()
    }
}

fn evaluator(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Evaluator {
    Arc::new(f)
}

impl PiecewiseLipschitzFn {
    pub fn from_pieces(label: impl Into<String>, breakpoints: Vec<f64>, pieces: Vec<Evaluator>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::Parameter(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                pieces.len()
            )));
        }
        if breakpoints.iter().any(|x| !x.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("breakpoints must be finite and strictly increasing".into()));
        }
        let left_limits: Vec<f64> = breakpoints.iter().enumerate().map(|(i, &x)| pieces[i](x)).collect();
        let right_limits: Vec<f64> = breakpoints.iter().enumerate().map(|(i, &x)| pieces[i + 1](x)).collect();
        if left_limits.iter().chain(&right_limits).any(|v| !v.is_finite()) {
            return Err(Error::Parameter("one-sided limits must be finite".into()));
        }
        Ok(PiecewiseLipschitzFn {
            label: label.into(),
            breakpoints,
            pieces,
            left_limits,
            right_limits,
            derivative: None,
        })
    }

    /// A function without breakpoints.
    pub fn smooth(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PiecewiseLipschitzFn::from_pieces(label, Vec::new(), vec![evaluator(f)]).expect("single piece")
    }

    pub fn with_derivative(mut self, derivative: PiecewiseLipschitzFn) -> Self {
        self.derivative = Some(Arc::new(derivative));
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn left_limits(&self) -> &[f64] {
        &self.left_limits
    }

    pub fn right_limits(&self) -> &[f64] {
        &self.right_limits
    }

    /// Jumps `f(ξ_i+) - f(ξ_i-)`.
    pub fn jumps(&self) -> Vec<f64> {
        self.right_limits.iter().zip(&self.left_limits).map(|(r, l)| r - l).collect()
    }

    pub fn derivative(&self) -> Option<&PiecewiseLipschitzFn> {
        self.derivative.as_deref()
    }

    /// Index of the piece containing `x`; a breakpoint belongs to the piece on its right.
    pub fn piece_index(&self, x: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= x)
    }

    /// Evaluate the piece `i` evaluator directly.
    pub fn eval_piece(&self, i: usize, x: f64) -> f64 {
        (self.pieces[i])(x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_piece(self.piece_index(x), x)
    }

    pub fn eval_left(&self, x: f64) -> f64 {
        self.eval_piece(self.breakpoints.partition_point(|&b| b < x), x)
    }

    pub fn eval_right(&self, x: f64) -> f64 {
        self.eval(x)
    }

    /// Average of the one-sided limits at a breakpoint, plain value elsewhere.
    pub fn eval_midpoint(&self, x: f64) -> f64 {
        match self.breakpoints.binary_search_by(|b| b.total_cmp(&x)) {
            Ok(i) => 0.5 * (self.left_limits[i] + self.right_limits[i]),
            Err(_) => self.eval(x),
        }
    }

    /// Derivative value: the attached derivative if any, otherwise a central
    /// difference inside the piece of `x`.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        match &self.derivative {
            Some(d) => d.eval(x),
            None => {
                let i = self.piece_index(x);
                let h = 1e-6 * (1.0 + x.abs());
                (self.eval_piece(i, x + h) - self.eval_piece(i, x - h)) / (2.0 * h)
            }
        }
    }

    /// `(lo, hi)` extent of piece `i` (infinite at the ends).
    pub fn piece_bounds(&self, i: usize) -> (f64, f64) {
        let lo = if i == 0 { f64::NEG_INFINITY } else { self.breakpoints[i - 1] };
        let hi = if i == self.breakpoints.len() { f64::INFINITY } else { self.breakpoints[i] };
        (lo, hi)
    }
}

// ---------------------------------------------------------------------------
// Built-ins

pub fn constant(value: f64) -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::smooth(format!("{value}"), move |_| value).with_derivative(zero())
}

fn zero() -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::smooth("0", |_| 0.0)
}

pub fn linear(slope: f64, intercept: f64) -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::smooth(format!("{slope}*x + {intercept}"), move |x| slope * x + intercept)
        .with_derivative(constant(slope))
}

/// `scale · sign(x - at)`, with the right limit `scale` at `x = at`.
pub fn sign(scale: f64, at: f64) -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::from_pieces(
        format!("{scale}*sign(x - {at})"),
        vec![at],
        vec![evaluator(move |_| -scale), evaluator(move |_| scale)],
    )
    .expect("valid pieces")
    .with_derivative(zero_with_breakpoint(at))
}

fn zero_with_breakpoint(at: f64) -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::from_pieces("0", vec![at], vec![evaluator(|_| 0.0), evaluator(|_| 0.0)])
        .expect("valid pieces")
}

/// `amplitude · sin(frequency · x + phase)`.
pub fn sin(amplitude: f64, frequency: f64, phase: f64) -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::smooth(format!("{amplitude}*sin({frequency}*x + {phase})"), move |x| {
        amplitude * (frequency * x + phase).sin()
    })
    .with_derivative(PiecewiseLipschitzFn::smooth("cos", move |x| {
        amplitude * frequency * (frequency * x + phase).cos()
    }))
}

/// `amplitude · cos(frequency · x + phase)`.
pub fn cos(amplitude: f64, frequency: f64, phase: f64) -> PiecewiseLipschitzFn {
    sin(amplitude, frequency, phase + std::f64::consts::FRAC_PI_2)
        .relabel(format!("{amplitude}*cos({frequency}*x + {phase})"))
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn derivative_coefficients(coefficients: &[f64]) -> Vec<f64> {
    coefficients.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect()
}

/// `Σ_k coefficients[k] x^k`.
pub fn polynomial(coefficients: Vec<f64>) -> PiecewiseLipschitzFn {
    polynomial_pieces(Vec::new(), vec![coefficients]).expect("single piece")
}

/// One polynomial per piece, coefficients in increasing degree.
pub fn polynomial_pieces(breakpoints: Vec<f64>, coefficients: Vec<Vec<f64>>) -> Result<PiecewiseLipschitzFn> {
    let pieces = coefficients
        .iter()
        .map(|c| {
            let c = c.clone();
            evaluator(move |x| horner(&c, x))
        })
        .collect();
    let label = format!("polynomial pieces {coefficients:?}");
    let f = PiecewiseLipschitzFn::from_pieces(label, breakpoints.clone(), pieces)?;
    let degree = coefficients.iter().map(Vec::len).max().unwrap_or(0);
    if degree == 0 {
        return Ok(f);
    }
    let d = polynomial_pieces(breakpoints, coefficients.iter().map(|c| derivative_coefficients(c)).collect())?;
    Ok(f.with_derivative(d))
}

/// `slopes[i] · x + intercepts[i]` on piece `i`.
pub fn affine_pieces(breakpoints: Vec<f64>, slopes: Vec<f64>, intercepts: Vec<f64>) -> Result<PiecewiseLipschitzFn> {
    if slopes.len() != intercepts.len() {
        return Err(Error::Parameter("slopes and intercepts differ in length".into()));
    }
    polynomial_pieces(breakpoints, intercepts.into_iter().zip(slopes).map(|(b, m)| vec![b, m]).collect())
}

/// `scale · |x|`, with breakpoint 0 for the derivative.
pub fn abs(scale: f64) -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::from_pieces(
        format!("{scale}*|x|"),
        vec![0.0],
        vec![evaluator(move |x| -scale * x), evaluator(move |x| scale * x)],
    )
    .expect("valid pieces")
    .with_derivative(sign(scale, 0.0))
}

/// `x|x|/2`: derivative `|x|`, second derivative `sign(x)`.
pub fn signed_half_square() -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::smooth("x|x|/2", |x| 0.5 * x * x.abs()).with_derivative(
        PiecewiseLipschitzFn::smooth("|x|", f64::abs).with_derivative(sign(1.0, 0.0)),
    )
}

/// `|x|^{1/2}`, continuous but not Lipschitz at 0.
pub fn sqrt_abs() -> PiecewiseLipschitzFn {
    PiecewiseLipschitzFn::smooth("|x|^(1/2)", |x| x.abs().sqrt())
}

impl PiecewiseLipschitzFn {
    fn relabel(mut self, label: String) -> Self {
        self.label = label;
        self
    }
}

/// Serializable description of a built-in coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoefficientSpec {
    Constant {
        value: f64,
    },
    Linear {
        slope: f64,
        #[serde(default)]
        intercept: f64,
    },
    Sign {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        at: f64,
    },
    Sin {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Cos {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    Polynomial {
        coefficients: Vec<f64>,
    },
    AffinePieces {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        intercepts: Vec<f64>,
    },
    PolynomialPieces {
        breakpoints: Vec<f64>,
        coefficients: Vec<Vec<f64>>,
    },
    Abs {
        #[serde(default = "one")]
        scale: f64,
    },
    SignedHalfSquare,
    SqrtAbs,
}

fn one() -> f64 {
    1.0
}

impl CoefficientSpec {
    pub fn build(&self) -> Result<PiecewiseLipschitzFn> {
        Ok(match self.clone() {
            CoefficientSpec::Constant { value } => constant(value),
            CoefficientSpec::Linear { slope, intercept } => linear(slope, intercept),
            CoefficientSpec::Sign { scale, at } => sign(scale, at),
            CoefficientSpec::Sin { amplitude, frequency, phase } => sin(amplitude, frequency, phase),
            CoefficientSpec::Cos { amplitude, frequency, phase } => cos(amplitude, frequency, phase),
            CoefficientSpec::Polynomial { coefficients } => polynomial(coefficients),
            CoefficientSpec::AffinePieces { breakpoints, slopes, intercepts } => {
                affine_pieces(breakpoints, slopes, intercepts)?
            }
            CoefficientSpec::PolynomialPieces { breakpoints, coefficients } => {
                polynomial_pieces(breakpoints, coefficients)?
            }
            CoefficientSpec::Abs { scale } => abs(scale),
            CoefficientSpec::SignedHalfSquare => signed_half_square(),
            CoefficientSpec::SqrtAbs => sqrt_abs(),
        })
    }
}

/// Drift `a`, diffusion `b` and fractional coefficient `c`.
#[derive(Debug, Clone)]
pub struct CoefficientTriple {
    pub a: PiecewiseLipschitzFn,
    pub b: PiecewiseLipschitzFn,
    pub c: PiecewiseLipschitzFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleSpec {
    pub a: CoefficientSpec,
    pub b: CoefficientSpec,
    pub c: CoefficientSpec,
}

impl TripleSpec {
    pub fn build(&self) -> Result<CoefficientTriple> {
        Ok(CoefficientTriple { a: self.a.build()?, b: self.b.build()?, c: self.c.build()? })
    }

    /// `a = -sign(x)`, `b = 1`, `c(x) = x`.
    pub fn sign_drift() -> Self {
        TripleSpec {
            a: CoefficientSpec::Sign { scale: -1.0, at: 0.0 },
            b: CoefficientSpec::Constant { value: 1.0 },
            c: CoefficientSpec::Linear { slope: 1.0, intercept: 0.0 },
        }
    }
}

impl CoefficientTriple {
    pub fn sign_drift() -> Self {
        TripleSpec::sign_drift().build().expect("built-in triple")
    }

    /// Discontinuity set of the drift.
    pub fn breakpoints(&self) -> &[f64] {
        self.a.breakpoints()
    }
}

// ---------------------------------------------------------------------------
// Probing

fn probe_pair<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> (f64, f64) {
    let width = hi - lo;
    let x = lo + width * (0.5 + (rng.random::<f64>() - 0.5) * (1.0 - 1e-9));
    let h = width * 10f64.powf(-4.0 * rng.random::<f64>());
    let forward = rng.random::<bool>();
    let y = match (forward && x + h < hi, !forward && x - h > lo) {
        (true, _) => x + h,
        (_, true) => x - h,
        _ if x + h < hi => x + h,
        _ if x - h > lo => x - h,
        _ => {
            if hi - x > x - lo {
                x + 0.5 * (hi - x)
            } else {
                x - 0.5 * (x - lo)
            }
        }
    };
    (x, y)
}

fn piece_windows(f: &PiecewiseLipschitzFn, lo: f64, hi: f64) -> Vec<(usize, f64, f64)> {
    (0..f.piece_count())
        .filter_map(|i| {
            let (a, b) = f.piece_bounds(i);
            let (a, b) = (a.max(lo), b.min(hi));
            (b > a).then_some((i, a, b))
        })
        .collect()
}

/// Largest difference quotient over `n` random pairs in `[lo, hi]`, each pair
/// inside a single piece.
pub fn lipschitz_estimate(f: &PiecewiseLipschitzFn, lo: f64, hi: f64, n: usize, seed: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Parameter("need at least two probe pairs".into()));
    }
    let windows = piece_windows(f, lo, hi);
    if windows.is_empty() {
        return Err(Error::Parameter(format!("[{lo}, {hi}] contains no piece segment")));
    }
    let mut rng = rng::stream(seed, 0, Channel::Probe);
    let mut best = 0.0f64;
    for _ in 0..n {
        let x0 = lo + (hi - lo) * rng.random::<f64>();
        let &(i, a, b) = windows.iter().find(|w| x0 < w.2).unwrap_or(windows.last().expect("non-empty"));
        let (x, y) = probe_pair(&mut rng, a, b);
        let q = (f.eval_piece(i, x) - f.eval_piece(i, y)).abs() / (x - y).abs();
        best = best.max(q);
    }
    Ok(best)
}

/// Difference quotients over `n` random pairs anywhere in `[lo, hi]`, pairs
/// allowed to straddle breakpoints. Infinite if a breakpoint inside the
/// interval carries a jump.
pub fn global_lipschitz_estimate(f: &PiecewiseLipschitzFn, lo: f64, hi: f64, n: usize, seed: u64) -> Result<f64> {
    if !(hi > lo) {
        return Err(Error::Parameter(format!("empty interval [{lo}, {hi}]")));
    }
    let mut rng = rng::stream(seed, 1, Channel::Probe);
    let mut best = 0.0f64;
    for (i, &xi) in f.breakpoints().iter().enumerate() {
        if xi > lo && xi < hi {
            let (l, r) = (f.left_limits()[i], f.right_limits()[i]);
            if (r - l).abs() > 1e-12 * (1.0 + l.abs().max(r.abs())) {
                return Ok(f64::INFINITY);
            }
        }
    }
    for _ in 0..n {
        let (x, y) = probe_pair(&mut rng, lo, hi);
        best = best.max((f.eval(x) - f.eval(y)).abs() / (x - y).abs());
    }
    Ok(best)
}

fn derivative_fn(f: &PiecewiseLipschitzFn) -> PiecewiseLipschitzFn {
    match f.derivative() {
        Some(d) => d.clone(),
        None => {
            let g = f.clone();
            let pieces = (0..g.piece_count())
                .map(|i| {
                    let g = g.clone();
                    evaluator(move |x| {
                        let h = 1e-6 * (1.0 + x.abs());
                        (g.eval_piece(i, x + h) - g.eval_piece(i, x - h)) / (2.0 * h)
                    })
                })
                .collect();
            PiecewiseLipschitzFn::from_pieces(format!("d/dx {}", g.label()), g.breakpoints().to_vec(), pieces)
                .expect("same breakpoints")
        }
    }
}

/// Probe settings for [`validate_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Probe {
    pub lo: f64,
    pub hi: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub tol_b: f64,
    pub tol_c: f64,
}

impl Default for Probe {
    fn default() -> Self {
        Probe { lo: -5.0, hi: 5.0, n_samples: 10_000, seed: 0, tol_b: 1e-8, tol_c: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzProbe {
    pub lo: f64,
    pub hi: f64,
    pub estimate: f64,
    pub estimate_doubled: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub passed: bool,
    pub notes: Vec<String>,
}

impl Clause {
    fn from_notes(notes: Vec<String>) -> Self {
        Clause { passed: notes.is_empty(), notes }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub a1: Clause,
    pub a2: Clause,
    pub a3: Clause,
    pub breakpoints: Vec<f64>,
    /// Per-piece Lipschitz probes of the drift.
    pub drift_pieces: Vec<LipschitzProbe>,
    pub diffusion_lipschitz: LipschitzProbe,
    pub fractional_lipschitz: LipschitzProbe,
    pub fractional_derivative_lipschitz: LipschitzProbe,
    pub fractional_derivative_sup: f64,
    pub b_at_breakpoints: Vec<f64>,
    pub c_at_breakpoints: Vec<f64>,
    pub c_prime_at_breakpoints: Vec<f64>,
}

impl AssumptionReport {
    pub fn all_passed(&self) -> bool {
        self.a1.passed && self.a2.passed && self.a3.passed
    }
}

fn stable_probe(estimate: f64, doubled: f64) -> bool {
    estimate.is_finite()
        && doubled.is_finite()
        && (doubled == estimate || (estimate > 0.0 && doubled / estimate <= 1.1 && estimate / doubled <= 1.1))
}

fn probe(
    lo: f64,
    hi: f64,
    n: usize,
    estimate: impl Fn(usize) -> Result<f64>,
) -> Result<LipschitzProbe> {
    let e = estimate(n)?;
    let d = estimate(2 * n)?;
    Ok(LipschitzProbe { lo, hi, estimate: e, estimate_doubled: d, stable: stable_probe(e, d) })
}

/// Probe the drift, diffusion and fractional coefficients for the
/// piecewise-Lipschitz and breakpoint conditions.
pub fn validate_assumptions(triple: &CoefficientTriple, probe_cfg: &Probe) -> Result<AssumptionReport> {
    let Probe { lo, hi, n_samples: n, seed, tol_b, tol_c } = *probe_cfg;
    if !(hi > lo) || n < 2 {
        return Err(Error::Parameter(format!("invalid probe interval [{lo}, {hi}] or sample count {n}")));
    }
    let xi = triple.breakpoints().to_vec();
    if let Some(x) = xi.iter().find(|&&x| !(x > lo && x < hi)) {
        return Err(Error::Parameter(format!("probe interval [{lo}, {hi}] excludes breakpoint {x}")));
    }

    let mut a1 = Vec::new();
    let drift_pieces = piece_windows(&triple.a, lo, hi)
        .into_iter()
        .map(|(i, a, b)| {
            let p = probe(a, b, n, |m| {
                let only = PiecewiseLipschitzFn::smooth("piece", {
                    let f = triple.a.clone();
                    move |x| f.eval_piece(i, x)
                });
                lipschitz_estimate(&only, a, b, m, seed.wrapping_add(i as u64))
            })?;
            if !p.stable {
                a1.push(format!("drift piece {i} on ({a}, {b}): estimates {} / {} not stable", p.estimate, p.estimate_doubled));
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut a2 = Vec::new();
    let diffusion_lipschitz = probe(lo, hi, n, |m| global_lipschitz_estimate(&triple.b, lo, hi, m, seed))?;
    if !diffusion_lipschitz.stable {
        a2.push("diffusion coefficient is not Lipschitz on the probe interval".into());
    }
    let b_at_breakpoints: Vec<f64> = xi.iter().map(|&x| triple.b.eval(x)).collect();
    for (x, b) in xi.iter().zip(&b_at_breakpoints) {
        if !(b.abs() > tol_b) {
            a2.push(format!("b({x}) = {b} vanishes"));
        }
    }

    let mut a3 = Vec::new();
    let fractional_lipschitz = probe(lo, hi, n, |m| global_lipschitz_estimate(&triple.c, lo, hi, m, seed))?;
    if !fractional_lipschitz.stable {
        a3.push("fractional coefficient is not Lipschitz on the probe interval".into());
    }
    let dc = derivative_fn(&triple.c);
    let fractional_derivative_lipschitz = probe(lo, hi, n, |m| global_lipschitz_estimate(&dc, lo, hi, m, seed))?;
    if !fractional_derivative_lipschitz.stable {
        a3.push("derivative of the fractional coefficient is not Lipschitz on the probe interval".into());
    }
    let fractional_derivative_sup = sup_on_grid(&dc, lo, hi, n);
    if !fractional_derivative_sup.is_finite() {
        a3.push("derivative of the fractional coefficient is unbounded".into());
    }
    let c_at_breakpoints: Vec<f64> = xi.iter().map(|&x| triple.c.eval(x)).collect();
    for (x, c) in xi.iter().zip(&c_at_breakpoints) {
        if !(c.abs() <= tol_c) {
            a3.push(format!("c({x}) = {c} does not vanish"));
        }
    }
    let c_prime_at_breakpoints = xi.iter().map(|&x| dc.eval_midpoint(x)).collect();

    Ok(AssumptionReport {
        a1: Clause::from_notes(a1),
        a2: Clause::from_notes(a2),
        a3: Clause::from_notes(a3),
        breakpoints: xi,
        drift_pieces,
        diffusion_lipschitz,
        fractional_lipschitz,
        fractional_derivative_lipschitz,
        fractional_derivative_sup,
        b_at_breakpoints,
        c_at_breakpoints,
        c_prime_at_breakpoints,
    })
}

fn sup_on_grid(f: &PiecewiseLipschitzFn, lo: f64, hi: f64, n: usize) -> f64 {
    (0..=n)
        .map(|k| f.eval(lo + (hi - lo) * k as f64 / n as f64).abs())
        .fold(0.0, |m, v| if v.is_nan() { f64::NAN } else { m.max(v) })
}

// ---------------------------------------------------------------------------
// Four-point condition

/// Largest value of `|c(x1) - c(x2) - c(x3) + c(x4)| - K|x1 - x2 - x3 + x4|
/// - K|x1 - x3|(|x1 - x2| + |x3 - x4|)` over `quads`. Non-positive means the
/// condition holds on the probe set.
pub fn four_point_defect(c: &PiecewiseLipschitzFn, k: f64, quads: &[[f64; 4]]) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Parameter(format!("constant must be positive, got {k}")));
    }
    Ok(quads
        .iter()
        .map(|&[x1, x2, x3, x4]| {
            let lhs = (c.eval(x1) - c.eval(x2) - c.eval(x3) + c.eval(x4)).abs();
            lhs - k * (x1 - x2 - x3 + x4).abs() - k * (x1 - x3).abs() * ((x1 - x2).abs() + (x3 - x4).abs())
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// `n` quadruples drawn uniformly from `[lo, hi]^4`.
pub fn random_quads(n: usize, lo: f64, hi: f64, seed: u64) -> Vec<[f64; 4]> {
    let mut rng = rng::stream(seed, 2, Channel::Probe);
    (0..n).map(|_| std::array::from_fn(|_| lo + (hi - lo) * rng.random::<f64>())).collect()
}

/// Probed `(sup |c'|, Lip(c'))` on `[lo, hi]`; their sum is a valid
/// four-point constant when `c'` is bounded and Lipschitz.
pub fn four_point_constants(c: &PiecewiseLipschitzFn, lo: f64, hi: f64, n: usize, seed: u64) -> Result<(f64, f64)> {
    let dc = derivative_fn(c);
    let sup = sup_on_grid(&dc, lo, hi, n);
    let lip = global_lipschitz_estimate(&dc, lo, hi, n, seed)?;
    Ok((sup, lip))
}
