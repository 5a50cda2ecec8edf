//! The drift-regularizing bijection `G` and the coefficients of the
//! equation solved by `Z = G(X)`.
//!
//! `G(x) = x + Σ_i α_i φ((x - ξ_i)/c₀) (x - ξ_i)|x - ξ_i|` with the bump
//! `φ(u) = (1 - u²)³` on `[-1, 1]`. Since `φ(0) = 1` and `φ'(0) = 0`, `G'(ξ_i) = 1`
//! and `G''(ξ_i±) = ±2α_i`; choosing `α_i = (a(ξ_i-) - a(ξ_i+)) / (2 b(ξ_i)²)`
//! cancels the drift jump in `G' a + G'' b² / 2`.

use serde::Serialize;

use crate::coeffs::{CoefficientTriple, PiecewiseLipschitzFn};
use crate::error::{Error, Result};

/// Below this `|b(ξ_i)|` the transform cannot cancel the jump.
pub const DIFFUSION_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformG {
    breakpoints: Vec<f64>,
    alphas: Vec<f64>,
    radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

fn phi(u: f64) -> (f64, f64, f64) {
    let w = 1.0 - u * u;
    (w * w * w, -6.0 * u * w * w, w * (30.0 * u * u - 6.0))
}

impl TransformG {
    /// A transform from explicit breakpoints and jump parameters; the bump
    /// radius follows the default rule.
    pub fn new(breakpoints: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != alphas.len() {
            return Err(Error::Parameter("one jump parameter per breakpoint".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) || alphas.iter().any(|a| !a.is_finite()) {
            return Err(Error::Parameter("breakpoints must increase and jump parameters be finite".into()));
        }
        let gap = breakpoints.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let amax = alphas.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let radius = 1.0f64.min(gap / 3.0).min(1.0 / (8.0 * amax + 1.0));
        Ok(TransformG { breakpoints, alphas, radius })
    }

    pub fn identity() -> Self {
        TransformG { breakpoints: Vec::new(), alphas: Vec::new(), radius: 1.0 }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn is_identity(&self) -> bool {
        self.alphas.iter().all(|&a| a == 0.0)
    }

    /// Index of the bump whose support contains `x`.
    fn bump_at(&self, x: f64) -> Option<usize> {
        let i = self.breakpoints.partition_point(|&b| b < x);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .find(|&j| j < self.breakpoints.len() && (x - self.breakpoints[j]).abs() < self.radius)
    }

    /// `(G - id, G', G'')` contribution of the bump around `x`.
    fn local(&self, x: f64, side: Side) -> (f64, f64, f64) {
        let Some(j) = self.bump_at(x) else {
            return (0.0, 1.0, 0.0);
        };
        let alpha = self.alphas[j];
        let c = self.radius;
        let d = x - self.breakpoints[j];
        let u = d / c;
        let (p, dp, ddp) = phi(u);
        let ad = d.abs();
        let sgn = if d > 0.0 || (d == 0.0 && side == Side::Right) { 1.0 } else { -1.0 };
        let g = alpha * p * d * ad;
        let gp = 1.0 + alpha * (dp / c * d * ad + 2.0 * p * ad);
        let gpp = alpha * (ddp / (c * c) * d * ad + 4.0 * dp / c * ad + 2.0 * p * sgn);
        (g, gp, gpp)
    }

    pub fn g(&self, x: f64) -> f64 {
        x + self.local(x, Side::Right).0
    }

    pub fn g_prime(&self, x: f64) -> f64 {
        self.local(x, Side::Right).1
    }

    /// `G''`, right limit at the breakpoints.
    pub fn g_second(&self, x: f64) -> f64 {
        self.local(x, Side::Right).2
    }

    pub fn g_second_left(&self, x: f64) -> f64 {
        self.local(x, Side::Left).2
    }

    /// `G^{-1}(y)`: identity off the bumps, bracketed Newton inside.
    pub fn inverse(&self, y: f64) -> f64 {
        let Some(j) = self.bump_at(y) else {
            return y;
        };
        let xi = self.breakpoints[j];
        if y == xi || self.alphas[j] == 0.0 {
            return y;
        }
        // Each bump maps [ξ - c, ξ] and [ξ, ξ + c] onto themselves.
        let (mut lo, mut hi) = if y > xi { (xi, xi + self.radius) } else { (xi - self.radius, xi) };
        let tol = 1e-13 * (1.0 + y.abs());
        let mut x = y;
        for _ in 0..200 {
            let (g, gp, _) = self.local(x, Side::Right);
            let r = x + g - y;
            if r.abs() <= tol {
                return x;
            }
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let newton = x - r / gp;
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * (1.0 + x.abs()) {
                return x;
            }
        }
        x
    }

    /// Probed `(min G', max G')` on a uniform grid of `n + 1` points.
    pub fn derivative_range(&self, lo: f64, hi: f64, n: usize) -> (f64, f64) {
        (0..=n).map(|k| self.g_prime(lo + (hi - lo) * k as f64 / n as f64)).fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(a, b), v| (a.min(v), b.max(v)),
        )
    }

    /// `G''` as a piecewise function with the breakpoints as discontinuities.
    pub fn g_second_fn(&self) -> PiecewiseLipschitzFn {
        let pieces = (0..=self.breakpoints.len())
            .map(|i| {
                let g = self.clone();
                let f: crate::coeffs::Evaluator = std::sync::Arc::new(move |x: f64| {
                    // The piece left of ξ_i takes the left limit there.
                    if i < g.breakpoints.len() && x == g.breakpoints[i] {
                        g.g_second_left(x)
                    } else {
                        g.g_second(x)
                    }
                });
                f
            })
            .collect();
        PiecewiseLipschitzFn::from_pieces("G''", self.breakpoints.clone(), pieces).expect("same breakpoints")
    }
}

/// The transform for the drift discontinuities of `triple`.
pub fn build_transform(triple: &CoefficientTriple) -> Result<TransformG> {
    let a = &triple.a;
    let mut alphas = Vec::with_capacity(a.breakpoints().len());
    for (i, &xi) in a.breakpoints().iter().enumerate() {
        let b = triple.b.eval_midpoint(xi);
        if !(b.abs() > DIFFUSION_FLOOR) {
            return Err(Error::Hypothesis(format!(
                "diffusion vanishes at the drift discontinuity {xi} (b = {b}); the transform needs b(ξ) ≠ 0"
            )));
        }
        alphas.push((a.left_limits()[i] - a.right_limits()[i]) / (2.0 * b * b));
    }
    TransformG::new(a.breakpoints().to_vec(), alphas)
}

/// Coefficients of the equation for `Z = G(X)`.
#[derive(Debug, Clone)]
pub struct TransformedCoefficients {
    pub g: TransformG,
    pub triple: CoefficientTriple,
}

/// `(ã, b̃, c̃)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedValues {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl TransformedCoefficients {
    /// All three coefficients at `z` with a single inversion.
    pub fn eval(&self, z: f64) -> TransformedValues {
        let x = self.g.inverse(z);
        let (_, gp, gpp) = self.g.local(x, Side::Right);
        let b = self.triple.b.eval(x);
        TransformedValues {
            a: gp * self.triple.a.eval(x) + 0.5 * gpp * b * b,
            b: gp * b,
            c: gp * self.triple.c.eval(x),
        }
    }

    pub fn a_tilde(&self, z: f64) -> f64 {
        self.eval(z).a
    }

    pub fn b_tilde(&self, z: f64) -> f64 {
        self.eval(z).b
    }

    pub fn c_tilde(&self, z: f64) -> f64 {
        self.eval(z).c
    }

    /// One-sided limits of `ã` at `z`, each extrapolated linearly from probes
    /// at distance `delta` and `2 delta`.
    pub fn drift_one_sided_limits(&self, z: f64, delta: f64) -> (f64, f64) {
        let side = |s: f64| 2.0 * self.a_tilde(z + s * delta) - self.a_tilde(z + 2.0 * s * delta);
        (side(-1.0), side(1.0))
    }

    /// `c̃' = c(x) G''(x) / G'(x) + c'(x)` with `x = G^{-1}(z)`.
    pub fn c_tilde_prime(&self, z: f64) -> f64 {
        let x = self.g.inverse(z);
        let (_, gp, gpp) = self.g.local(x, Side::Right);
        self.triple.c.eval(x) * gpp / gp + self.triple.c.eval_derivative(x)
    }

    /// `c̃'` with the left limits of `G''` and `c'` at the breakpoints.
    pub fn c_tilde_prime_left(&self, z: f64) -> f64 {
        let x = self.g.inverse(z);
        let (_, gp, gpp) = self.g.local(x, Side::Left);
        let dc = match self.triple.c.derivative() {
            Some(d) => d.eval_left(x),
            None => self.triple.c.eval_derivative(x),
        };
        self.triple.c.eval_left(x) * gpp / gp + dc
    }

    /// The transformed triple as piecewise functions without breakpoints,
    /// `c̃` carrying `c̃'` as its derivative.
    pub fn as_triple(&self) -> CoefficientTriple {
        let (s1, s2, s3, s4) = (self.clone(), self.clone(), self.clone(), self.clone());
        let cp = PiecewiseLipschitzFn::smooth("c~'", move |z| s4.c_tilde_prime(z));
        CoefficientTriple {
            a: PiecewiseLipschitzFn::smooth("a~", move |z| s1.a_tilde(z)),
            b: PiecewiseLipschitzFn::smooth("b~", move |z| s2.b_tilde(z)),
            c: PiecewiseLipschitzFn::smooth("c~", move |z| s3.c_tilde(z)).with_derivative(cp),
        }
    }
}

pub fn transformed_coeffs(g: &TransformG, triple: &CoefficientTriple) -> TransformedCoefficients {
    TransformedCoefficients { g: g.clone(), triple: triple.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{constant, linear, sin};

    #[test]
    fn sign_drift_parameters() {
        let t = CoefficientTriple::sign_drift();
        let g = build_transform(&t).unwrap();
        assert_eq!(g.alphas(), &[1.0]);
        assert!((g.radius() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(g.g(0.0), 0.0);
        assert_eq!(g.g_prime(0.0), 1.0);
        assert_eq!(g.g_second(0.0), 2.0);
        assert_eq!(g.g_second_left(0.0), -2.0);
    }

    #[test]
    fn zero_jump_is_identity() {
        let t = CoefficientTriple { a: sin(1.0, 1.0, 0.0), b: constant(1.0), c: linear(1.0, 0.0) };
        let g = build_transform(&t).unwrap();
        assert!(g.is_identity());
        for &x in &[-2.0, 0.0, 0.3, 7.0] {
            assert_eq!(g.g(x), x);
            assert_eq!(g.g_prime(x), 1.0);
            assert_eq!(g.g_second(x), 0.0);
            let tc = transformed_coeffs(&g, &t);
            assert_eq!(tc.a_tilde(x), t.a.eval(x));
        }
    }

    #[test]
    fn vanishing_diffusion_is_rejected() {
        let t = CoefficientTriple { b: linear(1.0, 0.0), ..CoefficientTriple::sign_drift() };
        assert!(matches!(build_transform(&t), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn inverse_roundtrip_inside_bump() {
        let g = build_transform(&CoefficientTriple::sign_drift()).unwrap();
        for &x in &[0.1, -0.1, 0.05, 1e-9, -0.11, 0.2] {
            assert!((g.inverse(g.g(x)) - x).abs() < 1e-10, "{x}");
        }
        assert_eq!(g.inverse(0.5), 0.5);
    }

    #[test]
    fn drift_jump_cancels() {
        let t = CoefficientTriple::sign_drift();
        let tc = transformed_coeffs(&build_transform(&t).unwrap(), &t);
        let mut last = f64::INFINITY;
        for k in 4..=8 {
            let d = 10f64.powi(-k);
            let gap = (tc.a_tilde(d) - tc.a_tilde(-d)).abs();
            assert!(gap < 1e-3 && gap < last, "k = {k}: {gap}");
            last = gap;
        }
        let (l, r) = tc.drift_one_sided_limits(0.0, 1e-6);
        assert!((l - r).abs() < 1e-7 && l.abs() < 1e-7, "{l} {r}");
        assert!((tc.c_tilde_prime(0.0) - 1.0).abs() < 1e-12);
        assert!((tc.c_tilde_prime_left(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_stays_near_one() {
        let g = TransformG::new(vec![-1.0, 0.0, 2.0], vec![3.0, -0.5, 10.0]).unwrap();
        let (lo, hi) = g.derivative_range(-3.0, 4.0, 100_000);
        assert!(lo > 0.4 && hi < 1.6, "{lo} {hi}");
        for i in 0..3 {
            assert_eq!(g.g(g.breakpoints()[i]), g.breakpoints()[i]);
        }
    }
}
