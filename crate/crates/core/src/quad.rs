//! Adaptive Gauss–Kronrod quadrature.
//!
//! `integrate` is a global adaptive G7/K15 scheme. `integrate_singular`
//! additionally removes algebraic endpoint behaviour `(x-a)^p`, `(b-x)^q`
//! through power substitutions, which the kernel and Weyl integrals need.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            max_intervals: 2000,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-10, 1e-10)
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    (value, error)
}

/// Integrate `f` over `[a, b]`; never evaluates `f` at the endpoints.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let (v, e) = kronrod(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value: v,
        error: e,
    });
    let mut total = v;
    let mut total_err = e;
    let mut count = 1;
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if count >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {count} subintervals (estimate {total:e} ± {total_err:e})"
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod(&f, worst.a, mid);
        let (v2, e2) = kronrod(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
        count += 1;
    }
    // Re-sum to shed the drift of the incremental updates.
    let total: f64 = heap.iter().map(|s| s.value).sum();
    if !total.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integral on [{a}, {b}]"
        )));
    }
    Ok(total)
}

fn substitution_power(p: f64) -> f64 {
    if p >= 1.0 || p == 0.0 {
        1.0
    } else {
        (2.0 / (p + 1.0)).ceil().max(1.0)
    }
}

/// Integrate `f` over `[a, b]` where `f(x) ~ (x-a)^p` near `a` and
/// `f(x) ~ (b-x)^q` near `b` (`p, q > -1`).
///
/// The interval is split at its midpoint and each half is mapped with
/// `x = a + (m-a) w^k`, `k` chosen so the transformed integrand vanishes at
/// the singular end.
pub fn integrate_singular<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    p: f64,
    q: f64,
    tol: Tolerance,
) -> Result<f64> {
    if !(p > -1.0 && q > -1.0) {
        return Err(Error::Parameter(format!(
            "endpoint exponents must exceed -1, got p = {p}, q = {q}"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let kl = substitution_power(p);
    let kr = substitution_power(q);
    let half_tol = Tolerance {
        abs: 0.5 * tol.abs,
        ..tol
    };
    let hl = m - a;
    let left = integrate(
        |w: f64| {
            let x = a + hl * w.powf(kl);
            if x <= a {
                // Underflow onto the singular endpoint: contribution is nil.
                return 0.0;
            }
            f(x) * kl * hl * w.powf(kl - 1.0)
        },
        0.0,
        1.0,
        half_tol,
    )?;
    let hr = b - m;
    let right = integrate(
        |w: f64| {
            let x = b - hr * w.powf(kr);
            if x >= b {
                return 0.0;
            }
            f(x) * kr * hr * w.powf(kr - 1.0)
        },
        0.0,
        1.0,
        half_tol,
    )?;
    Ok(left + right)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, Tolerance::default()).unwrap();
        assert!((v - 8.0).abs() < 1e-13);
        let r = integrate(|x| x, 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((r + 0.5).abs() < 1e-15);
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(f64::sin, 0.0, std::f64::consts::PI, Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn algebraic_endpoint_singularities() {
        // ∫_0^1 x^{-0.8} dx = 5
        let v = integrate_singular(
            |x: f64| x.powf(-0.8),
            0.0,
            1.0,
            -0.8,
            0.0,
            Tolerance::default(),
        )
        .unwrap();
        assert!((v - 5.0).abs() < 1e-9, "{v}");
        // ∫_0^1 x^{-1/2} (1-x)^{-1/2} dx = π
        let v = integrate_singular(
            |x: f64| 1.0 / (x * (1.0 - x)).sqrt(),
            0.0,
            1.0,
            -0.5,
            -0.5,
            Tolerance::default(),
        )
        .unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-9, "{v}");
    }

    #[test]
    fn rejects_non_integrable_exponents() {
        assert!(
            integrate_singular(|x| 1.0 / x, 0.0, 1.0, -1.0, 0.0, Tolerance::default()).is_err()
        );
    }
}
