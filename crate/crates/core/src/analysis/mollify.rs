//! Convolution with the normalized bump `φ_n(x) = n φ(n x)`,
//! `φ(u) = 35/32 (1 - u²)³` on `[-1, 1]`.

use crate::quad::{integrate, Tolerance};

use super::ito::ItoFunction;

const TOL: Tolerance = Tolerance::new(1e-9, 1e-9);

pub fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - u * u;
        35.0 / 32.0 * w * w * w
    }
}

/// `∫ g(x - u/n) φ(u) du`, split where the argument crosses a break.
fn convolve(g: &dyn Fn(f64) -> f64, breaks: &[f64], n: f64, x: f64) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().map(|&b| n * (x - b)).filter(|u| u.abs() < 1.0).collect();
    cuts.push(-1.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| integrate(|u| g(x - u / n) * bump(u), w[0], w[1], TOL).unwrap_or(f64::NAN))
        .sum()
}

/// `(f_n, f_n', f_n'')`; each derivative is the convolution of the
/// corresponding derivative of `f`.
pub fn mollify(f: &ItoFunction, n: usize) -> ItoFunction {
    let n = n.max(1) as f64;
    let breaks = f.second_breaks().to_vec();
    let (f0, f1, f2) = (f.clone(), f.clone(), f.clone());
    let (b0, b1, b2) = (breaks.clone(), breaks.clone(), breaks);
    ItoFunction::new(
        format!("{} * phi_{n}", f.label()),
        move |x| convolve(&|y| f0.value(y), &b0, n, x),
        move |x| convolve(&|y| f1.first(y), &b1, n, x),
        move |x| convolve(&|y| f2.second(y), &b2, n, x),
        Vec::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_is_normalized() {
        let m = integrate(bump, -1.0, 1.0, TOL).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_function_converges_monotonically() {
        let f = ItoFunction::new("sin", f64::sin, f64::cos, |x| -x.sin(), Vec::new());
        let probe: Vec<f64> = (0..=40).map(|k| -2.0 + 0.1 * k as f64).collect();
        let errs: Vec<f64> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&n| {
                let g = mollify(&f, n);
                probe.iter().map(|&x| (g.value(x) - x.sin()).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(crate::stats::strictly_decreasing(&errs), "{errs:?}");
    }

    #[test]
    fn second_derivative_of_kink() {
        let f = ItoFunction::signed_half_square();
        let g = mollify(&f, 1000);
        assert!((g.second(0.5) - 1.0).abs() < 1e-3);
        assert!((g.second(-0.5) + 1.0).abs() < 1e-3);
        for n in [1, 3, 10, 100] {
            let g = mollify(&f, n);
            for k in 0..=200 {
                let x = -1.0 + 0.01 * k as f64;
                assert!(g.second(x).abs() <= 1.0 + 1e-6);
            }
        }
    }
}
