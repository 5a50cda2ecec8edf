use std::sync::Arc;

use mixfrac::analysis::density::{difference_operator_recursive, DensityConfig};
use mixfrac::analysis::mollify::mollify;
use mixfrac::analysis::{density_diagnostics, difference_operator, ito_residual, HDelta, ItoFunction};
use mixfrac::coeffs::{linear, sin};
use mixfrac::fraccalc::{holder_norm, SampledFunction};
use mixfrac::paths::{FbmGenerator, FbmMethod, Hurst};
use mixfrac::solver::{coupled_paths, euler_mixed, simulate, MixedSdeProblem, Scheme};
use mixfrac::transform::TransformG;
use mixfrac::{stats, Execution, TimeGrid};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transform_inverts_and_increases(
        first in -2.0f64..2.0,
        gaps in prop::collection::vec(0.05f64..1.5, 0..4),
        alphas in prop::collection::vec(-20.0f64..20.0, 4),
        probes in prop::collection::vec(-4.0f64..5.0, 32),
    ) {
        let mut bps = vec![first];
        for g in &gaps {
            bps.push(bps.last().unwrap() + g);
        }
        let g = TransformG::new(bps.clone(), alphas[..bps.len()].to_vec()).unwrap();
        for &x in &probes {
            let y = g.g(x);
            prop_assert!((g.inverse(y) - x).abs() <= 1e-10 * (1.0 + x.abs()));
            prop_assert!(g.g_prime(x) > 0.0);
        }
        let (lo, hi) = g.derivative_range(first - 1.0, bps.last().unwrap() + 1.0, 4000);
        prop_assert!(lo > 0.0 && hi.is_finite());
        for &xi in &bps {
            prop_assert_eq!(g.g(xi), xi);
        }
    }

    #[test]
    fn difference_operator_forms_agree(x in -3.0f64..3.0, h in 0.001f64..0.8, m in 0u32..7) {
        let phi = |y: f64| (2.0 * y).sin() + 0.3 * y * y;
        let direct = difference_operator(phi, x, h, m);
        let recursive = difference_operator_recursive(&phi, x, h, m);
        prop_assert!((direct - recursive).abs() <= 1e-11 * 2f64.powi(m as i32));
    }

    #[test]
    fn h_delta_is_one_lipschitz(x in -8.0f64..8.0, dx in -0.5f64..0.5, delta in 0.05f64..0.9) {
        let b = sin(1.0, 1.0, 0.0);
        let h = HDelta::with_defaults(&b, delta).unwrap();
        let (u, v) = (h.eval(x), h.eval(x + dx));
        prop_assert!((u - v).abs() <= dx.abs() + 1e-9);
        prop_assert!((0.0..=delta).contains(&u));
    }
}

#[test]
fn coupling_restricts_bit_for_bit() {
    let problem = MixedSdeProblem::sign_drift();
    let checks = coupled_paths(&problem, &[16, 64], 256, 20, 4, Execution::Auto, |coarse, w, bh| {
        let mut ok = true;
        for (cw, cb) in coarse {
            let factor = 256 / cw.grid().steps();
            for j in 0..=cw.grid().steps() {
                ok &= cw.values()[j].to_bits() == w.values()[j * factor].to_bits();
                ok &= cb.values()[j].to_bits() == bh.values()[j * factor].to_bits();
                ok &= cw.grid().nodes()[j].to_bits() == w.grid().nodes()[j * factor].to_bits();
            }
        }
        Ok(ok)
    })
    .unwrap();
    assert!(checks.iter().all(|&ok| ok));
    assert!(coupled_paths(&problem, &[48], 256, 1, 4, Execution::Auto, |_, _, _| Ok(())).is_err());
}

#[test]
fn solution_holder_norm_is_stable_under_refinement() {
    let problem = MixedSdeProblem::sign_drift();
    let norms = coupled_paths(&problem, &[256], 512, 200, 8, Execution::Auto, |coarse, w, bh| {
        let (cw, cb) = &coarse[0];
        let norm = |x: mixfrac::SampledPath| holder_norm(&SampledFunction::from_path(x, None)?, 0.45);
        let c = norm(euler_mixed(&problem, cw, cb)?.x)?;
        let f = norm(euler_mixed(&problem, w, bh)?.x)?;
        Ok((c, f))
    })
    .unwrap();
    let coarse: Vec<f64> = norms.iter().map(|n| n.0).collect();
    let fine: Vec<f64> = norms.iter().map(|n| n.1).collect();
    let ratio = stats::mean(&fine) / stats::mean(&coarse);
    assert!(ratio <= 1.5 && ratio >= 1.0 / 1.5, "ratio {ratio}");
}

#[test]
fn mollified_residual_approaches_generalized_residual() {
    let problem = MixedSdeProblem::sign_drift();
    let grid = problem.grid(1024).unwrap();
    let noise = problem.noise(grid, 2).unwrap();
    let f = ItoFunction::signed_half_square();
    let solutions: Vec<_> = (0..40)
        .map(|p| {
            let (w, bh) = noise.sample(p);
            euler_mixed(&problem, &w, &bh).unwrap()
        })
        .collect();
    let base: Vec<f64> = solutions.iter().map(|s| ito_residual(&problem, s, &f).unwrap()).collect();
    let gaps: Vec<f64> = [4, 16, 64]
        .iter()
        .map(|&n| {
            let fm = mollify(&f, n);
            let diffs: Vec<f64> = solutions
                .iter()
                .zip(&base)
                .map(|(s, r)| (ito_residual(&problem, s, &fm).unwrap() - r).abs())
                .collect();
            stats::mean(&diffs)
        })
        .collect();
    assert!(stats::strictly_decreasing(&gaps), "{gaps:?}");
    assert!(gaps[2] < 0.01, "{gaps:?}");
}

#[test]
fn smoothing_statistic_decays_with_shift() {
    let problem = MixedSdeProblem::sign_drift();
    let grid = problem.grid(128).unwrap();
    let terminal: Vec<f64> = simulate(&problem, Scheme::Transformed, grid, 20_000, 5, Execution::Auto)
        .unwrap()
        .iter()
        .map(|s| s.terminal())
        .collect();
    let config = DensityConfig::default();
    let r = density_diagnostics(&terminal, &problem.triple.b, &config).unwrap();
    for probe in ["cos(1x)", "cos(2x)", "bump"] {
        let values: Vec<f64> =
            config.shifts.iter().map(|&h| r.smoothing.iter().find(|e| e.probe == probe && e.shift == h).unwrap().value).collect();
        assert!(values[2] < values[0], "{probe}: {values:?}");
    }
}

#[test]
fn fbm_generators_share_invariants() {
    let hurst = Hurst::new(0.7).unwrap();
    let grid = Arc::new(TimeGrid::uniform(1.0, 64).unwrap());
    for method in [FbmMethod::Cholesky, FbmMethod::Circulant, FbmMethod::Volterra] {
        let g = FbmGenerator::new(grid.clone(), hurst, method).unwrap();
        let a = g.sample_path(3, 7);
        assert_eq!(a.values().len(), 65);
        assert_eq!(a.values()[0], 0.0);
        assert!(a.values().iter().all(|v| v.is_finite()));
        assert_eq!(a.values(), g.sample_path(3, 7).values(), "{method:?} is not reproducible");
        assert_ne!(a.values(), g.sample_path(3, 8).values());
        // Var B_T = T^{2H}
        let ends: Vec<f64> = (0..4000).map(|p| g.sample_path(1, p).terminal()).collect();
        assert!((stats::variance(&ends) - 1.0).abs() < 0.08, "{method:?}");
    }
    for h in [0.5, 1.0, 0.3, f64::NAN] {
        assert!(Hurst::new(h).is_err());
    }
}

#[test]
fn linear_problem_matches_explicit_solution() {
    // dX = X dt + dW with c = 0: X_T = e^T X_0 + ∫ e^{T-s} dW.
    let triple = mixfrac::coeffs::CoefficientTriple {
        a: linear(1.0, 0.0),
        b: mixfrac::coeffs::constant(1.0),
        c: mixfrac::coeffs::constant(0.0),
    };
    let problem = MixedSdeProblem::new(triple, 1.0, 1.0, 0.7).unwrap();
    let grid = problem.grid(2048).unwrap();
    let noise = problem.noise(grid.clone(), 6).unwrap();
    for p in 0..5 {
        let (w, bh) = noise.sample(p);
        let x = euler_mixed(&problem, &w, &bh).unwrap().terminal();
        let t = grid.nodes();
        let exact = 1f64.exp()
            + (0..grid.steps()).map(|k| (1.0 - t[k]).exp() * (w.values()[k + 1] - w.values()[k])).sum::<f64>();
        assert!((x - exact).abs() < 0.01, "{x} vs {exact}");
    }
}
