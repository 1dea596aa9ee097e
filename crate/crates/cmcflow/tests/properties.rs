//! Property tests for the comparison machinery, the causal integrators, and
//! the inequality helpers.

mod common;

use cmcflow::causal::{
    confinement_bound, confinement_limit, null_geodesic, timelike_geodesic, Orientation,
};
use cmcflow::comparison::{mean_curvature_bound, raychaudhuri_integrate};
use cmcflow::estimates::{peter_paul_check, select_epsilons};
use cmcflow::spacetime::{
    example_three_torus, FiberSpec, MultiWarpedSpacetime, WarpingLaw,
};
use common::SplitMix;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Focusing domination: any curvature profile with ric >= -n*lambda and a
    // start below the bound keeps the integrated mean curvature below the
    // bound everywhere.
    #[test]
    fn prop_raychaudhuri_comparison(
        lambda in 0.0_f64..1.5,
        u0 in 0.2_f64..2.0,
        span in 0.5_f64..8.0,
        c0 in -1.0_f64..1.0,
        c1 in -1.0_f64..1.0,
        c2 in -0.5_f64..0.5,
        frac in -1.0_f64..1.0,
    ) {
        let n = 3usize;
        // ric = -n*lambda + (polynomial)^2 >= -n*lambda.
        let ric = move |u: f64| -> f64 {
            let p = c0 + c1 * u + c2 * u * u;
            -(n as f64) * lambda + p * p
        };
        let bound0 = mean_curvature_bound(n, u0, lambda).unwrap();
        let h0 = bound0 * frac;
        let trace = raychaudhuri_integrate(ric, h0, u0, u0 + span, n, lambda, None::<fn(f64)->f64>).unwrap();
        for (u, h) in trace.u.iter().zip(&trace.h) {
            let b = mean_curvature_bound(n, *u, lambda).unwrap();
            prop_assert!(
                *h <= b + 1e-6 * b.abs().max(1.0),
                "H({u}) = {h} above bound {b}"
            );
        }
    }

    #[test]
    fn prop_bound_monotone(tau in 0.05_f64..20.0, lambda in 1e-6_f64..4.0, n in 1usize..5) {
        // coth saturates to 1 in f64 near sqrt(lambda) tau ~ 19; strict
        // monotonicity only holds below that rounding plateau.
        prop_assume!(lambda.sqrt() * tau * 1.5 < 15.0);
        let b = mean_curvature_bound(n, tau, lambda).unwrap();
        let b_later = mean_curvature_bound(n, tau * 1.5, lambda).unwrap();
        prop_assert!(b_later < b);
        let b_more_lambda = mean_curvature_bound(n, tau, lambda * 1.5).unwrap();
        prop_assert!(b_more_lambda > b);
        // Always above the asymptote.
        prop_assert!(b > n as f64 * lambda.sqrt());
    }

    #[test]
    fn prop_peter_paul_never_false(
        f in -1e3_f64..1e3,
        hs in -1e3_f64..1e3,
        lambda in 0.0_f64..3.0,
        n in 1usize..5,
    ) {
        let eps = select_epsilons(n, lambda);
        let out = peter_paul_check(f, hs, &eps);
        prop_assert!(out.ok, "{out:?}");
    }

    #[test]
    fn prop_confinement_monotone_in_emission_time(t0a in 2.0_f64..50.0, scale in 1.1_f64..4.0) {
        let m = example_three_torus(5.0);
        let early = confinement_bound(&m, 2, 1.0, t0a).unwrap();
        let late = confinement_bound(&m, 2, 1.0, t0a * scale).unwrap();
        prop_assert!(late > early);
        // And below the exact tail limit.
        let lim = confinement_limit(&m, 2, 1.0).unwrap().unwrap();
        prop_assert!(late < lim + 1e-12);
    }
}

fn random_future_model(rng: &mut SplitMix) -> MultiWarpedSpacetime {
    let n_fibers = 1 + (rng.next_u64() % 3) as usize;
    let fibers: Vec<FiberSpec> = (0..n_fibers)
        .map(|_| FiberSpec {
            dim: 1,
            period: rng.range(1.0, 8.0),
            law: match rng.next_u64() % 3 {
                0 => WarpingLaw::Power {
                    p: rng.range(0.2, 1.8),
                },
                1 => WarpingLaw::Exponential {
                    rate: rng.range(-0.5, 0.7),
                },
                _ => WarpingLaw::Constant {
                    value: rng.range(0.4, 2.5),
                },
            },
        })
        .collect();
    MultiWarpedSpacetime::new(0.0, None, fibers, 0.0).unwrap()
}

#[test]
fn geodesic_conservation_residuals_over_random_models() {
    let mut rng = SplitMix(97);
    for trial in 0..40 {
        let m = random_future_model(&mut rng);
        let d = m.spatial_dim();
        let momenta: Vec<f64> = (0..d).map(|_| rng.range(-2.0, 2.0)).collect();
        if momenta.iter().all(|p| p.abs() < 0.05) {
            continue;
        }
        let start = vec![0.0; d];
        let t0 = rng.range(3.0, 12.0);
        let t1 = rng.range(0.5, 2.0);
        let geo = null_geodesic(&m, t0, &start, &momenta, t1, Orientation::Past, 256).unwrap();
        assert!(
            geo.null_residual <= 1e-8,
            "trial {trial}: null residual {} ({m:?})",
            geo.null_residual
        );
        assert!(
            geo.momentum_residual <= 1e-8,
            "trial {trial}: momentum residual {} ({m:?})",
            geo.momentum_residual
        );
    }
}

#[test]
fn axis_aligned_momentum_is_extremal() {
    let m = example_three_torus(5.0);
    let axis = null_geodesic(
        &m,
        10.0,
        &[0.0; 3],
        &[0.0, 0.0, 1.0],
        1.0,
        Orientation::Past,
        256,
    )
    .unwrap();
    let extremal = axis.displacement(2).abs();
    let bound = confinement_bound(&m, 2, 1.0, 10.0).unwrap();
    assert!((extremal - bound).abs() < 1e-8);
    let mut rng = SplitMix(13);
    for _ in 0..200 {
        let momenta = [
            rng.range(-1.0, 1.0),
            rng.range(-1.0, 1.0),
            rng.range(0.1, 1.0),
        ];
        let geo =
            null_geodesic(&m, 10.0, &[0.0; 3], &momenta, 1.0, Orientation::Past, 128).unwrap();
        assert!(
            geo.displacement(2).abs() <= extremal + 1e-9,
            "mixed momenta beat the axis ray: {momenta:?}"
        );
    }
}

#[test]
fn slices_are_equidistant_along_normal_geodesics() {
    // Shooting the unit normal of a slice (zero spatial momentum) lands on
    // the (t0 + tau)-slice at proper time tau, exactly.
    let mut rng = SplitMix(31);
    for _ in 0..20 {
        let m = random_future_model(&mut rng);
        let d = m.spatial_dim();
        let t0 = rng.range(0.5, 3.0);
        let tau = rng.range(0.5, 10.0);
        let x0: Vec<f64> = (0..d).map(|_| rng.range(-1.0, 1.0)).collect();
        let geo = timelike_geodesic(&m, t0, &x0, &vec![0.0; d], t0 + tau, 64).unwrap();
        let proper = geo.sigma.last().unwrap();
        assert!(
            (proper - tau).abs() <= 1e-10 * tau.max(1.0),
            "proper time {proper} vs tau {tau}"
        );
        assert_eq!(geo.x(geo.ts.len() - 1), &x0[..], "normal geodesic drifted");
    }
}

#[test]
fn confinement_quadrature_matches_closed_forms() {
    let mut rng = SplitMix(59);
    for _ in 0..30 {
        let p = rng.range(0.2, 2.3);
        let m = MultiWarpedSpacetime::new(
            0.0,
            None,
            vec![FiberSpec {
                dim: 1,
                period: 1.0,
                law: WarpingLaw::Power { p },
            }],
            0.0,
        )
        .unwrap();
        let t1 = rng.range(0.3, 2.0);
        let t0 = t1 + rng.range(0.5, 30.0);
        let got = confinement_bound(&m, 0, t1, t0).unwrap();
        let exact = if (p - 1.0).abs() < 1e-12 {
            (t0 / t1).ln()
        } else {
            (t0.powf(1.0 - p) - t1.powf(1.0 - p)) / (1.0 - p)
        };
        assert!(
            (got - exact).abs() <= 1e-9 * exact.abs().max(1.0),
            "p = {p}: {got} vs {exact}"
        );
    }
}
