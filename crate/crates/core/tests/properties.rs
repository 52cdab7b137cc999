use proptest::prelude::*;
use solitonscope_core::*;
use std::f64::consts::PI;

fn grid_for(three_d: bool) -> RadialGrid {
    if three_d {
        RadialGrid::radial(30.0, 1024).unwrap()
    } else {
        RadialGrid::line(10.0 * PI, 1024).unwrap()
    }
}

fn recipe() -> impl Strategy<Value = Recipe> {
    prop_oneof![
        (0.2f64..3.0, 0.6f64..2.5, -1.0f64..1.0).prop_map(|(amplitude, width, focusing)| Recipe::GaussianLens {
            amplitude,
            width,
            focusing
        }),
        (0.3f64..2.0, 0.8f64..1.2, -0.5f64..0.5).prop_map(|(energy, amplitude, focusing)| Recipe::LensSoliton {
            energy,
            amplitude,
            focusing
        }),
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-13 * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conserved_set_is_gauge_invariant(r in recipe(), alpha in -PI..PI, three_d in any::<bool>()) {
        let psi = make_initial_condition(&r, &grid_for(three_d)).unwrap();
        let nl = NonlinearitySpec::cubic_focusing();
        let a = conserved_set(&psi, &nl).unwrap();
        let b = conserved_set(&psi.rotated(alpha), &nl).unwrap();
        prop_assert!(close(a.mass, b.mass));
        prop_assert!(close(a.energy, b.energy));
        prop_assert!(close(a.variance, b.variance));
        prop_assert!((a.dilation - b.dilation).abs() <= 1e-13 * a.h1_norm.powi(2) * 30.0);
        prop_assert!(close(a.h1_norm, b.h1_norm));
    }

    #[test]
    fn hydro_frame_is_gauge_invariant(r in recipe(), alpha in -PI..PI, three_d in any::<bool>()) {
        let psi = make_initial_condition(&r, &grid_for(three_d)).unwrap();
        let a = hydro_frame(&psi, None);
        let b = hydro_frame(&psi.rotated(alpha), None);
        let jmax = a.current.iter().map(|j| j.abs()).fold(1e-300, f64::max);
        let rmax = a.rho.iter().copied().fold(0.0, f64::max);
        for k in 0..a.rho.len() {
            prop_assert!((a.rho[k] - b.rho[k]).abs() <= 1e-14 * rmax);
            prop_assert!((a.current[k] - b.current[k]).abs() <= 1e-12 * jmax.max(rmax));
            prop_assert_eq!(a.zero_set_mask[k], b.zero_set_mask[k]);
        }
    }

    #[test]
    fn focusing_lens_starts_incoming(amplitude in 0.2f64..3.0, width in 0.6f64..2.5, b in 0.01f64..1.0, three_d in any::<bool>()) {
        let grid = grid_for(three_d);
        for r in [
            Recipe::GaussianLens { amplitude, width, focusing: b },
            Recipe::LensSoliton { energy: 1.0, amplitude: 1.0, focusing: b },
        ] {
            let psi = make_initial_condition(&r, &grid).unwrap();
            let status = iwc_indicator(&hydro_frame(&psi, None));
            prop_assert!(status.satisfied, "{:?}: worst {:e}", r, status.worst);
        }
    }

    #[test]
    fn kinetic_splitting_holds_for_nodeless_data(r in recipe(), three_d in any::<bool>()) {
        let psi = make_initial_condition(&r, &grid_for(three_d)).unwrap();
        prop_assume!(hydro_frame(&psi, None).is_nodeless());
        let split = kinetic_splitting(&psi);
        prop_assert!(split.relative_error() <= 1e-8, "{:e}", split.relative_error());
    }

    #[test]
    fn step_commutes_with_global_phase(r in recipe(), alpha in -PI..PI, three_d in any::<bool>()) {
        let psi = make_initial_condition(&r, &grid_for(three_d)).unwrap();
        let nl = NonlinearitySpec::cubic_focusing();
        let method = Method::for_dimension(psi.grid.dimension());
        let a = step_once(&psi, &nl, 1e-3, method).unwrap().rotated(alpha);
        let b = step_once(&psi.rotated(alpha), &nl, 1e-3, method).unwrap();
        let scale = psi.max_abs();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x - y).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn weighted_norms_are_gauge_invariant(r in recipe(), alpha in -PI..PI) {
        let psi = make_initial_condition(&r, &grid_for(false)).unwrap();
        for norm in [Norm::L2, Norm::H1, Norm::Lp(4.0), Norm::Hs(0.5), Norm::WeightedX2] {
            let a = weighted_norm(&psi, norm).unwrap();
            let b = weighted_norm(&psi.rotated(alpha), norm).unwrap();
            prop_assert!(close(a, b), "{:?}: {} vs {}", norm, a, b);
        }
    }
}
