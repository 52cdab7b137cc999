use num_complex::Complex64;
use solitonscope_core::phase::{default_delta, phase_slope_window};
use solitonscope_core::profile::bump;
use solitonscope_core::*;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn soliton_run() -> &'static Trajectory {
    static RUN: OnceLock<Trajectory> = OnceLock::new();
    RUN.get_or_init(|| {
        let grid = RadialGrid::line(20.0 * PI, 2048).unwrap();
        let psi = make_initial_condition(&Recipe::ExactSoliton { energy: 1.0 }, &grid).unwrap();
        let cfg = SolverConfig::new(Method::SplitStepFourier, 1e-3, 10.0, 100);
        evolve(&psi, &NonlinearitySpec::cubic_focusing(), &cfg).unwrap()
    })
}

fn soliton_sheet() -> PhaseSheet {
    let traj = soliton_run();
    let boxes = find_good_boxes(traj, 1.0, 0.5, 0.0).unwrap();
    assert_eq!(boxes.len(), 1);
    lift_phase(traj, &boxes[0]).unwrap()
}

#[test]
fn good_box_of_the_soliton() {
    let traj = soliton_run();
    let boxes = find_good_boxes(traj, 1.0, 0.5, 0.0).unwrap();
    let (lo, hi) = boxes[0].interval;
    // η ≥ 1/2 where √2 sech(x) ≥ 1/2, |x| ≤ arcosh(2√2) ≈ 1.7005
    let h = traj.grid().spacing();
    assert!(hi <= 1.7005 && hi > 1.7005 - h, "{hi}");
    assert!(lo >= -1.7005 && lo < -1.7005 + h, "{lo}");
    assert!(boxes[0].reference.0.abs() < 1e-12);
    assert!(find_good_boxes(traj, 10.0, 0.5, 0.0).unwrap().is_empty());
    assert!(find_good_boxes(traj, 0.0, 0.5, 0.0).is_err());
    assert!((default_delta(traj) - 0.5 * 2f64.sqrt()).abs() < 1e-6);
}

#[test]
fn lift_reconstructs_and_is_vortex_free() {
    let traj = soliton_run();
    let sheet = soliton_sheet();
    let max_psi = traj.snapshots[0].max_abs();
    assert!(sheet.reconstruction_error(traj) <= 1e-10 * max_psi);
    assert!(sheet.plaquette_windings(traj).iter().all(|&w| w == 0));
    assert!(sheet.path_discrepancy(traj) < 1e-9);
}

#[test]
fn soliton_phase_slope_is_its_energy() {
    let sheet = soliton_sheet();
    let slope = phase_slope(&sheet).unwrap();
    assert!((slope.e_hat - 1.0).abs() <= 1e-4, "{}", slope.e_hat);
    // the splitting error makes the sech breathe at O(dt²); over this short
    // run that leaves a few 1e-8 of spread between node slopes
    assert!(slope.r_spread <= 1e-7, "{:e}", slope.r_spread);
    assert!(!slope.non_convergence);
    // ten periods 2π need t ≥ 63; this run is only 10 long
    assert!(slope.short_window);
    let whole = phase_slope_window(&sheet, 1.0).unwrap();
    assert!((whole.e_hat - 1.0).abs() <= 1e-4);
    assert!(phase_slope_window(&sheet, 0.0).is_err());
}

#[test]
fn lifts_of_rotated_data_differ_by_the_rotation() {
    let traj = soliton_run();
    let alpha = 2.9;
    let rotated = Trajectory::from_snapshots(
        traj.snapshots.iter().map(|s| s.rotated(alpha)).collect(),
        traj.nonlinearity,
        traj.dt,
        traj.output_stride,
    )
    .unwrap();
    let gbox = find_good_boxes(traj, 1.0, 0.5, 0.0).unwrap()[0];
    let a = lift_phase(traj, &gbox).unwrap();
    let b = lift_phase(&rotated, &gbox).unwrap();
    // θ_b = θ_a - α + 2πm for a single integer m
    let offset = b.theta[0][0] - a.theta[0][0] + alpha;
    let m = (offset / (2.0 * PI)).round();
    assert!((offset - 2.0 * PI * m).abs() < 1e-12);
    for (ra, rb) in a.theta.iter().zip(&b.theta) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((y - x + alpha - 2.0 * PI * m).abs() < 1e-12);
        }
    }
}

#[test]
fn theta_average_identity_for_the_soliton() {
    let traj = soliton_run();
    let sheet = soliton_sheet();
    let phi: Vec<f64> = sheet.coords.iter().map(|&x| bump(x / 1.5).0).collect();
    let avg = theta_average_identity(&sheet, traj, &traj.nonlinearity, &phi).unwrap();
    // both sides equal -E ∫ φ u²
    let h = traj.grid().spacing();
    let exact: f64 = -sheet
        .coords
        .iter()
        .zip(&phi)
        .map(|(&x, p)| p * 2.0 / x.cosh().powi(2) * h)
        .sum::<f64>();
    assert!((avg.lhs - exact).abs() <= 1e-4 * exact.abs(), "{} vs {exact}", avg.lhs);
    assert!(
        (avg.rhs - avg.lhs).abs() <= 1e-4 * exact.abs(),
        "{} vs {}",
        avg.rhs,
        avg.lhs
    );
    assert!(avg.lemma_term.abs() < 1e-8);
    let mut bad = phi.clone();
    bad[0] = 1.0;
    assert!(theta_average_identity(&sheet, traj, &traj.nonlinearity, &bad).is_err());
}

#[test]
fn polar_residuals_shrink_with_the_grid() {
    let nl = NonlinearitySpec::cubic_focusing();
    let mut previous: Option<(f64, f64)> = None;
    for n in [512, 1024] {
        let grid = RadialGrid::line(10.0 * PI, n).unwrap();
        let psi = make_initial_condition(
            &Recipe::LensSoliton {
                energy: 1.0,
                amplitude: 1.05,
                focusing: 0.02,
            },
            &grid,
        )
        .unwrap();
        let cfg = SolverConfig::new(Method::SplitStepFourier, 1e-3, 1.0, 10);
        let traj = evolve(&psi, &nl, &cfg).unwrap();
        let gbox = find_good_boxes(&traj, 1.0, 0.5, 0.0).unwrap()[0];
        let sheet = lift_phase(&traj, &gbox).unwrap();
        let res = polar_residuals(&sheet, &traj, &nl).unwrap();
        println!("n = {n}: res_a {:e}, res_b {:e}", res.res_a, res.res_b);
        if let Some((a, b)) = previous {
            assert!(
                a >= 2.0 * res.res_a && b >= 2.0 * res.res_b,
                "{a:e}/{:e}, {b:e}/{:e}",
                res.res_a,
                res.res_b
            );
        }
        previous = Some((res.res_a, res.res_b));
    }
}

fn synthetic(values: impl Fn(f64, f64) -> Complex64, times: &[f64]) -> Trajectory {
    let grid = RadialGrid::line(1.0, 64).unwrap();
    let snaps = times
        .iter()
        .map(|&t| WaveField::new(grid, grid.coords().iter().map(|&x| values(x, t)).collect(), t).unwrap())
        .collect();
    Trajectory::from_snapshots(snaps, NonlinearitySpec::free(), 0.1, 1).unwrap()
}

#[test]
fn under_resolved_phase_is_refused() {
    let grid = RadialGrid::line(1.0, 64).unwrap();
    let k = 0.97 * PI / grid.spacing();
    let traj = synthetic(|x, _| Complex64::from_polar(1.0, k * x), &[0.0, 0.1, 0.2]);
    let gbox = find_good_boxes(&traj, 1.0, 0.5, 0.0).unwrap()[0];
    assert!(matches!(lift_phase(&traj, &gbox), Err(Error::PhaseJump { .. })));
}

#[test]
fn a_space_time_vortex_winds_once() {
    let times: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
    let traj = synthetic(|x, t| Complex64::new(x - 0.05, t - 0.55), &times);
    let gbox = GoodBox {
        interval: (-0.6, 0.6),
        t_start: 0.0,
        t_end: 1.0,
        delta: 1e-6,
        reference: (-0.6, 0.0),
    };
    let sheet = lift_phase(&traj, &gbox).unwrap();
    let windings = sheet.plaquette_windings(&traj);
    assert_eq!(windings.iter().filter(|&&w| w != 0).count(), 1);
    assert_eq!(windings.iter().map(|w| w.abs()).sum::<i64>(), 1);
    assert!(sheet.path_discrepancy(&traj) > 1.0);
}

#[test]
fn boxes_must_fit_the_grid() {
    let traj = soliton_run();
    let mut gbox = find_good_boxes(traj, 1.0, 0.5, 0.0).unwrap()[0];
    gbox.interval = (-100.0, 1.0);
    assert!(matches!(lift_phase(traj, &gbox), Err(Error::BadBox(_))));
    gbox.interval = (-5.0, 5.0);
    // the tails fall below δ/2
    assert!(matches!(lift_phase(traj, &gbox), Err(Error::BadBox(_))));
}
