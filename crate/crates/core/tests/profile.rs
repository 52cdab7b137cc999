use solitonscope_core::model::sech_profile;
use solitonscope_core::profile::{shoot_profile, solve_profile, weak_residuals, DistanceNorm};
use solitonscope_core::*;
use std::f64::consts::PI;

fn line() -> RadialGrid {
    RadialGrid::line(20.0 * PI, 2048).unwrap()
}

fn ball() -> RadialGrid {
    RadialGrid::radial(40.0, 4096).unwrap()
}

/// Implicit midpoint for `u'' + (2/r) u' = (E + F(u)) u` from `u(0) = a`.
/// Second order; run at `h` and `h/2` and Richardson-combined to fourth.
fn midpoint_trajectory(a: f64, energy: f64, nl: &NonlinearitySpec, h: f64, r_end: f64) -> Vec<(f64, f64)> {
    let rhs = |r: f64, u: f64, v: f64| -> (f64, f64) {
        let f = (energy + nl.eval(u.abs())) * u;
        (v, f - 2.0 / r * v)
    };
    let steps = (r_end / h).round() as usize;
    let mut out = vec![(0.0, a)];
    let (mut u, mut v) = (a, 0.0);
    for i in 0..steps {
        let rm = (i as f64 + 0.5) * h;
        let (mut un, mut vn) = (u, v);
        for _ in 0..100 {
            let (du, dv) = rhs(rm, 0.5 * (u + un), 0.5 * (v + vn));
            let (nu, nv) = (u + h * du, v + h * dv);
            let done = (nu - un).abs() < 1e-16 * a && (nv - vn).abs() < 1e-16 * a;
            un = nu;
            vn = nv;
            if done {
                break;
            }
        }
        u = un;
        v = vn;
        out.push(((i + 1) as f64 * h, u));
    }
    out
}

#[test]
fn line_shooting_reproduces_sech() {
    let grid = line();
    for energy in [0.5, 1.0, 2.0] {
        let p = shoot_profile(energy, &NonlinearitySpec::cubic_focusing(), &grid).unwrap();
        let worst = grid
            .coords()
            .iter()
            .zip(&p.u)
            .map(|(&x, u)| (u - sech_profile(energy, x)).abs())
            .fold(0.0, f64::max);
        println!(
            "E = {energy}: sup |u - sech| = {worst:e}, ode_residual = {:e}",
            p.ode_residual
        );
        assert!(worst <= 1e-8, "E = {energy}: {worst:e}");
        assert_eq!(p.node_count, 0);
    }
}

#[test]
fn ball_profile_agrees_with_midpoint_integrator() {
    let grid = ball();
    let nl = NonlinearitySpec::cubic_focusing();
    let p = solve_profile_3d(1.0, &nl, &grid).unwrap();
    let h = grid.spacing() / 16.0;
    let r_end = 8.0;
    let coarse = midpoint_trajectory(p.u0, 1.0, &nl, h, r_end);
    let fine = midpoint_trajectory(p.u0, 1.0, &nl, 0.5 * h, r_end);
    let mut worst: f64 = 0.0;
    for (k, &u) in p.u.iter().enumerate() {
        let r = grid.coord(k);
        if r > r_end {
            break;
        }
        let i = (r / h).round() as usize;
        let oracle = (4.0 * fine[2 * i].1 - coarse[i].1) / 3.0;
        worst = worst.max((u - oracle).abs());
    }
    println!(
        "3D E=1: u0 = {:.12}, sup |shoot - midpoint| on [0, {r_end}] = {worst:e}",
        p.u0
    );
    assert!(worst <= 1e-7, "{worst:e}");
}

#[test]
fn cubic_scaling_symmetry_in_both_dimensions() {
    let nl = NonlinearitySpec::cubic_focusing();
    // u_E(r) = √E u_1(√E r) with √E = 1.5 (a power of two would make the
    // two shots bitwise identical): the E grid is the E = 1 grid over 1.5
    let pairs = [
        (
            RadialGrid::radial(40.0 / 1.5, 2049).unwrap(),
            RadialGrid::radial(40.0, 2049).unwrap(),
        ),
        (
            RadialGrid::line(20.0 * PI / 1.5, 2048).unwrap(),
            RadialGrid::line(20.0 * PI, 2048).unwrap(),
        ),
    ];
    for (ge, g1) in pairs {
        let pe = shoot_profile(2.25, &nl, &ge).unwrap();
        let p1 = shoot_profile(1.0, &nl, &g1).unwrap();
        let worst =
            pe.u.iter()
                .zip(&p1.u)
                .map(|(a, b)| (a - 1.5 * b).abs())
                .fold(0.0, f64::max);
        println!("{:?}: scaling defect {worst:e}", ge.dimension());
        assert!(worst <= 1e-7, "{worst:e}");
        assert!(worst > 0.0, "shots should not coincide bit for bit");
    }
}

#[test]
fn weak_form_residuals_are_small() {
    let nl = NonlinearitySpec::cubic_focusing();
    for (grid, energy) in [(line(), 1.0), (line(), 2.5), (ball(), 1.0), (ball(), 0.6)] {
        let p = solve_profile(energy, &nl, &grid).unwrap();
        let res = weak_residuals(&p, &nl);
        assert_eq!(res.len(), 8);
        for r in &res {
            assert!(
                r.ratio() <= 1e-6,
                "E = {energy}, bump at {}: {:e}",
                r.bump.center,
                r.ratio()
            );
        }
    }
}

#[test]
fn weak_residual_detects_wrong_energy() {
    let nl = NonlinearitySpec::cubic_focusing();
    let mut p = solve_profile_1d(1.0, &nl, &line()).unwrap();
    p.energy_param = 1.1;
    let worst = weak_residuals(&p, &nl).iter().map(|r| r.ratio()).fold(0.0, f64::max);
    assert!(worst > 1e-3);
}

#[test]
fn fit_recovers_the_soliton_energy() {
    let nl = NonlinearitySpec::cubic_focusing();
    let grid = line();
    for energy in [1.0, 2.5] {
        let eta: Vec<f64> = grid.coords().iter().map(|&x| sech_profile(energy, x)).collect();
        let (e_fit, dist) = fit_profile(&eta, &nl, &grid, (-3.0, 3.0)).unwrap();
        assert!((e_fit - energy).abs() <= 1e-6 * energy, "{e_fit}");
        assert!(dist < 1e-6);
    }
}

#[test]
fn fit_in_three_dimensions() {
    let nl = NonlinearitySpec::cubic_focusing();
    let grid = ball();
    let target = solve_profile_3d(1.7, &nl, &grid).unwrap();
    let (e_fit, _) = fit_profile(&target.u, &nl, &grid, (0.0, 3.0)).unwrap();
    assert!((e_fit - 1.7).abs() <= 1e-6 * 1.7, "{e_fit}");
}

#[test]
fn fit_without_a_minimum_inside_the_range_is_reported() {
    let nl = NonlinearitySpec::cubic_focusing();
    let grid = line();
    let eta: Vec<f64> = grid.coords().iter().map(|&x| sech_profile(1.0, x)).collect();
    let err = profile::fit_profile_in(&eta, &nl, &grid, (-3.0, 3.0), (2.0, 50.0)).unwrap_err();
    assert!(matches!(err, Error::NoBracket(_)), "{err}");
}

#[test]
fn distances_vanish_on_the_profile_itself() {
    let nl = NonlinearitySpec::cubic_focusing();
    let p = solve_profile_1d(1.0, &nl, &line()).unwrap();
    for norm in [DistanceNorm::L2, DistanceNorm::Hs(0.5), DistanceNorm::Sup] {
        assert_eq!(profile_distance(&p.u, &p, (-4.0, 4.0), norm).unwrap(), 0.0);
    }
    let shifted: Vec<f64> = p.u.iter().map(|u| u + 1e-3).collect();
    let d = profile_distance(&shifted, &p, (-4.0, 4.0), DistanceNorm::Sup).unwrap();
    assert!((d - 1e-3).abs() < 1e-15);
}

#[test]
fn profile_distance_rejects_bad_intervals() {
    let nl = NonlinearitySpec::cubic_focusing();
    let p = solve_profile_3d(1.0, &nl, &ball()).unwrap();
    assert!(profile_distance(&p.u, &p, (2.0, 1.0), DistanceNorm::L2).is_err());
    assert!(profile_distance(&p.u, &p, (0.0, 50.0), DistanceNorm::L2).is_err());
    assert!(profile_distance(&p.u, &p, (0.0, 5.0), DistanceNorm::Hs(1.5)).is_err());
}

#[test]
fn supercritical_power_is_rejected_in_three_dimensions() {
    let nl = NonlinearitySpec::focusing_power(4.0, -1.0).unwrap();
    assert!(matches!(
        solve_profile_3d(1.0, &nl, &ball()),
        Err(Error::Unsupported(_))
    ));
}

#[test]
fn quintic_line_profile_matches_its_closed_form() {
    // F(s) = -s⁴: u(x) = (3E)^{1/4} sech(2√E x)^{1/2}
    let nl = NonlinearitySpec::focusing_power(4.0, -1.0).unwrap();
    let grid = line();
    let p = solve_profile_1d(1.0, &nl, &grid).unwrap();
    let worst = grid
        .coords()
        .iter()
        .zip(&p.u)
        .map(|(&x, u)| (u - 3f64.powf(0.25) / (2.0 * x).cosh().sqrt()).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst:e}");
}
