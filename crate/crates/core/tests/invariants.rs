//! Cross-module invariants that exercise more than one subsystem at once.

use minann_core::asymptotics::EndAsymptotics;
use minann_core::quad;
use minann_core::solver::{solve, solve_nonvertical_in_window, Diagnostics, SolveTarget};
use minann_core::wdata::WeierstrassFamily;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Two solver representatives of the same flux (different scan windows),
/// after the item-6 normalization, describe asymptotic surfaces: their
/// multigraph heights agree pointwise at large radius.
#[test]
fn same_flux_representatives_are_asymptotic() {
    let target = SolveTarget::new(2.0, 0.0).unwrap();
    let first = solve(&target).unwrap();
    let Diagnostics::NonVertical { window_index, .. } = first.diagnostics else { panic!() };
    let second = solve_nonvertical_in_window(&target, window_index + 1).unwrap();

    let ctx1 = EndAsymptotics::new(&first.family, 1e4).unwrap();
    let ctx2 = EndAsymptotics::new(&second.family, 1e4).unwrap();

    let r = 1e4;
    // One window feasible for both families.
    let w1 = ctx1.separation_window(r, r, 0.05, 2.0, 17);
    let w2 = ctx2.separation_window(r, r, 0.05, 2.0, 17);
    let window: Vec<f64> = if w1[0] > w2[0] { w1 } else { w2 };

    let mut sup = 0.0f64;
    for &theta in &window {
        for branch in [1u8, 2u8] {
            let u1 = ctx1.extract_multigraph(r, theta, branch).unwrap().u;
            let u2 = ctx2.extract_multigraph(r, theta, branch).unwrap().u;
            sup = sup.max((u1 - u2).abs());
        }
    }
    assert!(sup < 0.05, "pointwise multigraph gap {sup}");
}

/// Gradient decay proxy: the finite-difference gradient of the multigraph
/// heights (in the pulled-back flat metric) decreases between r = 1e2 and 1e4.
#[test]
fn multigraph_gradient_decays() {
    let res = solve(&SolveTarget::new(0.0, TAU).unwrap()).unwrap();
    let ctx = EndAsymptotics::new(&res.family, 1e4).unwrap();
    let grad_at = |r: f64| -> f64 {
        let thetas = ctx.theta_window(&[r], 1.0, 9);
        let dth = 1e-3;
        let dr = 1e-3 * r;
        let mut worst = 0.0f64;
        for &th in &thetas {
            let u0 = ctx.extract_multigraph(r, th, 1).unwrap().u;
            let ur = ctx.extract_multigraph(r + dr, th, 1).unwrap().u;
            let ut = ctx.extract_multigraph(r, th + dth, 1).unwrap().u;
            let g = ((ur - u0) / dr).hypot((ut - u0) / dth / r);
            worst = worst.max(g);
        }
        worst
    };
    let g_small = grad_at(1e2);
    let g_large = grad_at(1e4);
    assert!(g_large < g_small, "gradient proxy {g_large} !< {g_small}");
}

/// Path independence of the closed-form height: the real part of `h(z) dz`
/// integrates to zero around the circle `|z| = R' + 1`.
#[test]
fn x3_loop_quadrature_vanishes() {
    let fams = [
        WeierstrassFamily::helicoid(),
        WeierstrassFamily::non_vertical_flux(0.8, Complex64::new(2.0, -1.0), 1.3).unwrap(),
        WeierstrassFamily::vertical_flux(Complex64::new(4.8, 0.3), 1.0).unwrap(),
        WeierstrassFamily::generic_exp(vec![Complex64::new(0.5, 0.2)], 0.7, Complex64::new(0.2, 0.1))
            .unwrap(),
    ];
    for fam in &fams {
        let r = fam.domain_radius() + 1.0;
        let loop_int = quad::integrate_arc(|z| fam.dh_coeff(z).unwrap(), r, 0.0, TAU, 1e-13).unwrap();
        assert!(loop_int.re.abs() < 1e-10, "Re loop integral {}", loop_int.re);
    }
}

/// Full-circle displacement of a solved family closes (period certificate
/// seen by the surface integrator), and a 2π conformal mesh shares its first
/// and last columns up to that closure.
#[test]
fn mesh_seam_closes_for_solved_family() {
    let res = solve(&SolveTarget::new(0.0, TAU).unwrap()).unwrap();
    let rp = res.family.domain_radius();
    let grid = minann_core::surface::sample_mesh(
        &res.family,
        &minann_core::surface::MeshParams {
            r_min: rp,
            r_max: rp + 3.0,
            nr: 4,
            ntheta: 9,
            theta_span: TAU,
        },
    )
    .unwrap();
    for i in 0..grid.nr() {
        let a = grid.point(i, 0).position;
        let b = grid.point(i, grid.ntheta() - 1).position;
        for k in 0..3 {
            assert!((a[k] - b[k]).abs() < 1e-8, "seam gap at row {i}: {a:?} vs {b:?}");
        }
    }
}
