//! Acceptance suite: every criterion runs at its stated tolerance and prints
//! one pass/fail line (visible with `cargo test -- --nocapture`; a failing
//! criterion fails its test).

use minann_core::asymptotics::{symmetric_pair_defect, symmetry_defect, End, EndAsymptotics};
use minann_core::embed::check_embedded;
use minann_core::mesh::{export_mesh, MeshFormat};
use minann_core::periods::{closed_form_periods, contour_integral, ContourSpec, Integrand};
use minann_core::solver::{solve, Diagnostics, SolveTarget};
use minann_core::surface::{gauss_curvature, ring_sup_curvature, PathIntegrator};
use minann_core::wdata::{FamilyVariant, WeierstrassFamily};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use std::f64::consts::{PI, TAU};
use std::time::Instant;

fn pi2() -> f64 {
    4.0 * PI * PI
}

fn report(criterion: &str, pass: bool, detail: String) {
    println!("criterion {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn solved(a: f64, b: f64) -> minann_core::solver::SolveResult {
    solve(&SolveTarget::new(a, b).unwrap()).unwrap()
}

#[test]
fn criterion_01_residue_quadrature_agreement() {
    let start = Instant::now();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1309);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let t = rng.gen_range(0.5..2.0);
        let a = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(-PI..PI));
        let b = rng.gen_range(0.0..1.0);
        let nv = WeierstrassFamily::non_vertical_flux(t, a, b).unwrap();
        let av = Complex64::new(rng.gen_range(0.1..0.8), rng.gen_range(0.1..0.6));
        let vf = WeierstrassFamily::vertical_flux(av, rng.gen_range(0.1..1.0)).unwrap();
        for fam in [nv, vf] {
            let cf = closed_form_periods(&fam).unwrap();
            for mult in [2.0, 4.0] {
                let spec = ContourSpec::new(mult * fam.domain_radius(), 64).unwrap();
                for (sel, want) in [
                    (Integrand::GDh, cf.int_gdh),
                    (Integrand::DhOverG, cf.int_dh_over_g),
                    (Integrand::Dh, cf.int_dh),
                ] {
                    let got = contour_integral(&fam, sel, &spec).unwrap();
                    worst = worst.max((got - want).norm());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    report(
        "01 residue-quadrature-agreement",
        worst < 1e-8 && elapsed.as_secs_f64() < 5.0,
        format!("worst |closed - quadrature| = {worst:.3e}, elapsed {elapsed:?}"),
    );
}

#[test]
fn criterion_02_solver_certification_grid() {
    let mut targets: Vec<(f64, f64)> = Vec::new();
    for a in [0.5, 1.0, 2.0, pi2()] {
        for b in [0.0, 1.0, TAU] {
            targets.push((a, b));
        }
    }
    targets.push((0.0, 1.0));
    targets.push((0.0, TAU));
    targets.push((0.0, 0.0));

    let mut worst_res = 0.0f64;
    let mut worst_flux = 0.0f64;
    let mut slowest = 0.0f64;
    for &(a, b) in &targets {
        let t0 = Instant::now();
        let res = solved(a, b);
        slowest = slowest.max(t0.elapsed().as_secs_f64());
        worst_res = worst_res.max(res.period_residual);
        let want = [a, 0.0, -b];
        for k in 0..3 {
            worst_flux = worst_flux.max((res.achieved_flux[k] - want[k]).abs());
        }
        if a == 0.0 && b == 0.0 {
            assert!(matches!(res.family.variant(), FamilyVariant::Helicoid));
        }
        if (a - pi2()).abs() < 1e-12 && b == 0.0 {
            let Diagnostics::NonVertical { x1, t, .. } = res.diagnostics else { panic!() };
            assert!((t - 1.0).abs() < 1e-6, "t = {t}");
            assert!((x1 - TAU).abs() < 1e-6, "A = {x1}");
        }
    }
    report(
        "02 solver-certification-grid",
        worst_res < 1e-9 && worst_flux < 1e-6 && slowest < 5.0,
        format!(
            "{} targets, residual <= {worst_res:.2e}, flux error <= {worst_flux:.2e}, slowest {slowest:.2}s",
            targets.len()
        ),
    );
}

#[test]
fn criterion_03_helicoid_baseline() {
    let fam = WeierstrassFamily::helicoid();
    // Positive real axis maps into the x3-axis up to r = 1e3.
    let mut path = PathIntegrator::from_boundary(&fam).unwrap();
    let mut worst_axis = 0.0f64;
    for k in 1..=100 {
        let r = 3.0 + (1000.0 - 3.0) * k as f64 / 100.0;
        path.move_segment(Complex64::new(r, 0.0)).unwrap();
        worst_axis = worst_axis.max(path.horizontal().norm());
    }
    // K = -1 on the axis.
    let mut worst_k = 0.0f64;
    for r in [3.0, 10.0, 100.0, 1000.0] {
        let k = gauss_curvature(&fam, Complex64::new(r, 0.0)).unwrap();
        worst_k = worst_k.max((k + 1.0).abs());
    }
    // Ring-wise sup |K| -> 1.
    let mut worst_ring = 0.0f64;
    for ring in [1e2, 1e3, 1e4] {
        let sup = ring_sup_curvature(&fam, ring, 1024).unwrap();
        worst_ring = worst_ring.max((sup - 1.0).abs());
    }
    report(
        "03 helicoid-baseline",
        worst_axis < 1e-10 && worst_k < 1e-12 && worst_ring < 1e-6,
        format!("|x1+ix2| <= {worst_axis:.2e}, |K+1| <= {worst_k:.2e}, ring sup defect <= {worst_ring:.2e}"),
    );
}

#[test]
fn criterion_04_axis_offset() {
    let mut detail = String::new();
    let mut pass = true;
    for (a, b) in [(1.0, 0.0), (1.0, TAU), (pi2(), 0.0)] {
        let t0 = Instant::now();
        let res = solved(a, b);
        let ctx = EndAsymptotics::new(&res.family, 1e4).unwrap();
        let err = ctx.axis_offset_error();
        let tol = 0.02 * (1.0 + a);
        let elapsed = t0.elapsed().as_secs_f64();
        pass &= err < tol && elapsed < 30.0;
        detail += &format!("({a:.2},{b:.2}): err {err:.2e} < {tol:.2e} in {elapsed:.1}s; ");
    }
    report("04 axis-offset", pass, detail);
}

#[test]
fn criterion_05_separation() {
    let mut detail = String::new();
    let mut pass = true;
    for (a, b) in [(1.0, 0.0), (1.0, TAU), (pi2(), 0.0)] {
        let res = solved(a, b);
        let ctx = EndAsymptotics::new(&res.family, 1e4).unwrap();
        let mut devs = Vec::new();
        let mut min_w = f64::INFINITY;
        for r in [1e2, 1e5] {
            let window = ctx.separation_window(r, 1e5, 0.05, 3.0, 49);
            let rep = ctx.separation(&[r], &window).unwrap();
            devs.push(rep.per_radius[0].1);
            min_w = min_w.min(rep.min_separation);
        }
        let ok = devs[1] < 0.05 && devs[1] < devs[0] && min_w > 0.0;
        pass &= ok;
        detail += &format!(
            "({a:.2},{b:.2}): |w-pi| {:.4} -> {:.4}, min w {min_w:.3}; ",
            devs[0], devs[1]
        );
    }
    report("05 separation", pass, detail);
}

#[test]
fn criterion_06_model_graphs() {
    let res = solved(0.0, TAU);
    let ctx = EndAsymptotics::new(&res.family, 1e4).unwrap();
    let mut devs = Vec::new();
    for r in [1e2, 1e3, 1e4, 1e5] {
        let window = ctx.graph_window(r, 1e5, 0.1, 3.0, 49);
        let dev = ctx.compare_model_graphs(&[r], &window).unwrap();
        devs.push(dev[0].1);
    }
    let decreasing = devs.windows(2).all(|p| p[1] < p[0]);
    report(
        "06 model-graphs",
        devs[3] < 0.1 && decreasing,
        format!("sup|u-v| across decades: {devs:.4?} (log log limit not desk-reachable; trend only)"),
    );
}

#[test]
fn criterion_07_helicoid_convergence() {
    let mut detail = String::new();
    let mut pass = true;
    for (a, b) in [(0.0, TAU), (1.0, 0.0)] {
        let res = solved(a, b);
        let ctx = EndAsymptotics::new(&res.family, 1e4).unwrap();
        let mut axes = [Complex64::new(0.0, 0.0); 2];
        for (ei, end) in [End::Top, End::Bottom].into_iter().enumerate() {
            let mut ds = Vec::new();
            for n in [50u64, 100, 200] {
                let fit = ctx.helicoid_distance(n, end, 5.0).unwrap();
                ds.push(fit.max_distance);
                if n == 200 {
                    axes[ei] = fit.axis;
                }
            }
            let ok = ds[2] < 0.05 && ds[1] < ds[0] && ds[2] < ds[1];
            pass &= ok;
            detail += &format!("({a:.0},{b:.2}) {end:?} d_n {ds:.4?}; ");
        }
        if (a, b) == (1.0, 0.0) {
            let gap = (axes[1] - axes[0] - Complex64::new(0.0, 0.5)).norm();
            pass &= gap < 0.02;
            detail += &format!("axis gap error {gap:.4}; ");
        }
    }
    report("07 helicoid-convergence", pass, detail);
}

#[test]
fn criterion_08_symmetry() {
    let mut detail = String::new();
    let mut pass = true;
    for b in [1.0, TAU] {
        let res = solved(0.0, b);
        let alg = symmetry_defect(&res.family).unwrap();
        let geo = symmetric_pair_defect(&res.family).unwrap();
        pass &= alg < 1e-12 && geo < 1e-6;
        detail += &format!("b = {b:.2}: defect {alg:.2e}, paired points {geo:.2e}; ");
    }
    report("08 symmetry", pass, detail);
}

#[test]
fn criterion_09_embeddedness() {
    let mut detail = String::new();
    let mut pass = true;
    for (a, b) in [(1.0, TAU), (0.0, TAU)] {
        let t0 = Instant::now();
        let res = solved(a, b);
        let ctx = EndAsymptotics::new(&res.family, 1e4).unwrap();
        let r_e = ctx.estimate_r_e(3.0 * TAU, 9).unwrap();
        let rs: Vec<f64> = (0..14).map(|k| r_e * (10.0f64).powf(k as f64 / 13.0)).collect();
        let thetas: Vec<f64> = (0..96).map(|k| 3.0 * TAU * k as f64 / 95.0).collect();
        let top = ctx.multigraph_mesh(&rs, &thetas, 1).unwrap();
        let bottom = ctx.multigraph_mesh(&rs, &thetas, 2).unwrap();
        let rep = check_embedded(&[&top, &bottom]);
        let elapsed = t0.elapsed().as_secs_f64();
        pass &= rep.embedded && elapsed < 60.0;
        detail += &format!(
            "({a:.0},{b:.2}): r_E {r_e:.2e}, {} triangles, embedded {} in {elapsed:.1}s; ",
            rep.triangles, rep.embedded
        );
    }
    report("09 embeddedness", pass, detail);
}

#[test]
fn criterion_10_flux_distinctness() {
    // Measured invariants: accelerated axis offset and the vertical flux by
    // contour quadrature. Distinct targets must separate beyond 3x the
    // estimation tolerances.
    let mut measured = Vec::new();
    for (a, b) in [(1.0, 0.0), (1.0, TAU), (2.0, 0.0)] {
        let res = solved(a, b);
        let ctx = EndAsymptotics::new(&res.family, 1e4).unwrap();
        let spec = ContourSpec::new(2.0 * res.family.domain_radius(), 64).unwrap();
        let vflux = contour_integral(&res.family, Integrand::Dh, &spec).unwrap().im;
        measured.push((ctx.axis_offset(), vflux, 0.02 * (1.0 + a), 1e-9));
    }
    let mut pass = true;
    let mut detail = String::new();
    for i in 0..measured.len() {
        for j in i + 1..measured.len() {
            let (oi, vi, ti, si) = measured[i];
            let (oj, vj, tj, sj) = measured[j];
            let off_sep = (oi - oj).norm() > 3.0 * (ti + tj);
            let vf_sep = (vi - vj).abs() > 3.0 * (si + sj);
            pass &= off_sep || vf_sep;
            detail += &format!(
                "pair {i}{j}: |d-offset| {:.3}, |d-vflux| {:.3}; ",
                (oi - oj).norm(),
                (vi - vj).abs()
            );
        }
    }
    report("10 flux-distinctness", pass, detail);
}

#[test]
fn criterion_11_determinism() {
    // Byte-identical artifacts across repeated runs of representative
    // JSON/CSV/mesh outputs of criteria 1-10.
    let run = || {
        let res = solved(1.0, TAU);
        let solve_json = serde_json::to_string(&res).unwrap();

        let vert = solved(0.0, TAU);
        let ctx = EndAsymptotics::new(&vert.family, 1e4).unwrap();
        let window = ctx.separation_window(1e3, 1e3, 0.05, 2.0, 17);
        let sep = ctx.separation(&[1e3], &window).unwrap();
        let report = minann_core::asymptotics::AsymptoticsReport {
            axis_top: Some(ctx.axis_top()),
            axis_bottom: Some(ctx.axis_bottom()),
            axis_offset_error: Some(ctx.axis_offset_error()),
            separation_stats: sep.per_radius.clone(),
            min_separation: Some(sep.min_separation),
            symmetry_defect: Some(symmetry_defect(&vert.family).unwrap()),
            ..Default::default()
        };
        let report_json = serde_json::to_string(&report).unwrap();
        let report_csv = report.to_csv();

        let grid = minann_core::surface::sample_mesh(
            &vert.family,
            &minann_core::surface::MeshParams {
                r_min: vert.family.domain_radius(),
                r_max: vert.family.domain_radius() + 4.0,
                nr: 6,
                ntheta: 12,
                theta_span: TAU,
            },
        )
        .unwrap();
        let obj = export_mesh(&grid, MeshFormat::Obj, &[]).unwrap().bytes;
        (solve_json, report_json, report_csv, obj)
    };
    let first = run();
    let second = run();
    report(
        "11 determinism",
        first == second,
        format!(
            "solve JSON {}B, report JSON {}B, CSV {}B, OBJ {}B byte-identical across runs",
            first.0.len(),
            first.1.len(),
            first.2.len(),
            first.3.len()
        ),
    );
}
