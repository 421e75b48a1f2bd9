//! Evaluation of the conformal minimal immersion.
//!
//! With `W1(z) = ∫ g dh` and `W2(z) = ∫ dh/g` along a path from the base
//! point, the horizontal coordinates are
//!
//! ```text
//! (x1 + i x2)(z) = (conj W2(z) − W1(z)) / 2,
//! ```
//!
//! and the height `x3` comes from its closed form (exact, no quadrature).
//! Paths are radial-then-circular from the base point, which keeps them away
//! from the excluded disk, and a [`PathIntegrator`] carries `(W1, W2)` along
//! so repeated nearby evaluations only integrate the connecting edge.

use num_complex::Complex64;

use crate::mesh::{ImmersionPoint, MeshGrid};
use crate::wdata::WeierstrassFamily;
use crate::{quad, tol, Error, Result};

/// Accumulated `(W1, W2)` state along a path from a fixed base point.
#[derive(Debug, Clone)]
pub struct PathIntegrator<'a> {
    family: &'a WeierstrassFamily,
    base: Complex64,
    z: Complex64,
    w_gdh: Complex64,
    w_dhg: Complex64,
}

impl<'a> PathIntegrator<'a> {
    pub fn new(family: &'a WeierstrassFamily, base: Complex64) -> Result<Self> {
        family.check_domain(base)?;
        Ok(PathIntegrator {
            family,
            base,
            z: base,
            w_gdh: Complex64::new(0.0, 0.0),
            w_dhg: Complex64::new(0.0, 0.0),
        })
    }

    /// Base point at `R'` on the positive real axis.
    pub fn from_boundary(family: &'a WeierstrassFamily) -> Result<Self> {
        let base = Complex64::new(family.domain_radius().max(f64::MIN_POSITIVE), 0.0);
        PathIntegrator::new(family, base)
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn base(&self) -> Complex64 {
        self.base
    }

    /// Advance along the straight chord to `to`. The chord must stay in the
    /// exterior domain.
    pub fn move_segment(&mut self, to: Complex64) -> Result<()> {
        let rp = self.family.domain_radius();
        if chord_min_modulus(self.z, to) < rp - 1e-9 {
            return Err(Error::DomainViolation { modulus: chord_min_modulus(self.z, to), domain_radius: rp });
        }
        let fam = self.family;
        self.w_gdh += quad::integrate_segment(
            |z| fam.g_raw(z) * fam.dh_raw(z),
            self.z,
            to,
            tol::PATH_LOCAL,
        )?;
        self.w_dhg += quad::integrate_segment(
            |z| fam.dh_raw(z) / fam.g_raw(z),
            self.z,
            to,
            tol::PATH_LOCAL,
        )?;
        self.z = to;
        Ok(())
    }

    /// Advance along the arc `|z| = radius` from angle `th_from` (which must
    /// match the current point) to `th_to`; `|th_to − th_from|` may exceed 2π
    /// on the universal cover.
    pub fn move_arc(&mut self, radius: f64, th_from: f64, th_to: f64) -> Result<()> {
        let rp = self.family.domain_radius();
        if radius < rp - 1e-9 {
            return Err(Error::DomainViolation { modulus: radius, domain_radius: rp });
        }
        let start = Complex64::from_polar(radius, th_from);
        if (start - self.z).norm() > 1e-6 * (1.0 + radius) {
            return Err(Error::RejectedInput(format!(
                "arc start {start} does not continue the current path point {}",
                self.z
            )));
        }
        let fam = self.family;
        self.w_gdh += quad::integrate_arc(
            |z| fam.g_raw(z) * fam.dh_raw(z),
            radius,
            th_from,
            th_to,
            tol::PATH_LOCAL,
        )?;
        self.w_dhg += quad::integrate_arc(
            |z| fam.dh_raw(z) / fam.g_raw(z),
            radius,
            th_from,
            th_to,
            tol::PATH_LOCAL,
        )?;
        self.z = Complex64::from_polar(radius, th_to);
        Ok(())
    }

    /// `x1 + i x2` at the current point (zero at the base point).
    pub fn horizontal(&self) -> Complex64 {
        0.5 * (self.w_dhg.conj() - self.w_gdh)
    }

    /// `x3` at the current point from the closed form.
    pub fn height(&self) -> f64 {
        self.family.x3(self.z, self.base).expect("path points stay in the domain")
    }

    pub fn position(&self) -> [f64; 3] {
        let h = self.horizontal();
        [h.re, h.im, self.height()]
    }
}

/// Smallest `|z|` along the chord from `a` to `b`.
fn chord_min_modulus(a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    let t = (-(a.re * d.re + a.im * d.im) / len2).clamp(0.0, 1.0);
    (a + t * d).norm()
}

/// The immersion `X(z)` relative to `X(z0) = 0`, along the circular-then-
/// radial path from `z0`: the shorter arc at radius `|z0|` to `arg z`, then
/// radially out to `z`. Keeping the arc at the base radius keeps the
/// integrand magnitude (which grows like `e^{|Im ξ|}`) minimal; the path is
/// homotopic to the radial-then-circular one, so period-closed families see
/// the same value.
pub fn immerse(family: &WeierstrassFamily, z: Complex64, z0: Complex64) -> Result<[f64; 3]> {
    family.check_domain(z)?;
    let mut path = PathIntegrator::new(family, z0)?;
    let r0 = z0.norm();
    if r0 > 0.0 {
        let th0 = z0.arg();
        let dth = crate::cplx::wrap_angle(z.arg() - th0);
        path.move_arc(r0, th0, th0 + dth)?;
    }
    path.move_segment(z)?;
    // Land exactly on z (from_polar can differ from z in the last ulp).
    path.z = z;
    Ok(path.position())
}

/// Gaussian curvature `K(z) ≤ 0` from the Weierstrass data:
/// `|K| = 16 (|g| + |g|^{-1})^{-4} |dg/g|² / |dh|²`, evaluated through
/// `log |g|` so large `|Im z|` cannot overflow.
pub fn gauss_curvature(family: &WeierstrassFamily, z: Complex64) -> Result<f64> {
    family.check_domain(z)?;
    let lg = family.log_abs_g_raw(z);
    let q = family.log_deriv_g_raw(z).norm() / family.dh_raw(z).norm();
    let c = lg.cosh();
    Ok(-(q * q) / (c * c * c * c))
}

/// Largest `|K|` over the circle `|z| = radius`.
///
/// `|K|` concentrates in a band of angular width `O(1/radius)` around the
/// crossings of `log |g| = 0`, so a uniform grid alone would miss the peak on
/// large rings; the grid scan is followed by golden-section refinement around
/// every sign change of `log |g|` along the ring.
pub fn ring_sup_curvature(family: &WeierstrassFamily, radius: f64, n: usize) -> Result<f64> {
    let value = |th: f64| -> Result<f64> {
        Ok(-gauss_curvature(family, Complex64::from_polar(radius, th))?)
    };
    let mut sup = 0.0f64;
    let step = std::f64::consts::TAU / n as f64;
    let mut prev_lg = family.log_abs_g_raw(Complex64::from_polar(radius, 0.0));
    for k in 0..n {
        let th = k as f64 * step;
        sup = sup.max(value(th)?);
        let th_next = (k + 1) as f64 * step;
        let lg = family.log_abs_g_raw(Complex64::from_polar(radius, th_next));
        if lg.signum() != prev_lg.signum() {
            // Bisect the crossing, then maximize |K| on the bracketing step.
            let (mut a, mut b) = (th, th_next);
            let mut fa = prev_lg;
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let fm = family.log_abs_g_raw(Complex64::from_polar(radius, m));
                if fm.signum() == fa.signum() {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            let peak = 0.5 * (a + b);
            let half = 4.0 / radius.max(4.0);
            let (mut lo, mut hi) = (peak - half, peak + half);
            let phi = 0.5 * (5.0f64.sqrt() - 1.0);
            let (mut c1, mut c2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
            let (mut f1, mut f2) = (value(c1)?, value(c2)?);
            for _ in 0..60 {
                if f1 < f2 {
                    lo = c1;
                    c1 = c2;
                    f1 = f2;
                    c2 = lo + phi * (hi - lo);
                    f2 = value(c2)?;
                } else {
                    hi = c2;
                    c2 = c1;
                    f2 = f1;
                    c1 = hi - phi * (hi - lo);
                    f1 = value(c1)?;
                }
            }
            sup = sup.max(f1.max(f2)).max(value(peak)?);
        }
        prev_lg = lg;
    }
    Ok(sup)
}

/// Conformal grid sampling parameters.
#[derive(Debug, Clone, Copy)]
pub struct MeshParams {
    pub r_min: f64,
    pub r_max: f64,
    pub nr: usize,
    pub ntheta: usize,
    pub theta_span: f64,
}

/// Immersion on the conformal grid `z = r e^{iθ}`, `θ ∈ [0, theta_span]`
/// (the span may exceed 2π: universal-cover sampling). Each θ-spoke is
/// integrated incrementally from the base point: radial approach at angle 0,
/// arc at `r_min` to the spoke angle, then radial edges outward.
pub fn sample_mesh(family: &WeierstrassFamily, params: &MeshParams) -> Result<MeshGrid> {
    let MeshParams { r_min, r_max, nr, ntheta, theta_span } = *params;
    if nr < 2 || ntheta < 2 {
        return Err(Error::RejectedInput("mesh needs nr, ntheta >= 2".into()));
    }
    if !(r_min >= family.domain_radius() - 1e-9 && r_max > r_min && theta_span > 0.0) {
        return Err(Error::RejectedInput(format!(
            "invalid mesh extents: r in [{r_min}, {r_max}], span {theta_span}"
        )));
    }
    let r_values: Vec<f64> =
        (0..nr).map(|i| r_min + (r_max - r_min) * i as f64 / (nr - 1) as f64).collect();
    let theta_values: Vec<f64> =
        (0..ntheta).map(|j| theta_span * j as f64 / (ntheta - 1) as f64).collect();

    let mut points = vec![ImmersionPoint::default(); nr * ntheta];
    for (j, &th) in theta_values.iter().enumerate() {
        let mut path = PathIntegrator::from_boundary(family)?;
        path.move_segment(Complex64::new(r_min, 0.0))?;
        path.move_arc(r_min, 0.0, th)?;
        for (i, &r) in r_values.iter().enumerate() {
            if i > 0 {
                path.move_segment(Complex64::from_polar(r, th))?;
            }
            points[i * ntheta + j] = ImmersionPoint { z: path.z(), position: path.position() };
        }
    }
    Ok(MeshGrid { r_values, theta_values, points, sheet: None })
}

/// Largest closed-loop displacement around a grid cell, re-integrating all
/// four edges. Cells are simply connected, so the exact circulation is zero
/// and the defect measures quadrature consistency.
pub fn mesh_cell_closure(family: &WeierstrassFamily, grid: &MeshGrid) -> Result<f64> {
    let nr = grid.r_values.len();
    let nt = grid.theta_values.len();
    let edge_h = |w1: Complex64, w2: Complex64| 0.5 * (w2.conj() - w1);

    // Radial edges: (i, j) -> (i+1, j); arc edges: (i, j) -> (i, j+1).
    let mut radial = vec![Complex64::new(0.0, 0.0); (nr - 1) * nt];
    let mut arc = vec![Complex64::new(0.0, 0.0); nr * (nt - 1)];
    for (j, &th) in grid.theta_values.iter().enumerate() {
        for i in 0..nr - 1 {
            let za = Complex64::from_polar(grid.r_values[i], th);
            let zb = Complex64::from_polar(grid.r_values[i + 1], th);
            let w1 = quad::integrate_segment(|z| family.g_raw(z) * family.dh_raw(z), za, zb, tol::PATH_LOCAL)?;
            let w2 = quad::integrate_segment(|z| family.dh_raw(z) / family.g_raw(z), za, zb, tol::PATH_LOCAL)?;
            radial[i * nt + j] = edge_h(w1, w2);
        }
    }
    for (i, &r) in grid.r_values.iter().enumerate() {
        for j in 0..nt - 1 {
            let (a, b) = (grid.theta_values[j], grid.theta_values[j + 1]);
            let w1 = quad::integrate_arc(|z| family.g_raw(z) * family.dh_raw(z), r, a, b, tol::PATH_LOCAL)?;
            let w2 = quad::integrate_arc(|z| family.dh_raw(z) / family.g_raw(z), r, a, b, tol::PATH_LOCAL)?;
            arc[i * (nt - 1) + j] = edge_h(w1, w2);
        }
    }
    let mut worst = 0.0f64;
    for i in 0..nr - 1 {
        for j in 0..nt - 1 {
            let loop_sum = arc[i * (nt - 1) + j] + radial[i * nt + j + 1]
                - arc[(i + 1) * (nt - 1) + j]
                - radial[i * nt + j];
            worst = worst.max(loop_sum.norm());
        }
    }
    Ok(worst)
}
