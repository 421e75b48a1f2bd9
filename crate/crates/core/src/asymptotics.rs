//! Desk-scale measurement of the asymptotic structure of a solved end.
//!
//! All asymptotic statements hold in the normalized coordinate `w` in which
//! the Gauss map is exactly `e^{iw + f(w)}` with `f(∞) = 0`. For a family
//! with rotation α and scale `t` the two coordinates are related by
//! `z = w − α + i·log t`: the real `w`-axis (the curve whose image converges
//! to the axis rays) sits at `Im z = log t`, and the multigraph seeds are
//!
//! ```text
//! branch 1:  w ≈ (θ + π/2) + i log(2r),    branch 2:  w ≈ (θ − π/2) − i log(2r).
//! ```
//!
//! The item-6 normalization is a translation: horizontally by the mean of the
//! two axis limits, vertically so that `x3 = Re w + λ log |z − μ|`.
//!
//! Limits in `r` are replaced by monotone trends across decades plus absolute
//! caps at the largest sampled radius; the `log log r` height growth is not
//! reachable at desk scale and is only touched through the model graphs.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::cplx::serde_complex;
use crate::mesh::{ImmersionPoint, MeshGrid};
use crate::periods;
use crate::surface::PathIntegrator;
use crate::wdata::{FamilyVariant, WeierstrassFamily};
use crate::{tol, Error, Result};

/// Which end of the annulus (top: `Re w → +∞`, bottom: `Re w → −∞`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Top,
    Bottom,
}

/// One multigraph sample over the planar point `r e^{iθ}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MultigraphSample {
    pub r: f64,
    pub theta: f64,
    pub branch: u8,
    #[serde(with = "serde_complex")]
    pub z: Complex64,
    /// Height in the item-6 normalized gauge.
    pub u: f64,
}

/// Fitted limit helicoid for one end at one translation index.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HelicoidFit {
    pub n: u64,
    #[serde(with = "serde_complex")]
    pub axis: Complex64,
    pub phase: f64,
    pub max_distance: f64,
    pub samples: usize,
}

/// Measurement context for one period-closed family: axis limits and the
/// normalizing translation are computed once at construction.
#[derive(Debug, Clone)]
pub struct EndAsymptotics {
    family: WeierstrassFamily,
    lambda: f64,
    mu: Complex64,
    /// `z = w + shift` with `shift = −α + i log t`.
    shift: Complex64,
    axis_top: Complex64,
    axis_bottom: Complex64,
    center: Complex64,
    horizontal_flux: f64,
}

impl EndAsymptotics {
    /// Build the context; `axis_r_max` bounds the radius used for the axis
    /// limits (the acceptance default is 1e4).
    pub fn new(family: &WeierstrassFamily, axis_r_max: f64) -> Result<Self> {
        let rep = periods::period_residual_and_flux(family)?;
        if rep.period_residual >= tol::PERIOD_RESIDUAL {
            return Err(Error::RejectedInput(format!(
                "asymptotics requires a period-closed family (residual {:.3e})",
                rep.period_residual
            )));
        }
        let shift = Complex64::new(-family.rotation(), family.scale().ln());
        let mut ctx = EndAsymptotics {
            family: family.clone(),
            lambda: family.lambda(),
            mu: family.mu(),
            shift,
            axis_top: Complex64::new(0.0, 0.0),
            axis_bottom: Complex64::new(0.0, 0.0),
            center: Complex64::new(0.0, 0.0),
            horizontal_flux: Complex64::new(rep.flux[0], rep.flux[1]).norm(),
        };
        ctx.axis_top = ctx.axis_limit(End::Top, axis_r_max)?;
        ctx.axis_bottom = ctx.axis_limit(End::Bottom, axis_r_max)?;
        ctx.center = 0.5 * (ctx.axis_top + ctx.axis_bottom);
        Ok(ctx)
    }

    pub fn family(&self) -> &WeierstrassFamily {
        &self.family
    }

    /// Domain point of a normalized-coordinate point.
    pub fn domain_point(&self, w: Complex64) -> Complex64 {
        w + self.shift
    }

    pub fn axis_top(&self) -> Complex64 {
        self.axis_top
    }

    pub fn axis_bottom(&self) -> Complex64 {
        self.axis_bottom
    }

    /// `(x_T, y_T) − (x_B, y_B)` as a complex number; `−i a/2` for a solved
    /// family with horizontal flux length `a`.
    pub fn axis_offset(&self) -> Complex64 {
        self.axis_top - self.axis_bottom
    }

    /// |measured offset − (−i a/2)| with `a` the achieved horizontal flux.
    pub fn axis_offset_error(&self) -> f64 {
        (self.axis_offset() - Complex64::new(0.0, -0.5 * self.horizontal_flux)).norm()
    }

    /// Height in the item-6 normalized gauge.
    fn normalized_height(&self, z: Complex64) -> f64 {
        let mut u = z.re + self.family.rotation();
        if self.lambda != 0.0 {
            u += self.lambda * (z - self.mu).norm().ln();
        }
        u
    }

    /// Accelerated limit of `(x1 + i x2)` along the end's half of the real
    /// `w`-axis, sampled at `w = ±π m` and averaged pairwise: the tail is an
    /// alternating series in `m`, so each averaging level removes its leading
    /// oscillation.
    fn axis_limit(&self, end: End, r_max: f64) -> Result<Complex64> {
        let rp = self.family.domain_radius();
        let m_hi = (r_max / PI).floor() as i64;
        let m_lo_feasible = ((rp + self.shift.norm() + 2.0) / PI).ceil() as i64;
        const LEVELS: usize = 5;
        if m_hi - m_lo_feasible < LEVELS as i64 {
            return Err(Error::RejectedInput(format!(
                "axis radius {r_max} too small for domain radius {rp}"
            )));
        }
        let m_lo = m_hi - LEVELS as i64;
        let sign = match end {
            End::Top => 1.0,
            End::Bottom => -1.0,
        };
        let mut path = PathIntegrator::from_boundary(&self.family)?;
        if sign < 0.0 {
            // Reach the negative half over the boundary arc, crossing on the
            // side where the integrand mass e^{|y|}·max(t, 1/t) is smaller.
            let half = if self.shift.im <= 0.0 { -PI } else { PI };
            path.move_arc(path.z().norm(), 0.0, half)?;
        }
        let mut values = Vec::with_capacity(LEVELS + 1);
        for m in m_lo..=m_hi {
            let w = Complex64::new(sign * PI * m as f64, 0.0);
            path.move_segment(self.domain_point(w))?;
            values.push(path.horizontal());
        }
        while values.len() > 1 {
            values = values.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        }
        Ok(values[0])
    }

    /// Integrator positioned at `z`: arc at the boundary radius to the target
    /// angle, then radially out. Keeping the arc at the smallest radius keeps
    /// the integrand mass (and so the rounding floor) minimal; for targets
    /// near the negative axis the arc crosses on the cheaper side (the half
    /// plane holding the shifted axis, where `e^{|y|}` meets the smaller of
    /// `t`, `1/t`). Both routes agree: the context family is period closed.
    fn approach(&self, z: Complex64) -> Result<PathIntegrator<'_>> {
        let mut path = PathIntegrator::from_boundary(&self.family)?;
        let r0 = path.z().norm();
        let mut th = z.arg();
        if self.shift.im <= 0.0 && th > 0.5 * PI {
            th -= TAU;
        } else if self.shift.im > 0.0 && th < -0.5 * PI {
            th += TAU;
        }
        path.move_arc(r0, 0.0, th)?;
        path.move_segment(z)?;
        Ok(path)
    }

    fn seed(&self, r: f64, theta: f64, branch: u8) -> Complex64 {
        let l = (2.0 * r).ln();
        let w = match branch {
            1 => Complex64::new(theta + 0.5 * PI, l),
            _ => Complex64::new(theta - 0.5 * PI, -l),
        };
        self.domain_point(w)
    }

    /// Newton refinement of `(x1 + i x2)(z) = center + r e^{iθ}` from the
    /// current integrator position (already at the seed or a neighbour).
    fn newton(
        &self,
        path: &mut PathIntegrator<'_>,
        r: f64,
        theta: f64,
        branch: u8,
    ) -> Result<MultigraphSample> {
        let target = self.center + Complex64::from_polar(r, theta);
        let tol_res = tol::EXTRACT_RESIDUAL * r.max(1.0);
        for _ in 0..30 {
            let res = path.horizontal() - target;
            if res.norm() <= tol_res {
                let z = path.z();
                let w_im = (z - self.shift).im;
                if (branch == 1 && w_im < 0.0) || (branch == 2 && w_im > 0.0) {
                    return Err(Error::SolverFailure(format!(
                        "extraction landed on the wrong branch at (r, θ) = ({r}, {theta})"
                    )));
                }
                return Ok(MultigraphSample {
                    r,
                    theta,
                    branch,
                    z,
                    u: self.normalized_height(z),
                });
            }
            let z = path.z();
            let a = -0.5 * self.family.g_raw(z) * self.family.dh_raw(z);
            let b = 0.5 * (self.family.dh_raw(z) / self.family.g_raw(z)).conj();
            let denom = a.norm_sqr() - b.norm_sqr();
            if denom.abs() < 1e-300 {
                break;
            }
            let step = (a.conj() * (-res) - b * (-res).conj()) / denom;
            // Damp pathological steps; the seed is already within O(1/R').
            let mut step = if step.norm() > 1.0 { step / step.norm() } else { step };
            // A step may graze the excluded disk; halve it a few times
            // before declaring divergence.
            let mut moved = false;
            for _ in 0..6 {
                match path.move_segment(z + step) {
                    Ok(()) => {
                        moved = true;
                        break;
                    }
                    Err(Error::DomainViolation { .. }) => step *= 0.5,
                    Err(e) => return Err(e),
                }
            }
            if !moved {
                return Err(Error::SolverFailure(format!(
                    "multigraph Newton stalled at the domain boundary near z = {z}"
                )));
            }
        }
        Err(Error::SolverFailure(format!(
            "multigraph Newton did not converge at (r, θ, branch) = ({r}, {theta}, {branch})"
        )))
    }

    /// Extract one multigraph sample at planar polar coordinates `(r, θ)` on
    /// the universal cover (`θ` unbounded; the branch picks the sheet).
    pub fn extract_multigraph(&self, r: f64, theta: f64, branch: u8) -> Result<MultigraphSample> {
        if !(branch == 1 || branch == 2) {
            return Err(Error::RejectedInput("branch must be 1 or 2".into()));
        }
        let seed = self.seed(r, theta, branch);
        self.family.check_domain(seed)?;
        let mut path = self.approach(seed)?;
        self.newton(&mut path, r, theta, branch)
    }

    /// Extract a full `(r, θ)` grid for one branch, walking the integrator in
    /// a snake order so consecutive solves are a short edge apart. Row-major:
    /// `samples[i * thetas.len() + j]` belongs to `(rs[i], thetas[j])`.
    pub fn extract_grid(
        &self,
        rs: &[f64],
        thetas: &[f64],
        branch: u8,
    ) -> Result<Vec<MultigraphSample>> {
        if rs.is_empty() || thetas.is_empty() {
            return Err(Error::RejectedInput("empty sample axes".into()));
        }
        let seed0 = self.seed(rs[0], thetas[0], branch);
        self.family.check_domain(seed0)?;
        let mut path = self.approach(seed0)?;
        let mut out = vec![None; rs.len() * thetas.len()];
        for (j, &theta) in thetas.iter().enumerate() {
            let down = j % 2 == 1;
            let order: Vec<usize> =
                if down { (0..rs.len()).rev().collect() } else { (0..rs.len()).collect() };
            for (step, &i) in order.iter().enumerate() {
                if step == 0 && j > 0 {
                    // Hop to this column's first seed from the previous
                    // solution; if the direct chord grazes the excluded disk,
                    // rebuild the path from the boundary.
                    let seed = self.seed(rs[i], theta, branch);
                    match path.move_segment(seed) {
                        Ok(()) => {}
                        Err(Error::DomainViolation { .. }) => path = self.approach(seed)?,
                        Err(e) => return Err(e),
                    }
                }
                let sample = self.newton(&mut path, rs[i], theta, branch)?;
                out[i * thetas.len() + j] = Some(sample);
            }
        }
        Ok(out.into_iter().map(|s| s.expect("grid fully populated")).collect())
    }

    /// Smallest sampled-feasible radius: the operational stand-in for the
    /// multigraph radius, found by bisection on "Newton from the seed
    /// converges for every probe angle on both branches", with the analytic
    /// requirement that every seed over the whole span clears the boundary
    /// circle (angles between probes are no worse than the continuum bound).
    pub fn estimate_r_e(&self, theta_span: f64, probes: usize) -> Result<f64> {
        let thetas: Vec<f64> = (0..probes.max(2))
            .map(|k| theta_span * k as f64 / (probes.max(2) - 1) as f64)
            .collect();
        let rp = self.family.domain_radius();
        let clearance = |r: f64| -> bool {
            let l = (2.0 * r).ln();
            for branch in [1.0f64, -1.0] {
                let y = branch * l + self.shift.im;
                let x0 = branch * 0.5 * PI + self.shift.re;
                let x1 = x0 + theta_span;
                let x_min = if x0 <= 0.0 && 0.0 <= x1 { 0.0 } else { x0.abs().min(x1.abs()) };
                if x_min * x_min + y * y < (rp + 0.3) * (rp + 0.3) {
                    return false;
                }
            }
            true
        };
        let ok = |r: f64| -> bool {
            clearance(r)
                && thetas.iter().all(|&th| {
                    self.extract_multigraph(r, th, 1).is_ok()
                        && self.extract_multigraph(r, th, 2).is_ok()
                })
        };
        let mut hi = 16.0;
        let mut grew = false;
        while !ok(hi) {
            hi *= 2.0;
            grew = true;
            if hi > 1e15 {
                return Err(Error::SolverFailure(
                    "no radius with full multigraph coverage".into(),
                ));
            }
        }
        let mut lo = hi / 2.0;
        if !grew {
            while lo > 1.0 && ok(lo) {
                hi = lo;
                lo *= 0.5;
            }
        }
        for _ in 0..30 {
            let mid = (lo * hi).sqrt();
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // Margin over the probe resolution: unprobed angles may need slightly
        // more room than the coarse grid saw.
        Ok(hi * 1.05)
    }

    /// The model multivalued graphs of the limit structure.
    pub fn model_graph(&self, r: f64, theta: f64, branch: u8) -> f64 {
        let off = if branch == 1 { 0.5 * PI } else { -0.5 * PI };
        let x = theta + off;
        x + self.lambda * (x * x + (2.0 * r).ln().powi(2)).sqrt().ln()
    }

    /// `sup_θ |u_i − v_i|` over both branches, one entry per radius.
    pub fn compare_model_graphs(&self, rs: &[f64], thetas: &[f64]) -> Result<Vec<(f64, f64)>> {
        let mut dev = vec![0.0f64; rs.len()];
        for branch in [1u8, 2u8] {
            let grid = self.extract_grid(rs, thetas, branch)?;
            for i in 0..rs.len() {
                for (j, &theta) in thetas.iter().enumerate() {
                    let s = &grid[i * thetas.len() + j];
                    let v = self.model_graph(s.r, theta, branch);
                    dev[i] = dev[i].max((s.u - v).abs());
                }
            }
        }
        Ok(rs.iter().copied().zip(dev).collect())
    }

    /// Separation statistics: per radius, `max_θ |w − π|` with
    /// `w = u_1 − u_2`, plus the global minimum of `w` (sheet disjointness
    /// requires `w > 0` everywhere sampled).
    pub fn separation(&self, rs: &[f64], thetas: &[f64]) -> Result<SeparationReport> {
        let top = self.extract_grid(rs, thetas, 1)?;
        let bot = self.extract_grid(rs, thetas, 2)?;
        let mut stats = vec![0.0f64; rs.len()];
        let mut min_w = f64::INFINITY;
        for i in 0..rs.len() {
            for j in 0..thetas.len() {
                let w = top[i * thetas.len() + j].u - bot[i * thetas.len() + j].u;
                min_w = min_w.min(w);
                stats[i] = stats[i].max((w - PI).abs());
            }
        }
        Ok(SeparationReport {
            per_radius: rs.iter().copied().zip(stats).collect(),
            min_separation: min_w,
        })
    }

    /// Smallest `|Re w|` such that both branch seeds at radius `r` stay in
    /// the exterior domain.
    fn feasible_x(&self, r: f64) -> f64 {
        let rp = self.family.domain_radius();
        let l = (2.0 * r).ln();
        let y1 = l + self.shift.im;
        let y2 = -l + self.shift.im;
        let y_min = y1.abs().min(y2.abs());
        (rp * rp - y_min * y_min).max(0.0).sqrt()
    }

    /// Size of the rational correction to the exponential in `g dh` plus the
    /// one in `dh/g` — the constant in the `O(c/x)` sheet corrections.
    fn correction_constant(&self) -> f64 {
        match *self.family.variant() {
            FamilyVariant::Helicoid => 0.0,
            FamilyVariant::NonVerticalFlux { a, b, .. } => (a + b).norm() + (a - b).norm(),
            FamilyVariant::VerticalFlux { a, b } => 2.0 * Complex64::new(b, 2.0 * a.im).norm(),
            FamilyVariant::GenericExp { ref laurent, lambda, .. } => {
                2.0 * (lambda + laurent.first().map_or(0.0, |c| c.norm()))
            }
        }
    }

    /// A θ window of `n` samples over `turns` full turns, fixed across all
    /// sampled radii, starting where every radius keeps both branch seeds in
    /// the domain.
    pub fn theta_window(&self, rs: &[f64], turns: f64, n: usize) -> Vec<f64> {
        let mut start = 0.0f64;
        for &r in rs {
            start = start.max(self.feasible_x(r));
        }
        start += 0.5 * PI + self.family.rotation().abs() + 1.0;
        (0..n.max(2)).map(|k| start + turns * TAU * k as f64 / (n.max(2) - 1) as f64).collect()
    }

    fn window_from(&self, x: f64, turns: f64, n: usize) -> Vec<f64> {
        let start = x + 0.5 * PI + self.family.rotation().abs() + 1.0;
        (0..n.max(2)).map(|k| start + turns * TAU * k as f64 / (n.max(2) - 1) as f64).collect()
    }

    /// A θ window for measuring the separation at radius `r` so that the
    /// limit `w → π` is visible at tolerance `tol` by `r_max`.
    ///
    /// The model sheets themselves differ from π by
    /// `λ/2 · log((x²+L²)/((x−π)²+L²)) ≈ λπ/x` and the Weierstrass-data
    /// corrections contribute `O(c·L/x²)` with `L = log 2r` (their `O(c/x)`
    /// leading parts cancel between the sheets). Both grow with `L` at fixed
    /// `x` through desk scale, so the window start scales linearly with `L`:
    /// along such windows both shares decay like `1/L`, a probe path escaping
    /// along the joint limit `r + |θ| → ∞`.
    pub fn separation_window(&self, r: f64, r_max: f64, tol: f64, turns: f64, n: usize) -> Vec<f64> {
        let l = (2.0 * r).ln().max(1.0);
        let l_max = (2.0 * r_max).ln().max(l);
        let mut x_budget = 0.0f64;

        // Data-correction share: c·L_max/x² ≤ 0.3 tol at r_max.
        let c = self.correction_constant();
        if c > 0.0 {
            x_budget = (c * l_max / (0.3 * tol)).sqrt();
        }

        // Model-sheet share (λ > 0 only): excess ≤ 0.5 tol at r_max.
        if self.lambda > 0.0 {
            let excess = |x: f64| {
                0.5 * self.lambda
                    * ((x * x + l_max * l_max) / ((x - PI).powi(2) + l_max * l_max)).ln()
            };
            let mut hi = l_max.max(PI);
            while excess(hi) > 0.5 * tol && hi < 1e7 {
                hi *= 2.0;
            }
            let mut lo = hi / 2.0;
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if excess(mid) > 0.5 * tol {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            x_budget = x_budget.max(hi);
        }

        let x = self.feasible_x(r).max(x_budget * l / l_max);
        self.window_from(x, turns, n)
    }

    /// A θ window for comparing one radius against the model graphs: the
    /// single-sheet correction `|u − v| ≈ |c (i x − L)/x²|` does not cancel
    /// between sheets, so the window scales the same way as the separation
    /// one but with the single-branch constant.
    pub fn graph_window(&self, r: f64, r_max: f64, tol: f64, turns: f64, n: usize) -> Vec<f64> {
        let l = (2.0 * r).ln().max(1.0);
        let l_max = (2.0 * r_max).ln().max(l);
        let c = 0.5 * self.correction_constant();
        let mut x_budget = 0.0f64;
        if c > 0.0 {
            // |c|(κ+1)/(κ² L_max) ≤ 0.4 tol with x = κ L.
            let disc = c * c + 1.6 * tol * l_max * c;
            let kappa = (c + disc.sqrt()) / (0.8 * tol * l_max);
            x_budget = kappa * l_max;
        }
        let x = self.feasible_x(r).max(x_budget * l / l_max);
        self.window_from(x, turns, n)
    }

    /// Mesh one sheet of the multigraph over `rs × thetas` (image polar
    /// coordinates); positions are the measured immersion points.
    pub fn multigraph_mesh(&self, rs: &[f64], thetas: &[f64], branch: u8) -> Result<MeshGrid> {
        let samples = self.extract_grid(rs, thetas, branch)?;
        let points = samples
            .iter()
            .map(|s| {
                let h = self.center + Complex64::from_polar(s.r, s.theta);
                ImmersionPoint { z: s.z, position: [h.re, h.im, s.u] }
            })
            .collect();
        Ok(MeshGrid {
            r_values: rs.to_vec(),
            theta_values: thetas.to_vec(),
            points,
            sheet: Some(branch),
        })
    }

    /// Fit the limit helicoid after the end's translation and measure the
    /// largest distance from window samples to it.
    ///
    /// Samples live on the domain disk `w_c + (s + iv)` with `w_c = ±2πn` in
    /// the normalized coordinate; the translated heights are
    /// `u − (±2πn + λ log n)`. The axis is the mean of near-axis images, the
    /// phase is a least-squares fit on one ring, and the distance measured is
    /// the in-plane distance to the helicoid's ruling line at each sample's
    /// height (an upper bound for the distance to the surface).
    pub fn helicoid_distance(&self, n: u64, end: End, window_radius: f64) -> Result<HelicoidFit> {
        if n == 0 {
            return Err(Error::RejectedInput("helicoid index n must be positive".into()));
        }
        let sgn = match end {
            End::Top => 1.0,
            End::Bottom => -1.0,
        };
        let w_c = Complex64::new(sgn * TAU * n as f64, 0.0);
        let z_c = self.domain_point(w_c);
        if z_c.norm() < self.family.domain_radius() + 8.0 {
            return Err(Error::RejectedInput(format!(
                "translation index {n} keeps the window too close to the boundary"
            )));
        }
        let drop = sgn * (TAU * n as f64) + self.lambda * (n as f64).ln();
        let translated = |path: &PathIntegrator<'_>| -> (Complex64, f64) {
            let h = path.horizontal() - self.center;
            let u = self.normalized_height(path.z()) - drop;
            (h, u)
        };

        let mut path = self.approach(z_c)?;

        // Axis: mean image of the near-axis segment Im w = 0, |Re w − w_c| ≤ π.
        let axis_samples = 33usize;
        let mut axis = Complex64::new(0.0, 0.0);
        for k in 0..axis_samples {
            let s = -PI + TAU * k as f64 / (axis_samples - 1) as f64;
            path.move_segment(self.domain_point(w_c + s))?;
            axis += translated(&path).0;
        }
        axis /= axis_samples as f64;

        // Phase: least squares on one ring |w − w_c| = 1.5. The in-plane
        // distance with phase c is |Re(ζ e^{ic})| with ζ = conj(q) e^{i u},
        // so the optimum solves a 2x2 quadratic form.
        let (mut a2, mut b2, mut cc) = (0.0f64, 0.0f64, 0.0f64);
        let ring = 64usize;
        for k in 0..ring {
            let phi = TAU * k as f64 / ring as f64;
            path.move_segment(self.domain_point(w_c + Complex64::from_polar(1.5, phi)))?;
            let (h, u) = translated(&path);
            let zeta = (h - axis).conj() * Complex64::from_polar(1.0, u);
            a2 += zeta.re * zeta.re;
            b2 += zeta.im * zeta.im;
            cc += zeta.re * zeta.im;
        }
        let two_c = (-2.0 * cc).atan2(a2 - b2);
        let cand = [0.5 * two_c, 0.5 * two_c + 0.5 * PI];
        let energy = |c: f64| {
            a2 * c.cos() * c.cos() + b2 * c.sin() * c.sin() - 2.0 * cc * c.sin() * c.cos()
        };
        let phase = if energy(cand[0]) <= energy(cand[1]) { cand[0] } else { cand[1] };

        // Window sweep: |Re w − w_c| ≤ π, |Im w| ≤ asinh(window radius).
        let vmax = window_radius.asinh();
        let (ns, nv) = (33usize, 17usize);
        let mut max_distance = 0.0f64;
        let mut used = 0usize;
        for kv in 0..nv {
            let v = -vmax + 2.0 * vmax * kv as f64 / (nv - 1) as f64;
            for ks in 0..ns {
                let s = -PI + TAU * ks as f64 / (ns - 1) as f64;
                path.move_segment(self.domain_point(w_c + Complex64::new(s, v)))?;
                let (h, u) = translated(&path);
                let q = h - axis;
                if q.norm() > window_radius || u.abs() > window_radius {
                    continue;
                }
                used += 1;
                let d = (q.re * (u + phase).cos() + q.im * (u + phase).sin()).abs();
                max_distance = max_distance.max(d);
            }
        }
        if used == 0 {
            return Err(Error::RejectedInput("helicoid window contains no samples".into()));
        }
        Ok(HelicoidFit { n, axis, phase, max_distance, samples: used })
    }
}

/// Separation measurement output.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    /// `(r, max_θ |w − π|)`, in the sampled order of `rs`.
    pub per_radius: Vec<(f64, f64)>,
    /// Global minimum of `w`; must be positive for disjoint sheets.
    pub min_separation: f64,
}

/// Sup over sampled points of `|g(conj z) conj(g(z)) − 1| + |h(conj z) − conj(h(z))|`;
/// both identities are exact for the vertical family, so the defect is pure
/// rounding.
pub fn symmetry_defect(family: &WeierstrassFamily) -> Result<f64> {
    if !matches!(family.variant(), FamilyVariant::VerticalFlux { .. }) {
        return Err(Error::UnsupportedVariant(
            "symmetry_defect applies to the VerticalFlux variant".into(),
        ));
    }
    let rp = family.domain_radius();
    let mut worst = 0.0f64;
    for mult in [1.0, 2.0, 4.0] {
        for k in 0..64 {
            let z = Complex64::from_polar(mult * rp, TAU * k as f64 / 64.0);
            let dg =
                (family.g_raw(z.conj()) * family.g_raw(z).conj() - Complex64::new(1.0, 0.0)).norm();
            let dh = (family.dh_raw(z.conj()) - family.dh_raw(z).conj()).norm();
            worst = worst.max(dg + dh);
        }
    }
    Ok(worst)
}

/// Geometric half of the symmetry check: with the base point on the positive
/// real axis, images come in pairs `(x1, x2, x3) ↔ (−x1, −x2, x3)`.
pub fn symmetric_pair_defect(family: &WeierstrassFamily) -> Result<f64> {
    if !matches!(family.variant(), FamilyVariant::VerticalFlux { .. }) {
        return Err(Error::UnsupportedVariant(
            "symmetric_pair_defect applies to the VerticalFlux variant".into(),
        ));
    }
    let rp = family.domain_radius();
    let base = Complex64::new(rp, 0.0);
    let mut worst = 0.0f64;
    // Sample heights stay moderate: at |Im z| = h the horizontal coordinates
    // reach e^h / 2, and an absolute 1e-6 comparison needs e^h well below
    // the f64 precision of that magnitude.
    for (dr, h) in [(0.0, 1.0), (1.0, 3.0), (3.0, 5.0), (6.0, 2.0), (2.0, 4.0), (9.0, 0.5)] {
        let r = rp + dr;
        let z = Complex64::from_polar(r, (h / r).asin());
        let p = crate::surface::immerse(family, z, base)?;
        let q = crate::surface::immerse(family, z.conj(), base)?;
        let horizontal = Complex64::new(p[0] + q[0], p[1] + q[1]).norm();
        let vertical = (p[2] - q[2]).abs();
        worst = worst.max(horizontal + vertical);
    }
    Ok(worst)
}

/// Full report assembled by the verification front end; optional sections are
/// present when the corresponding check ran.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AsymptoticsReport {
    #[serde(
        rename = "axisTop",
        with = "crate::cplx::serde_complex_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub axis_top: Option<Complex64>,
    #[serde(
        rename = "axisBottom",
        with = "crate::cplx::serde_complex_opt",
        skip_serializing_if = "Option::is_none"
    )]
    pub axis_bottom: Option<Complex64>,
    #[serde(rename = "axisOffsetError", skip_serializing_if = "Option::is_none")]
    pub axis_offset_error: Option<f64>,
    #[serde(rename = "graphDeviation", skip_serializing_if = "Vec::is_empty")]
    pub graph_deviation: Vec<(f64, f64)>,
    #[serde(rename = "separationStats", skip_serializing_if = "Vec::is_empty")]
    pub separation_stats: Vec<(f64, f64)>,
    #[serde(rename = "minSeparation", skip_serializing_if = "Option::is_none")]
    pub min_separation: Option<f64>,
    #[serde(rename = "helicoidDistance", skip_serializing_if = "Vec::is_empty")]
    pub helicoid_distance: Vec<(u64, f64)>,
    #[serde(rename = "symmetryDefect", skip_serializing_if = "Option::is_none")]
    pub symmetry_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedded: Option<bool>,
}

impl AsymptoticsReport {
    /// Flat CSV: one `quantity,key,value` row per measurement.
    pub fn to_csv(&self) -> String {
        let mut rows: Vec<(String, String, String)> = Vec::new();
        if let Some(a) = self.axis_top {
            rows.push(("axisTop".into(), "re".into(), a.re.to_string()));
            rows.push(("axisTop".into(), "im".into(), a.im.to_string()));
        }
        if let Some(a) = self.axis_bottom {
            rows.push(("axisBottom".into(), "re".into(), a.re.to_string()));
            rows.push(("axisBottom".into(), "im".into(), a.im.to_string()));
        }
        if let Some(e) = self.axis_offset_error {
            rows.push(("axisOffsetError".into(), "value".into(), e.to_string()));
        }
        for (r, d) in &self.graph_deviation {
            rows.push(("graphDeviation".into(), r.to_string(), d.to_string()));
        }
        for (r, d) in &self.separation_stats {
            rows.push(("separation".into(), r.to_string(), d.to_string()));
        }
        if let Some(w) = self.min_separation {
            rows.push(("minSeparation".into(), "value".into(), w.to_string()));
        }
        for (n, d) in &self.helicoid_distance {
            rows.push(("helicoidDistance".into(), n.to_string(), d.to_string()));
        }
        if let Some(s) = self.symmetry_defect {
            rows.push(("symmetryDefect".into(), "value".into(), s.to_string()));
        }
        if let Some(e) = self.embedded {
            rows.push(("embedded".into(), "value".into(), e.to_string()));
        }
        let mut out = String::from("quantity,key,value\n");
        for (q, k, v) in rows {
            out.push_str(&format!("{q},{k},{v}\n"));
        }
        out
    }
}
