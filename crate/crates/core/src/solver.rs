//! Solving the period problem for a prescribed flux vector `(a, 0, −b)`.
//!
//! Case 1 (`a > 0`): with `B = b/2π` fixed and `A = x + iy`, the period
//! condition reduces to `t² e^{−y} L(x) = R(x)` where
//!
//! ```text
//! L(x) = (x − By − B) + i(Bx + y),      R(x) = ((x + B) − iy) e^{ix}.
//! ```
//!
//! A root `x1` with matching arguments fixes `A`, then `t² = e^y |R|/|L|`
//! fixes the scale, and the horizontal flux length
//! `F(B, y) = 2π t |L(x1)|` is driven to the target `a` by bisection in `y`
//! (`F → 0` as `y → −∞` and `F → ∞` as `y → +∞`).
//!
//! Case 2 (`a = 0, b > 0`): both horizontal periods must vanish, which for
//! `A = x + iy` reads `2y e^y e^{ix} (y + i(x+B)) = B (x + iy)`. For each
//! `y > 0` the argument match has a unique root `x(y)` in
//! `J = (3π/2, 5π/2)`; the modulus mismatch is then driven to zero by an
//! outer bisection in `y`, with a final two-variable Newton polish.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::cplx::wrap_angle;
use crate::periods::{self, PeriodReport};
use crate::wdata::WeierstrassFamily;
use crate::{tol, Error, Result};

/// Prescribed flux vector `(a, 0, −b)` with `a, b ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveTarget {
    pub a: f64,
    pub b: f64,
}

impl SolveTarget {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a >= 0.0 && b >= 0.0) {
            return Err(Error::RejectedInput(format!(
                "flux target must satisfy a, b >= 0; got ({a}, {b})"
            )));
        }
        Ok(SolveTarget { a, b })
    }

    /// `B = b / 2π`, the dh pole coefficient that realizes vertical flux −b.
    pub fn b_coeff(&self) -> f64 {
        self.b / TAU
    }
}

/// Continuous arguments of the curves `L` and `R` at one abscissa.
#[derive(Debug, Clone, Copy)]
pub struct ThetaPair {
    pub theta_l: f64,
    pub theta_r: f64,
}

/// Solver diagnostics recorded with a result. Untagged variants are tried in
/// order, so the field-free helicoid case comes last.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Diagnostics {
    NonVertical { x1: f64, y: f64, t: f64, #[serde(rename = "windowIndex")] window_index: usize },
    Vertical { x: f64, y: f64 },
    Helicoid {},
}

/// A certified solution of the period problem for one flux target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveResult {
    pub family: WeierstrassFamily,
    #[serde(rename = "achievedFlux")]
    pub achieved_flux: [f64; 3],
    #[serde(rename = "periodResidual")]
    pub period_residual: f64,
    #[serde(rename = "rotationAngle")]
    pub rotation_angle: f64,
    pub diagnostics: Diagnostics,
}

fn scan_start(b_coeff: f64) -> f64 {
    (b_coeff / (1.0 + b_coeff * b_coeff) + 1.0).max(1.5 * PI)
}

/// The curves of the Case-1 period equation at abscissa `x`.
pub fn curve_l(b_coeff: f64, y: f64, x: f64) -> Complex64 {
    Complex64::new(x - b_coeff * y - b_coeff, b_coeff * x + y)
}

pub fn curve_r(b_coeff: f64, y: f64, x: f64) -> Complex64 {
    Complex64::new(x + b_coeff, -y) * Complex64::from_polar(1.0, x)
}

/// Continuous argument branches of `L(x)` and `R(x)` for `x > B/(1+B²)`.
///
/// On that range `L` avoids the closed third quadrant, so its principal
/// argument lies in `(−π/2, π)` and never crosses the cut, and
/// `θ_R(x) = x + arg((x+B) − iy)` with the second term in `(−π/2, π/2)`:
/// both branches are continuous in `x` and increase without wrapping.
pub fn theta_pair(b_coeff: f64, y: f64, x: f64) -> Result<ThetaPair> {
    if b_coeff < 0.0 {
        return Err(Error::RejectedInput("B must be nonnegative".into()));
    }
    if x <= b_coeff / (1.0 + b_coeff * b_coeff) {
        return Err(Error::RejectedInput(format!(
            "theta_pair requires x > B/(1+B^2); got x = {x}"
        )));
    }
    let l = curve_l(b_coeff, y, x);
    let theta_l = l.im.atan2(l.re);
    let theta_r = x + (-y).atan2(x + b_coeff);
    Ok(ThetaPair { theta_l, theta_r })
}

fn theta_diff(b_coeff: f64, y: f64, x: f64) -> f64 {
    let p = theta_pair(b_coeff, y, x).expect("scan stays right of B/(1+B^2)");
    p.theta_r - p.theta_l
}

/// Root of the argument match together with the scan window that produced it.
#[derive(Debug, Clone, Copy)]
pub struct RootX1 {
    pub x1: f64,
    pub window_index: usize,
}

const WINDOWS: usize = 4;
const BISECT_ITERS: usize = 100;

/// Find `x1` with `θ_R(x1) ≡ θ_L(x1) (mod 2π)`, scanning 2π-wide windows
/// from `max(B/(1+B²)+1, 3π/2)` and bisecting the first sign change of
/// `θ_R − θ_L − 2πk`. Within the scan range the difference is strictly
/// increasing, so the root found is the unique one in its window.
pub fn find_x1(b_coeff: f64, y: f64) -> Result<RootX1> {
    find_x1_from(b_coeff, y, 0)
}

/// Like [`find_x1`] but skipping the first `start_window` windows; used to
/// produce alternative representatives of the same flux.
pub fn find_x1_from(b_coeff: f64, y: f64, start_window: usize) -> Result<RootX1> {
    let x_start = scan_start(b_coeff);
    let mut trace = String::new();
    for w in start_window..start_window + WINDOWS {
        let lo = x_start + TAU * w as f64;
        let hi = lo + TAU;
        let d_lo = theta_diff(b_coeff, y, lo);
        let d_hi = theta_diff(b_coeff, y, hi);
        trace.push_str(&format!("window {w}: D({lo:.6}) = {d_lo:.6}, D({hi:.6}) = {d_hi:.6}; "));
        let k0 = (d_lo / TAU).floor() as i64 + 1;
        let target = TAU * k0 as f64;
        if target > d_hi {
            continue;
        }
        let (mut a, mut b) = (lo, hi);
        for _ in 0..BISECT_ITERS {
            let mid = 0.5 * (a + b);
            if theta_diff(b_coeff, y, mid) - target < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let x1 = 0.5 * (a + b);
        let p = theta_pair(b_coeff, y, x1)?;
        let defect = wrap_angle(p.theta_r - p.theta_l).abs();
        if defect > tol::ARG_MATCH {
            return Err(Error::SolverFailure(format!(
                "argument match defect {defect:.3e} above tolerance at x1 = {x1}; {trace}"
            )));
        }
        return Ok(RootX1 { x1, window_index: w });
    }
    Err(Error::SolverFailure(format!(
        "no sign change within {WINDOWS} windows for B = {b_coeff}, y = {y}; {trace}"
    )))
}

/// The unique positive scale with `t² e^{−y} L(x1) = R(x1)`; checks the full
/// complex period equation to [`tol::PERIOD_EQUATION`] before returning.
pub fn solve_t(b_coeff: f64, y: f64, x1: f64) -> Result<f64> {
    let l = curve_l(b_coeff, y, x1);
    let r = curve_r(b_coeff, y, x1);
    if l.norm() == 0.0 {
        return Err(Error::SolverFailure("L(x1) = 0".into()));
    }
    let t = (y.exp() * r.norm() / l.norm()).sqrt();
    let residual = (t * t * (-y).exp() * l - r).norm() / r.norm();
    if residual > tol::PERIOD_EQUATION {
        return Err(Error::SolverFailure(format!(
            "period equation residual {residual:.3e} at (B, y, x1) = ({b_coeff}, {y}, {x1})"
        )));
    }
    Ok(t)
}

/// The length `F(B, y) = 2π t |L(x1)|` of the horizontal flux.
pub fn flux_length(b_coeff: f64, y: f64) -> Result<f64> {
    flux_length_from(b_coeff, y, 0).map(|(f, _)| f)
}

fn flux_length_from(b_coeff: f64, y: f64, start_window: usize) -> Result<(f64, RootX1)> {
    let root = find_x1_from(b_coeff, y, start_window)?;
    let t = solve_t(b_coeff, y, root.x1)?;
    Ok((TAU * t * curve_l(b_coeff, y, root.x1).norm(), root))
}

const BRACKET_DOUBLINGS: usize = 40;

/// Case 1: solve for a non-vertical flux target (`a > 0`, `b ≥ 0`).
pub fn solve_nonvertical(target: &SolveTarget) -> Result<SolveResult> {
    solve_nonvertical_in_window(target, 0)
}

/// Case-1 solve restricted to scan windows `>= start_window`, producing an
/// alternative representative of the same flux when `start_window > 0`.
pub fn solve_nonvertical_in_window(target: &SolveTarget, start_window: usize) -> Result<SolveResult> {
    if target.a <= 0.0 {
        return Err(Error::RejectedInput("solve_nonvertical requires a > 0".into()));
    }
    let bc = target.b_coeff();
    let gap = |y: f64| -> Result<f64> { Ok(flux_length_from(bc, y, start_window)?.0 - target.a) };

    // Bracket a sign change of F − a, expanding y = ±2^k geometrically.
    let g0 = gap(0.0)?;
    let (mut y_lo, mut y_hi) = (0.0, 0.0);
    if g0 == 0.0 {
        y_lo = -f64::MIN_POSITIVE;
        y_hi = 0.0;
    } else {
        let dir = if g0 > 0.0 { -1.0 } else { 1.0 };
        let mut found = false;
        let mut prev = 0.0;
        for k in 0..=BRACKET_DOUBLINGS {
            let y = dir * (2.0f64).powi(k as i32);
            let g = gap(y)?;
            if g == 0.0 || g.signum() != g0.signum() {
                if dir > 0.0 {
                    y_lo = prev;
                    y_hi = y;
                } else {
                    y_lo = y;
                    y_hi = prev;
                }
                found = true;
                break;
            }
            prev = y;
        }
        if !found {
            return Err(Error::SolverFailure(format!(
                "no bracket for F(B, y) = {} within ±2^{BRACKET_DOUBLINGS}",
                target.a
            )));
        }
    }

    // F increases from y_lo to y_hi across the bracket; plain bisection.
    let ftol = tol::FLUX_BISECT * (1.0 + target.a);
    let mut y = 0.5 * (y_lo + y_hi);
    for _ in 0..300 {
        y = 0.5 * (y_lo + y_hi);
        let g = gap(y)?;
        if g.abs() < ftol {
            break;
        }
        if g < 0.0 {
            y_lo = y;
        } else {
            y_hi = y;
        }
    }
    let (f_final, root) = flux_length_from(bc, y, start_window)?;
    if (f_final - target.a).abs() >= ftol * 10.0 {
        return Err(Error::SolverFailure(format!(
            "flux-length bisection stalled at |F - a| = {:.3e} (window {start_window})",
            (f_final - target.a).abs()
        )));
    }
    let t = solve_t(bc, y, root.x1)?;
    let family = WeierstrassFamily::non_vertical_flux(t, Complex64::new(root.x1, y), bc)?;
    let family = normalize_rotation(family)?;
    finish(family, target, Diagnostics::NonVertical { x1: root.x1, y, t, window_index: root.window_index })
}

/// Case 2 argument match: the unique `x(y) ∈ J = (3π/2, 5π/2)` equating the
/// arguments of both sides of the vertical period equation.
fn vertical_x_of_y(b_coeff: f64, y: f64) -> f64 {
    // θ_L = x + arg(y + i(x+B)) − 2π increases faster than 1 in x;
    // θ_R = arg(x + iy) decreases. One sign change on J.
    let d = |x: f64| x + (x + b_coeff).atan2(y) - TAU - y.atan2(x);
    let (mut a, mut b) = (1.5 * PI, 2.5 * PI);
    for _ in 0..BISECT_ITERS {
        let mid = 0.5 * (a + b);
        if d(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// The full complex defect `2y e^y e^{ix}(y + i(x+B)) − B(x + iy)` whose root
/// in `(x, y)` solves the vertical period problem.
fn vertical_defect(b_coeff: f64, x: f64, y: f64) -> Complex64 {
    let eix = Complex64::from_polar(1.0, x);
    2.0 * y * y.exp() * eix * Complex64::new(y, x + b_coeff) - b_coeff * Complex64::new(x, y)
}

/// Case 2: solve for a vertical flux target `(0, 0, −b)` with `b > 0`.
pub fn solve_vertical(b: f64) -> Result<SolveResult> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::RejectedInput("solve_vertical requires b > 0".into()));
    }
    let bc = b / TAU;
    // Outer variable: modulus mismatch of the two sides along y > 0.
    let mismatch = |y: f64| {
        let x = vertical_x_of_y(bc, y);
        2.0 * y * y.exp() * Complex64::new(y, x + bc).norm() - bc * Complex64::new(x, y).norm()
    };

    let (mut y_lo, mut y_hi);
    if mismatch(1.0) > 0.0 {
        y_hi = 1.0;
        y_lo = 1.0;
        let mut found = false;
        for _ in 0..BRACKET_DOUBLINGS {
            y_lo *= 0.5;
            if mismatch(y_lo) < 0.0 {
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::SolverFailure("no lower bracket for the vertical solve".into()));
        }
    } else {
        y_lo = 1.0;
        y_hi = 1.0;
        let mut found = false;
        for _ in 0..BRACKET_DOUBLINGS {
            y_hi *= 2.0;
            if mismatch(y_hi) > 0.0 {
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::SolverFailure("no upper bracket for the vertical solve".into()));
        }
    }
    let mut y = 0.5 * (y_lo + y_hi);
    for _ in 0..200 {
        y = 0.5 * (y_lo + y_hi);
        if mismatch(y) < 0.0 {
            y_lo = y;
        } else {
            y_hi = y;
        }
    }
    let mut x = vertical_x_of_y(bc, y);

    // Newton polish on the full complex defect for the final certificate.
    for _ in 0..12 {
        let g = vertical_defect(bc, x, y);
        let eix = Complex64::from_polar(1.0, x);
        let w = Complex64::new(y, x + bc);
        let gx = 2.0 * y * y.exp() * Complex64::i() * eix * (w + 1.0) - bc;
        let gy = 2.0 * y.exp() * eix * ((1.0 + y) * w + y) - Complex64::i() * bc;
        let det = gx.re * gy.im - gx.im * gy.re;
        if det.abs() < 1e-300 {
            break;
        }
        let dx = (-g.re * gy.im + g.im * gy.re) / det;
        let dy = (-gx.re * g.im + gx.im * g.re) / det;
        x += dx;
        y += dy;
        if dx.hypot(dy) < 1e-15 * (1.0 + x.abs() + y.abs()) {
            break;
        }
    }
    if !(y > 0.0 && x > 1.5 * PI && x < 2.5 * PI) {
        return Err(Error::SolverFailure(format!(
            "vertical solution (x, y) = ({x}, {y}) left the window J × R+"
        )));
    }
    let family = WeierstrassFamily::vertical_flux(Complex64::new(x, y), bc)?;
    let target = SolveTarget { a: 0.0, b };
    finish(family, &target, Diagnostics::Vertical { x, y })
}

/// Choose the rotation α so the horizontal flux `i e^{iα} ∫g dh` points along
/// the positive first axis. The period residual is invariant under α, so a
/// solved family stays solved; callers pass period-closed families.
pub fn normalize_rotation(family: WeierstrassFamily) -> Result<WeierstrassFamily> {
    let rep = periods::period_residual_and_flux(&family)?;
    let hflux = Complex64::i() * rep.int_gdh;
    if hflux.norm() == 0.0 {
        return Ok(family);
    }
    let alpha = wrap_angle(family.rotation() - hflux.arg());
    Ok(family.with_rotation(alpha))
}

fn finish(family: WeierstrassFamily, target: &SolveTarget, diagnostics: Diagnostics) -> Result<SolveResult> {
    let rep = periods::period_residual_and_flux(&family)?;
    validate_certificate(&rep, target)?;
    Ok(SolveResult {
        rotation_angle: family.rotation(),
        achieved_flux: rep.flux,
        period_residual: rep.period_residual,
        family,
        diagnostics,
    })
}

fn validate_certificate(rep: &PeriodReport, target: &SolveTarget) -> Result<()> {
    if rep.period_residual >= tol::PERIOD_RESIDUAL {
        return Err(Error::SolverFailure(format!(
            "period residual {:.3e} above certificate tolerance",
            rep.period_residual
        )));
    }
    let want = [target.a, 0.0, -target.b];
    for (got, want) in rep.flux.iter().zip(want) {
        if (got - want).abs() >= tol::FLUX_TARGET {
            return Err(Error::SolverFailure(format!(
                "achieved flux {:?} misses target ({}, 0, {}) beyond {:.0e}",
                rep.flux, target.a, -target.b, tol::FLUX_TARGET
            )));
        }
    }
    Ok(())
}

/// Dispatch: `(0,0)` is the helicoid, `(0, b)` the vertical case, `(a > 0, b)`
/// the non-vertical case. Every result is re-validated against the closed
/// forms before being returned.
pub fn solve(target: &SolveTarget) -> Result<SolveResult> {
    if target.a == 0.0 && target.b == 0.0 {
        let family = WeierstrassFamily::helicoid();
        return finish(family, target, Diagnostics::Helicoid {});
    }
    if target.a == 0.0 {
        solve_vertical(target.b)
    } else {
        solve_nonvertical(target)
    }
}
