//! Complex line-integral quadrature.
//!
//! Two schemes, matched to the two integral shapes in this crate:
//!
//! * [`circle_trapezoid`] — the trapezoid rule on a full circle, which is
//!   spectrally accurate for analytic periodic integrands. Used for boundary
//!   periods, with sample doubling until two successive results agree.
//! * [`integrate_segment`] / [`integrate_arc`] — adaptive Gauss–Kronrod 15(7)
//!   panels along straight segments and circular arcs, for the open path
//!   integrals of the immersion.

use num_complex::Complex64;

use crate::{Error, Result};

/// Kronrod abscissae for the 15-point rule (positive half; last entry 0).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
/// 7-point Gauss weights (for XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];
/// 15-point Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_20,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];

/// One Gauss–Kronrod 15(7) panel for a complex-valued function on [a, b].
/// Returns (kronrod value, error estimate |K15 − G7|, panel mass ∫|f|).
fn gk15<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = fc.norm() * WGK[7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        let sum = f1 + f2;
        kronrod += sum * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += sum * WG[j / 2];
        }
    }
    (kronrod * half, (kronrod - gauss).norm() * half.abs(), resabs * half.abs())
}

/// Adaptively integrate `f` over `[a, b]`, splitting panels until each local
/// error estimate sits at the panel's own rounding scale, `tol` relative to
/// the panel mass ∫|f|. The achievable total error is then a small multiple
/// of `eps · ∫|f|` — the cancellation floor of the data itself.
fn adaptive<F: FnMut(f64) -> Complex64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: f64,
    noise_scale: f64,
) -> Result<Complex64> {
    // Seed with panels short enough that e^{±iz} varies by O(1) per panel.
    let len = (b - a).abs();
    let n0 = (len / 2.0).ceil().max(1.0) as usize;
    let mut stack: Vec<(f64, f64, u32)> = (0..n0)
        .rev()
        .map(|k| {
            let t0 = a + (b - a) * k as f64 / n0 as f64;
            let t1 = a + (b - a) * (k + 1) as f64 / n0 as f64;
            (t0, t1, 0u32)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut panels = 0usize;
    // The |K15 − G7| estimate carries the rounding of the samples themselves,
    // which for e^{±iz}-type integrands is eps times the phase argument
    // magnitude; the budget never drops below that floor.
    let floor = f64::EPSILON * (64.0 + 2.0 * noise_scale);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err, mass) = gk15(f, lo, hi);
        panels += 1;
        if panels > 400_000 {
            return Err(Error::QuadratureFailed { last: total + val, prev: total });
        }
        let budget = (tol.max(floor) * mass).max(1e-300);
        if err <= budget || depth >= 30 {
            if depth >= 30 && err > 1e3 * budget {
                return Err(Error::QuadratureFailed { last: total + val, prev: total });
            }
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(total)
}

/// `∫ f(z) dz` along the straight segment from `za` to `zb`.
pub fn integrate_segment<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    za: Complex64,
    zb: Complex64,
    tol: f64,
) -> Result<Complex64> {
    let d = zb - za;
    if d.norm() == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // Parametrize by arc length units so the panel seeding sees the true scale.
    let scale = d.norm();
    let mut h = |s: f64| f(za + d * (s / scale)) * (d / scale);
    adaptive(&mut h, 0.0, scale, tol, za.norm().max(zb.norm()))
}

/// `∫ f(z) dz` along the arc `z = radius e^{iθ}`, `θ` from `th0` to `th1`
/// (either direction; `|th1 − th0|` may exceed 2π for universal-cover paths).
pub fn integrate_arc<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    radius: f64,
    th0: f64,
    th1: f64,
    tol: f64,
) -> Result<Complex64> {
    if th0 == th1 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut g = |s: f64| {
        let z = Complex64::from_polar(radius, s / radius);
        f(z) * Complex64::new(0.0, 1.0) * z / radius
    };
    let span = radius * (1.0 + th0.abs().max(th1.abs()));
    adaptive(&mut g, th0 * radius, th1 * radius, tol, span)
}

/// Trapezoid sum over the circle `|z| = radius`, oriented as the boundary of
/// the exterior disk (clockwise): `z(s) = radius · e^{-is}`, `s ∈ [0, 2π)`.
pub fn circle_trapezoid<F: FnMut(Complex64) -> Complex64>(
    f: &mut F,
    radius: f64,
    samples: usize,
) -> Complex64 {
    circle_trapezoid_with_mass(f, radius, samples).0
}

/// As [`circle_trapezoid`], also returning `∮ |f| |dz|`, whose product with
/// the machine epsilon bounds the rounding floor of the sum.
pub fn circle_trapezoid_with_mass<F: FnMut(Complex64) -> Complex64>(
    f: &mut F,
    radius: f64,
    samples: usize,
) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut mass = 0.0f64;
    let step = std::f64::consts::TAU / samples as f64;
    for k in 0..samples {
        let z = Complex64::from_polar(radius, -(k as f64) * step);
        // dz = -i z ds
        let term = f(z) * Complex64::new(0.0, -1.0) * z;
        acc += term;
        mass += term.norm();
    }
    (acc * step, mass * step)
}

/// Doubles the trapezoid sample count until two successive values agree to
/// `tol` (widened to the rounding floor of the accumulated integrand mass
/// when that is larger), starting from `n0` samples.
pub fn circle_converged<F: FnMut(Complex64) -> Complex64>(
    mut f: F,
    radius: f64,
    n0: usize,
    cap: usize,
    tol: f64,
) -> Result<Complex64> {
    let mut n = n0.max(4);
    let mut prev = circle_trapezoid(&mut f, radius, n);
    while n < cap {
        n *= 2;
        let (cur, mass) = circle_trapezoid_with_mass(&mut f, radius, n);
        let floor = 64.0 * f64::EPSILON * mass;
        if (cur - prev).norm() < tol.max(floor) {
            return Ok(cur);
        }
        prev = cur;
    }
    let last = prev;
    let prev = circle_trapezoid(&mut f, radius, n / 2);
    Err(Error::QuadratureFailed { last, prev })
}
