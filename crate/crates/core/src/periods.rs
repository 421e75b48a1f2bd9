//! Boundary periods and flux.
//!
//! The three boundary integrals over `∂_R = {|z| = R}`, oriented as the
//! boundary of the exterior disk, are computed two independent ways:
//!
//! * closed-form residues per variant (exact up to rounding), and
//! * trapezoid contour quadrature with sample doubling ([`contour_integral`]).
//!
//! Closed forms, with the clockwise orientation:
//!
//! ```text
//! NonVerticalFlux:  ∫ g dh   = 2πi t (A − B + i A B)
//!                   ∫ dh/g   = −2πi (A + B) e^{-iA} / t
//! VerticalFlux:     ∫ g dh   = −2πi [ e^{i conj A}(conj A − A + B − AB/conj A) + AB/conj A ]
//!                   ∫ dh/g   = −2πi [ e^{-iA}(A − conj A + B − conj A·B/A) + conj A·B/A ]
//! both:             ∫ dh     = −2πi B
//! ```
//!
//! A rotation α multiplies `∫ g dh` by `e^{iα}` and `∫ dh/g` by `e^{-iα}`.
//!
//! The period residual is `|conj(∫ g dh) − ∫ dh/g| + |Re ∫ dh|`, zero exactly
//! when the period problem is solved, and the flux vector is
//! `(Re(i ∫g dh), Im(i ∫g dh), Im ∫dh)` under the identification
//! `(a1, a2, a3) ≡ (a1 + i a2, a3)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::cplx::serde_complex;
use crate::wdata::{FamilyVariant, WeierstrassFamily};
use crate::{quad, tol, Error, Result};

/// The three boundary integrals with the derived residual and flux.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PeriodReport {
    #[serde(rename = "intGdh", with = "serde_complex")]
    pub int_gdh: Complex64,
    #[serde(rename = "intDhOverG", with = "serde_complex")]
    pub int_dh_over_g: Complex64,
    #[serde(rename = "intDh", with = "serde_complex")]
    pub int_dh: Complex64,
    #[serde(rename = "periodResidual")]
    pub period_residual: f64,
    pub flux: [f64; 3],
}

impl PeriodReport {
    fn assemble(int_gdh: Complex64, int_dh_over_g: Complex64, int_dh: Complex64) -> Self {
        let period_residual = (int_gdh.conj() - int_dh_over_g).norm() + int_dh.re.abs();
        let hflux = Complex64::i() * int_gdh;
        PeriodReport {
            int_gdh,
            int_dh_over_g,
            int_dh,
            period_residual,
            flux: [hflux.re, hflux.im, int_dh.im],
        }
    }
}

/// Which one-form to integrate along the contour.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    GDh,
    DhOverG,
    Dh,
}

/// Contour parameters. Orientation is fixed globally: boundary of the
/// exterior disk, i.e. clockwise around the origin.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radius: f64,
    pub samples: usize,
}

impl ContourSpec {
    pub fn new(radius: f64, samples: usize) -> Result<Self> {
        if !(samples >= 64 && samples.is_power_of_two()) {
            return Err(Error::RejectedInput(format!(
                "samples must be a power of two >= 64, got {samples}"
            )));
        }
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::RejectedInput(format!("invalid contour radius {radius}")));
        }
        Ok(ContourSpec { radius, samples })
    }
}

const SAMPLE_CAP: usize = 1 << 22;

/// Trapezoid quadrature of the selected one-form over `|z| = spec.radius`,
/// doubling samples until two successive results differ by less than
/// [`tol::CONTOUR_CONVERGENCE`].
pub fn contour_integral(
    family: &WeierstrassFamily,
    integrand: Integrand,
    spec: &ContourSpec,
) -> Result<Complex64> {
    if spec.radius < family.domain_radius() {
        return Err(Error::DomainViolation {
            modulus: spec.radius,
            domain_radius: family.domain_radius(),
        });
    }
    let f = |z: Complex64| {
        let h = family.dh_raw(z);
        match integrand {
            Integrand::GDh => family.g_raw(z) * h,
            Integrand::DhOverG => h / family.g_raw(z),
            Integrand::Dh => h,
        }
    };
    quad::circle_converged(f, spec.radius, spec.samples, SAMPLE_CAP, tol::CONTOUR_CONVERGENCE)
}

/// Exact residue values of the three boundary integrals.
///
/// Errors with [`Error::UnsupportedVariant`] for `GenericExp`, whose Laurent
/// tail has no closed-form residue here; use [`contour_integral`] instead.
pub fn closed_form_periods(family: &WeierstrassFamily) -> Result<PeriodReport> {
    let i = Complex64::i();
    let two_pi_i = i * TAU;
    let (gdh, dhg, dh) = match *family.variant() {
        FamilyVariant::Helicoid => {
            let zero = Complex64::new(0.0, 0.0);
            (zero, zero, zero)
        }
        FamilyVariant::NonVerticalFlux { t, a, b } => {
            let gdh = two_pi_i * t * (a - b + i * a * b);
            let dhg = -two_pi_i * (a + b) * (-i * a).exp() / t;
            (gdh, dhg, -two_pi_i * b)
        }
        FamilyVariant::VerticalFlux { a, b } => {
            let ac = a.conj();
            let gdh = -two_pi_i * ((i * ac).exp() * (ac - a + b - a * b / ac) + a * b / ac);
            let dhg = -two_pi_i * ((-i * a).exp() * (a - ac + b - ac * b / a) + ac * b / a);
            (gdh, dhg, -two_pi_i * b)
        }
        FamilyVariant::GenericExp { .. } => {
            return Err(Error::UnsupportedVariant(
                "closed-form periods are not available for GenericExp".into(),
            ))
        }
    };
    let rot = Complex64::from_polar(1.0, family.rotation());
    Ok(PeriodReport::assemble(rot * gdh, dhg / rot, dh))
}

/// Periods by closed form when available, otherwise by contour quadrature.
pub fn period_residual_and_flux(family: &WeierstrassFamily) -> Result<PeriodReport> {
    match family.variant() {
        FamilyVariant::GenericExp { .. } => {
            let spec = ContourSpec::new(family.domain_radius() + 1.0, 256)?;
            let gdh = contour_integral(family, Integrand::GDh, &spec)?;
            let dhg = contour_integral(family, Integrand::DhOverG, &spec)?;
            let dh = contour_integral(family, Integrand::Dh, &spec)?;
            Ok(PeriodReport::assemble(gdh, dhg, dh))
        }
        _ => closed_form_periods(family),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn helicoid_periods_vanish() {
        let rep = closed_form_periods(&WeierstrassFamily::helicoid()).unwrap();
        assert_eq!(rep.period_residual, 0.0);
        assert_eq!(rep.flux, [0.0, 0.0, 0.0]);
        let spec = ContourSpec::new(5.0, 64).unwrap();
        let q = contour_integral(&WeierstrassFamily::helicoid(), Integrand::Dh, &spec).unwrap();
        assert!(q.norm() < 1e-12);
    }

    #[test]
    fn orientation_pinned_by_simple_residue() {
        // t = 1, A = 1, B = 0: ∫ g dh = 2πi with the clockwise orientation.
        let fam = WeierstrassFamily::non_vertical_flux(1.0, c(1.0, 0.0), 0.0).unwrap();
        let spec = ContourSpec::new(10.0, 64).unwrap();
        let q = contour_integral(&fam, Integrand::GDh, &spec).unwrap();
        assert!((q - c(0.0, TAU)).norm() < 1e-10, "got {q}");
        let cf = closed_form_periods(&fam).unwrap();
        assert!((cf.int_gdh - c(0.0, TAU)).norm() < 1e-14);
    }

    #[test]
    fn non_vertical_closed_form_examples() {
        // A = 2π: ∫ g dh = 4π²i, horizontal flux (−4π², 0).
        let fam = WeierstrassFamily::non_vertical_flux(1.0, c(2.0 * PI, 0.0), 0.0).unwrap();
        let rep = closed_form_periods(&fam).unwrap();
        assert!((rep.int_gdh - c(0.0, 4.0 * PI * PI)).norm() < 1e-12);
        assert!((rep.flux[0] + 4.0 * PI * PI).abs() < 1e-12);
        assert!(rep.flux[1].abs() < 1e-12 && rep.flux[2].abs() < 1e-12);

        // A = 1 + i, B = 2: ∫ g dh = 2πi(−3 + 3i).
        let fam = WeierstrassFamily::non_vertical_flux(1.0, c(1.0, 1.0), 2.0).unwrap();
        let rep = closed_form_periods(&fam).unwrap();
        let want = c(0.0, TAU / 2.0) * 2.0 * c(-3.0, 3.0);
        assert!((rep.int_gdh - want).norm() < 1e-12, "{} vs {}", rep.int_gdh, want);
    }

    #[test]
    fn oracle_agreement_randomized() {
        // 20 draws per variant, quadrature at 2 R' and 4 R' against residues.
        // Parameters stay O(1): the integrand grows like e^{|z|} on the
        // contour, so a 1e-8 absolute comparison is only meaningful while
        // eps * e^{4 R'} stays below it.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        for draw in 0..20 {
            let t = rng.gen_range(0.5..2.0);
            let a = Complex64::from_polar(rng.gen_range(0.2..1.0), rng.gen_range(-PI..PI));
            let b = rng.gen_range(0.0..1.0);
            let nv = WeierstrassFamily::non_vertical_flux(t, a, b).unwrap();

            let av = c(rng.gen_range(0.1..0.8), rng.gen_range(0.1..0.6));
            let bv = rng.gen_range(0.1..1.0);
            let vf = WeierstrassFamily::vertical_flux(av, bv).unwrap();

            for fam in [nv, vf] {
                let cf = closed_form_periods(&fam).unwrap();
                for mult in [2.0, 4.0] {
                    let spec = ContourSpec::new(mult * fam.domain_radius(), 64).unwrap();
                    for (sel, want) in [
                        (Integrand::GDh, cf.int_gdh),
                        (Integrand::DhOverG, cf.int_dh_over_g),
                        (Integrand::Dh, cf.int_dh),
                    ] {
                        let q = contour_integral(&fam, sel, &spec).unwrap();
                        assert!(
                            (q - want).norm() < 1e-8,
                            "draw {draw} {sel:?} radius x{mult}: {q} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_covariance() {
        let base = WeierstrassFamily::non_vertical_flux(1.3, c(4.0, -1.0), 0.7).unwrap();
        let cf0 = closed_form_periods(&base).unwrap();
        for alpha in [0.3, -2.2, PI] {
            let cf = closed_form_periods(&base.clone().with_rotation(alpha)).unwrap();
            let rot = Complex64::from_polar(1.0, alpha);
            assert!((cf.int_gdh - rot * cf0.int_gdh).norm() < 1e-12 * cf0.int_gdh.norm());
            assert!(
                (cf.int_dh_over_g - cf0.int_dh_over_g / rot).norm()
                    < 1e-12 * cf0.int_dh_over_g.norm()
            );
            assert_eq!(cf.int_dh, cf0.int_dh);
            assert!((cf.period_residual - cf0.period_residual).abs() < 1e-9);
        }
    }

    #[test]
    fn vertical_flux_component_exact() {
        // Im ∫dh = −2πB for every family with dh = (1 + B/z)dz.
        for b in [0.25, 1.0, 3.5] {
            let fam = WeierstrassFamily::non_vertical_flux(1.0, c(2.0, 0.5), b).unwrap();
            let rep = closed_form_periods(&fam).unwrap();
            assert!((rep.flux[2] + TAU * b).abs() < tol::ALGEBRAIC);
            assert!(rep.int_dh.re.abs() < tol::ALGEBRAIC);
        }
    }

    #[test]
    fn reversed_orientation_negates() {
        // Counterclockwise trapezoid sum equals minus the clockwise one.
        let fam = WeierstrassFamily::vertical_flux(c(0.5, 0.5), 0.5).unwrap();
        let r = 2.0 * fam.domain_radius();
        let mut f = |z: Complex64| fam.g_raw(z) * fam.dh_raw(z);
        let cw = quad::circle_trapezoid(&mut f, r, 4096);
        let step = TAU / 4096.0;
        let mut ccw = c(0.0, 0.0);
        for k in 0..4096 {
            let z = Complex64::from_polar(r, k as f64 * step);
            ccw += f(z) * Complex64::i() * z;
        }
        ccw *= step;
        assert!((cw + ccw).norm() < 1e-10);
    }

    #[test]
    fn generic_exp_residue_series_oracle() {
        // For g = e^{iz + c/z}, dh = (1 + λ/z) dz the residue at 0 is the
        // series Σ_{n≥1} c^n i^{n-1} / (n! (n-1)!) + λ Σ_{n≥0} c^n i^n / (n!)²,
        // and ∫ over the boundary-of-exterior contour is −2πi times that.
        let cc = c(0.4, -0.3);
        let lambda = 0.8;
        let fam = WeierstrassFamily::generic_exp(vec![cc], lambda, c(0.0, 0.0)).unwrap();
        let i = Complex64::i();
        let mut res = c(0.0, 0.0);
        let mut term_a = c(1.0, 0.0); // c^n/(n!(n-1)!) · i^{n-1}, n from 1
        let mut term_b = c(1.0, 0.0); // c^n i^n/(n!)², n from 0
        res += lambda * term_b;
        for n in 1..40 {
            let nf = n as f64;
            term_a = if n == 1 { cc } else { term_a * cc * i / (nf * (nf - 1.0)) };
            term_b = term_b * cc * i / (nf * nf);
            res += term_a + lambda * term_b;
        }
        let want = -c(0.0, TAU) * res;
        let rep = period_residual_and_flux(&fam).unwrap();
        assert!((rep.int_gdh - want).norm() < 1e-9, "{} vs {}", rep.int_gdh, want);
    }

    #[test]
    fn contour_spec_validation() {
        assert!(ContourSpec::new(5.0, 63).is_err());
        assert!(ContourSpec::new(5.0, 96).is_err());
        assert!(ContourSpec::new(-1.0, 64).is_err());
        let fam = WeierstrassFamily::non_vertical_flux(1.0, c(2.0, 0.0), 1.0).unwrap();
        let spec = ContourSpec::new(1.0, 64).unwrap();
        assert!(contour_integral(&fam, Integrand::Dh, &spec).is_err());
    }
}
