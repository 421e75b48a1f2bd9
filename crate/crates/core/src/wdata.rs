//! The explicit Weierstrass-data families.
//!
//! Every family lives on an exterior disk `D(∞, R') = { |z| ≥ R' }` and has
//! the shape `g(z) = e^{iα} · e^{iz + f(z)}` (up to a positive scale),
//! `dh = (1 + λ/(z − μ)) dz`:
//!
//! * `Helicoid` — `g = e^{iz}`, `dh = dz`
//! * `NonVerticalFlux` — `g = t e^{iz} (z − A)/z`, `dh = (1 + B/z) dz`
//! * `VerticalFlux` — `g = e^{iz} (z − A)/(z − conj A)`, `dh = (1 + B/z) dz`
//! * `GenericExp` — `g = e^{iz + Σ c_k z^{-k}}`, `dh = (1 + λ/(z − μ)) dz`
//!
//! The rotation angle α is stored as metadata (post-composition `g ↦ e^{iα}g`)
//! rather than folded into `f`, so the closed-form periods stay valid: they
//! transform by `e^{±iα}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cplx::{is_finite, serde_complex_opt, serde_complex_vec, wrap_angle};
use crate::{Error, Result};

/// Slack admitted when testing `|z| ≥ R'`, so points generated to sit exactly
/// on the boundary circle are not rejected by rounding.
const DOMAIN_SLACK: f64 = 1e-9;

/// One of the explicit data families.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyVariant {
    /// `g = e^{iz}`, `dh = dz`; flux (0,0,0).
    Helicoid,
    /// `g = t e^{iz}(z − A)/z`, `dh = (1 + B/z) dz` with `t > 0`, `A ≠ 0`,
    /// `B ≥ 0`.
    NonVerticalFlux { t: f64, a: Complex64, b: f64 },
    /// `g = e^{iz}(z − A)/(z − conj A)`, `dh = (1 + B/z) dz` with `Im A > 0`,
    /// `B > 0`.
    VerticalFlux { a: Complex64, b: f64 },
    /// `g = e^{iz + f(z)}` with a finite Laurent tail
    /// `f(z) = Σ_{k=1..m} c_k z^{-k}`, `dh = (1 + λ/(z − μ)) dz`.
    GenericExp {
        laurent: Vec<Complex64>,
        lambda: f64,
        mu: Complex64,
    },
}

/// A data family together with its rotation angle and domain radius.
#[derive(Debug, Clone, PartialEq)]
pub struct WeierstrassFamily {
    variant: FamilyVariant,
    rotation: f64,
    domain_radius: f64,
}

impl WeierstrassFamily {
    pub fn helicoid() -> Self {
        WeierstrassFamily {
            variant: FamilyVariant::Helicoid,
            rotation: 0.0,
            domain_radius: default_radius(&FamilyVariant::Helicoid),
        }
    }

    pub fn non_vertical_flux(t: f64, a: Complex64, b: f64) -> Result<Self> {
        let variant = FamilyVariant::NonVerticalFlux { t, a, b };
        validate(&variant)?;
        let domain_radius = default_radius(&variant);
        Ok(WeierstrassFamily { variant, rotation: 0.0, domain_radius })
    }

    pub fn vertical_flux(a: Complex64, b: f64) -> Result<Self> {
        let variant = FamilyVariant::VerticalFlux { a, b };
        validate(&variant)?;
        let domain_radius = default_radius(&variant);
        Ok(WeierstrassFamily { variant, rotation: 0.0, domain_radius })
    }

    pub fn generic_exp(laurent: Vec<Complex64>, lambda: f64, mu: Complex64) -> Result<Self> {
        let variant = FamilyVariant::GenericExp { laurent, lambda, mu };
        validate(&variant)?;
        let domain_radius = default_radius(&variant);
        Ok(WeierstrassFamily { variant, rotation: 0.0, domain_radius })
    }

    /// Post-compose the Gauss map with `e^{iα}` (rotation about the x3-axis).
    pub fn with_rotation(mut self, alpha: f64) -> Self {
        self.rotation = wrap_angle(alpha);
        self
    }

    /// Override the domain radius. It must stay strictly outside every pole
    /// and zero of the data; the helicoid has none, so any `R' ≥ 0` is legal
    /// there (the tests use `R' = 0` to reach small `|z|`).
    pub fn with_domain_radius(mut self, r: f64) -> Result<Self> {
        let bound = singularity_bound(&self.variant);
        if !r.is_finite() || r < 0.0 || (bound > 0.0 && r <= bound) {
            return Err(Error::InvalidFamily(format!(
                "domain radius {r} must exceed the singularity bound {bound}"
            )));
        }
        self.domain_radius = r;
        Ok(self)
    }

    pub fn variant(&self) -> &FamilyVariant {
        &self.variant
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// Coefficient λ of the `dh` pole (equals B for the constructed families).
    pub fn lambda(&self) -> f64 {
        match &self.variant {
            FamilyVariant::Helicoid => 0.0,
            FamilyVariant::NonVerticalFlux { b, .. } => *b,
            FamilyVariant::VerticalFlux { b, .. } => *b,
            FamilyVariant::GenericExp { lambda, .. } => *lambda,
        }
    }

    /// Location μ of the `dh` pole (the origin for the constructed families).
    pub fn mu(&self) -> Complex64 {
        match &self.variant {
            FamilyVariant::GenericExp { mu, .. } => *mu,
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// The positive scale `t` in front of `e^{iz}` (1 except for
    /// `NonVerticalFlux`).
    pub fn scale(&self) -> f64 {
        match &self.variant {
            FamilyVariant::NonVerticalFlux { t, .. } => *t,
            _ => 1.0,
        }
    }

    pub fn check_domain(&self, z: Complex64) -> Result<()> {
        let m = z.norm();
        if !is_finite(z) || m < self.domain_radius - DOMAIN_SLACK {
            return Err(Error::DomainViolation { modulus: m, domain_radius: self.domain_radius });
        }
        Ok(())
    }

    /// `g(z)`, including the rotation factor `e^{iα}`.
    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok(self.g_raw(z))
    }

    /// The coefficient `h(z)` with `dh = h(z) dz`.
    pub fn dh_coeff(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok(self.dh_raw(z))
    }

    /// `(dg/g)/dz = i + f'(z)` in closed form per variant.
    pub fn log_deriv_g(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok(self.log_deriv_g_raw(z))
    }

    /// The closed-form height `x3(z) − x3(z0) = Re(z − z0) + λ log |(z−μ)/(z0−μ)|`.
    ///
    /// Only the modulus of `z − μ` enters, so there is no branch to track and
    /// the value is path independent.
    pub fn x3(&self, z: Complex64, z0: Complex64) -> Result<f64> {
        self.check_domain(z)?;
        self.check_domain(z0)?;
        let lambda = self.lambda();
        let mu = self.mu();
        let mut v = (z - z0).re;
        if lambda != 0.0 {
            v += lambda * ((z - mu).norm() / (z0 - mu).norm()).ln();
        }
        Ok(v)
    }

    pub(crate) fn g_raw(&self, z: Complex64) -> Complex64 {
        let rot = Complex64::from_polar(1.0, self.rotation);
        let i = Complex64::i();
        rot * match &self.variant {
            FamilyVariant::Helicoid => (i * z).exp(),
            FamilyVariant::NonVerticalFlux { t, a, .. } => t * (i * z).exp() * (z - a) / z,
            FamilyVariant::VerticalFlux { a, .. } => (i * z).exp() * (z - a) / (z - a.conj()),
            FamilyVariant::GenericExp { laurent, .. } => {
                (i * z + laurent_sum(laurent, z)).exp()
            }
        }
    }

    pub(crate) fn dh_raw(&self, z: Complex64) -> Complex64 {
        let lambda = self.lambda();
        if lambda == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            1.0 + lambda / (z - self.mu())
        }
    }

    pub(crate) fn log_deriv_g_raw(&self, z: Complex64) -> Complex64 {
        let i = Complex64::i();
        match &self.variant {
            FamilyVariant::Helicoid => i,
            // d/dz log((z−A)/z) = A/(z(z−A))
            FamilyVariant::NonVerticalFlux { a, .. } => i + a / (z * (z - a)),
            // d/dz log((z−A)/(z−conj A)) = (A − conj A)/((z−A)(z−conj A))
            FamilyVariant::VerticalFlux { a, .. } => {
                i + (a - a.conj()) / ((z - a) * (z - a.conj()))
            }
            FamilyVariant::GenericExp { laurent, .. } => i + laurent_deriv(laurent, z),
        }
    }

    /// `log |g(z)|`, computed from logs of the factors so large `|Im z|` does
    /// not overflow. Used by the curvature formula.
    pub(crate) fn log_abs_g_raw(&self, z: Complex64) -> f64 {
        match &self.variant {
            FamilyVariant::Helicoid => -z.im,
            FamilyVariant::NonVerticalFlux { t, a, .. } => {
                t.ln() - z.im + (z - a).norm().ln() - z.norm().ln()
            }
            FamilyVariant::VerticalFlux { a, .. } => {
                -z.im + (z - a).norm().ln() - (z - a.conj()).norm().ln()
            }
            FamilyVariant::GenericExp { laurent, .. } => -z.im + laurent_sum(laurent, z).re,
        }
    }
}

fn laurent_sum(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    // Horner in 1/z: Σ c_k z^{-k}, k = 1..m.
    let inv = 1.0 / z;
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = (acc + c) * inv;
    }
    acc
}

fn laurent_deriv(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let inv = 1.0 / z;
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, c) in coeffs.iter().enumerate().rev() {
        acc = (acc - (k + 1) as f64 * c) * inv;
    }
    acc * inv
}

/// Largest modulus of a pole or zero of the data.
fn singularity_bound(variant: &FamilyVariant) -> f64 {
    match variant {
        FamilyVariant::Helicoid => 0.0,
        // g: pole at 0, zero at A; dh: zero at −B, pole at 0.
        FamilyVariant::NonVerticalFlux { a, b, .. } => a.norm().max(*b),
        FamilyVariant::VerticalFlux { a, b } => a.norm().max(*b),
        FamilyVariant::GenericExp { laurent, lambda, mu } => {
            let f_sing = if laurent.is_empty() { 0.0 } else { f64::MIN_POSITIVE };
            // dh vanishes at μ − λ and has its pole at μ.
            f_sing.max(mu.norm()).max((mu - lambda).norm())
        }
    }
}

/// Domain radius rule: `R' = 2 max(|A|, |μ|, B, 1) + 1`, which keeps dh free
/// of zeros on the domain and leaves room for the Laurent-tail estimates.
fn default_radius(variant: &FamilyVariant) -> f64 {
    let m = match variant {
        FamilyVariant::Helicoid => 1.0,
        FamilyVariant::NonVerticalFlux { a, b, .. } => a.norm().max(*b).max(1.0),
        FamilyVariant::VerticalFlux { a, b } => a.norm().max(*b).max(1.0),
        FamilyVariant::GenericExp { lambda, mu, .. } => mu.norm().max(*lambda).max(1.0),
    };
    2.0 * m + 1.0
}

fn validate(variant: &FamilyVariant) -> Result<()> {
    let bad = |msg: &str| Err(Error::InvalidFamily(msg.to_string()));
    match variant {
        FamilyVariant::Helicoid => Ok(()),
        FamilyVariant::NonVerticalFlux { t, a, b } => {
            if !t.is_finite() || *t <= 0.0 {
                return bad("NonVerticalFlux requires t > 0");
            }
            if !is_finite(*a) || a.norm() == 0.0 {
                return bad("NonVerticalFlux requires A != 0");
            }
            if !b.is_finite() || *b < 0.0 {
                return bad("NonVerticalFlux requires B >= 0");
            }
            Ok(())
        }
        FamilyVariant::VerticalFlux { a, b } => {
            if !is_finite(*a) || a.im <= 0.0 {
                return bad("VerticalFlux requires Im A > 0");
            }
            if !b.is_finite() || *b <= 0.0 {
                return bad("VerticalFlux requires B > 0");
            }
            Ok(())
        }
        FamilyVariant::GenericExp { laurent, lambda, mu } => {
            if laurent.iter().any(|c| !is_finite(*c)) || !is_finite(*mu) {
                return bad("GenericExp requires finite coefficients");
            }
            if !lambda.is_finite() || *lambda < 0.0 {
                return bad("GenericExp requires lambda >= 0");
            }
            Ok(())
        }
    }
}

// ── JSON document ───────────────────────────────────────────────────────────
//
// Families serialize to the flat document
// { "variant": ..., "t": ..., "A": [re,im], "B": ..., "laurentF": [[re,im]..],
//   "lambda": ..., "mu": [re,im], "rotation": ..., "Rprime": ... }
// whose field names are the external contract for the CLI.

#[derive(Serialize, Deserialize)]
struct FamilyDoc {
    variant: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<f64>,
    #[serde(rename = "A", with = "serde_complex_opt", default, skip_serializing_if = "Option::is_none")]
    a: Option<Complex64>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(rename = "laurentF", with = "serde_complex_vec", default, skip_serializing_if = "Vec::is_empty")]
    laurent: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(with = "serde_complex_opt", default, skip_serializing_if = "Option::is_none")]
    mu: Option<Complex64>,
    rotation: f64,
    #[serde(rename = "Rprime")]
    rprime: f64,
}

impl Serialize for WeierstrassFamily {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut doc = FamilyDoc {
            variant: String::new(),
            t: None,
            a: None,
            b: None,
            laurent: Vec::new(),
            lambda: None,
            mu: None,
            rotation: self.rotation,
            rprime: self.domain_radius,
        };
        match &self.variant {
            FamilyVariant::Helicoid => doc.variant = "Helicoid".into(),
            FamilyVariant::NonVerticalFlux { t, a, b } => {
                doc.variant = "NonVerticalFlux".into();
                doc.t = Some(*t);
                doc.a = Some(*a);
                doc.b = Some(*b);
            }
            FamilyVariant::VerticalFlux { a, b } => {
                doc.variant = "VerticalFlux".into();
                doc.a = Some(*a);
                doc.b = Some(*b);
            }
            FamilyVariant::GenericExp { laurent, lambda, mu } => {
                doc.variant = "GenericExp".into();
                doc.laurent = laurent.clone();
                doc.lambda = Some(*lambda);
                doc.mu = Some(*mu);
            }
        }
        doc.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for WeierstrassFamily {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let doc = FamilyDoc::deserialize(de)?;
        let missing = |f: &str| DeError::custom(format!("{} requires field {f}", doc.variant));
        let variant = match doc.variant.as_str() {
            "Helicoid" => FamilyVariant::Helicoid,
            "NonVerticalFlux" => FamilyVariant::NonVerticalFlux {
                t: doc.t.ok_or_else(|| missing("t"))?,
                a: doc.a.ok_or_else(|| missing("A"))?,
                b: doc.b.ok_or_else(|| missing("B"))?,
            },
            "VerticalFlux" => FamilyVariant::VerticalFlux {
                a: doc.a.ok_or_else(|| missing("A"))?,
                b: doc.b.ok_or_else(|| missing("B"))?,
            },
            "GenericExp" => FamilyVariant::GenericExp {
                laurent: doc.laurent,
                lambda: doc.lambda.unwrap_or(0.0),
                mu: doc.mu.unwrap_or_else(|| Complex64::new(0.0, 0.0)),
            },
            other => return Err(DeError::custom(format!("unknown variant {other:?}"))),
        };
        validate(&variant).map_err(DeError::custom)?;
        let fam = WeierstrassFamily {
            variant,
            rotation: doc.rotation,
            domain_radius: 1.0,
        };
        fam.with_domain_radius(doc.rprime).map_err(DeError::custom)
    }
}
