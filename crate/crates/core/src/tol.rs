//! Centralized numerical tolerances.
//!
//! Tolerances widen by roughly two orders at each outward layer so that inner
//! error budgets are absorbed: argument matching (1e-10) feeds the period
//! residual certificate (1e-9) which feeds the flux target (1e-6).

/// Argument-matching certificate for the root `x1` of thetaR = thetaL (mod 2π).
pub const ARG_MATCH: f64 = 1e-10;

/// Residual of the full complex period equation after the scale `t` is fixed.
pub const PERIOD_EQUATION: f64 = 1e-10;

/// Period residual certificate |conj(∫g dh) − ∫dh/g| + |Re ∫dh| for a solve.
pub const PERIOD_RESIDUAL: f64 = 1e-9;

/// Componentwise accuracy of the achieved flux vector against the target.
pub const FLUX_TARGET: f64 = 1e-6;

/// Flux-length bisection stops when |F(B,y) − a| < FLUX_BISECT * (1 + a).
pub const FLUX_BISECT: f64 = 1e-9;

/// Contour quadrature: successive trapezoid doublings must agree this closely.
pub const CONTOUR_CONVERGENCE: f64 = 1e-11;

/// Local (per panel, relative to the panel's own ∫|f|) tolerance for adaptive
/// path quadrature. Near the estimator's floor, so panels are split until
/// only the integrand's intrinsic rounding remains.
pub const PATH_LOCAL: f64 = 1e-14;

/// Multigraph extraction: Newton residual bound, relative to max(1, r).
pub const EXTRACT_RESIDUAL: f64 = 1e-11;

/// Exact algebraic identities (conjugation symmetry, closed-form x3 loops)
/// checked at accumulated-rounding level.
pub const ALGEBRAIC: f64 = 1e-12;

/// Geometric checks that pass through path quadrature once.
pub const GEOMETRIC: f64 = 1e-6;

/// Triangle area below which an export/intersection triangle is degenerate.
pub const DEGENERATE_AREA: f64 = 1e-14;
