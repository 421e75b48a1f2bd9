use num_complex::Complex64;

/// Errors shared by all modules.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A point (or an integration path) left the exterior disk `|z| >= R'`.
    #[error("domain violation: |z| = {modulus} < R' = {domain_radius}")]
    DomainViolation { modulus: f64, domain_radius: f64 },

    /// Family parameters violate a structural invariant.
    #[error("invalid family: {0}")]
    InvalidFamily(String),

    /// Contour or path quadrature failed to converge at the sample cap.
    #[error("quadrature failed to converge: last = {last}, previous = {prev}")]
    QuadratureFailed { last: Complex64, prev: Complex64 },

    /// Root finding failed; the message carries the scan trace.
    #[error("solver failure: {0}")]
    SolverFailure(String),

    /// An operation was called on a family variant it does not support.
    #[error("unsupported variant: {0}")]
    UnsupportedVariant(String),

    /// Invalid argument to an operation (not a family-domain issue).
    #[error("rejected input: {0}")]
    RejectedInput(String),
}
