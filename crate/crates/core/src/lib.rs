//! Construction and verification of complete minimal annular ends with
//! prescribed flux.
//!
//! The library builds the explicit Weierstrass data families
//!
//! ```text
//! g(z) = e^{i z + f(z)},          dh = (1 + λ/(z − μ)) dz,
//! ```
//!
//! on exterior disks `|z| ≥ R'`, solves the associated period problem so the
//! boundary flux equals a prescribed vector `(a, 0, -b)`, evaluates and meshes
//! the resulting immersions, and measures their asymptotic behaviour
//! (axis rays, helicoid limits, multivalued graph models, sheet separation,
//! symmetry and sampled embeddedness).
//!
//! Module map:
//! * [`wdata`] — the Weierstrass data families and their pointwise evaluation.
//! * [`periods`] — boundary integrals by residues and by contour quadrature,
//!   period residual and flux vector.
//! * [`solver`] — root finding that hits a prescribed flux vector.
//! * [`surface`] — the conformal immersion, Gaussian curvature and conformal
//!   grid sampling.
//! * [`mesh`] — triangle mesh container and OBJ/PLY export.
//! * [`asymptotics`] — desk-scale verification of the asymptotic structure.
//! * [`embed`] — triangle/triangle intersection test over a spatial hash.

pub mod asymptotics;
pub mod embed;
mod error;
pub mod mesh;
pub mod periods;
pub mod quad;
pub mod solver;
pub mod surface;
pub mod tol;
pub mod wdata;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) mod cplx;
