//! Time-dependent Casimir-Polder interaction between an initially bare excited
//! two-level atom A and a ground-state atom B.
//!
//! At `t = 0` atom A sits in its bare excited state and the field is in the
//! vacuum. The interaction energy of atom B with the field radiated by A is
//! then time dependent: it vanishes identically before the light-cone time
//! `t = R/c`, passes through a transient driven by the self-dressing of A,
//! and settles into the stationary excited/ground-state potential (a resonant
//! term polynomial in `1/R` plus a dispersion term of Casimir-Polder type).
//!
//! Two independent evaluation routes are provided:
//!
//! * [`potential`] - the closed-form potential: a resonant term, a dispersion
//!   integral over imaginary frequencies, and the transient term, all built
//!   from the dipole field tensor of [`tensors`].
//! * [`oracle`] - direct numerical integration of the underlying field
//!   mode sums, with no light-cone step function inserted by hand. Causality
//!   and the closed form both have to emerge from the quadrature, which makes
//!   this route a stringent cross-check of the first.
//!
//! Everything is computed internally in reduced variables `x = k0 R`,
//! `tau = c k0 t`, with energies in units of `E0 = |mu_A|^2 k0^3` (Gaussian
//! units throughout). Physical quantities are converted at the API boundary.

pub mod analysis;
pub mod checks;
mod error;
pub mod oracle;
pub mod params;
pub mod potential;
pub mod quad;
pub mod specfun;
pub mod tensors;

pub use error::CpError;
pub use num_complex::Complex64;
pub use params::{
    ExcitedSign, PolarizabilityB, ReducedPoint, ResonantAlphaChoice, SystemParams,
};
pub use potential::PotentialBreakdown;
pub use quad::QuadResult;

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, CpError>;
