use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum CpError {
    #[error("zero interatomic separation")]
    ZeroSeparation,

    #[error("field tensor is singular at R = 0")]
    TensorSingularity,

    #[error(
        "two-level atom B is degenerate with atom A (k_B = k0 = {k0:e}); \
         the two-level polarizability has a pole there, so k_B != k0 is required"
    )]
    ResonancePole { k0: f64 },

    #[error(
        "evaluation point too close to the light cone (ct = {ct:e}, R = {r:e}, \
         relative guard {guard:e}): the transient integrals diverge as ct -> R+"
    )]
    LightConeProximity { ct: f64, r: f64, guard: f64 },

    #[error(
        "quadrature failed to reach the requested accuracy: best estimate {best:e} \
         with error estimate {err_est:e} after {n_evals} evaluations"
    )]
    Accuracy {
        best: f64,
        err_est: f64,
        n_evals: usize,
    },

    #[error("tabulated polarizability queried at u = {u:e} outside the grid [{lo:e}, {hi:e}]")]
    TabulatedRange { u: f64, lo: f64, hi: f64 },

    #[error(
        "the mode-sum oracle needs a polarizability that is regular on the real \
         frequency axis; only the static_constant model qualifies (got {model})"
    )]
    OracleModel { model: &'static str },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}
