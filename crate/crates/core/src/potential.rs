//! The time-dependent interaction energy and its stationary limit.
//!
//! For `ct > R` the energy splits into three pieces, all assembled from the
//! dipole field tensor `T(s, R)` of [`crate::tensors`]:
//!
//! * a resonant term `-alpha_B(k0) |T(i k0, R) mu_A|^2`, time independent and
//!   polynomial in `1/R`;
//! * a dispersion term `(sigma k0/pi) int_0^inf du alpha_B(iu)
//!   |T(-u, R) mu_A|^2 / (k0^2 + u^2)`, the excited-state counterpart of the
//!   ground-state Casimir-Polder integral;
//! * a transient term `(1/pi) Re{ e^{i k0 ct} (T(-i k0, R) mu_A) . (Z mu_A) }`
//!   with `Z = int_0^inf du (alpha_B(iu) + alpha_B(k0)) e^{-u ct}
//!   [k0 - iu]/(k0^2 + u^2) W(u, R)` and `W` the dipole operator applied to
//!   `sinh(uR)/R`. It decays on the timescale of a few optical periods and
//!   diverges on the light cone itself, where the evaluator refuses to run.
//!
//! Everything is multiplied by the causality step `Theta(ct - R)`: before the
//! field front arrives the interaction is exactly zero.
//!
//! The `u`-integral weights `k0/(k0^2+u^2)` and `u/(k0^2+u^2)` in the
//! transient term are fixed by rotating the compact single-integral form of
//! the energy onto the imaginary axis; the mode-sum oracle confirms them
//! (see `oracle`, and the factor-of-two note in its module docs).

use crate::params::{reduce, Reduced, ReducedPoint, SystemParams};
use crate::quad::{integrate_semiinf, QuadResult};
use crate::tensors::{apply_f_exp, apply_f_sinh_damped, FieldTensor};
use crate::{CpError, Result};
use num_complex::Complex64;

/// Relative width of the refused neighborhood above the light cone. The
/// transient integrals behave like `1/(ct - R)^2` there, so any number
/// reported inside this window would be dominated by the guard itself.
pub const LIGHT_CONE_GUARD: f64 = 1e-3;

/// Default relative tolerance of the closed-form quadratures.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Evaluation options for the closed-form route.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub tol: f64,
    pub light_cone_guard: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            tol: DEFAULT_TOL,
            light_cone_guard: LIGHT_CONE_GUARD,
        }
    }
}

/// The three terms and their sum, in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Terms {
    pub resonant: f64,
    pub cp_dispersion: f64,
    pub dynamic: f64,
    pub total: f64,
}

impl Terms {
    fn zero() -> Self {
        Terms {
            resonant: 0.0,
            cp_dispersion: 0.0,
            dynamic: 0.0,
            total: 0.0,
        }
    }
}

/// Full evaluation record for one `(R, t)` point.
#[derive(Debug, Clone, Copy)]
pub struct PotentialBreakdown {
    pub resonant: f64,
    pub cp_dispersion: f64,
    pub dynamic: f64,
    pub total: f64,
    /// The same four numbers in units of `E0 = |mu_A|^2 k0^3`.
    pub reduced: Terms,
    pub at: ReducedPoint,
}

// ---------------------------------------------------------------------------
// reduced-space building blocks
// ---------------------------------------------------------------------------

/// Dipole field tensor in reduced units: rate `s` (units of k0), separation
/// `x` along `rhat`.
fn tensor_reduced(s: Complex64, x: f64, rhat: [f64; 3]) -> Result<FieldTensor> {
    apply_f_exp(s, [rhat[0] * x, rhat[1] * x, rhat[2] * x])
}

/// Contraction `sum_{l,m,n} A_ln B_lm w_mn` with `w = mu mu` (unit dipole) or
/// the isotropic average `delta/3`.
fn pair_contract(a: &FieldTensor, b: &FieldTensor, mu_hat: [f64; 3], isotropic: bool) -> Complex64 {
    if isotropic {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..3 {
            for n in 0..3 {
                acc += a.entries[l][n] * b.entries[l][n];
            }
        }
        acc / 3.0
    } else {
        let av = a.apply(mu_hat);
        let bv = b.apply(mu_hat);
        av[0] * bv[0] + av[1] * bv[1] + av[2] * bv[2]
    }
}

/// Like [`pair_contract`] but conjugating the second factor, yielding the
/// manifestly nonnegative `|T mu|^2` used by the resonant term.
fn pair_contract_conj(a: &FieldTensor, mu_hat: [f64; 3], isotropic: bool) -> f64 {
    if isotropic {
        let mut acc = 0.0;
        for row in &a.entries {
            for e in row {
                acc += e.norm_sqr();
            }
        }
        acc / 3.0
    } else {
        let av = a.apply(mu_hat);
        av[0].norm_sqr() + av[1].norm_sqr() + av[2].norm_sqr()
    }
}

fn resonance_alpha(red: &Reduced) -> Result<f64> {
    red.alpha_res.ok_or_else(|| {
        CpError::InvalidParams(
            "the resonant and transient terms need alpha_B at the resonance \
             argument, which an imaginary-axis table cannot provide; use \
             resonant_alpha_choice = AtImagK0 for tabulated models"
                .into(),
        )
    })
}

fn reduced_resonant(red: &Reduced, pt: &ReducedPoint) -> Result<f64> {
    let t = tensor_reduced(Complex64::new(0.0, 1.0), pt.x, pt.orientation)?;
    // Re{ T(ik0) conj(T(ik0)) } contracted with mu mu: real by construction,
    // the imaginary residue is identically zero here
    Ok(-resonance_alpha(red)? * pair_contract_conj(&t, pt.mu_hat_a, red.isotropic))
}

fn reduced_cp_dispersion(red: &Reduced, pt: &ReducedPoint, tol: f64) -> Result<QuadResult> {
    let x = pt.x;
    // tabulated models must cover the whole effective integration range
    let v_needed = (2.0 * (10.0 / tol).ln()).max(35.0) / (2.0 * x);
    if red.pol.v_max() < v_needed {
        return Err(CpError::TabulatedRange {
            u: v_needed,
            lo: 0.0,
            hi: red.pol.v_max(),
        });
    }
    let rhat = pt.orientation;
    let mu_hat = pt.mu_hat_a;
    let isotropic = red.isotropic;
    let pol = red.pol.clone();
    let integrand = move |v: f64| -> f64 {
        let t = tensor_reduced(Complex64::new(-v, 0.0), x, rhat).expect("x > 0 checked");
        let alpha = pol.eval_imag(v).expect("coverage checked above");
        let contraction = pair_contract(&t, &t, mu_hat, isotropic);
        debug_assert!(contraction.im.abs() <= 1e-10 * contraction.re.abs().max(1e-300));
        alpha * contraction.re / (1.0 + v * v)
    };
    let res = integrate_semiinf(integrand, 2.0 * x, tol)?;
    Ok(QuadResult {
        value: red.sigma / std::f64::consts::PI * res.value,
        err_est: res.err_est / std::f64::consts::PI,
        n_evals: res.n_evals,
    })
}

/// Radial integrand of the transient term at reduced imaginary frequency `v`:
/// `(alpha_B(iv) + alpha_res) e^{-v tau} W(v, x) / (1 + iv)` contracted with
/// `T(-i, x)` and the dipole orientation.
pub(crate) fn dynamic_radial_integrand(
    red: &Reduced,
    pt: &ReducedPoint,
    t_k0: &FieldTensor,
    alpha_res: f64,
    v: f64,
) -> Complex64 {
    let rhat = pt.orientation;
    let x = pt.x;
    let w = apply_f_sinh_damped(v, [rhat[0] * x, rhat[1] * x, rhat[2] * x], pt.tau)
        .expect("x > 0 checked");
    let alpha = red
        .pol
        .eval_imag(v)
        .expect("coverage checked by caller");
    let contraction = pair_contract(t_k0, &w, pt.mu_hat_a, red.isotropic);
    (alpha + alpha_res) * contraction / Complex64::new(1.0, v)
}

fn reduced_dynamic(red: &Reduced, pt: &ReducedPoint, opt: &EvalOptions) -> Result<QuadResult> {
    let (x, tau) = (pt.x, pt.tau);
    if tau <= x {
        return Ok(QuadResult {
            value: 0.0,
            err_est: 0.0,
            n_evals: 1,
        });
    }
    if tau <= x * (1.0 + opt.light_cone_guard) {
        return Err(CpError::LightConeProximity {
            ct: tau,
            r: x,
            guard: opt.light_cone_guard,
        });
    }
    let gap = tau - x;
    let v_needed = (2.0 * (10.0 / opt.tol).ln()).max(35.0) / gap;
    if red.pol.v_max() < v_needed {
        return Err(CpError::TabulatedRange {
            u: v_needed,
            lo: 0.0,
            hi: red.pol.v_max(),
        });
    }
    let t_k0 = tensor_reduced(Complex64::new(0.0, -1.0), x, pt.orientation)?;
    let alpha_res = resonance_alpha(red)?;
    let z = integrate_semiinf(
        |v| dynamic_radial_integrand(red, pt, &t_k0, alpha_res, v),
        gap,
        opt.tol,
    )?;
    let phase = Complex64::new(0.0, tau).exp();
    Ok(QuadResult {
        value: (phase * z.value).re / std::f64::consts::PI,
        err_est: z.err_est / std::f64::consts::PI,
        n_evals: z.n_evals,
    })
}

// ---------------------------------------------------------------------------
// public operations (physical units)
// ---------------------------------------------------------------------------

/// Resonant term: time independent, `-alpha_B(k0) |T(i k0, R) mu_A|^2`.
pub fn term_resonant(params: &SystemParams, r: [f64; 3]) -> Result<f64> {
    let pt = reduce(params, r, 0.0)?;
    let red = Reduced::build(params)?.at_point(&pt);
    Ok(reduced_resonant(&red, &pt)? * params.energy_scale())
}

/// Dispersion term: the imaginary-frequency integral over both atoms'
/// polarizabilities.
pub fn term_cp_dispersion(params: &SystemParams, r: [f64; 3]) -> Result<f64> {
    term_cp_dispersion_with(params, r, &EvalOptions::default())
}

pub fn term_cp_dispersion_with(
    params: &SystemParams,
    r: [f64; 3],
    opt: &EvalOptions,
) -> Result<f64> {
    let pt = reduce(params, r, 0.0)?;
    let red = Reduced::build(params)?.at_point(&pt);
    Ok(reduced_cp_dispersion(&red, &pt, opt.tol)?.value * params.energy_scale())
}

/// Transient term. Zero for `ct <= R`; refuses the immediate neighborhood
/// above the light cone where its integrals diverge.
pub fn term_dynamic(params: &SystemParams, r: [f64; 3], t: f64) -> Result<f64> {
    term_dynamic_with(params, r, t, &EvalOptions::default())
}

pub fn term_dynamic_with(
    params: &SystemParams,
    r: [f64; 3],
    t: f64,
    opt: &EvalOptions,
) -> Result<f64> {
    let pt = reduce(params, r, t)?;
    let red = Reduced::build(params)?.at_point(&pt);
    Ok(reduced_dynamic(&red, &pt, opt)?.value * params.energy_scale())
}

/// Number of integrand evaluations the transient term needs at a point;
/// exposed for the cost-scaling diagnostics near the light cone.
pub fn term_dynamic_cost(params: &SystemParams, r: [f64; 3], t: f64, tol: f64) -> Result<usize> {
    let pt = reduce(params, r, t)?;
    let red = Reduced::build(params)?.at_point(&pt);
    let opt = EvalOptions {
        tol,
        ..Default::default()
    };
    Ok(reduced_dynamic(&red, &pt, &opt)?.n_evals)
}

/// The full time-dependent interaction energy, gated by the causality step.
pub fn potential_total(params: &SystemParams, r: [f64; 3], t: f64) -> Result<PotentialBreakdown> {
    potential_total_with(params, r, t, &EvalOptions::default())
}

pub fn potential_total_with(
    params: &SystemParams,
    r: [f64; 3],
    t: f64,
    opt: &EvalOptions,
) -> Result<PotentialBreakdown> {
    let pt = reduce(params, r, t)?;
    let red = Reduced::build(params)?.at_point(&pt);
    let e0 = params.energy_scale();
    // the step function multiplies the whole bracket: all terms switch on
    // together at tau = x
    if crate::specfun::theta(pt.tau - pt.x) == 0.0 {
        return Ok(PotentialBreakdown {
            resonant: 0.0,
            cp_dispersion: 0.0,
            dynamic: 0.0,
            total: 0.0,
            reduced: Terms::zero(),
            at: pt,
        });
    }
    let resonant = reduced_resonant(&red, &pt)?;
    let cp = reduced_cp_dispersion(&red, &pt, opt.tol)?.value;
    let dynamic = reduced_dynamic(&red, &pt, opt)?.value;
    let reduced_terms = Terms {
        resonant,
        cp_dispersion: cp,
        dynamic,
        total: resonant + cp + dynamic,
    };
    Ok(PotentialBreakdown {
        resonant: resonant * e0,
        cp_dispersion: cp * e0,
        dynamic: dynamic * e0,
        total: resonant * e0 + cp * e0 + dynamic * e0,
        reduced: reduced_terms,
        at: pt,
    })
}

/// Stationary limit: resonant plus dispersion term, no causality gate.
pub fn potential_static(params: &SystemParams, r: [f64; 3]) -> Result<f64> {
    potential_static_with(params, r, &EvalOptions::default())
}

pub fn potential_static_with(
    params: &SystemParams,
    r: [f64; 3],
    opt: &EvalOptions,
) -> Result<f64> {
    let pt = reduce(params, r, 0.0)?;
    let red = Reduced::build(params)?.at_point(&pt);
    let e0 = params.energy_scale();
    let resonant = reduced_resonant(&red, &pt)?;
    let cp = reduced_cp_dispersion(&red, &pt, opt.tol)?.value;
    Ok((resonant + cp) * e0)
}
