//! Physical inputs, unit conventions and polarizability models.
//!
//! Everything downstream works in reduced variables: `x = k0 R`,
//! `tau = c k0 t`, polarizabilities `alpha k0^3`, energies in units of
//! `E0 = |mu_A|^2 k0^3`. Gaussian units are assumed; `hbar c` enters only
//! through the polarizability normalizations and defaults to 1 so that
//! dimensionless test parameterizations read off directly.

use crate::{CpError, Result};

/// Sign convention for the excited-state polarizability of atom A.
///
/// `AsPrinted` keeps the ground-state-like positive form; `SignFlipped`
/// negates it, which is the literal two-level excited-state relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExcitedSign {
    #[default]
    AsPrinted,
    SignFlipped,
}

/// Interpretation of atom B's polarizability in the resonant and transient
/// terms, where the stationary-phase frequency `k0` can be read either on the
/// real axis or on the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResonantAlphaChoice {
    /// `alpha_B` evaluated at the real frequency `k0` (consistent with the
    /// compact single-integral form, and the default).
    #[default]
    AtK0,
    /// `alpha_B(i k0)`: the literal imaginary-axis alternative.
    AtImagK0,
}

/// Ground-state dynamic polarizability model of atom B.
#[derive(Debug, Clone, PartialEq)]
pub enum PolarizabilityB {
    /// Two-level atom: `alpha(iu) = 2 k_B mu_B^2 / (hbar c (k_B^2 + u^2))`.
    TwoLevel { mu_b: f64, k_b: f64 },
    /// Frequency-independent `alpha0` (volume units).
    StaticConstant { alpha0: f64 },
    /// Imaginary-axis samples `(u, alpha(iu))` with linear interpolation;
    /// queries outside the grid are refused rather than extrapolated.
    Tabulated { points: Vec<(f64, f64)> },
}

impl PolarizabilityB {
    pub(crate) fn model_name(&self) -> &'static str {
        match self {
            PolarizabilityB::TwoLevel { .. } => "two_level",
            PolarizabilityB::StaticConstant { .. } => "static_constant",
            PolarizabilityB::Tabulated { .. } => "tabulated",
        }
    }
}

/// Full physical description of the atom pair.
#[derive(Debug, Clone)]
pub struct SystemParams {
    /// Transition dipole moment of atom A (Gaussian units).
    pub mu_a: [f64; 3],
    /// Transition wavenumber of atom A; `omega_0 = c k0`.
    pub k0: f64,
    /// Polarizability model of atom B.
    pub pol_b: PolarizabilityB,
    /// Optional decay rate of A's excited state, used only to warn when the
    /// perturbative window `t <~ 1/gamma` is left.
    pub gamma: Option<f64>,
    pub excited_sign: ExcitedSign,
    pub resonant_alpha_choice: ResonantAlphaChoice,
    /// Replace `mu_m mu_n` of atom A by its isotropic average
    /// `(|mu|^2/3) delta_mn`.
    pub isotropic_a: bool,
    /// `hbar c` in the unit system of the inputs; 1 by default.
    pub hbar_c: f64,
}

impl SystemParams {
    pub fn new(mu_a: [f64; 3], k0: f64, pol_b: PolarizabilityB) -> Result<Self> {
        let p = SystemParams {
            mu_a,
            k0,
            pol_b,
            gamma: None,
            excited_sign: ExcitedSign::default(),
            resonant_alpha_choice: ResonantAlphaChoice::default(),
            isotropic_a: false,
            hbar_c: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k0 > 0.0) {
            return Err(CpError::InvalidParams(format!("k0 must be > 0, got {}", self.k0)));
        }
        if !(self.mu_norm() > 0.0) {
            return Err(CpError::InvalidParams("|mu_A| must be > 0".into()));
        }
        if !(self.hbar_c > 0.0) {
            return Err(CpError::InvalidParams("hbar_c must be > 0".into()));
        }
        if let Some(g) = self.gamma {
            if g < 0.0 {
                return Err(CpError::InvalidParams("gamma must be >= 0".into()));
            }
        }
        match &self.pol_b {
            PolarizabilityB::TwoLevel { mu_b, k_b } => {
                if !(*k_b > 0.0) || !(*mu_b != 0.0) {
                    return Err(CpError::InvalidParams(
                        "two-level atom B needs k_b > 0 and mu_b != 0".into(),
                    ));
                }
                // no resonant degeneracy: alpha_B must stay finite at k0
                if *k_b == self.k0 {
                    return Err(CpError::ResonancePole { k0: self.k0 });
                }
            }
            PolarizabilityB::StaticConstant { alpha0 } => {
                if !alpha0.is_finite() {
                    return Err(CpError::InvalidParams("alpha0 must be finite".into()));
                }
            }
            PolarizabilityB::Tabulated { points } => {
                if points.len() < 2 {
                    return Err(CpError::InvalidParams(
                        "tabulated polarizability needs at least two samples".into(),
                    ));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(CpError::InvalidParams(
                            "tabulated u grid must be strictly increasing".into(),
                        ));
                    }
                }
                if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                    return Err(CpError::InvalidParams(
                        "tabulated polarizability values must be finite".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn mu_norm(&self) -> f64 {
        let m = self.mu_a;
        (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt()
    }

    /// Energy unit `E0 = |mu_A|^2 k0^3` of the reduced potentials.
    pub fn energy_scale(&self) -> f64 {
        let mu2 = self.mu_norm() * self.mu_norm();
        mu2 * self.k0 * self.k0 * self.k0
    }
}

/// Dimensionless evaluation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    /// `k0 R`
    pub x: f64,
    /// `c k0 t`
    pub tau: f64,
    /// Unit vector along the interatomic separation.
    pub orientation: [f64; 3],
    /// Unit vector along atom A's dipole.
    pub mu_hat_a: [f64; 3],
}

/// Reduce a physical evaluation point `(R, t)` to `(x, tau)` plus unit vectors.
pub fn reduce(params: &SystemParams, r: [f64; 3], t: f64) -> Result<ReducedPoint> {
    let rn = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if !(rn > 0.0) {
        return Err(CpError::ZeroSeparation);
    }
    if t < 0.0 {
        return Err(CpError::InvalidParams(format!("t must be >= 0, got {t}")));
    }
    let mu_n = params.mu_norm();
    let p = ReducedPoint {
        x: params.k0 * rn,
        tau: params.k0 * t * SPEED_OF_LIGHT,
        orientation: [r[0] / rn, r[1] / rn, r[2] / rn],
        mu_hat_a: [
            params.mu_a[0] / mu_n,
            params.mu_a[1] / mu_n,
            params.mu_a[2] / mu_n,
        ],
    };
    let unit_tol = 1e-12;
    debug_assert!((norm(p.orientation) - 1.0).abs() < unit_tol);
    debug_assert!((norm(p.mu_hat_a) - 1.0).abs() < unit_tol);
    Ok(p)
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Speed of light in the working unit system. The crate's inputs are taken in
/// units where c = 1 (lengths and times share a unit); keeping the constant
/// explicit marks every place the conversion `tau = c k0 t` happens.
pub const SPEED_OF_LIGHT: f64 = 1.0;

/// `alpha_B(iu)`: atom B's polarizability at imaginary frequency, `u >= 0`.
pub fn alpha_b_imag(params: &SystemParams, u: f64) -> Result<f64> {
    if u < 0.0 {
        return Err(CpError::InvalidParams(format!("u must be >= 0, got {u}")));
    }
    match &params.pol_b {
        PolarizabilityB::TwoLevel { mu_b, k_b } => {
            Ok(2.0 * k_b * mu_b * mu_b / (params.hbar_c * (k_b * k_b + u * u)))
        }
        PolarizabilityB::StaticConstant { alpha0 } => Ok(*alpha0),
        PolarizabilityB::Tabulated { points } => {
            let lo = points.first().expect("validated").0;
            let hi = points.last().expect("validated").0;
            if u < lo || u > hi {
                return Err(CpError::TabulatedRange { u, lo, hi });
            }
            let idx = points.partition_point(|p| p.0 <= u).min(points.len() - 1);
            let (u0, a0) = points[idx - 1];
            let (u1, a1) = points[idx];
            Ok(a0 + (a1 - a0) * (u - u0) / (u1 - u0))
        }
    }
}

/// `alpha_B(k)` on the real frequency axis.
///
/// Only models regular there are supported: the two-level form (away from its
/// pole at `k = k_B`) and the static constant. The tabulated model holds
/// imaginary-axis data only.
pub fn alpha_b_real(params: &SystemParams, k: f64) -> Result<f64> {
    if k < 0.0 {
        return Err(CpError::InvalidParams(format!("k must be >= 0, got {k}")));
    }
    match &params.pol_b {
        PolarizabilityB::TwoLevel { mu_b, k_b } => {
            if k == *k_b {
                return Err(CpError::ResonancePole { k0: k });
            }
            Ok(2.0 * k_b * mu_b * mu_b / (params.hbar_c * (k_b * k_b - k * k)))
        }
        PolarizabilityB::StaticConstant { alpha0 } => Ok(*alpha0),
        PolarizabilityB::Tabulated { .. } => Err(CpError::InvalidParams(
            "the tabulated model describes the imaginary axis only; \
             real-axis values are not defined for it"
                .into(),
        )),
    }
}

/// Excited-state polarizability tensor of atom A at imaginary frequency:
/// `sigma * 2 k0 mu_m mu_n / (hbar c (k0^2 + u^2))`.
pub fn alpha_a_excited(params: &SystemParams, u: f64) -> [[f64; 3]; 3] {
    let sigma = match params.excited_sign {
        ExcitedSign::AsPrinted => 1.0,
        ExcitedSign::SignFlipped => -1.0,
    };
    let denom = params.hbar_c * (params.k0 * params.k0 + u * u);
    let pref = sigma * 2.0 * params.k0 / denom;
    let mut out = [[0.0; 3]; 3];
    for m in 0..3 {
        for n in 0..3 {
            out[m][n] = pref * params.mu_a[m] * params.mu_a[n];
        }
    }
    out
}

/// Perturbative-validity warning.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityWarning(pub String);

/// Warn when the requested time leaves the window in which second-order
/// perturbation theory is trustworthy (`t gamma <= 0.1`). Never blocks.
pub fn validity_check(params: &SystemParams, t: f64) -> Vec<ValidityWarning> {
    let mut warnings = Vec::new();
    if let Some(gamma) = params.gamma {
        if t * gamma > 0.1 {
            warnings.push(ValidityWarning(format!(
                "t*gamma = {:.3e} exceeds 0.1: the perturbative result degrades \
                 for times approaching the radiative lifetime",
                t * gamma
            )));
        }
    }
    warnings
}

// ---------------------------------------------------------------------------
// reduced (dimensionless) view used by the evaluation modules
// ---------------------------------------------------------------------------

/// Atom B polarizability in reduced form (`alpha * k0^3` as a function of the
/// reduced imaginary frequency `v = u/k0`).
#[derive(Debug, Clone)]
pub(crate) enum ReducedPolB {
    TwoLevel { beta: f64, g: f64 },
    Static { a0: f64 },
    Tabulated { v: Vec<f64>, a: Vec<f64> },
}

impl ReducedPolB {
    pub(crate) fn eval_imag(&self, v: f64) -> Result<f64> {
        match self {
            ReducedPolB::TwoLevel { beta, g } => Ok(2.0 * beta * g / (beta * beta + v * v)),
            ReducedPolB::Static { a0 } => Ok(*a0),
            ReducedPolB::Tabulated { v: grid, a } => {
                let lo = grid[0];
                let hi = *grid.last().expect("validated");
                if v < lo || v > hi {
                    return Err(CpError::TabulatedRange { u: v, lo, hi });
                }
                let idx = grid.partition_point(|&p| p <= v).min(grid.len() - 1);
                Ok(a[idx - 1] + (a[idx] - a[idx - 1]) * (v - grid[idx - 1]) / (grid[idx] - grid[idx - 1]))
            }
        }
    }

    /// Largest reduced imaginary frequency the model can be queried at.
    pub(crate) fn v_max(&self) -> f64 {
        match self {
            ReducedPolB::Tabulated { v, .. } => *v.last().expect("validated"),
            _ => f64::INFINITY,
        }
    }
}

/// Dimensionless system: everything the evaluators need.
#[derive(Debug, Clone)]
pub(crate) struct Reduced {
    /// cos(angle) between the dipole of A and the separation axis.
    pub c_mu_r: f64,
    pub isotropic: bool,
    /// +1 or -1 from [`ExcitedSign`].
    pub sigma: f64,
    pub pol: ReducedPolB,
    /// Reduced `alpha_B` at the resonance argument selected by
    /// [`ResonantAlphaChoice`]; `None` when the model cannot provide it
    /// (imaginary-axis tables asked for a real-axis value).
    pub alpha_res: Option<f64>,
}

impl Reduced {
    pub(crate) fn build(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let k0 = params.k0;
        let k03 = k0 * k0 * k0;
        let pol = match &params.pol_b {
            PolarizabilityB::TwoLevel { mu_b, k_b } => ReducedPolB::TwoLevel {
                beta: k_b / k0,
                g: mu_b * mu_b * k0 * k0 / params.hbar_c,
            },
            PolarizabilityB::StaticConstant { alpha0 } => ReducedPolB::Static { a0: alpha0 * k03 },
            PolarizabilityB::Tabulated { points } => ReducedPolB::Tabulated {
                v: points.iter().map(|p| p.0 / k0).collect(),
                a: points.iter().map(|p| p.1 * k03).collect(),
            },
        };
        let alpha_res = match params.resonant_alpha_choice {
            ResonantAlphaChoice::AtK0 => match (&params.pol_b, alpha_b_real(params, k0)) {
                // the dispersion term never needs this value, so a tabulated
                // model stays usable; the terms that do need it refuse later
                (PolarizabilityB::Tabulated { .. }, Err(_)) => None,
                (_, Ok(v)) => Some(v * k03),
                (_, Err(e)) => return Err(e),
            },
            ResonantAlphaChoice::AtImagK0 => Some(alpha_b_imag(params, k0)? * k03),
        };
        Ok(Reduced {
            c_mu_r: f64::NAN, // set per evaluation point
            isotropic: params.isotropic_a,
            sigma: match params.excited_sign {
                ExcitedSign::AsPrinted => 1.0,
                ExcitedSign::SignFlipped => -1.0,
            },
            pol,
            alpha_res,
        })
    }

    pub(crate) fn at_point(mut self, pt: &ReducedPoint) -> Self {
        self.c_mu_r = pt.orientation[0] * pt.mu_hat_a[0]
            + pt.orientation[1] * pt.mu_hat_a[1]
            + pt.orientation[2] * pt.mu_hat_a[2];
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_level() -> SystemParams {
        SystemParams::new(
            [1.0, 0.0, 0.0],
            1.0,
            PolarizabilityB::TwoLevel { mu_b: 0.3f64.sqrt(), k_b: 2.0 },
        )
        .unwrap()
    }

    #[test]
    fn reduce_definition() {
        let mut p = two_level();
        let pt = reduce(&p, [0.0, 0.0, 2.0], 3.0).unwrap();
        assert_eq!(pt.x, 2.0);
        assert_eq!(pt.tau, 3.0);
        assert_eq!(pt.orientation, [0.0, 0.0, 1.0]);

        p.k0 = 2.0;
        let pt = reduce(&p, [0.0, 0.0, 1.0], 0.0).unwrap();
        assert_eq!(pt.x, 2.0);
        assert_eq!(pt.tau, 0.0);
    }

    #[test]
    fn reduce_rescale_identity() {
        // a power-of-two rescaling commutes exactly with IEEE rounding
        let p1 = two_level();
        let mut p2 = p1.clone();
        p2.k0 = 2.0 * p1.k0;
        let lam = 2.0;
        let a = reduce(&p1, [0.3, -0.4, 1.1], 0.7).unwrap();
        let b = reduce(&p2, [0.3 / lam, -0.4 / lam, 1.1 / lam], 0.7 / lam).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.tau, b.tau);
        assert_eq!(a.orientation, b.orientation);
    }

    #[test]
    fn reduce_rejects_zero_separation() {
        let p = two_level();
        assert!(matches!(
            reduce(&p, [0.0; 3], 1.0),
            Err(CpError::ZeroSeparation)
        ));
    }

    #[test]
    fn energy_scale_values() {
        let p = two_level();
        assert_eq!(p.energy_scale(), 1.0);
        let mut p2 = p.clone();
        p2.mu_a = [2.0, 0.0, 0.0];
        assert_eq!(p2.energy_scale(), 4.0);
        let mut p3 = p.clone();
        p3.k0 = 2.0;
        assert_eq!(p3.energy_scale(), 8.0);
    }

    #[test]
    fn alpha_b_imag_two_level_values() {
        let p = two_level();
        let (mu_b2, k_b) = (0.3, 2.0);
        let at_zero = alpha_b_imag(&p, 0.0).unwrap();
        assert!((at_zero - 2.0 * mu_b2 / k_b).abs() < 1e-15);
        // monotone decrease to zero
        let mut prev = at_zero;
        for &u in &[0.5, 1.0, 5.0, 50.0, 1e4] {
            let v = alpha_b_imag(&p, u).unwrap();
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
        assert!(prev < 1e-7);
        // u^2-weighted limit: alpha(iu) u^2 -> 2 k_B mu_B^2 / hbar c
        let u = 1e3 * k_b;
        let lim = alpha_b_imag(&p, u).unwrap() * u * u / (2.0 * k_b * mu_b2);
        assert!((lim - 1.0).abs() < 1e-4);
    }

    #[test]
    fn alpha_b_real_two_level() {
        let mut p = two_level();
        // static value
        assert!((alpha_b_real(&p, 0.0).unwrap() - 2.0 * 0.3 / 2.0).abs() < 1e-15);
        // pole is refused with the degeneracy message
        let err = alpha_b_real(&p, 2.0).unwrap_err();
        assert!(err.to_string().contains("pole"));
        // k_B = 2, mu_B = 1, hbar c = 1, k = 1 -> 4/3
        p.pol_b = PolarizabilityB::TwoLevel { mu_b: 1.0, k_b: 2.0 };
        assert!((alpha_b_real(&p, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn alpha_a_excited_structure() {
        let mut p = two_level();
        p.mu_a = [0.6, -0.3, 1.1];
        let t0 = alpha_a_excited(&p, 0.0);
        // symmetric, rank one, trace = 2 k0 |mu|^2 sigma / (hbar c (k0^2+u^2))
        let mu2 = p.mu_norm() * p.mu_norm();
        let tr = t0[0][0] + t0[1][1] + t0[2][2];
        assert!((tr - 2.0 * mu2).abs() < 1e-14);
        for m in 0..3 {
            for n in 0..3 {
                assert!((t0[m][n] - t0[n][m]).abs() < 1e-16);
                assert!((t0[m][n] - 2.0 * p.mu_a[m] * p.mu_a[n]).abs() < 1e-14);
            }
        }
        // rank one: 2x2 minors vanish
        for m in 0..2 {
            for n in 0..2 {
                let det = t0[m][n] * t0[m + 1][n + 1] - t0[m][n + 1] * t0[m + 1][n];
                assert!(det.abs() < 1e-13);
            }
        }
        p.excited_sign = ExcitedSign::SignFlipped;
        let tf = alpha_a_excited(&p, 0.7);
        p.excited_sign = ExcitedSign::AsPrinted;
        let tp = alpha_a_excited(&p, 0.7);
        for m in 0..3 {
            for n in 0..3 {
                assert_eq!(tf[m][n], -tp[m][n]);
            }
        }
    }

    #[test]
    fn validity_warnings() {
        let mut p = two_level();
        assert!(validity_check(&p, 5.0).is_empty());
        p.gamma = Some(1.0);
        assert_eq!(validity_check(&p, 1.0).len(), 1);
        assert!(validity_check(&p, 0.01).is_empty());
    }

    #[test]
    fn degenerate_two_level_is_rejected() {
        let r = SystemParams::new(
            [1.0, 0.0, 0.0],
            2.0,
            PolarizabilityB::TwoLevel { mu_b: 1.0, k_b: 2.0 },
        );
        assert!(matches!(r, Err(CpError::ResonancePole { .. })));
    }

    #[test]
    fn tabulated_interpolation_and_range() {
        let p = SystemParams::new(
            [1.0, 0.0, 0.0],
            1.0,
            PolarizabilityB::Tabulated {
                points: vec![(0.0, 1.0), (1.0, 0.5), (2.0, 0.25)],
            },
        )
        .unwrap();
        assert!((alpha_b_imag(&p, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!((alpha_b_imag(&p, 2.0).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            alpha_b_imag(&p, 3.0),
            Err(CpError::TabulatedRange { .. })
        ));
    }
}
