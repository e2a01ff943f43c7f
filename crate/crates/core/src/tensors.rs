//! The dipole field operator `F_lm = -delta_lm grad^2 + grad_l grad_m` applied
//! in closed form to spherical waves `e^{sR}/R` and `sinh(uR)/R`, together with
//! a finite-difference evaluator used to verify the closed forms.
//!
//! For `f(R) = e^{sR}/R` the result is
//!
//! ```text
//! T_lm(s, R) = e^{sR} [ -(delta_lm - rhat_l rhat_m) s^2 / R
//!                       + (delta_lm - 3 rhat_l rhat_m) (s/R^2 - 1/R^3) ]
//! ```
//!
//! which at `s = 0` reduces to the static dipole tensor
//! `-(delta - 3 rhat rhat)/R^3` and at `s = i k` carries the usual radiative
//! `1/R` far field on the transverse projector.

use crate::{CpError, Result};
use num_complex::Complex64;

/// 3x3 complex tensor produced by applying the dipole operator to a spherical
/// wave, with the exponent rate and evaluation point kept as metadata.
#[derive(Debug, Clone, Copy)]
pub struct FieldTensor {
    pub entries: [[Complex64; 3]; 3],
    /// Complex exponent rate `s` of the wave the operator acted on.
    pub s: Complex64,
    /// Evaluation point.
    pub r: [f64; 3],
}

impl FieldTensor {
    /// Contract with a vector on the right: `(T v)_l = sum_m T_lm v_m`.
    pub fn apply(&self, v: [f64; 3]) -> [Complex64; 3] {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for l in 0..3 {
            for m in 0..3 {
                out[l] += self.entries[l][m] * v[m];
            }
        }
        out
    }

    /// Bilinear contraction `sum_lm a_l T_lm b_m` (no conjugation).
    pub fn contract(&self, a: [f64; 3], b: [f64; 3]) -> Complex64 {
        let tv = self.apply(b);
        tv[0] * a[0] + tv[1] * a[1] + tv[2] * a[2]
    }

    pub fn map(mut self, f: impl Fn(Complex64) -> Complex64) -> Self {
        for row in &mut self.entries {
            for e in row.iter_mut() {
                *e = f(*e);
            }
        }
        self
    }
}

fn norm3(r: [f64; 3]) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

fn build_tensor(
    s: Complex64,
    r: [f64; 3],
    prefactor: Complex64,
    transverse: Complex64,
    longitudinal: Complex64,
) -> FieldTensor {
    // entries = prefactor * [ transverse * (delta - rr) + longitudinal * (delta - 3 rr) ]
    let rn = norm3(r);
    let rhat = [r[0] / rn, r[1] / rn, r[2] / rn];
    let mut entries = [[Complex64::new(0.0, 0.0); 3]; 3];
    for l in 0..3 {
        for m in 0..3 {
            let rr = rhat[l] * rhat[m];
            let delta = if l == m { 1.0 } else { 0.0 };
            entries[l][m] =
                prefactor * (transverse * (delta - rr) + longitudinal * (delta - 3.0 * rr));
        }
    }
    FieldTensor { entries, s, r }
}

/// Apply the dipole operator to `e^{sR}/R`.
pub fn apply_f_exp(s: Complex64, r: [f64; 3]) -> Result<FieldTensor> {
    let rn = norm3(r);
    if rn <= 0.0 {
        return Err(CpError::TensorSingularity);
    }
    let pref = (s * rn).exp();
    let transverse = -s * s / rn;
    let longitudinal = s / (rn * rn) - Complex64::new(1.0, 0.0) / (rn * rn * rn);
    Ok(build_tensor(s, r, pref, transverse, longitudinal))
}

/// Apply the dipole operator to `sinh(uR)/R`; the result is real.
///
/// Equals `[T(u,R) - T(-u,R)]/2` and is odd in `u`.
pub fn apply_f_sinh(u: f64, r: [f64; 3]) -> Result<FieldTensor> {
    let rn = norm3(r);
    if rn <= 0.0 {
        return Err(CpError::TensorSingularity);
    }
    let (sh, ch) = ((u * rn).sinh(), (u * rn).cosh());
    let one = Complex64::new(1.0, 0.0);
    let transverse = -one * u * u * sh / rn;
    let longitudinal = one * (u * ch / (rn * rn) - sh / (rn * rn * rn));
    // pack the sinh/cosh split into the generic (transverse, longitudinal) form
    let mut t = build_tensor(Complex64::new(u, 0.0), r, one, transverse, Complex64::new(0.0, 0.0));
    let l = build_tensor(Complex64::new(u, 0.0), r, one, Complex64::new(0.0, 0.0), longitudinal);
    for i in 0..3 {
        for j in 0..3 {
            t.entries[i][j] += l.entries[i][j];
        }
    }
    Ok(t)
}

/// `e^{-u c t} * apply_f_sinh(u, R)`, evaluated without overflow.
///
/// For `ct > R` the growing `e^{uR}` inside sinh/cosh is always beaten by the
/// damping factor; combining the exponents keeps every intermediate bounded,
/// which the naive product `exp(-u ct) * sinh(u R)` is not once `uR > 700`.
pub(crate) fn apply_f_sinh_damped(u: f64, r: [f64; 3], ct: f64) -> Result<FieldTensor> {
    let rn = norm3(r);
    if rn <= 0.0 {
        return Err(CpError::TensorSingularity);
    }
    debug_assert!(ct >= rn);
    let em = (-u * (ct - rn)).exp();
    let ep = (-u * (ct + rn)).exp();
    let sh = 0.5 * (em - ep);
    let ch = 0.5 * (em + ep);
    let one = Complex64::new(1.0, 0.0);
    let transverse = -one * u * u * sh / rn;
    let longitudinal = one * (u * ch / (rn * rn) - sh / (rn * rn * rn));
    let t = build_tensor(Complex64::new(u, 0.0), r, one, transverse, Complex64::new(0.0, 0.0));
    let l = build_tensor(Complex64::new(u, 0.0), r, one, Complex64::new(0.0, 0.0), longitudinal);
    let mut out = t;
    for i in 0..3 {
        for j in 0..3 {
            out.entries[i][j] += l.entries[i][j];
        }
    }
    Ok(out)
}

/// Finite-difference evaluation of the dipole operator on an arbitrary smooth
/// scalar field, second order in the step `h`.
///
/// Uses the 7-point central Laplacian and 4-point central mixed second
/// differences. Serves as the independent oracle for the closed forms above.
pub fn apply_f_numeric(
    field: &dyn Fn([f64; 3]) -> Complex64,
    r: [f64; 3],
    h: f64,
) -> Result<FieldTensor> {
    let rn = norm3(r);
    if !(h > 0.0) || h >= rn / 10.0 {
        return Err(CpError::InvalidParams(format!(
            "finite-difference step h = {h:e} must satisfy 0 < h < |R|/10 = {:e}",
            rn / 10.0
        )));
    }
    let shift = |p: [f64; 3], ax: usize, d: f64| {
        let mut q = p;
        q[ax] += d;
        q
    };
    let f0 = field(r);
    let mut second = [[Complex64::new(0.0, 0.0); 3]; 3];
    for a in 0..3 {
        second[a][a] = (field(shift(r, a, h)) - 2.0 * f0 + field(shift(r, a, -h))) / (h * h);
    }
    for a in 0..3 {
        for b in (a + 1)..3 {
            let pp = field(shift(shift(r, a, h), b, h));
            let pm = field(shift(shift(r, a, h), b, -h));
            let mp = field(shift(shift(r, a, -h), b, h));
            let mm = field(shift(shift(r, a, -h), b, -h));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            second[a][b] = v;
            second[b][a] = v;
        }
    }
    let lap = second[0][0] + second[1][1] + second[2][2];
    let mut entries = [[Complex64::new(0.0, 0.0); 3]; 3];
    for l in 0..3 {
        for m in 0..3 {
            entries[l][m] = second[l][m];
            if l == m {
                entries[l][m] -= lap;
            }
            if !entries[l][m].re.is_finite() || !entries[l][m].im.is_finite() {
                return Err(CpError::NonFinite("finite-difference dipole operator"));
            }
        }
    }
    Ok(FieldTensor {
        entries,
        s: Complex64::new(f64::NAN, 0.0),
        r,
    })
}

/// One Richardson level of [`apply_f_numeric`]: `(4 N(h/2) - N(h))/3`.
///
/// The plain oracle is second order with an error constant slightly above 1
/// in units of `(h/|R|)^2`, which at `h = 1e-3 |R|` sits right at the 1e-6
/// verification gate; a single extrapolation step moves the comparison four
/// orders of magnitude inside it without touching the oracle's own
/// convergence order.
pub fn apply_f_numeric_richardson(
    field: &dyn Fn([f64; 3]) -> Complex64,
    r: [f64; 3],
    h: f64,
) -> Result<FieldTensor> {
    let coarse = apply_f_numeric(field, r, h)?;
    let fine = apply_f_numeric(field, r, 0.5 * h)?;
    let mut entries = [[Complex64::new(0.0, 0.0); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            entries[i][j] = (4.0 * fine.entries[i][j] - coarse.entries[i][j]) / 3.0;
        }
    }
    Ok(FieldTensor {
        entries,
        s: coarse.s,
        r,
    })
}

/// Relative Frobenius distance between two tensors.
pub fn frobenius_rel_err(a: &FieldTensor, b: &FieldTensor) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            num += (a.entries[i][j] - b.entries[i][j]).norm_sqr();
            den += b.entries[i][j].norm_sqr();
        }
    }
    (num / den).sqrt()
}
