//! Scalar special functions: the finite-time phase window `F_t(x)`, the
//! causality step, and the transverse angular kernel of the mode sums.

use num_complex::Complex64;

/// Threshold below which `f_t` switches to its Taylor series. Chosen so the
/// dropped quartic term sits far below double precision while the closed form
/// still has no visible cancellation at the crossover.
const FT_SERIES_THRESHOLD: f64 = 1e-4;

/// Finite-time window `F_t(x) = int_0^t dt' e^{i x t'} = (e^{i x t} - 1)/(i x)`.
///
/// For `|x t| < 1e-4` the closed form loses digits to cancellation, so the
/// series `t (1 + i x t/2 - (x t)^2/6 - i (x t)^3/24)` is used instead.
pub fn f_t(x: f64, t: f64) -> Complex64 {
    debug_assert!(t >= 0.0);
    let z = x * t;
    if z.abs() < FT_SERIES_THRESHOLD {
        let z2 = z * z;
        return Complex64::new(t * (1.0 - z2 / 6.0), t * (z / 2.0 - z * z2 / 24.0));
    }
    let phase = Complex64::new(0.0, z).exp();
    (phase - 1.0) / Complex64::new(0.0, x)
}

/// Causality step. Returns 1 for a positive argument and 0 otherwise;
/// the value exactly on the light cone is 0, so the interaction switches on
/// strictly after the field front has arrived.
pub fn theta(arg: f64) -> f64 {
    if arg > 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Scalar coefficients `(A, B)` of the transverse angular kernel
/// `K_ab(x) = A(x) delta_ab + B(x) rhat_a rhat_b`.
///
/// `K` is the angular average `(1/4pi) int dOmega (delta - khat khat) e^{i k.R}`
/// with `x = kR`; both polarization sums of the mode expansion reduce to it.
/// In terms of `j0 = sin x / x`: `A = (j0 - j0'')/2`, `B = (j0 + 3 j0'')/2`.
pub fn kernel_coefficients(x: f64) -> (f64, f64) {
    debug_assert!(x >= 0.0);
    if x < 5e-2 {
        // small-x series; the trig forms cancel to O(x^-3) here
        let x2 = x * x;
        let a = 2.0 / 3.0 - 2.0 * x2 / 15.0 + x2 * x2 / 140.0 - x2 * x2 * x2 / 5670.0;
        let b = x2 / 15.0 - x2 * x2 / 210.0 + x2 * x2 * x2 / 7560.0;
        return (a, b);
    }
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j0pp = -s / x - 2.0 * c / (x * x) + 2.0 * s / (x * x * x);
    ((j0 - j0pp) / 2.0, (j0 + 3.0 * j0pp) / 2.0)
}

/// Transverse angular kernel as a full 3x3 (real, symmetric) matrix.
pub fn transverse_angular_kernel(x: f64, rhat: [f64; 3]) -> [[f64; 3]; 3] {
    let (a, b) = kernel_coefficients(x);
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = b * rhat[i] * rhat[j];
        }
        k[i][i] += a;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Plain Riemann-sum oracle for the defining integral of f_t.
    fn f_t_quadrature(x: f64, t: f64, n: usize) -> Complex64 {
        let h = t / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let tp = (i as f64 + 0.5) * h;
            acc += Complex64::new(0.0, x * tp).exp() * h;
        }
        acc
    }

    /// 2D angular quadrature oracle for the kernel: Gauss-Legendre in cos(theta),
    /// trapezoid in phi (periodic, spectrally accurate).
    fn kernel_quadrature(x: f64, rhat: [f64; 3]) -> [[f64; 3]; 3] {
        let n_ct = 400;
        let n_phi = 256;
        let (nodes, weights) = crate::quad::gauss_legendre_scaled(-1.0, 1.0, n_ct);
        let mut k = [[0.0; 3]; 3];
        for (&ct, &wct) in nodes.iter().zip(&weights) {
            let st = (1.0 - ct * ct).sqrt();
            for ip in 0..n_phi {
                let phi = 2.0 * PI * ip as f64 / n_phi as f64;
                let khat = [st * phi.cos(), st * phi.sin(), ct];
                let kdr = khat[0] * rhat[0] + khat[1] * rhat[1] + khat[2] * rhat[2];
                // real part only: the imaginary part integrates to zero by parity
                let w = wct * (2.0 * PI / n_phi as f64) * (x * kdr).cos() / (4.0 * PI);
                for a in 0..3 {
                    for b in 0..3 {
                        let delta = if a == b { 1.0 } else { 0.0 };
                        k[a][b] += w * (delta - khat[a] * khat[b]);
                    }
                }
            }
        }
        k
    }

    #[test]
    fn f_t_at_zero_frequency_is_t() {
        for &t in &[0.0, 0.3, 2.0, 17.5] {
            let v = f_t(0.0, t);
            assert_eq!(v.re, t);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn f_t_modulus_bounded_by_t() {
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..500 {
            let x = (next() - 0.5) * 200.0;
            let t = next() * 20.0;
            assert!(f_t(x, t).norm() <= t * (1.0 + 1e-12));
        }
    }

    #[test]
    fn f_t_of_one_at_t_pi_is_two_i() {
        let v = f_t(1.0, PI);
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        // and the definition-level oracle agrees
        let q = f_t_quadrature(1.0, PI, 20000);
        assert!((v - q).norm() < 1e-6);
    }

    #[test]
    fn f_t_branches_agree_at_crossover() {
        for &t in &[0.5, 1.0, 3.0] {
            let x = FT_SERIES_THRESHOLD / t;
            let series = f_t(x * (1.0 - 1e-9), t);
            let closed = f_t(x * (1.0 + 1e-9), t);
            assert!((series - closed).norm() / closed.norm() < 1e-12);
        }
    }

    #[test]
    fn f_t_negated_argument_conjugates() {
        for &(x, t) in &[(0.7, 1.3), (12.0, 0.2), (1e-5, 4.0), (-3.0, 2.5)] {
            let a = f_t(x, t);
            let b = f_t(-x, t);
            assert!((a.conj() - b).norm() < 1e-14 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn theta_convention() {
        assert_eq!(theta(-1.0), 0.0);
        assert_eq!(theta(1.0), 1.0);
        assert_eq!(theta(0.0), 0.0);
    }

    #[test]
    fn kernel_small_x_limit() {
        let k = transverse_angular_kernel(1e-9, [0.0, 0.0, 1.0]);
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { 2.0 / 3.0 } else { 0.0 };
                assert!((k[a][b] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kernel_closed_forms_along_z() {
        // K_zz = 2(sin x/x^3 - cos x/x^2), K_xx = sin x/x + cos x/x^2 - sin x/x^3
        for &x in &[0.3, 1.0, 4.0, 9.0] {
            let k = transverse_angular_kernel(x, [0.0, 0.0, 1.0]);
            let (s, c) = x.sin_cos();
            let kzz = 2.0 * (s / (x * x * x) - c / (x * x));
            let kxx = s / x + c / (x * x) - s / (x * x * x);
            assert!((k[2][2] - kzz).abs() < 1e-13);
            assert!((k[0][0] - kxx).abs() < 1e-13);
            assert!((k[1][1] - kxx).abs() < 1e-13);
        }
    }

    #[test]
    fn kernel_matches_angular_quadrature() {
        for &x in &[0.1, 1.0, 10.0, 50.0] {
            let rhat = [0.0, 0.0, 1.0];
            let k = transverse_angular_kernel(x, rhat);
            let q = kernel_quadrature(x, rhat);
            for a in 0..3 {
                for b in 0..3 {
                    assert!(
                        (k[a][b] - q[a][b]).abs() < 1e-8,
                        "x={x} entry ({a},{b}): {} vs {}",
                        k[a][b],
                        q[a][b]
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_trace_is_twice_sinc() {
        for &x in &[0.5, 2.0, 7.0] {
            let k = transverse_angular_kernel(x, [0.6, 0.0, 0.8]);
            let tr = k[0][0] + k[1][1] + k[2][2];
            assert!((tr - 2.0 * x.sin() / x).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_series_and_trig_branches_agree() {
        let x = 5e-2;
        let below = kernel_coefficients(x * (1.0 - 1e-9));
        let above = kernel_coefficients(x * (1.0 + 1e-9));
        // the trig branch loses ~3 digits to cancellation at the crossover
        assert!((below.0 - above.0).abs() < 1e-11);
        assert!((below.1 - above.1).abs() < 1e-11);
    }
}
