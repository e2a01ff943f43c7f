//! The verification suite: every acceptance property of the crate as an
//! executable check, shared by the `check` CLI command and the acceptance
//! integration tests. Each check pins its tolerance in code and reports a
//! single pass/fail line with its runtime.

use crate::analysis::{loglog_slope, oscillation_envelope};
use crate::oracle::{self, OracleCtrl};
use crate::params::{PolarizabilityB, SystemParams};
use crate::potential;
use crate::quad::{self, SemiInfMethod};
use crate::tensors;
use num_complex::Complex64;
use std::time::{Duration, Instant};

/// Options of a suite run.
#[derive(Debug, Clone, Default)]
pub struct CheckOptions {
    /// Run only the listed check ids (1..=10); empty means all.
    pub only: Vec<u32>,
    /// Test hook: relative perturbation injected into the closed-form field
    /// tensor before the finite-difference comparison. Nonzero values must
    /// make check 6 fail; that failure path is itself under test.
    pub tensor_perturbation: f64,
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub runtime: Duration,
}

impl CheckResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<22} {:>8.2?}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.runtime,
            self.detail
        )
    }
}

// standard verification geometry: dipole perpendicular to the separation
fn two_level_system() -> SystemParams {
    SystemParams::new(
        [1.0, 0.0, 0.0],
        1.0,
        PolarizabilityB::TwoLevel {
            mu_b: 0.3f64.sqrt(),
            k_b: 2.0,
        },
    )
    .expect("valid reference system")
}

fn static_system() -> SystemParams {
    SystemParams::new(
        [1.0, 0.0, 0.0],
        1.0,
        PolarizabilityB::StaticConstant { alpha0: 0.5 },
    )
    .expect("valid reference system")
}

fn r_of(x: f64) -> [f64; 3] {
    [0.0, 0.0, x]
}

fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Run the suite (or the subset selected in `opts`).
pub fn run_checks(opts: &CheckOptions) -> Vec<CheckResult> {
    type Check = (u32, &'static str, fn(&CheckOptions) -> (bool, String));
    let table: [Check; 10] = [
        (1, "causality_analytic", check_causality_analytic),
        (2, "causality_emergent", check_causality_emergent),
        (3, "static_limit", check_static_limit),
        (4, "dynamic_relaxation", check_dynamic_relaxation),
        (5, "oracle_equivalence", check_oracle_equivalence),
        (6, "tensor_correctness", check_tensor_correctness),
        (7, "asymptotic_laws", check_asymptotic_laws),
        (8, "pv_identity", check_pv_identity),
        (9, "quad_cross_validation", check_quad_cross_validation),
        (10, "scale_invariance", check_scale_invariance),
    ];
    let mut results = Vec::new();
    for (id, name, f) in table {
        if !opts.only.is_empty() && !opts.only.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let (passed, detail) = f(opts);
        results.push(CheckResult {
            id,
            name,
            passed,
            detail,
            runtime: start.elapsed(),
        });
    }
    results
}

/// 1. The closed form vanishes identically on and before the light cone.
fn check_causality_analytic(_: &CheckOptions) -> (bool, String) {
    let p = two_level_system();
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for &x in &[0.5, 1.0, 2.0, 7.0] {
        for &frac in &[0.0, 0.3, 0.7, 1.0] {
            let b = match potential::potential_total(&p, r_of(x), x * frac) {
                Ok(b) => b,
                Err(e) => return (false, format!("evaluation failed: {e}")),
            };
            worst = worst
                .max(b.total.abs())
                .max(b.resonant.abs())
                .max(b.cp_dispersion.abs())
                .max(b.dynamic.abs());
            n += 1;
        }
    }
    (
        worst == 0.0,
        format!("max |term| over {n} causal points = {worst:e} (exact zero required)"),
    )
}

/// 2. Causality emerges from the mode sum without an inserted step function.
fn check_causality_emergent(_: &CheckOptions) -> (bool, String) {
    let p = static_system();
    let ctrl = OracleCtrl::default_for(p.k0); // k_max = 60 k0
    let pre = match oracle::oracle_mode_sum(&p, r_of(1.0), 0.5, &ctrl) {
        Ok(v) => v,
        Err(e) => return (false, format!("oracle failed: {e}")),
    };
    let reference = match oracle::oracle_mode_sum(&p, r_of(1.0), 2.0, &ctrl) {
        Ok(v) => v,
        Err(e) => return (false, format!("oracle failed: {e}")),
    };
    let ratio = pre.value.abs() / reference.value.abs();
    let mut ctrl2 = ctrl;
    ctrl2.k_max = 2.0 * ctrl.k_max;
    let pre2 = match oracle::oracle_mode_sum(&p, r_of(1.0), 0.5, &ctrl2) {
        Ok(v) => v,
        Err(e) => return (false, format!("oracle failed: {e}")),
    };
    let shrinks = pre2.value.abs() < pre.value.abs();
    (
        ratio <= 0.05 && shrinks,
        format!(
            "|pre-cone|/|post-cone| = {ratio:.4} (<= 0.05), doubling k_max: {:e} -> {:e}",
            pre.value.abs(),
            pre2.value.abs()
        ),
    )
}

/// 3. The full potential converges to the stationary one after the transient.
fn check_static_limit(_: &CheckOptions) -> (bool, String) {
    let p = two_level_system();
    let mut details = Vec::new();
    let mut ok = true;
    for &x in &[0.5, 1.0, 5.0] {
        let total = match potential::potential_total(&p, r_of(x), x + 100.0) {
            Ok(b) => b.total,
            Err(e) => return (false, format!("x={x}: {e}")),
        };
        let stat = match potential::potential_static(&p, r_of(x)) {
            Ok(v) => v,
            Err(e) => return (false, format!("x={x}: {e}")),
        };
        let rel = (total - stat).abs() / stat.abs();
        ok &= rel < 0.05;
        details.push(format!("x={x}: {rel:.2e}"));
    }
    (ok, format!("rel. gap at tau=x+100: {}", details.join(", ")))
}

/// 4. Transient-term relaxation: log-log slope of the oscillation envelope
/// against tau - x at the late-time sample points, asserted at -1 +/- 0.2.
///
/// Measured slope of the implemented transient term is near -4 (the leading
/// 1/Delta and 1/Delta^2 tail terms of its radial integrals cancel exactly),
/// so this check documents the discrepancy rather than hiding it.
fn check_dynamic_relaxation(_: &CheckOptions) -> (bool, String) {
    let p = two_level_system();
    let x = 1.0;
    let mut pts = Vec::new();
    for &gap in &[10.0, 20.0, 40.0, 80.0] {
        let env = oscillation_envelope(
            |t| potential::term_dynamic(&p, r_of(x), t).unwrap_or(f64::NAN),
            x + gap,
            std::f64::consts::PI,
            25,
        );
        if !env.is_finite() || env <= 0.0 {
            return (false, format!("envelope at gap {gap} not positive: {env}"));
        }
        pts.push((gap, env));
    }
    let slope = loglog_slope(&pts);
    let passed = (slope + 1.0).abs() <= 0.2;
    (
        passed,
        format!("envelope slope = {slope:.3} (required -1 +/- 0.2)"),
    )
}

/// 5. Both oracle routes agree with the closed form on the verification grid.
fn check_oracle_equivalence(_: &CheckOptions) -> (bool, String) {
    let p = static_system();
    // the near-cone grid points need the finer damping ladder of a larger
    // k_max for the eta -> 0 extrapolation to settle below the 2% gate
    let ctrl = OracleCtrl {
        k_max: 120.0,
        ..OracleCtrl::default_for(p.k0)
    };
    let mut worst = (0.0f64, String::new());
    for &x in &[0.5, 1.0, 2.0] {
        for &factor in &[1.5, 3.0] {
            let tau = factor * x;
            let closed = match potential::potential_total(&p, r_of(x), tau) {
                Ok(b) => b.total,
                Err(e) => return (false, format!("closed form at ({x},{tau}): {e}")),
            };
            for (label, val) in [
                ("mode_sum", oracle::oracle_mode_sum(&p, r_of(x), tau, &ctrl)),
                ("compact", oracle::oracle_compact(&p, r_of(x), tau, &ctrl)),
            ] {
                let v = match val {
                    Ok(v) => v.value,
                    Err(e) => return (false, format!("{label} at ({x},{tau}): {e}")),
                };
                let rel = (v - closed).abs() / closed.abs();
                if rel > worst.0 {
                    worst = (rel, format!("{label} at (x,tau)=({x},{tau})"));
                }
            }
        }
    }
    (
        worst.0 < 0.02,
        format!("worst deviation {:.3}% ({})", worst.0 * 100.0, worst.1),
    )
}

/// 6. Closed-form field tensor against central finite differences.
fn check_tensor_correctness(opts: &CheckOptions) -> (bool, String) {
    use rand_like::*;
    let cases = [
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(-0.5, 2.0),
    ];
    let mut state = Lcg::new(0x5eed);
    let mut worst: f64 = 0.0;
    for s in cases {
        let dir = state.unit_vector();
        let rn = 0.8 + state.next() * 0.5;
        let r = [dir[0] * rn, dir[1] * rn, dir[2] * rn];
        let field = move |p: [f64; 3]| {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            (s * n).exp() / n
        };
        let closed = match tensors::apply_f_exp(s, r) {
            Ok(t) => t.map(|e| e * (1.0 + opts.tensor_perturbation)),
            Err(e) => return (false, e.to_string()),
        };
        let fd = match tensors::apply_f_numeric_richardson(&field, r, 1e-3 * rn) {
            Ok(t) => t,
            Err(e) => return (false, e.to_string()),
        };
        worst = worst.max(tensors::frobenius_rel_err(&fd, &closed));
    }
    (
        worst < 1e-6,
        format!("worst relative Frobenius error {worst:.2e} (< 1e-6 required)"),
    )
}

/// 7. Asymptotic power laws of the stationary terms.
fn check_asymptotic_laws(_: &CheckOptions) -> (bool, String) {
    let p = two_level_system();
    let slope_of = |xs: &[f64], f: &dyn Fn(f64) -> f64| {
        let pts: Vec<(f64, f64)> = xs.iter().map(|&x| (x, f(x).abs())).collect();
        loglog_slope(&pts)
    };
    let cp = |x: f64| potential::term_cp_dispersion(&p, r_of(x)).unwrap_or(f64::NAN);
    let res = |x: f64| potential::term_resonant(&p, r_of(x)).unwrap_or(f64::NAN);
    let s_far = slope_of(&geomspace(20.0, 100.0, 7), &cp);
    let s_near = slope_of(&geomspace(1e-3, 1e-2, 7), &cp);
    let s_res = slope_of(&geomspace(20.0, 200.0, 9), &res);
    let ok = (s_far + 7.0).abs() < 0.1 && (s_near + 6.0).abs() < 0.1 && (s_res + 2.0).abs() < 0.1;
    (
        ok,
        format!(
            "dispersion far {s_far:.3} (-7), near {s_near:.3} (-6); resonant far {s_res:.3} (-2)"
        ),
    )
}

/// 8. Principal-value step identity for both signs of the separation.
fn check_pv_identity(_: &CheckOptions) -> (bool, String) {
    match oracle::pv_identity_selftest(&OracleCtrl::default_for(1.0)) {
        Ok(report) => {
            let worst = report
                .cases
                .iter()
                .map(|c| c.rel_err)
                .fold(0.0f64, f64::max);
            (
                report.passed,
                format!(
                    "{} cases, worst relative error {worst:.2e} (tolerance {:.0e})",
                    report.cases.len(),
                    report.tolerance
                ),
            )
        }
        Err(e) => (false, e.to_string()),
    }
}

/// 9. Independent quadrature rules agree on the dispersion integrands, and
/// the error estimates of the adaptive engine are honest.
fn check_quad_cross_validation(_: &CheckOptions) -> (bool, String) {
    let mut worst: f64 = 0.0;
    for &x in &[1.0, 5.0] {
        // the actual dispersion-term integrand in reduced variables
        let red = |v: f64| {
            let t = tensors::apply_f_exp(Complex64::new(-v, 0.0), r_of(x)).expect("x > 0");
            let tv = t.apply([1.0, 0.0, 0.0]);
            let alpha = 2.0 * 2.0 * 0.3 / (4.0 + v * v);
            alpha * (tv[0] * tv[0] + tv[1] * tv[1] + tv[2] * tv[2]).re / (1.0 + v * v)
        };
        let a = quad::integrate_semiinf_with(red, 2.0 * x, 1e-11, SemiInfMethod::AdaptivePanels);
        let b = quad::integrate_semiinf_with(red, 2.0 * x, 1e-11, SemiInfMethod::DoubleExponential);
        match (a, b) {
            (Ok(a), Ok(b)) => {
                worst = worst.max((a.value - b.value).abs() / a.value.abs());
            }
            (Err(e), _) | (_, Err(e)) => return (false, e.to_string()),
        }
    }
    let (honest, total) = error_honesty_suite();
    let ok = worst < 1e-8 && honest * 10 >= total * 9;
    (
        ok,
        format!("dual-rule rel. gap {worst:.2e} (< 1e-8); honest error estimates {honest}/{total}"),
    )
}

/// 10. Two physically different parameter sets sharing reduced inputs give
/// identical reduced breakdowns.
fn check_scale_invariance(_: &CheckOptions) -> (bool, String) {
    let p1 = two_level_system();
    let mut p2 = p1.clone();
    p2.k0 = 3.0;
    p2.mu_a = [0.4, 0.0, 0.0];
    p2.pol_b = PolarizabilityB::TwoLevel {
        mu_b: (0.3f64 / 9.0).sqrt(),
        k_b: 6.0,
    };
    let (x, tau) = (1.0, 2.5);
    let b1 = match potential::potential_total(&p1, r_of(x / p1.k0), tau / p1.k0) {
        Ok(b) => b,
        Err(e) => return (false, e.to_string()),
    };
    let b2 = match potential::potential_total(&p2, r_of(x / p2.k0), tau / p2.k0) {
        Ok(b) => b,
        Err(e) => return (false, e.to_string()),
    };
    let pairs = [
        (b1.reduced.resonant, b2.reduced.resonant),
        (b1.reduced.cp_dispersion, b2.reduced.cp_dispersion),
        (b1.reduced.dynamic, b2.reduced.dynamic),
        (b1.reduced.total, b2.reduced.total),
    ];
    let worst = pairs
        .iter()
        .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
        .fold(0.0f64, f64::max);
    (
        worst < 1e-9,
        format!("worst reduced-term relative difference {worst:.2e} (< 1e-9)"),
    )
}

/// Ten analytic integrals probing the honesty of the adaptive engine's error
/// estimate: the true error must not exceed five times the estimate in at
/// least nine cases.
pub fn error_honesty_suite() -> (usize, usize) {
    use std::f64::consts::{E, PI};
    type Case = (fn(f64) -> f64, f64, f64, f64);
    let cases: [Case; 10] = [
        (|x| x * x, 0.0, 1.0, 1.0 / 3.0),
        (|x| x.exp(), 0.0, 1.0, E - 1.0),
        (|x| x.sin(), 0.0, PI, 2.0),
        (|x| 1.0 / (1.0 + x * x), 0.0, 1.0, PI / 4.0),
        (|x| x.sqrt(), 0.0, 1.0, 2.0 / 3.0),
        (|x| (5.0 * x).cos(), 0.0, 2.0, (10.0f64).sin() / 5.0),
        (|x| x.ln(), 1.0, 3.0, 3.0 * 3.0f64.ln() - 2.0),
        (|x| (-x * x).exp(), -4.0, 4.0, PI.sqrt() * 0.9999999845827421),
        (|x| 1.0 / (0.01 + x * x), -1.0, 1.0, 20.0 * 10.0f64.atan()),
        (|x| (20.0 * x).sin() / (1.0 + x), 0.0, 2.0, 0.06065984927041077),
    ];
    let mut honest = 0;
    for (f, a, b, exact) in cases {
        if let Ok(r) = quad::integrate_interval(f, a, b, 1e-10) {
            if (r.value - exact).abs() <= 5.0 * r.err_est + 1e-13 {
                honest += 1;
            }
        }
    }
    (honest, 10)
}

/// Tiny deterministic generator for the checks that need arbitrary but
/// reproducible directions; avoids pulling a full RNG into the library.
mod rand_like {
    pub struct Lcg(u64);

    impl Lcg {
        pub fn new(seed: u64) -> Self {
            Lcg(seed.wrapping_mul(0x9e3779b97f4a7c15) | 1)
        }
        pub fn next(&mut self) -> f64 {
            self.0 = self
                .0
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (self.0 >> 11) as f64 / (1u64 << 53) as f64
        }
        pub fn unit_vector(&mut self) -> [f64; 3] {
            loop {
                let v = [
                    2.0 * self.next() - 1.0,
                    2.0 * self.next() - 1.0,
                    2.0 * self.next() - 1.0,
                ];
                let n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                if n2 > 1e-3 && n2 < 1.0 {
                    let n = n2.sqrt();
                    return [v[0] / n, v[1] / n, v[2] / n];
                }
            }
        }
    }
}
