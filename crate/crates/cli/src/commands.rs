//! The four subcommands: single-point evaluation, parameter sweeps, oracle
//! comparisons, and the verification suite.

use crate::config::{OracleRoute, OutputFormat, RunConfig};
use crate::output::{self, OracleRow, SweepRow};
use cpdyn_core::checks::{run_checks, CheckOptions};
use cpdyn_core::oracle;
use cpdyn_core::params::{reduce, validity_check};
use cpdyn_core::potential;
use cpdyn_core::CpError;
use rayon::prelude::*;
use std::fs::File;
use std::io::Write;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_ORACLE_DEV: i32 = 4;

fn open_sink(path: &str) -> std::io::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(std::io::stdout().lock()))
    } else {
        Ok(Box::new(File::create(path)?))
    }
}

pub fn cmd_point(cfg: &RunConfig) -> i32 {
    let params = match cfg.system() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    for w in validity_check(&params, cfg.point_t) {
        eprintln!("warning: {}", w.0);
    }
    let r = cfg.r_vec(cfg.point_r);
    let breakdown =
        match potential::potential_total_with(&params, r, cfg.point_t, &cfg.eval_options()) {
            Ok(b) => b,
            Err(e) => {
                eprintln!("evaluation failed: {e}");
                return EXIT_CHECK_FAIL;
            }
        };
    println!(
        "point: R = {}, t = {}  (x = {}, tau = {})",
        output::fmt_g17(cfg.point_r),
        output::fmt_g17(cfg.point_t),
        output::fmt_g17(breakdown.at.x),
        output::fmt_g17(breakdown.at.tau),
    );
    println!("{:<20} {:>24} {:>24}", "term", "energy", "reduced (E0 units)");
    for (name, phys, red) in [
        ("term_resonant", breakdown.resonant, breakdown.reduced.resonant),
        (
            "term_cp_dispersion",
            breakdown.cp_dispersion,
            breakdown.reduced.cp_dispersion,
        ),
        ("term_dynamic", breakdown.dynamic, breakdown.reduced.dynamic),
        ("total", breakdown.total, breakdown.reduced.total),
    ] {
        println!(
            "{:<20} {:>24} {:>24}",
            name,
            output::fmt_g17(phys),
            output::fmt_g17(red)
        );
    }
    EXIT_OK
}

pub fn cmd_sweep(cfg: &RunConfig) -> i32 {
    let params = match cfg.system() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let (r_grid, t_grid) = match (cfg.sweep_r.values(), cfg.sweep_t.values()) {
        (Ok(r), Ok(t)) => (r, t),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    if !strictly_increasing(&r_grid) || !strictly_increasing(&t_grid) {
        eprintln!("configuration error: sweep grids must be strictly increasing");
        return EXIT_CONFIG;
    }
    let opt = cfg.eval_options();
    // row-major: R outer, t inner; evaluated in parallel, emitted in order
    let points: Vec<(f64, f64)> = r_grid
        .iter()
        .flat_map(|&r| t_grid.iter().map(move |&t| (r, t)))
        .collect();
    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(r, t)| {
            let rv = cfg.r_vec(r);
            let pt = reduce(&params, rv, t).expect("grid values are positive");
            match potential::potential_total_with(&params, rv, t, &opt) {
                Ok(b) => SweepRow {
                    r,
                    t,
                    x: pt.x,
                    tau: pt.tau,
                    term_resonant: Some(b.resonant),
                    term_cp_dispersion: Some(b.cp_dispersion),
                    term_dynamic: Some(b.dynamic),
                    total: Some(b.total),
                    reduced_total: Some(b.reduced.total),
                    err_flag: String::new(),
                },
                Err(e) => {
                    let flag = match e {
                        CpError::LightConeProximity { .. } => "lightcone".to_string(),
                        CpError::Accuracy { .. } => "accuracy".to_string(),
                        other => format!("error:{other:?}"),
                    };
                    SweepRow {
                        r,
                        t,
                        x: pt.x,
                        tau: pt.tau,
                        term_resonant: None,
                        term_cp_dispersion: None,
                        term_dynamic: None,
                        total: None,
                        reduced_total: None,
                        err_flag: flag,
                    }
                }
            }
        })
        .collect();
    let sink = match open_sink(&cfg.out_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot open output '{}': {e}", cfg.out_path);
            return EXIT_IO;
        }
    };
    let res = match cfg.format {
        OutputFormat::Csv => output::write_sweep_csv(sink, &rows),
        OutputFormat::Json => output::write_sweep_json(sink, &rows),
    };
    if let Err(e) = res {
        eprintln!("write failed: {e}");
        return EXIT_IO;
    }
    EXIT_OK
}

pub fn cmd_oracle(cfg: &RunConfig) -> i32 {
    let params = match cfg.system() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return EXIT_CONFIG;
        }
    };
    let r_grid = cfg.oracle_r.clone().unwrap_or_else(|| vec![cfg.point_r]);
    let t_grid = cfg.oracle_t.clone().unwrap_or_else(|| vec![cfg.point_t]);
    let n_points = r_grid.len() * t_grid.len();
    if n_points > 16 {
        eprintln!(
            "configuration error: oracle grid has {n_points} points; \
             the cost guard allows at most 16"
        );
        return EXIT_CONFIG;
    }
    let ctrl = cfg.oracle_ctrl();
    let opt = cfg.eval_options();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for &r in &r_grid {
        let rv = cfg.r_vec(r);
        // reference scale for pre-light-cone points: the oracle itself at
        // tau = 2x, i.e. t = 2R/c
        let mut reference_abs: Option<f64> = None;
        for &t in &t_grid {
            let orc = match run_oracle(cfg, &params, rv, t, &ctrl) {
                Ok(v) => v,
                Err(e) => {
                    eprintln!("oracle failed at R={r}, t={t}: {e}");
                    return EXIT_CONFIG;
                }
            };
            let pt = reduce(&params, rv, t).expect("positive R");
            let (closed, deviation, reference) = if pt.tau > pt.x {
                let closed =
                    match potential::potential_total_with(&params, rv, t, &opt) {
                        Ok(b) => b.total,
                        Err(e) => {
                            eprintln!("closed form failed at R={r}, t={t}: {e}");
                            return EXIT_CONFIG;
                        }
                    };
                (closed, (orc.value - closed).abs() / closed.abs(), "closed_form")
            } else {
                // causality emergence: compare against zero on the absolute
                // scale of the post-cone value
                let scale = match reference_abs {
                    Some(s) => s,
                    None => {
                        let t_ref = 2.0 * r; // tau = 2x with c = 1 time units
                        let v = match run_oracle(cfg, &params, rv, t_ref, &ctrl) {
                            Ok(v) => v.value.abs(),
                            Err(e) => {
                                eprintln!("oracle reference failed at R={r}: {e}");
                                return EXIT_CONFIG;
                            }
                        };
                        reference_abs = Some(v);
                        v
                    }
                };
                (0.0, orc.value.abs() / scale, "zero_pre_cone")
            };
            worst = worst.max(deviation);
            rows.push(OracleRow {
                r,
                t,
                closed_form: closed,
                oracle: orc.value,
                oracle_err_est: orc.err_est,
                deviation,
                reference,
            });
        }
    }
    let sink = match open_sink(&cfg.out_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("cannot open output '{}': {e}", cfg.out_path);
            return EXIT_IO;
        }
    };
    let res = match cfg.format {
        OutputFormat::Csv => output::write_oracle_csv(sink, &rows),
        OutputFormat::Json => output::write_oracle_json(sink, &rows),
    };
    if let Err(e) = res {
        eprintln!("write failed: {e}");
        return EXIT_IO;
    }
    if worst > cfg.oracle_bound {
        eprintln!(
            "oracle deviation {worst:.3e} exceeds the configured bound {:.3e}",
            cfg.oracle_bound
        );
        return EXIT_ORACLE_DEV;
    }
    EXIT_OK
}

fn run_oracle(
    cfg: &RunConfig,
    params: &cpdyn_core::SystemParams,
    rv: [f64; 3],
    t: f64,
    ctrl: &cpdyn_core::oracle::OracleCtrl,
) -> cpdyn_core::Result<cpdyn_core::QuadResult> {
    match cfg.oracle_route {
        OracleRoute::ModeSum => oracle::oracle_mode_sum(params, rv, t, ctrl),
        OracleRoute::Compact => oracle::oracle_compact(params, rv, t, ctrl),
    }
}

pub fn cmd_check(cfg: &RunConfig) -> i32 {
    let opts = CheckOptions {
        only: cfg.check_only.clone(),
        tensor_perturbation: cfg.check_perturb,
    };
    let results = run_checks(&opts);
    let mut all_ok = true;
    for r in &results {
        println!("{}", r.line());
        all_ok &= r.passed;
    }
    println!(
        "{}/{} checks passed",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    if all_ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAIL
    }
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}
