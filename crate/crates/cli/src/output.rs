//! Deterministic CSV/JSON emission for sweep and oracle records.

use serde::Serialize;
use std::io::Write;

/// Column order of the sweep output; the CSV header is exactly this list.
pub const SWEEP_COLUMNS: [&str; 10] = [
    "R",
    "t",
    "x",
    "tau",
    "term_resonant",
    "term_cp_dispersion",
    "term_dynamic",
    "total",
    "reduced_total",
    "err_flag",
];

/// One sweep record. Value fields are `None` when the point was refused
/// (light-cone guard or quadrature failure), with the reason in `err_flag`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub t: f64,
    pub x: f64,
    pub tau: f64,
    pub term_resonant: Option<f64>,
    pub term_cp_dispersion: Option<f64>,
    pub term_dynamic: Option<f64>,
    pub total: Option<f64>,
    pub reduced_total: Option<f64>,
    pub err_flag: String,
}

/// 17 significant digits, scientific, locale independent.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_g17).unwrap_or_default()
}

pub fn write_sweep_csv(mut w: impl Write, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "{}", SWEEP_COLUMNS.join(","))?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_g17(row.r),
            fmt_g17(row.t),
            fmt_g17(row.x),
            fmt_g17(row.tau),
            fmt_opt(row.term_resonant),
            fmt_opt(row.term_cp_dispersion),
            fmt_opt(row.term_dynamic),
            fmt_opt(row.total),
            fmt_opt(row.reduced_total),
            row.err_flag,
        )?;
    }
    Ok(())
}

pub fn write_sweep_json(mut w: impl Write, rows: &[SweepRow]) -> std::io::Result<()> {
    let body = serde_json::to_string_pretty(rows).expect("rows serialize");
    writeln!(w, "{body}")
}

/// One oracle-comparison record.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    #[serde(rename = "R")]
    pub r: f64,
    pub t: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub oracle_err_est: f64,
    /// Relative deviation from the closed form; for pre-light-cone points the
    /// comparison is against zero on the absolute scale of the post-cone
    /// reference value.
    pub deviation: f64,
    pub reference: &'static str,
}

pub fn write_oracle_csv(mut w: impl Write, rows: &[OracleRow]) -> std::io::Result<()> {
    writeln!(w, "R,t,closed_form,oracle,oracle_err_est,deviation,reference")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_g17(row.r),
            fmt_g17(row.t),
            fmt_g17(row.closed_form),
            fmt_g17(row.oracle),
            fmt_g17(row.oracle_err_est),
            fmt_g17(row.deviation),
            row.reference,
        )?;
    }
    Ok(())
}

pub fn write_oracle_json(mut w: impl Write, rows: &[OracleRow]) -> std::io::Result<()> {
    let body = serde_json::to_string_pretty(rows).expect("rows serialize");
    writeln!(w, "{body}")
}
