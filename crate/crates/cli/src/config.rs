//! Flat key-value run configuration with dotted names, loadable from a file
//! and overridable by command-line flags of the same names.

use cpdyn_core::quad::Regulator;
use cpdyn_core::{
    oracle::OracleCtrl, potential::EvalOptions, ExcitedSign, PolarizabilityB,
    ResonantAlphaChoice, SystemParams,
};
use std::collections::BTreeMap;
use std::fmt;

/// Everything a run needs, with defaults matching the reference system used
/// throughout the tests.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mu_a: [f64; 3],
    pub k0: f64,
    pub gamma: Option<f64>,
    pub sign: ExcitedSign,
    pub alpha_choice: ResonantAlphaChoice,
    pub isotropic: bool,
    pub b_model: String,
    pub b_mu: f64,
    pub b_k: f64,
    pub b_alpha0: f64,
    pub b_table: Vec<(f64, f64)>,
    pub hbar_c: f64,
    pub rhat: [f64; 3],
    pub point_r: f64,
    pub point_t: f64,
    pub sweep_r: Grid,
    pub sweep_t: Grid,
    pub format: OutputFormat,
    pub out_path: String,
    pub quad_tol: f64,
    pub lc_guard: f64,
    pub oracle_k_max: f64,
    pub oracle_tol: f64,
    pub oracle_regulator: Regulator,
    pub oracle_pv_offset: f64,
    pub oracle_bound: f64,
    pub oracle_route: OracleRoute,
    pub oracle_r: Option<Vec<f64>>,
    pub oracle_t: Option<Vec<f64>>,
    pub check_only: Vec<u32>,
    pub check_perturb: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleRoute {
    ModeSum,
    Compact,
}

/// Sweep axis: an explicit list or a geometric (min, max, count) rule.
#[derive(Debug, Clone)]
pub enum Grid {
    List(Vec<f64>),
    Geometric { min: f64, max: f64, count: usize },
    Unset,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        match self {
            Grid::List(v) => Ok(v.clone()),
            Grid::Geometric { min, max, count } => {
                if *count < 2 || !(min > &0.0) || !(max > min) {
                    return Err(ConfigError(
                        "geometric grid needs 0 < min < max and count >= 2".into(),
                    ));
                }
                let (la, lb) = (min.ln(), max.ln());
                Ok((0..*count)
                    .map(|i| (la + (lb - la) * i as f64 / (*count - 1) as f64).exp())
                    .collect())
            }
            Grid::Unset => Err(ConfigError("sweep grid not configured".into())),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mu_a: [1.0, 0.0, 0.0],
            k0: 1.0,
            gamma: None,
            sign: ExcitedSign::AsPrinted,
            alpha_choice: ResonantAlphaChoice::AtK0,
            isotropic: false,
            b_model: "two_level".into(),
            b_mu: 0.5477225575051661, // mu_B^2 = 0.3 in hbar c = k0 = 1 units
            b_k: 2.0,
            b_alpha0: 0.5,
            b_table: Vec::new(),
            hbar_c: 1.0,
            rhat: [0.0, 0.0, 1.0],
            point_r: 1.0,
            point_t: 2.0,
            sweep_r: Grid::Unset,
            sweep_t: Grid::Unset,
            format: OutputFormat::Csv,
            out_path: "-".into(),
            quad_tol: 1e-9,
            lc_guard: 1e-3,
            oracle_k_max: 60.0,
            oracle_tol: 1e-4,
            oracle_regulator: Regulator::ExpDamping,
            oracle_pv_offset: 1e-6,
            oracle_bound: 0.02,
            oracle_route: OracleRoute::ModeSum,
            oracle_r: None,
            oracle_t: None,
            check_only: Vec::new(),
            check_perturb: 0.0,
        }
    }
}

/// All recognized dotted keys, each with a short help string (also used to
/// generate the CLI override flags).
pub const KEYS: &[(&str, &str)] = &[
    ("atomA.mu_x", "dipole moment of atom A, x component"),
    ("atomA.mu_y", "dipole moment of atom A, y component"),
    ("atomA.mu_z", "dipole moment of atom A, z component"),
    ("atomA.k0", "transition wavenumber of atom A"),
    ("atomA.gamma", "decay rate of A's excited state (validity warnings only)"),
    ("atomA.sign", "excited polarizability sign: as_printed | sign_flipped"),
    ("atomA.alpha_choice", "resonance argument of alpha_B: at_k0 | at_imag_k0"),
    ("atomA.isotropic", "isotropically average A's dipole: true | false"),
    ("atomB.model", "polarizability model: two_level | static_constant | tabulated"),
    ("atomB.mu", "two-level B: dipole moment"),
    ("atomB.k", "two-level B: transition wavenumber"),
    ("atomB.alpha0", "static B: polarizability"),
    ("atomB.table", "tabulated B: comma list of u:alpha pairs"),
    ("units.hbar_c", "hbar*c in the input unit system"),
    ("geometry.rhat_x", "separation direction, x component"),
    ("geometry.rhat_y", "separation direction, y component"),
    ("geometry.rhat_z", "separation direction, z component"),
    ("point.r", "separation distance for point/oracle commands"),
    ("point.t", "time for point/oracle commands"),
    ("sweep.r", "comma list of separations"),
    ("sweep.r_geom", "geometric separation grid min:max:count"),
    ("sweep.t", "comma list of times"),
    ("sweep.t_geom", "geometric time grid min:max:count"),
    ("output.format", "csv | json"),
    ("output.path", "output file, or - for stdout"),
    ("quad.tol", "relative tolerance of the closed-form quadratures"),
    ("quad.lc_guard", "relative light-cone guard width"),
    ("oracle.k_max", "oracle mode cutoff in units of k0"),
    ("oracle.tol", "oracle tolerance"),
    ("oracle.regulator", "exp_damping | cutoff_averaging"),
    ("oracle.pv_offset", "punctured-node radius at k0, in units of k0"),
    ("oracle.bound", "maximum accepted oracle/closed-form deviation"),
    ("oracle.route", "mode_sum | compact"),
    ("oracle.r", "comma list of oracle separations (default: point.r)"),
    ("oracle.t", "comma list of oracle times (default: point.t)"),
    ("check.only", "comma list of check ids to run"),
    ("check.perturb_tensors", "test hook: perturb the closed-form tensor"),
];

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError(format!("{key}: cannot parse '{v}' as a number")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(ConfigError(format!("{key}: cannot parse '{v}' as a bool"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|s| parse_f64(key, s))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|l| {
            if l.is_empty() {
                Err(ConfigError(format!("{key}: empty list")))
            } else {
                Ok(l)
            }
        })
}

fn parse_geom(key: &str, v: &str) -> Result<Grid, ConfigError> {
    let parts: Vec<&str> = v.split(':').collect();
    if parts.len() != 3 {
        return Err(ConfigError(format!("{key}: expected min:max:count, got '{v}'")));
    }
    Ok(Grid::Geometric {
        min: parse_f64(key, parts[0])?,
        max: parse_f64(key, parts[1])?,
        count: parts[2]
            .trim()
            .parse()
            .map_err(|_| ConfigError(format!("{key}: bad count '{}'", parts[2])))?,
    })
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "atomA.mu_x" => self.mu_a[0] = parse_f64(key, v)?,
            "atomA.mu_y" => self.mu_a[1] = parse_f64(key, v)?,
            "atomA.mu_z" => self.mu_a[2] = parse_f64(key, v)?,
            "atomA.k0" => self.k0 = parse_f64(key, v)?,
            "atomA.gamma" => self.gamma = Some(parse_f64(key, v)?),
            "atomA.sign" => {
                self.sign = match v {
                    "as_printed" => ExcitedSign::AsPrinted,
                    "sign_flipped" => ExcitedSign::SignFlipped,
                    _ => return Err(ConfigError(format!("{key}: unknown variant '{v}'"))),
                }
            }
            "atomA.alpha_choice" => {
                self.alpha_choice = match v {
                    "at_k0" => ResonantAlphaChoice::AtK0,
                    "at_imag_k0" => ResonantAlphaChoice::AtImagK0,
                    _ => return Err(ConfigError(format!("{key}: unknown variant '{v}'"))),
                }
            }
            "atomA.isotropic" => self.isotropic = parse_bool(key, v)?,
            "atomB.model" => {
                if !["two_level", "static_constant", "tabulated"].contains(&v) {
                    return Err(ConfigError(format!("{key}: unknown model '{v}'")));
                }
                self.b_model = v.to_string();
            }
            "atomB.mu" => self.b_mu = parse_f64(key, v)?,
            "atomB.k" => self.b_k = parse_f64(key, v)?,
            "atomB.alpha0" => self.b_alpha0 = parse_f64(key, v)?,
            "atomB.table" => {
                let mut pts = Vec::new();
                for pair in v.split(',') {
                    let (u, a) = pair
                        .split_once(':')
                        .ok_or_else(|| ConfigError(format!("{key}: expected u:alpha pairs")))?;
                    pts.push((parse_f64(key, u)?, parse_f64(key, a)?));
                }
                self.b_table = pts;
            }
            "units.hbar_c" => self.hbar_c = parse_f64(key, v)?,
            "geometry.rhat_x" => self.rhat[0] = parse_f64(key, v)?,
            "geometry.rhat_y" => self.rhat[1] = parse_f64(key, v)?,
            "geometry.rhat_z" => self.rhat[2] = parse_f64(key, v)?,
            "point.r" => self.point_r = parse_f64(key, v)?,
            "point.t" => self.point_t = parse_f64(key, v)?,
            "sweep.r" => self.sweep_r = Grid::List(parse_list(key, v)?),
            "sweep.r_geom" => self.sweep_r = parse_geom(key, v)?,
            "sweep.t" => self.sweep_t = Grid::List(parse_list(key, v)?),
            "sweep.t_geom" => self.sweep_t = parse_geom(key, v)?,
            "output.format" => {
                self.format = match v {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => return Err(ConfigError(format!("{key}: unknown format '{v}'"))),
                }
            }
            "output.path" => self.out_path = v.to_string(),
            "quad.tol" => self.quad_tol = parse_f64(key, v)?,
            "quad.lc_guard" => self.lc_guard = parse_f64(key, v)?,
            "oracle.k_max" => self.oracle_k_max = parse_f64(key, v)?,
            "oracle.tol" => self.oracle_tol = parse_f64(key, v)?,
            "oracle.regulator" => {
                self.oracle_regulator = match v {
                    "exp_damping" => Regulator::ExpDamping,
                    "cutoff_averaging" => Regulator::CutoffAveraging,
                    _ => return Err(ConfigError(format!("{key}: unknown regulator '{v}'"))),
                }
            }
            "oracle.pv_offset" => self.oracle_pv_offset = parse_f64(key, v)?,
            "oracle.bound" => self.oracle_bound = parse_f64(key, v)?,
            "oracle.route" => {
                self.oracle_route = match v {
                    "mode_sum" => OracleRoute::ModeSum,
                    "compact" => OracleRoute::Compact,
                    _ => return Err(ConfigError(format!("{key}: unknown route '{v}'"))),
                }
            }
            "oracle.r" => self.oracle_r = Some(parse_list(key, v)?),
            "oracle.t" => self.oracle_t = Some(parse_list(key, v)?),
            "check.only" => {
                self.check_only = v
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| ConfigError(format!("{key}: bad id '{s}'")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
            }
            "check.perturb_tensors" => self.check_perturb = parse_f64(key, v)?,
            _ => return Err(ConfigError(format!("unknown configuration key '{key}'"))),
        }
        Ok(())
    }

    /// Parse a flat `key = value` config file body.
    pub fn apply_file(&mut self, body: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in body.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("line {}: expected 'key = value'", lineno + 1))
            })?;
            self.set(key.trim(), value)
                .map_err(|e| ConfigError(format!("line {}: {}", lineno + 1, e)))?;
        }
        Ok(())
    }

    /// Apply overrides collected from the command line, in the order given.
    pub fn apply_overrides(
        &mut self,
        pairs: &BTreeMap<String, String>,
    ) -> Result<(), ConfigError> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Build the physical system from the configuration.
    pub fn system(&self) -> Result<SystemParams, ConfigError> {
        let pol = match self.b_model.as_str() {
            "two_level" => PolarizabilityB::TwoLevel {
                mu_b: self.b_mu,
                k_b: self.b_k,
            },
            "static_constant" => PolarizabilityB::StaticConstant {
                alpha0: self.b_alpha0,
            },
            "tabulated" => PolarizabilityB::Tabulated {
                points: self.b_table.clone(),
            },
            other => return Err(ConfigError(format!("unknown atomB.model '{other}'"))),
        };
        let mut params = SystemParams::new(self.mu_a, self.k0, pol)
            .map_err(|e| ConfigError(e.to_string()))?;
        params.gamma = self.gamma;
        params.excited_sign = self.sign;
        params.resonant_alpha_choice = self.alpha_choice;
        params.isotropic_a = self.isotropic;
        params.hbar_c = self.hbar_c;
        params.validate().map_err(|e| ConfigError(e.to_string()))?;
        let n = (self.rhat[0] * self.rhat[0]
            + self.rhat[1] * self.rhat[1]
            + self.rhat[2] * self.rhat[2])
            .sqrt();
        if !(n > 0.0) {
            return Err(ConfigError("geometry.rhat must be nonzero".into()));
        }
        Ok(params)
    }

    pub fn rhat_unit(&self) -> [f64; 3] {
        let n = (self.rhat[0] * self.rhat[0]
            + self.rhat[1] * self.rhat[1]
            + self.rhat[2] * self.rhat[2])
            .sqrt();
        [self.rhat[0] / n, self.rhat[1] / n, self.rhat[2] / n]
    }

    pub fn r_vec(&self, r: f64) -> [f64; 3] {
        let u = self.rhat_unit();
        [u[0] * r, u[1] * r, u[2] * r]
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            tol: self.quad_tol,
            light_cone_guard: self.lc_guard,
        }
    }

    pub fn oracle_ctrl(&self) -> OracleCtrl {
        OracleCtrl {
            k_max: self.oracle_k_max * self.k0,
            tol: self.oracle_tol,
            regulator: self.oracle_regulator,
            pv_offset: self.oracle_pv_offset * self.k0,
        }
    }
}
