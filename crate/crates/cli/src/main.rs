//! `cpdyn`: time-dependent Casimir-Polder energies between an initially bare
//! excited atom and a ground-state atom.
//!
//! Subcommands: `point` (single evaluation), `sweep` (R/t grids to CSV/JSON),
//! `oracle` (mode-sum cross-check), `check` (verification suite). All
//! configuration lives in flat dotted keys, from a `--config` file and/or
//! flags of the same names, e.g. `--atomA.k0 2.0`.

mod commands;
mod config;
mod output;

use clap::{Arg, ArgAction, Command};
use config::RunConfig;
use std::collections::BTreeMap;
use std::process::ExitCode;

fn with_config_args(cmd: Command) -> Command {
    let mut cmd = cmd
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .help("flat key=value configuration file"),
        )
        .arg(
            Arg::new("out")
                .long("out")
                .value_name("PATH")
                .help("output path (alias for output.path; - is stdout)"),
        )
        .arg(
            Arg::new("format")
                .long("format")
                .value_name("csv|json")
                .help("output format (alias for output.format)"),
        );
    for (key, help) in config::KEYS {
        cmd = cmd.arg(
            Arg::new(*key)
                .long(*key)
                .value_name("VALUE")
                .action(ArgAction::Set)
                .help(*help)
                .help_heading("Configuration overrides"),
        );
    }
    cmd
}

fn build_cli() -> Command {
    Command::new("cpdyn")
        .about("Time-dependent Casimir-Polder interaction of an excited and a ground-state atom")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .subcommands([
            with_config_args(Command::new("point").about("Evaluate one (R, t) point")),
            with_config_args(Command::new("sweep").about("Evaluate an R x t grid")),
            with_config_args(
                Command::new("oracle").about("Compare the closed form against the mode-sum oracle"),
            ),
            with_config_args(Command::new("check").about("Run the verification suite")),
        ])
}

fn load_config(matches: &clap::ArgMatches) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    if let Some(path) = matches.get_one::<String>("config") {
        let body = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config '{path}': {e}"))?;
        cfg.apply_file(&body).map_err(|e| e.to_string())?;
    }
    let mut overrides = BTreeMap::new();
    for (key, _) in config::KEYS {
        if let Some(v) = matches.get_one::<String>(*key) {
            overrides.insert(key.to_string(), v.clone());
        }
    }
    if let Some(v) = matches.get_one::<String>("out") {
        overrides.insert("output.path".into(), v.clone());
    }
    if let Some(v) = matches.get_one::<String>("format") {
        overrides.insert("output.format".into(), v.clone());
    }
    cfg.apply_overrides(&overrides).map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    // worker cap; evaluation order is fixed regardless of the pool size
    if let Ok(v) = std::env::var("CPDYN_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let matches = build_cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let cfg = match load_config(sub) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(commands::EXIT_CONFIG as u8);
        }
    };
    let code = match name {
        "point" => commands::cmd_point(&cfg),
        "sweep" => commands::cmd_sweep(&cfg),
        "oracle" => commands::cmd_oracle(&cfg),
        "check" => commands::cmd_check(&cfg),
        _ => unreachable!("clap enforces the subcommand set"),
    };
    ExitCode::from(code as u8)
}
