//! End-to-end tests of the binary: exit codes, output contracts, determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cpdyn"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn point_before_light_cone_is_zero_row() {
    let o = run(&["point", "--point.r", "2.0", "--point.t", "1.0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for line in text.lines().skip(2) {
        let value = line.split_whitespace().nth(1).unwrap();
        assert_eq!(value.parse::<f64>().unwrap(), 0.0, "line: {line}");
    }
}

#[test]
fn point_total_is_sum_of_terms() {
    let o = run(&["point", "--point.r", "1.0", "--point.t", "3.0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let grab = |name: &str| -> f64 {
        text.lines()
            .find(|l| l.starts_with(name))
            .unwrap_or_else(|| panic!("missing row {name}"))
            .split_whitespace()
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    let sum = grab("term_resonant") + grab("term_cp_dispersion") + grab("term_dynamic");
    assert_eq!(sum, grab("total"));
}

#[test]
fn degenerate_config_exits_two_with_message() {
    let o = run(&["point", "--atomB.k", "1.0"]); // equal to the default k0
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pole"), "stderr: {}", stderr(&o));
}

#[test]
fn sweep_contract_and_determinism() {
    let grid_r = "0.5,1.0,1.5,2.0,2.5,3.0,3.5,4.0,4.5,5.0";
    let grid_t = "0.1,1.1,2.1,3.1,4.1,5.1,6.1,7.1,8.1,9.1";
    let args = [
        "sweep",
        "--sweep.r",
        grid_r,
        "--sweep.t",
        grid_t,
        "--quad.tol",
        "1e-8",
    ];
    let o1 = run(&args);
    assert_eq!(o1.status.code(), Some(0), "{}", stderr(&o1));
    let text = stdout(&o1);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "R,t,x,tau,term_resonant,term_cp_dispersion,term_dynamic,total,reduced_total,err_flag"
    );
    assert_eq!(lines.count(), 100, "one record per grid point");
    // byte-identical rerun, also when the worker count changes
    let o2 = run(&args);
    assert_eq!(o1.stdout, o2.stdout);
    let o3 = bin().args(args).env("CPDYN_THREADS", "3").output().unwrap();
    assert_eq!(o1.stdout, o3.stdout);
}

#[test]
fn sweep_inside_cone_is_all_zero() {
    let o = run(&[
        "sweep",
        "--sweep.r",
        "4.0,5.0",
        "--sweep.t",
        "1.0,2.0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines().skip(1) {
        let total: f64 = line.split(',').nth(7).unwrap().parse().unwrap();
        assert_eq!(total, 0.0);
    }
}

#[test]
fn sweep_flags_light_cone_rows_and_continues() {
    // tau/x = 1.0004 sits inside the default 1e-3 guard for r = 2.5
    let o = run(&["sweep", "--sweep.r", "2.5", "--sweep.t", "2.501,7.0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].ends_with(",,,,,lightcone"), "row: {}", rows[0]);
    assert!(rows[1].ends_with(","), "row: {}", rows[1]);
}

#[test]
fn sweep_json_matches_csv_fields() {
    let o = run(&[
        "sweep",
        "--sweep.r",
        "1.0",
        "--sweep.t",
        "2.0",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let row = &rows.as_array().unwrap()[0];
    for field in [
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
    ] {
        assert!(row.get(field).is_some(), "missing {field}");
    }
}

#[test]
fn sweep_unwritable_output_exits_three() {
    let o = run(&[
        "sweep",
        "--sweep.r",
        "1.0",
        "--sweep.t",
        "2.0",
        "--out",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn oracle_cost_guard_trips_before_computation() {
    let start = std::time::Instant::now();
    let o = run(&[
        "oracle",
        "--oracle.r",
        "1,2,3,4,5",
        "--oracle.t",
        "6,7,8,9",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("16"));
    assert!(start.elapsed().as_secs() < 5, "guard must fire immediately");
}

#[test]
fn oracle_small_grid_within_bound() {
    // coarse but cheap: k_max at the floor, one post-cone point
    let o = run(&[
        "oracle",
        "--atomB.model",
        "static_constant",
        "--atomB.alpha0",
        "0.5",
        "--oracle.k_max",
        "20",
        "--oracle.bound",
        "0.05",
        "--point.r",
        "1.0",
        "--point.t",
        "3.0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("R,t,closed_form,oracle,oracle_err_est,deviation,reference"));
    let dev: f64 = text.lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!(dev < 0.05, "deviation {dev}");
}

#[test]
fn oracle_pre_cone_point_uses_absolute_reference() {
    let o = run(&[
        "oracle",
        "--atomB.model",
        "static_constant",
        "--oracle.k_max",
        "20",
        "--oracle.bound",
        "0.1",
        "--point.r",
        "1.0",
        "--point.t",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o).lines().nth(1).unwrap().to_string();
    assert!(line.ends_with("zero_pre_cone"), "line: {line}");
}

#[test]
fn oracle_two_level_is_config_error() {
    let o = run(&["oracle", "--oracle.k_max", "20"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("static_constant"));
}

#[test]
fn check_subset_passes_and_reports_runtime() {
    let o = run(&["check", "--check.only", "1,6,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.matches("[PASS]").count(), 3);
    assert!(text.contains("3/3 checks passed"));
    // every line carries its runtime
    for line in text.lines().filter(|l| l.starts_with('[')) {
        assert!(
            line.contains("µs") || line.contains("ms") || line.contains('s'),
            "no runtime in: {line}"
        );
    }
}

#[test]
fn perturbed_tensor_check_fails_with_exit_one() {
    let o = run(&[
        "check",
        "--check.only",
        "6",
        "--check.perturb_tensors",
        "1e-3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("[FAIL]"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join("cpdyn_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.conf");
    std::fs::write(
        &path,
        "# reference system\natomA.k0 = 1.0\npoint.r = 2.0\npoint.t = 1.0\n",
    )
    .unwrap();
    let o = run(&[
        "point",
        "--config",
        path.to_str().unwrap(),
        "--point.t",
        "5.0",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // t overridden to a post-cone value: totals nonzero
    let text = stdout(&o);
    assert!(text.contains("t = 5.0000000000000000e0"));
    let total_line = text.lines().find(|l| l.starts_with("total")).unwrap();
    let v: f64 = total_line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!(v != 0.0);
}
