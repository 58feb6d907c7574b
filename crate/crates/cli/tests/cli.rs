//! End-to-end checks of the `ponplan` binary: exit codes, file artifacts,
//! and flag/config precedence.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn ponplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ponplan"))
        .args(args)
        .output()
        .expect("spawn ponplan")
}

fn tmp(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("ponplan-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn map_emits_grid_with_vacancies_last() {
    let out = ponplan(&["map", "--n", "3", "--w", "3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,i_n,i_r,w_r");
    assert_eq!(lines.len(), 1 + 9 + 1);
    assert_eq!(*lines.last().unwrap(), ",,4,1");
}

#[test]
fn solve_writes_plan_and_signals_feasibility() {
    let plan_path = tmp("plan.kv");
    let out = ponplan(&["solve", "--w", "3", "--out", plan_path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("n_star=12"));
    assert!(stdout.contains("gain_pct=2.85714286e1"));
    let plan_text = fs::read_to_string(&plan_path).unwrap();
    assert!(plan_text.contains("f_n = "));
    fs::remove_file(&plan_path).ok();

    // An impossible budget exits non-zero.
    let out = ponplan(&["solve", "--w", "2", "--d-b-s", "1.5e-6"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("n_star=0"));
}

#[test]
fn analyze_and_simulate_round_trip() {
    let plan_path = tmp("roundtrip.kv");
    let trace_path = tmp("trace.csv");
    assert!(
        ponplan(&["solve", "--w", "4", "--out", plan_path.to_str().unwrap()])
            .status
            .success()
    );

    let out = ponplan(&["analyze", "--plan", plan_path.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("lambda,i_n,i_r,d_reg_last_s,d_nr_first_s,b_nr_last_s,verdict"));
    // 13 ONUs per wavelength on 4 wavelengths at the defaults.
    assert_eq!(stdout.lines().count(), 1 + 52);
    assert!(stdout.lines().skip(1).all(|l| l.ends_with(",ok")));
    assert!(String::from_utf8(out.stderr).unwrap().contains("FEASIBLE"));

    let out = ponplan(&[
        "simulate",
        "--plan",
        plan_path.to_str().unwrap(),
        "--cycles",
        "2",
        "--trace",
        trace_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("end_queues_zero=true"));
    let trace = fs::read_to_string(&trace_path).unwrap();
    assert!(trace.starts_with(
        "t_start_s,wavelength,lambda,i_n,cycle_type,frames_served,queue_after_frames,max_delay_s"
    ));
    assert!(trace.lines().nth(1).unwrap().contains(",reg,"));
    fs::remove_file(&plan_path).ok();
    fs::remove_file(&trace_path).ok();
}

#[test]
fn config_file_applies_and_flags_override_it() {
    let config_path = tmp("config.kv");
    fs::write(
        &config_path,
        "# scaled profile\nr_e_bps = 1e9\nr_c_bps = 200e6\nd_b_s = 50e-6\nt_reg_s = 20e-6\nt_gap_s = 1e-3\n",
    )
    .unwrap();
    let out = ponplan(&[
        "solve",
        "--w",
        "2",
        "--config",
        config_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(
        stdout.contains("n_star=4"),
        "scaled profile supports 4: {stdout}"
    );

    // A flag overrides the same key from the file: an impossible budget.
    let out = ponplan(&[
        "solve",
        "--w",
        "2",
        "--config",
        config_path.to_str().unwrap(),
        "--d-b-s",
        "1e-6",
    ]);
    assert!(!out.status.success());
    fs::remove_file(&config_path).ok();

    let out = ponplan(&["solve", "--w", "2", "--config", "/nonexistent/cfg.kv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_formats_and_baseline_mode() {
    let out = ponplan(&[
        "sweep",
        "--w-min",
        "2",
        "--w-max",
        "3",
        "--format",
        "json-lines",
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().all(|l| l.starts_with("{\"w\":")));

    let out = ponplan(&["solve", "--w", "5", "--baseline"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("n_baseline=14"));
    assert!(stdout.contains("total_baseline=56"));
    assert!(!stdout.contains("n_star="));
}

#[test]
fn miqp_export_writes_model_file() {
    let model_path = tmp("model.lp");
    let out = ponplan(&[
        "solve",
        "--w",
        "3",
        "--export-miqp",
        model_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let model = fs::read_to_string(&model_path).unwrap();
    assert!(model.contains("Subject To"));
    assert!(model.contains("Binary"));
    assert!(model.contains("window:"));
    fs::remove_file(&model_path).ok();
}

#[test]
fn default_sweep_matches_golden_file() {
    let out = ponplan(&["sweep", "--w-min", "2", "--w-max", "8"]);
    assert!(out.status.success());
    let golden = include_bytes!("data/default_sweep.csv");
    assert_eq!(
        out.stdout, golden,
        "default sweep drifted from frozen output"
    );
}

#[test]
fn verify_simulate_flag_reports_on_solve() {
    let out = ponplan(&["solve", "--w", "3", "--verify", "simulate"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("verify_simulate=true"));
    assert!(stdout.contains("sim_max_delay_s="));
}
