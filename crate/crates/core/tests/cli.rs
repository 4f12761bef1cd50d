use std::process::{Command, Output};

use serde_json::Value;

use spin_otto::sweep::{run_sweep, CycleBase, SweepSpec};
use spin_otto::{run_cycle, CycleConfig, PulseShape, SpinQuantumNumber};

fn spin_otto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spin-otto")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SWEEP: &[&str] = &[
    "sweep",
    "--pulse",
    "sin",
    "--pulse",
    "pow:0.5",
    "--two-i",
    "1",
    "--two-i",
    "3",
    "--tau-start",
    "1",
    "--tau-stop",
    "9",
    "--tau-points",
    "5",
];

#[test]
fn sweep_output_is_deterministic_and_independent_of_threads() {
    let parallel = stdout(&spin_otto(SWEEP));
    let again = stdout(&spin_otto(SWEEP));
    let serial = stdout(&spin_otto(&[SWEEP, &["--serial"]].concat()));
    assert_eq!(parallel, again);
    assert_eq!(parallel, serial);

    let mut reader = csv::Reader::from_reader(parallel.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header.join(","), "pulse,n,two_I,tau,W,eta,Q1,Q2,dS_E,W_fric,C,steps,converged");
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(&rows[0][0], "sin");
    assert_eq!(&rows[0][1], "");
    assert_eq!(&rows[5][2], "3");
    assert_eq!(&rows[10][1], "0.5");
    assert!(rows.iter().all(|r| &r[12] == "true"));
}

#[test]
fn csv_row_matches_library_cycle() {
    let text =
        stdout(&spin_otto(&["sweep", "--pulse", "pow:2", "--tau-start", "6", "--tau-stop", "6", "--tau-points", "1"]));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let row = reader.records().next().unwrap().unwrap();
    let r = run_cycle(&CycleConfig::reference(6.0).with_shape(PulseShape::Power(2.0))).unwrap();
    assert_eq!(row[4].parse::<f64>().unwrap(), r.net_work);
    assert_eq!(row[9].parse::<f64>().unwrap(), r.w_fric_total);
    assert_eq!(row[11].parse::<usize>().unwrap(), r.steps_used);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    let out_path = dir.path().join("sweep.csv");
    std::fs::write(
        &cfg_path,
        format!(
            r#"{{"b2": 0.1, "two_I": 2, "pulses": [{{"pow": 1}}], "tau": [2, 4], "out": {:?}}}"#,
            out_path.to_str().unwrap()
        ),
    )
    .unwrap();
    let out = spin_otto(&["sweep", "--config", cfg_path.to_str().unwrap(), "--b2", "0.05"]);
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);

    let base = CycleConfig::reference(2.0).with_spin(SpinQuantumNumber::from_two_i(2).unwrap());
    let spec = SweepSpec {
        base: CycleBase::from(&base),
        tau_grid: vec![2.0, 4.0],
        pulses: vec![PulseShape::Power(1.0)],
        spins: vec![base.spin],
        output: None,
        parallel: false,
    };
    let lib = run_sweep(&spec).unwrap();
    assert_eq!(rows[1][4].parse::<f64>().unwrap(), lib[1].w.unwrap());
}

#[test]
fn non_convergence_exits_with_code_two() {
    let out = spin_otto(&[
        "sweep",
        "--tau-start",
        "1",
        "--tau-stop",
        "2",
        "--tau-points",
        "2",
        "--initial-steps",
        "2",
        "--max-doublings",
        "1",
        "--convergence-tol",
        "1e-15",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().skip(1).all(|l| l.ends_with(",false")));
}

#[test]
fn cycle_json_uses_snake_case() {
    let v: Value = serde_json::from_str(&stdout(&spin_otto(&["cycle", "--tau", "5", "--limits"]))).unwrap();
    for key in ["w_expansion", "w_compression", "q_hot", "q_cold", "net_work", "delta_s_e", "w_fric_total", "regime"] {
        assert!(v["result"].get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["total_tau"], 5.0);
    assert!(v["sudden"]["net_work"].as_f64().unwrap() < 0.0);
    assert!(v["quasi_static"]["net_work"].as_f64().unwrap() > 0.0);
}

#[test]
fn bad_input_fails_cleanly() {
    assert_eq!(spin_otto(&["cycle"]).status.code(), Some(1));
    assert_eq!(spin_otto(&["cycle", "--tau", "1", "--t1=-2"]).status.code(), Some(1));
    assert!(!spin_otto(&["cycle", "--tau", "1", "--pulse", "square"]).status.success());
    assert!(!spin_otto(&["cycle", "--tau", "1", "--two-i", "0"]).status.success());
}

#[test]
fn bounds_flags_change_the_verdict() {
    let v: Value = serde_json::from_str(&stdout(&spin_otto(&["bounds", "--t1", "1.1"]))).unwrap();
    assert_eq!(v["positive_work"], false);
    assert!(v["w_up"].as_f64().unwrap() < 0.0);
}
