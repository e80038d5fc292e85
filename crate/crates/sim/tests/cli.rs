use std::path::Path;
use std::process::{Command, Output};

use collateral_core::TransactionSequence;
use collateral_sim::io::{read_results, read_trace, write_sequence_file, RESULT_COLUMNS};
use serde_json::Value;

const CONSTANT_SIX: &str = r#"{"kind":"constant","arrivalRatePerMille":1000,"valueParams":{"value":6},"horizon":5}"#;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collateral-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_prints_results_csv() {
    let out = stdout(&cli(&[
        "simulate",
        "--policy",
        "fwf",
        "--C",
        "20",
        "--k",
        "2",
        "--T",
        "6",
        "--F",
        "1",
        "--workload",
        CONSTANT_SIX,
    ]));
    let rows = read_results(out.as_bytes()).unwrap();
    assert_eq!(out.lines().next().unwrap(), RESULT_COLUMNS.join(","));
    assert_eq!((rows[0].settled_value, rows[0].flush_count), (18, 2));
    assert_eq!(rows[0].opt_value, None);
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |tag: &str| {
        let csv = dir.path().join(format!("{tag}.csv"));
        let trace = dir.path().join(format!("{tag}.ndjson"));
        stdout(&cli(&[
            "simulate",
            "--policy",
            "rand2",
            "--C",
            "10",
            "--T",
            "10",
            "--F",
            "2",
            "--seed",
            "7",
            "--workload",
            r#"{"kind":"poisson-uniform","arrivalRatePerMille":600,"horizon":60,"seed":3}"#,
            "--csv",
            path(&csv),
            "--trace",
            path(&trace),
        ]));
        (std::fs::read(csv).unwrap(), std::fs::read(trace).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    assert!(!read_trace(a.1.as_slice()).unwrap().is_empty());
}

#[test]
fn repetitions_write_suffixed_traces() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("run.ndjson");
    let out = stdout(&cli(&[
        "simulate",
        "--policy",
        "fa",
        "--C",
        "20",
        "--k",
        "2",
        "--T",
        "6",
        "--F",
        "1",
        "--repetitions",
        "3",
        "--workload",
        r#"{"kind":"poisson-uniform","arrivalRatePerMille":500,"horizon":30}"#,
        "--trace",
        path(&trace),
    ]));
    assert_eq!(read_results(out.as_bytes()).unwrap().len(), 3);
    for rep in 0..3 {
        assert!(dir.path().join(format!("run-{rep}.ndjson")).is_file());
    }
}

#[test]
fn sequence_file_and_config_agree() {
    let dir = tempfile::tempdir().unwrap();
    let seq_path = dir.path().join("seq.csv");
    let seq = TransactionSequence::from_slots(&[Some(6), Some(6), None, Some(6), Some(2), Some(6), None]).unwrap();
    write_sequence_file(&seq_path, &seq).unwrap();

    let direct = stdout(&cli(&[
        "ratio",
        "--policy",
        "fa",
        "--C",
        "20",
        "--k",
        "2",
        "--T",
        "6",
        "--F",
        "1",
        "--seq",
        path(&seq_path),
    ]));

    let config = dir.path().join("config.json");
    let json = serde_json::json!({
        "params": {"C": 20, "k": 2, "T": 6, "F": 1},
        "policy": "fa",
        "workload": {"sequence": seq_path},
        "oracle": "brute-general",
    });
    std::fs::write(&config, json.to_string()).unwrap();
    let from_config = stdout(&cli(&["ratio", "--config", path(&config)]));
    assert_eq!(direct, from_config);
    let row = &read_results(direct.as_bytes()).unwrap()[0];
    assert_eq!(row.n_tx, 5);
    assert_eq!(row.bound_ok, Some(true));
}

#[test]
fn ratio_on_constant_six() {
    let out = stdout(&cli(&[
        "ratio",
        "--policy",
        "fwf",
        "--C",
        "20",
        "--k",
        "2",
        "--T",
        "6",
        "--F",
        "1",
        "--workload",
        CONSTANT_SIX,
        "--oracle",
        "brute-general",
    ]));
    let row = &read_results(out.as_bytes()).unwrap()[0];
    assert_eq!(row.opt_value, Some(30));
    assert_eq!(row.ratio_value.as_deref(), Some("5/3"));
    assert_eq!(row.bound_ok, Some(true));
}

#[test]
fn utility_ratio_with_fractional_tau() {
    let out = stdout(&cli(&[
        "ratio",
        "--policy",
        "eta",
        "--C",
        "20",
        "--T",
        "6",
        "--F",
        "1",
        "--eta-ppm",
        "500000",
        "--p-ppm",
        "100000",
        "--tau",
        "1",
        "--tau-den",
        "2",
        "--workload",
        r#"{"kind":"constant","arrivalRatePerMille":1000,"valueParams":{"value":6},"horizon":4}"#,
        "--oracle",
        "brute-utility",
    ]));
    let row = &read_results(out.as_bytes()).unwrap()[0];
    assert_eq!(row.tau, "1/2");
    assert_eq!((row.utility_num, row.utility_den), (9, 10));
    assert_eq!((row.opt_utility_num, row.opt_utility_den), (Some(7), Some(5)));
    assert_eq!(row.ratio_utility.as_deref(), Some("14/9"));
}

#[test]
fn oracle_budget_suggests_window_bound() {
    let out = cli(&[
        "ratio",
        "--policy",
        "fa",
        "--C",
        "20",
        "--k",
        "2",
        "--T",
        "6",
        "--F",
        "1",
        "--workload",
        r#"{"kind":"constant","arrivalRatePerMille":1000,"valueParams":{"value":6},"horizon":30}"#,
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("window-bound"));

    let ok = stdout(&cli(&[
        "ratio",
        "--policy",
        "fa",
        "--C",
        "20",
        "--k",
        "2",
        "--T",
        "6",
        "--F",
        "1",
        "--oracle",
        "window-bound",
        "--workload",
        r#"{"kind":"constant","arrivalRatePerMille":1000,"valueParams":{"value":6},"horizon":30}"#,
    ]));
    assert_eq!(read_results(ok.as_bytes()).unwrap()[0].opt_value, Some(12 * 15));
}

#[test]
fn thm3_adversary_forces_ratio_ten() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("adv.csv");
    let out = stdout(&cli(&[
        "adversary",
        "--type",
        "thm3",
        "--target",
        "fwf",
        "--C",
        "10",
        "--T",
        "10",
        "--F",
        "2",
        "--epsilon",
        "1",
        "--rounds",
        "5",
        "--save-seq",
        path(&seq),
    ]));
    let row = &read_results(out.as_bytes()).unwrap()[0];
    assert_eq!(row.ratio_value.as_deref(), Some("10"));
    assert!(std::fs::read_to_string(seq).unwrap().starts_with("slot,value\n"));
}

#[test]
fn exhaust_reports_clean_space() {
    let out = stdout(&cli(&[
        "exhaust",
        "--C",
        "6",
        "--k",
        "2",
        "--T",
        "3",
        "--F",
        "1",
        "--max-len",
        "4",
        "--values",
        "1,2,3",
    ]));
    assert!(out.contains("0 counterexamples, 0 invariant violations"), "{out}");
    let over = cli(&[
        "exhaust",
        "--C",
        "6",
        "--k",
        "2",
        "--T",
        "3",
        "--F",
        "1",
        "--max-len",
        "9",
        "--values",
        "1,2,3",
    ]);
    assert!(!over.status.success());
}

#[test]
fn formulas_json() {
    let v: Value = serde_json::from_str(&stdout(&cli(&["formulas", "--C", "12", "--T", "3", "--k", "2"]))).unwrap();
    assert!((v["fwf_ratio"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert!((v["fa_ratio"].as_f64().unwrap() - 3.0).abs() < 1e-12);
    assert_eq!(v["ftwf_ratio"].as_f64(), Some(3.0));

    let v: Value = serde_json::from_str(&stdout(&cli(&["formulas", "--C", "16", "--T", "2"]))).unwrap();
    assert_eq!(v["k_star"]["integer"], 2);
    assert_eq!(v["fwf_ratio"], Value::Null);

    let v: Value = serde_json::from_str(&stdout(&cli(&["formulas", "--C", "10", "--T", "10", "--k", "1"]))).unwrap();
    assert_eq!(v["fa_ratio"], "unbounded");
}

#[test]
fn sweep_marks_formula_optimum() {
    let out = cli(&[
        "sweep",
        "--policy",
        "fwf",
        "--C",
        "16",
        "--T",
        "2",
        "--F",
        "1",
        "--workload",
        r#"{"kind":"poisson-uniform","arrivalRatePerMille":700,"horizon":20}"#,
        "--param",
        "k",
        "--from",
        "1",
        "--to",
        "4",
        "--step",
        "1",
    ]);
    let text = stdout(&out);
    let marked: Vec<&str> = text.lines().filter(|l| l.contains("formula")).collect();
    assert_eq!(marked.len(), 1);
    assert!(marked[0].starts_with("2,"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped k = 3"));
}

#[test]
fn rejects_bad_input() {
    assert!(!cli(&[
        "simulate",
        "--policy",
        "ftwf",
        "--C",
        "30",
        "--k",
        "3",
        "--T",
        "6",
        "--F",
        "1",
        "--workload",
        CONSTANT_SIX
    ])
    .status
    .success());
    assert!(!cli(&[
        "simulate",
        "--policy",
        "fa",
        "--C",
        "20",
        "--T",
        "6",
        "--F",
        "1",
        "--seq",
        "/nonexistent.csv"
    ])
    .status
    .success());
    assert!(!cli(&[
        "ratio",
        "--policy",
        "fa",
        "--C",
        "20",
        "--T",
        "6",
        "--F",
        "1",
        "--workload",
        CONSTANT_SIX,
        "--oracle",
        "nope"
    ])
    .status
    .success());
}
