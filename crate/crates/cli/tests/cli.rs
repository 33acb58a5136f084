use std::path::Path;
use std::process::Command;

use grtl_cli::run_with_io;
use grtl_core::tokenize::import_dataset;
use grtl_core::{EulerianInstance, Format};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("grtl").chain(args.iter().copied());
    let code = run_with_io(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn power_suite_reports_twenty_passing_rows() {
    let r = run(&[
        "verify",
        "--construction",
        "power",
        "--n",
        "32",
        "--L",
        "3",
        "--trials",
        "20",
        "--seed",
        "7",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    let rows = report["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|row| row["pass"] == true));
    assert!(rows.iter().all(|row| row.get("millis").is_none()));
}

#[test]
fn two_cycle_reduction_is_not_eulerian() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("inst.json");
    let r = run(&[
        "reduce",
        "--n",
        "18",
        "--parts",
        "2",
        "--seed",
        "1",
        "--out",
        path_str(&inst),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let parsed: EulerianInstance =
        serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    assert_eq!(parsed.n, 6);
    let r = run(&[
        "verify",
        "--construction",
        "eulerian",
        "--in",
        path_str(&inst),
    ]);
    assert_eq!(r.code, 1);
    let report: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report["rows"][0]["eulerian"], false);
    assert_eq!(report["rows"][0]["census"].as_array().unwrap().len(), 3);

    run(&[
        "reduce",
        "--n",
        "18",
        "--parts",
        "1",
        "--seed",
        "1",
        "--out",
        path_str(&inst),
    ]);
    assert_eq!(
        run(&[
            "verify",
            "--construction",
            "eulerian",
            "--in",
            path_str(&inst)
        ])
        .code,
        0
    );
}

#[test]
fn laplacian_corpus_has_one_line_per_graph() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.jsonl");
    let r = run(&[
        "gen",
        "--family",
        "er",
        "--n",
        "50",
        "--p",
        "0.1",
        "--count",
        "10",
        "--tokenizer",
        "laplacian",
        "--m",
        "8",
        "--seed",
        "3",
        "--out",
        path_str(&ds),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(std::fs::read_to_string(&ds).unwrap().lines().count(), 10);
    let items = import_dataset(&ds, Format::Jsonl).unwrap();
    assert!(items
        .iter()
        .all(|t| t.tokens.dim() == 8 && t.tokens.count() == 51));
}

#[test]
fn seed_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("ds.jsonl");
    let bin = env!("CARGO_BIN_EXE_grtl");
    let args = [
        "gen",
        "--family",
        "er",
        "--n",
        "50",
        "--p",
        "0.1",
        "--count",
        "10",
        "--tokenizer",
        "laplacian",
        "--m",
        "8",
        "--out",
        path_str(&ds),
    ];
    let status = Command::new(bin)
        .args(args)
        .env("GRTL_SEED", "3")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(&ds).unwrap().lines().count(), 10);

    let missing = dir.path().join("missing.jsonl");
    let out = Command::new(bin)
        .args(&args[..args.len() - 1])
        .arg(&missing)
        .env_remove("GRTL_SEED")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("GRTL_SEED"));
    assert!(!missing.exists());

    let bad = Command::new(bin)
        .args(["reduce", "--n", "18"])
        .env("GRTL_SEED", "x")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two_with_usage_on_stderr() {
    let r = run(&["frobnicate"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("Usage"));
    let r = run(&["verify", "--construction", "power", "--bogus"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("Usage"));
    assert_eq!(
        run(&["verify", "--construction", "hamiltonian", "--seed", "1"]).code,
        2
    );
}

#[test]
fn help_and_version_exit_zero() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("verify"));
    let r = run(&["sweep", "--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("success_rate"));
    assert!(run(&["report", "--help"]).stdout.contains("max_abs_error"));
    assert!(run(&["gen", "--help"]).stdout.contains("graph_id"));
    assert_eq!(run(&["--version"]).code, 0);
}

#[test]
fn config_errors_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cases: [&[&str]; 6] = [
        &[
            "verify",
            "--construction",
            "one-vs-two",
            "--n",
            "7",
            "--seed",
            "1",
        ],
        &[
            "verify",
            "--construction",
            "power",
            "--n",
            "8",
            "--p",
            "1.5",
            "--seed",
            "1",
        ],
        &[
            "verify",
            "--construction",
            "power",
            "--n",
            "8",
            "--mode",
            "fast",
            "--seed",
            "1",
        ],
        &[
            "verify",
            "--construction",
            "subgraph",
            "--n",
            "20",
            "--pattern",
            "clique",
            "--k",
            "9",
            "--seed",
            "1",
        ],
        &[
            "verify",
            "--construction",
            "eulerian",
            "--n",
            "20",
            "--seed",
            "1",
        ],
        &[
            "verify",
            "--construction",
            "power",
            "--n",
            "8",
            "--trials",
            "0",
            "--seed",
            "1",
        ],
    ];
    for args in cases {
        let mut a = args.to_vec();
        a.extend(["--out", path_str(&out)]);
        let r = run(&a);
        assert_eq!(r.code, 2, "{args:?}");
        assert!(!r.stderr.is_empty());
        assert!(!out.exists(), "{args:?} wrote a report");
    }
    let r = run(&[
        "gen",
        "--family",
        "er",
        "--n",
        "10",
        "--tokenizer",
        "laplacian",
        "--seed",
        "1",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    let r = run(&["reduce", "--n", "18", "--parts", "3", "--seed", "1"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
}

#[test]
fn failing_checks_exit_one() {
    // a temperature far too low for exact recovery
    let r = run(&[
        "verify",
        "--construction",
        "power",
        "--n",
        "12",
        "--temperature",
        "1",
        "--seed",
        "2",
    ]);
    assert_eq!(r.code, 1);
    let report: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report["passed"], 0);
}

#[test]
fn every_construction_verifies() {
    let cases: [&[&str]; 5] = [
        &[
            "verify",
            "--construction",
            "one-vs-two",
            "--n",
            "12",
            "--trials",
            "4",
        ],
        &[
            "verify",
            "--construction",
            "power",
            "--n",
            "10",
            "--L",
            "2",
            "--mode",
            "explicit",
            "--trials",
            "2",
        ],
        &[
            "verify",
            "--construction",
            "sparse2cycle",
            "--n",
            "48",
            "--d",
            "3",
            "--alpha",
            "8",
            "--trials",
            "2",
        ],
        &[
            "verify",
            "--construction",
            "subgraph",
            "--n",
            "20",
            "--pattern",
            "cycle",
            "--k",
            "4",
            "--p",
            "0.3",
            "--trials",
            "2",
        ],
        &[
            "verify",
            "--construction",
            "eulerian",
            "--n",
            "32",
            "--trials",
            "4",
        ],
    ];
    for args in cases {
        let mut a = args.to_vec();
        a.extend(["--seed", "11"]);
        let r = run(&a);
        assert_eq!(r.code, 0, "{args:?}: {}", r.stderr);
    }
}

#[test]
fn timings_are_opt_in() {
    let r = run(&[
        "verify",
        "--construction",
        "one-vs-two",
        "--n",
        "8",
        "--seed",
        "1",
        "--timings",
    ]);
    let report: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert!(report["rows"][0]["millis"].is_number());
}

#[test]
fn verify_accepts_a_graph_file() {
    let dir = tempfile::tempdir().unwrap();
    let g = grtl_core::gen_cycles(10, 2, 5).unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, serde_json::to_string(&g).unwrap()).unwrap();
    let r = run(&[
        "verify",
        "--construction",
        "one-vs-two",
        "--in",
        path_str(&path),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(report["rows"][0]["transformer"][0], 0.0);

    // the 2-cycle embedding is random, so a given graph still needs a seed
    let d = grtl_core::graph_from_edges(6, &[(0, 1), (1, 0), (2, 3)], true).unwrap();
    std::fs::write(&path, serde_json::to_string(&d).unwrap()).unwrap();
    let args = [
        "verify",
        "--construction",
        "sparse2cycle",
        "--d",
        "2",
        "--alpha",
        "8",
        "--in",
        path_str(&path),
    ];
    assert_eq!(run(&args).code, 2);
    let mut seeded = args.to_vec();
    seeded.extend(["--seed", "1"]);
    let r = run(&seeded);
    assert_eq!(r.code, 0, "{}", r.stderr);
}

#[test]
fn sweeps_emit_documented_columns() {
    let header =
        "param,value,construction,n,trials,successes,success_rate,max_abs_error,width,bound,note";
    let r = run(&["sweep", "--param", "width-accounting", "--values", "16,30"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], header);
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(lines
        .iter()
        .any(|l| l.starts_with("width-accounting,30.0,sparse_two_cycle,30,1,1,1.0,,220,220")));

    let r = run(&[
        "sweep",
        "--param",
        "temperature",
        "--construction",
        "power",
        "--n",
        "12",
        "--values",
        "1,30",
        "--trials",
        "3",
        "--seed",
        "4",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("temperature,1.0,power,12,3,0,0.0,"));
    assert!(lines[2].starts_with("temperature,30.0,power,12,3,3,1.0,"));

    let r = run(&[
        "sweep",
        "--param",
        "rip-alpha",
        "--n",
        "64",
        "--d",
        "4",
        "--values",
        "2,16",
        "--trials",
        "20",
        "--seed",
        "4",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().count(), 3);
    assert_eq!(
        run(&["sweep", "--param", "rip-alpha", "--values", "2"]).code,
        2
    );
}

#[test]
fn report_merges_rows_and_draws_a_chart() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let csv = dir.path().join("merged.csv");
    let svg = dir.path().join("chart.svg");
    let args_a = [
        "verify",
        "--construction",
        "one-vs-two",
        "--n",
        "8",
        "--trials",
        "3",
        "--seed",
        "1",
        "--out",
        path_str(&a),
    ];
    assert_eq!(run(&args_a).code, 0);
    let args_b = [
        "verify",
        "--construction",
        "eulerian",
        "--n",
        "18",
        "--trials",
        "2",
        "--seed",
        "1",
        "--out",
        path_str(&b),
    ];
    assert_eq!(run(&args_b).code, 0);
    let r = run(&[
        "report",
        "--in",
        path_str(&a),
        path_str(&b),
        "--out",
        path_str(&csv),
        "--svg",
        path_str(&svg),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 + 2);
    assert!(text.starts_with(
        "source,construction,n,edges,pass,max_abs_error,temperature,width,attempts,error\n"
    ));
    let chart = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(chart.matches("<rect").count(), 2);

    let failing = dir.path().join("f.json");
    run(&[
        "verify",
        "--construction",
        "power",
        "--n",
        "12",
        "--temperature",
        "1",
        "--seed",
        "2",
        "--out",
        path_str(&failing),
    ]);
    assert_eq!(
        run(&["report", "--in", path_str(&a), path_str(&failing)]).code,
        1
    );
    assert_eq!(
        run(&["report", "--in", path_str(&dir.path().join("nope.json"))]).code,
        2
    );
}

#[test]
fn gen_formats_and_tokenizers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ds.csv");
    let r = run(&[
        "gen",
        "--family",
        "er,rgg,ba,sbm,cycles",
        "--n",
        "12",
        "--count",
        "10",
        "--label",
        "connected",
        "--index",
        "--seed",
        "9",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let items = import_dataset(&csv, Format::Csv).unwrap();
    assert_eq!(items.len(), 10);
    assert!(items
        .iter()
        .all(|t| t.label == Some(1.0) && t.tokens.dim() == 13));

    let r = run(&[
        "gen",
        "--family",
        "cycles",
        "--n",
        "12",
        "--count",
        "4",
        "--tokenizer",
        "edgelist",
        "--seed",
        "9",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().count(), 4);
}
