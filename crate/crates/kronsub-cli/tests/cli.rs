//! End-to-end tests for the kronsub binary: reference outputs, file-format
//! round trips, manifest replay, and exit-code contracts. Golden files under
//! tests/golden/ pin CSV columns and JSON keys; they were generated with
//! SOURCE_DATE_EPOCH=1700000000 and the exact argument lists used here.

use std::path::Path;
use std::process::{Command, Output};

use kronsub::dataio::load_tensor_file;
use kronsub::ksld2::{load_model, save_model, KSLD2Config, LearnedModel};
use kronsub::model::KSClass;
use nalgebra::DMatrix;

const EPOCH: &str = "1700000000";

fn kronsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kronsub"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", EPOCH)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str]) -> Output {
    let out = kronsub(args);
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).expect("file is JSON")
}

/// Splits a table file into its manifest comment and the remaining bytes.
fn split_manifest(text: &str) -> (serde_json::Value, String) {
    let (first, rest) = text.split_once('\n').expect("nonempty table");
    let manifest = first
        .strip_prefix("# manifest: ")
        .expect("leading manifest comment");
    (serde_json::from_str(manifest).expect("manifest is JSON"), rest.to_string())
}

#[test]
fn geometry_reports_reference_dimensions() {
    let out = run_ok(&["geometry", "--n1", "3", "--n2", "3", "--m1", "4", "--m2", "4"]);
    let doc = stdout_json(&out);
    let r = &doc["result"];
    assert_eq!(r["d_ks"], 5);
    assert_eq!(r["d_std"], 7);
    assert_eq!(r["gap"], 2);
    assert_eq!(r["region"], "R4b");
    assert_eq!(r["pair_rank"], 14);
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        include_str!("golden/geometry.json")
    );
}

#[test]
fn capacity_output_pins_schema() {
    let out = run_ok(&[
        "capacity", "--kappa1", "0.5", "--kappa2", "0.5", "--nu1", "0.25", "--nu2", "0.25",
        "--sigma2", "0.01",
    ]);
    let doc = stdout_json(&out);
    for key in ["upper", "lower", "prelog_upper", "prelog_lower"] {
        assert!(doc["result"][key].is_number(), "missing key {key}");
    }
    assert_eq!(
        String::from_utf8_lossy(&out.stdout),
        include_str!("golden/capacity.json")
    );
}

const SIMULATE_ARGS: &[&str] = &[
    "simulate", "--m1", "3", "--m2", "3", "--n1", "1", "--n2", "1", "--classes", "2", "--seed",
    "3", "--snr-db", "0:10:20", "--trials", "50", "--mc-seed", "9",
];

#[test]
fn simulate_tables_pin_schema() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pe.csv");
    let json = dir.path().join("pe.json");
    let mut args: Vec<&str> = SIMULATE_ARGS.to_vec();
    let csv_s = csv.to_str().unwrap().to_string();
    let json_s = json.to_str().unwrap().to_string();
    args.extend_from_slice(&["--out-csv", &csv_s, "--out-json", &json_s]);
    run_ok(&args);

    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table, include_str!("golden/simulate.csv"));
    let (manifest, rest) = split_manifest(&table);
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(rest.lines().next().unwrap(), "snr_db,pe,stderr,trials_per_class,classes");

    let doc = read_json(&json);
    assert_eq!(
        std::fs::read_to_string(&json).unwrap(),
        include_str!("golden/simulate.json")
    );
    for key in ["snr_db", "pe", "stderr", "trials_per_class", "classes", "rule"] {
        assert!(!doc["result"][key].is_null(), "missing key {key}");
    }
    assert_eq!(doc["result"]["snr_db"].as_array().unwrap().len(), 3);
}

/// Two bitwise-identical classes make the likelihoods tie exactly, so the
/// classifier always answers with the first class and half the labels are
/// wrong.
#[test]
fn identical_class_ensemble_is_a_coin_flip() {
    let dir = tempfile::tempdir().unwrap();
    let a = DMatrix::from_fn(4, 2, |i, j| f64::from(u8::from(i == j)));
    let b = a.clone();
    let class = KSClass::new(a, b).unwrap();
    let model = LearnedModel {
        dicts: vec![class.clone(), class],
        mu: 0.5,
        history: vec![1.0],
        config: KSLD2Config::new(2, 2),
    };
    let path = dir.path().join("twins.txt");
    save_model(&path, &model).unwrap();

    let out = run_ok(&[
        "simulate", "--ensemble", path.to_str().unwrap(), "--snr-db", "10", "--trials", "400",
        "--mc-seed", "4",
    ]);
    // No table requested: read pe from the summary line.
    let text = String::from_utf8_lossy(&out.stdout);
    let pe: f64 = text
        .split_whitespace()
        .last()
        .unwrap()
        .parse()
        .expect("summary ends with pe");
    assert!((pe - 0.5).abs() < 0.02, "identical classes gave pe {pe}");
}

#[test]
fn learn_then_classify_holds_out() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.kst");
    let test = dir.path().join("test.kst");
    let model = dir.path().join("model.txt");
    let json = dir.path().join("report.json");
    let common = [
        "synth", "--m1", "8", "--m2", "8", "--n1", "3", "--n2", "3", "--classes", "4", "--seed",
        "11", "--sigma2", "1e-4",
    ];
    let mut args: Vec<&str> = common.to_vec();
    args.extend_from_slice(&["--per-class", "12", "--out", train.to_str().unwrap()]);
    run_ok(&args);
    let mut args: Vec<&str> = common.to_vec();
    args.extend_from_slice(&[
        "--data-seed", "12", "--per-class", "5", "--out", test.to_str().unwrap(),
    ]);
    run_ok(&args);

    run_ok(&[
        "learn", "--data", train.to_str().unwrap(), "--n1", "3", "--n2", "3", "--out-model",
        model.to_str().unwrap(),
    ]);
    run_ok(&[
        "classify", "--model", model.to_str().unwrap(), "--data", test.to_str().unwrap(),
        "--out-json", json.to_str().unwrap(),
    ]);
    let doc = read_json(&json);
    let accuracy = doc["result"]["accuracy"].as_f64().unwrap();
    assert!(accuracy >= 0.95, "held-out accuracy {accuracy}");
    assert!(doc["result"]["mean_nre"].as_f64().unwrap() < 0.05);

    // The written artifacts parse back through the library, manifest
    // comments included.
    let loaded = load_model(&model).unwrap();
    assert_eq!(loaded.dicts.len(), 4);
    let data = load_tensor_file(&test).unwrap();
    assert_eq!(data.len(), 20);
    assert_eq!(data.shape(), (8, 8));
}

#[test]
fn history_and_prediction_tables_pin_columns() {
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.kst");
    let model = dir.path().join("model.txt");
    let hist = dir.path().join("hist.csv");
    let pred = dir.path().join("pred.csv");
    run_ok(&[
        "synth", "--m1", "4", "--m2", "4", "--n1", "2", "--n2", "2", "--classes", "2", "--seed",
        "2", "--per-class", "4", "--sigma2", "1e-3", "--out", train.to_str().unwrap(),
    ]);
    run_ok(&[
        "learn", "--data", train.to_str().unwrap(), "--n1", "2", "--n2", "2", "--max-iters",
        "5", "--out-model", model.to_str().unwrap(), "--out-history", hist.to_str().unwrap(),
    ]);
    run_ok(&[
        "classify", "--model", model.to_str().unwrap(), "--data", train.to_str().unwrap(),
        "--out-csv", pred.to_str().unwrap(),
    ]);

    // Manifests embed caller-chosen input paths, so goldens compare the
    // body after the manifest line.
    let (manifest, body) = split_manifest(&std::fs::read_to_string(&hist).unwrap());
    assert_eq!(manifest["command"], "learn");
    assert_eq!(body, include_str!("golden/learn_history.csv"));
    assert_eq!(body.lines().next().unwrap(), "sweep,objective");

    let (manifest, body) = split_manifest(&std::fs::read_to_string(&pred).unwrap());
    assert_eq!(manifest["command"], "classify");
    assert_eq!(body, include_str!("golden/classify.csv"));
    assert_eq!(body.lines().next().unwrap(), "index,label,predicted,correct,nre");
}

/// Reconstructs a command line from a manifest: sorted `--key value` pairs
/// plus a fresh output path.
fn replay_args<'a>(
    manifest: &'a serde_json::Value,
    out_flag: &'a str,
    out_path: &'a str,
) -> Vec<String> {
    let mut args = vec![manifest["command"].as_str().unwrap().to_string()];
    for (k, v) in manifest["parameters"].as_object().unwrap() {
        args.push(format!("--{k}"));
        args.push(v.as_str().unwrap().to_string());
    }
    args.push(out_flag.to_string());
    args.push(out_path.to_string());
    args
}

#[test]
fn output_manifests_replay_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let mut args: Vec<&str> = SIMULATE_ARGS.to_vec();
    let first_s = first.to_str().unwrap().to_string();
    args.extend_from_slice(&["--out-csv", &first_s]);
    run_ok(&args);

    let text = std::fs::read_to_string(&first).unwrap();
    let (manifest, _) = split_manifest(&text);
    let second = dir.path().join("second.csv");
    let replay = replay_args(&manifest, "--out-csv", second.to_str().unwrap());
    let replay_ref: Vec<&str> = replay.iter().map(String::as_str).collect();
    run_ok(&replay_ref);
    assert_eq!(text, std::fs::read_to_string(&second).unwrap());
}

#[test]
fn usage_and_runtime_failures_exit_distinctly() {
    let out = kronsub(&[
        "simulate", "--m1", "3", "--m2", "3", "--n1", "1", "--n2", "1", "--classes", "2",
        "--snr-db", "30:5:10", "--trials", "10",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("30:5:10"));

    let out = kronsub(&[
        "simulate", "--ensemble", "/tmp/nope.txt", "--m1", "3", "--snr-db", "10", "--trials",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = kronsub(&[
        "learn", "--data", "/tmp/does-not-exist.kst", "--n1", "2", "--n2", "2", "--out-model",
        "/tmp/unused-model.txt",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("does-not-exist"));

    let out = kronsub(&["geometry", "--m1", "3", "--m2", "3", "--n1", "4", "--n2", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n1"));
}

#[test]
fn synth_labels_are_class_major() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("data.kst");
    run_ok(&[
        "synth", "--m1", "3", "--m2", "2", "--n1", "2", "--n2", "1", "--classes", "3", "--seed",
        "1", "--per-class", "2", "--sigma2", "0.5", "--out", path.to_str().unwrap(),
    ]);
    let data = load_tensor_file(&path).unwrap();
    assert_eq!(data.labels(), &[0, 0, 1, 1, 2, 2]);
    assert_eq!(data.shape(), (3, 2));
    assert_eq!(data.classes(), 3);
}
