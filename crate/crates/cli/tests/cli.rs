use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use toptrace_core::harness::{csv_header, Report};

fn toptrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toptrace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = toptrace(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn gen_writes_the_text_format() {
    let out = toptrace(&["gen", "--n", "3", "--d", "5", "--seed", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "3 5");
    assert_eq!(lines.len(), 4);
    for line in &lines[1..] {
        let tokens: Vec<&str> = line.split(' ').collect();
        assert_eq!(tokens.len(), 5);
        assert!(tokens.iter().all(|t| *t == "+1" || *t == "-1"));
    }
}

#[test]
fn gen_to_file_feeds_topk() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    let out = toptrace(&[
        "gen",
        "--n",
        "30",
        "--d",
        "200",
        "--seed",
        "9",
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let from_file = json_out(&["topk", "--input", data.to_str().unwrap(), "--k", "7"]);
    let generated = json_out(&["topk", "--n", "30", "--d", "200", "--seed", "9", "--k", "7"]);
    assert_eq!(from_file, generated);
    assert_eq!(from_file["selected"].as_array().unwrap().len(), 7);
}

#[test]
fn topk_on_a_hand_built_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.txt");
    // column sums (2, -2, 0, 2)
    write(&data, "2 4\n+1 -1 +1 +1\n+1 -1 -1 +1\n");
    let v = json_out(&["topk", "--input", data.to_str().unwrap(), "--k", "2"]);
    assert_eq!(v["selected"], serde_json::json!([0, 3]));
    assert_eq!(v["q_k"], serde_json::json!({"num": 1, "den": 1}));
}

#[test]
fn release_mechanisms() {
    let base = ["release", "--n", "24", "--d", "3000", "--k", "10", "--seed", "1"];
    let exact = json_out(&[&base[..], &["--mech", "exact"]].concat());
    assert_eq!(exact["error"], 0.0);
    let noiseless = json_out(&[&base[..], &["--mech", "expmech", "--epsilon", "noiseless"]].concat());
    assert_eq!(noiseless["t_hat"], exact["t_hat"]);
    let noisy = json_out(&[&base[..], &["--mech", "expmech", "--epsilon", "0.5"]].concat());
    assert_eq!(noisy["t_hat"]["selected"].as_array().unwrap().len(), 10);
    let adv = json_out(
        &[
            &base[..],
            &["--mech", "adversarial", "--alpha", "0.25", "--target-row", "0"],
        ]
        .concat(),
    );
    assert!(adv["error"].as_f64().unwrap() <= 0.25);
}

#[test]
fn attack_reports_every_row() {
    let v = json_out(&[
        "attack", "--n", "24", "--d", "65536", "--k", "100", "--rho", "0.05", "--seed", "2",
    ]);
    assert_eq!(v["report"]["decisions"].as_array().unwrap().len(), 24);
    assert!((v["threshold"].as_f64().unwrap() - 24.4775).abs() < 1e-4);
    assert!(v["traced_count"].as_u64().unwrap() <= 24);
}

#[test]
fn regime_and_bounds() {
    let r = json_out(&["regime", "--n", "24", "--d", "65536", "--k", "100", "--rho", "0.05"]);
    assert_eq!(r["satisfied"], true);
    assert!((r["lhs"].as_f64().unwrap() - 579.2).abs() < 0.01);
    let noisy = json_out(&[
        "regime", "--n", "24", "--d", "65536", "--k", "100", "--rho", "0.01", "--noisy",
    ]);
    assert_eq!(noisy["constants_exceed_unit"], true);

    let w = json_out(&["witness", "--rho-sound", "0.25", "--untraced", "0.25", "--delta", "0"]);
    assert!((w["epsilon_max"]["finite"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
    let none = json_out(&["witness", "--rho-sound", "0.5", "--untraced", "0.5"]);
    assert!(none["epsilon_max"].is_null());

    let h = json_out(&["bounds", "--kind", "hoeffding", "--nu", "0.5", "--n", "8"]);
    assert!((h["tail"].as_f64().unwrap() - (-1.0f64).exp()).abs() < 1e-15);
    let c = json_out(&["bounds", "--kind", "chernoff", "--nu", "2", "--mu", "1"]);
    assert!(c["lower_tail"].is_null());
    let a = json_out(&["bounds", "--kind", "anticonc", "--beta", "1", "--nu", "0.5", "--n", "4"]);
    assert_eq!(a["validity"], "unverified");
}

#[test]
fn experiment_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    write(
        &config,
        r#"{"kind":"soundness","n":2,"d":4,"k":1,"rho":0.36787944117144233,"trials":3,"master_seed":1}"#,
    );
    let out = dir.path().join("r.csv");
    let v = json_out(&[
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(v["summary"]["trials"], 3);
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], csv_header());
    assert_eq!(lines.len(), 4);
    assert!(dir.path().join("r.summary.json").exists());

    let json = dir.path().join("r.json");
    json_out(&[
        "experiment",
        "--config",
        config.to_str().unwrap(),
        "--out",
        json.to_str().unwrap(),
    ]);
    let report = Report::load(&json).unwrap();
    assert_eq!(report.results.len(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    write(
        &bad,
        r#"{"kind":"soundness","n":2,"d":4,"k":1,"rho":0.3,"trials":0,"master_seed":1}"#,
    );
    let out = dir.path().join("r.csv");
    let code = |args: &[&str]| toptrace(args).status.code();

    assert_eq!(
        code(&[
            "experiment",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        Some(1)
    );
    write(&bad, "{ not json");
    assert_eq!(
        code(&[
            "experiment",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        Some(1)
    );
    let missing = dir.path().join("missing.json");
    assert_eq!(
        code(&["experiment", "--config", missing.to_str().unwrap(), "--out", "r.csv"]),
        Some(2)
    );

    let good = dir.path().join("good.json");
    write(
        &good,
        r#"{"kind":"soundness","n":2,"d":4,"k":1,"rho":0.3,"trials":2,"master_seed":1}"#,
    );
    let unwritable = dir.path().join("no/such/dir/r.csv");
    assert_eq!(
        code(&[
            "experiment",
            "--config",
            good.to_str().unwrap(),
            "--out",
            unwritable.to_str().unwrap()
        ]),
        Some(2)
    );

    assert_eq!(code(&["topk", "--n", "3", "--d", "4", "--k", "9"]), Some(1));
    assert_eq!(
        code(&["release", "--n", "3", "--d", "4", "--k", "1", "--mech", "expmech"]),
        Some(1)
    );
    assert_eq!(
        code(&[
            "release",
            "--n",
            "3",
            "--d",
            "4",
            "--k",
            "1",
            "--mech",
            "expmech",
            "--epsilon",
            "-1"
        ]),
        Some(1)
    );
    assert_eq!(
        code(&["regime", "--n", "1", "--d", "4", "--k", "2", "--rho", "0.1"]),
        Some(1)
    );
    assert_eq!(code(&["bogus"]), Some(1));
    assert_eq!(
        code(&["topk", "--input", missing.to_str().unwrap(), "--k", "1"]),
        Some(2)
    );
    assert_eq!(code(&["--help"]), Some(0));
}
