//! The `lambek` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn lambek(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambek"))
        .args(args)
        .env_remove("LAMBEK_SPIN_TOL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("structured output is JSON")
}

const PHRASE: [&str; 5] = ["man", "die", "de", "hond", "bijt"];

fn interpret(extra: &[&str]) -> Output {
    let mut args = vec!["interpret"];
    args.extend(PHRASE);
    args.extend(["--goal", "n", "--format", "structured"]);
    args.extend(extra);
    lambek(&args)
}

fn spin(reading: &Value) -> Vec<f64> {
    reading["spin"]["matrix"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|row| {
            row.as_array()
                .unwrap()
                .iter()
                .map(|c| c[0].as_f64().unwrap())
        })
        .collect()
}

#[test]
fn relative_clause_readings() {
    let out = interpret(&["--budget", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let readings = report["readings"].as_array().unwrap();
    assert_eq!(readings.len(), 2);
    assert_eq!(spin(&readings[0]), vec![0.0, 0.0, 0.0, 1.0]);
    assert_eq!(spin(&readings[1]), vec![1.0, 0.0, 0.0, 0.0]);
    assert_eq!(report["readings_distinguished"], Value::Bool(true));
}

#[test]
fn budget_zero_gives_the_subject_reading() {
    let report = json(&interpret(&["--budget", "0"]));
    let readings = report["readings"].as_array().unwrap();
    assert_eq!(readings.len(), 1);
    assert_eq!(readings[0]["comm_count"], 0);
}

#[test]
fn explicit_sum_and_weights() {
    let report = json(&interpret(&["--explicit-sum", "--weights", "1,3"]));
    assert_eq!(report["mode"], "ExplicitSum");
    assert_eq!(report["readings"][1]["weight"], 0.75);
}

#[test]
fn single_word() {
    let out = lambek(&["interpret", "man", "--goal", "n"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("readings: 1"));
}

#[test]
fn exit_codes() {
    assert_eq!(
        lambek(&["interpret", "man", "de", "--goal", "n"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        lambek(&["interpret", "kat", "--goal", "n"]).status.code(),
        Some(1)
    );
    assert_eq!(
        lambek(&["interpret", "man", "--goal", "n", "--budget", "5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(lambek(&["interpret", "man"]).status.code(), Some(1));
    assert_eq!(
        lambek(&["prove", "de", "hond", "--goal", "np"])
            .status
            .code(),
        Some(0)
    );
    assert_eq!(lambek(&["--help"]).status.code(), Some(0));
}

#[test]
fn spin_tolerance_from_environment() {
    let mut args = vec!["interpret"];
    args.extend(PHRASE);
    args.extend(["--goal", "n", "--format", "structured"]);
    let out = Command::new(env!("CARGO_BIN_EXE_lambek"))
        .args(&args)
        .env("LAMBEK_SPIN_TOL", "0.25")
        .output()
        .unwrap();
    assert_eq!(json(&out)["spin_tolerance"], 0.25);
    let bad = Command::new(env!("CARGO_BIN_EXE_lambek"))
        .args(&args)
        .env("LAMBEK_SPIN_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn brackets_flag() {
    let report = json(&interpret(&[
        "--brackets",
        "(man, ((die, (de, hond)), bijt))",
    ]));
    assert!(report["readings"].as_array().unwrap().is_empty());
}

#[test]
fn parse_echoes_type_and_spaces() {
    let out = lambek(&["parse", r"(n\n)/(<>[]np\s)", "--format", "structured"]);
    let v = json(&out);
    assert_eq!(v["unicode"], r"(n\n)/(◇□np\s)");
    assert_eq!(v["carrier"], "[N*, N, S*, N]");
    assert_eq!(v["carrier_dimension"], 16);
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn check_and_expand_round_trip() {
    let mut args = vec!["prove"];
    args.extend(PHRASE);
    args.extend(["--goal", "n", "--format", "structured"]);
    let proofs = json(&lambek(&args));
    let text_path = tmp("object.txt");
    let json_path = tmp("object.json");
    let d = &proofs["derivations"][1];
    std::fs::write(&text_path, d["derivation"].as_str().unwrap()).unwrap();
    std::fs::write(&json_path, d["derivation_tree"].to_string()).unwrap();
    for p in [&text_path, &json_path] {
        let out = lambek(&["check", p.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stdout)
        );
    }
    let expanded = lambek(&["expand", text_path.to_str().unwrap()]);
    assert_eq!(expanded.status.code(), Some(0));
    let text = String::from_utf8(expanded.stdout).unwrap();
    assert!(text.contains("Comm<>") && !text.contains("XLeft"));
    let expanded_path = tmp("object-expanded.txt");
    std::fs::write(&expanded_path, &text).unwrap();
    assert_eq!(
        lambek(&["check", expanded_path.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );

    let broken = d["derivation"]
        .as_str()
        .unwrap()
        .replace("hond:n |- n", "hond:n |- np");
    let broken_path = tmp("broken.txt");
    std::fs::write(&broken_path, broken).unwrap();
    let out = lambek(&["check", broken_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("invalid"));
}

#[test]
fn custom_lexicon() {
    let path = tmp("tiny.lex");
    std::fs::write(
        &path,
        "[space]\ndim_n = 3\ndim_s = 2\nspin_levels = 2\n\n[words.john]\ntype = \"np\"\nspatial = \"random(1)\"\nspin = \"mixed\"\n\n[words.sleeps]\ntype = 'np\\s'\nspatial = \"random(1)\"\nspin = \"mixed\"\n",
    )
    .unwrap();
    let out = lambek(&[
        "interpret",
        "john",
        "sleeps",
        "--goal",
        "s",
        "--lexicon",
        path.to_str().unwrap(),
        "--format",
        "structured",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&out);
    assert_eq!(report["readings"][0]["spatial"]["signature"], "[S]");
    assert_eq!(report["readings"][0]["spatial"]["dimension"], 2);
}
