use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const SL2: &str = r#"{"datum": {"family": "A", "rank": 1, "isogeny": "sc"}, "q": 3, "param": ["1/2"],
  "census": {"family": "PGL", "n": 2, "q": 3}}"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    let path = dir.join("job.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_dlseries"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn datum_a1_validates() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), r#"{"datum": {"family": "A", "rank": 1, "isogeny": "sc"}}"#, &["datum"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["report"]["validation"], serde_json::json!([]));
    assert_eq!(r["report"]["weyl_order"], "2");
    assert_eq!(r["root_order_version"], "height-lex/1");
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn sl2_rational_series() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), SL2, &["series", "rat"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let series = r["report"]["series"].as_array().unwrap();
    assert_eq!(series.len(), 2);
    assert_eq!(series[0]["omega_fixed"].as_array().unwrap().len(), 2);
}

#[test]
fn compare_matches_census() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), SL2, &["compare"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("match: 4 = 4"));
}

#[test]
fn every_subcommand_succeeds() {
    let dir = TempDir::new().unwrap();
    for args in [&["endoscopy"][..], &["series", "geom"], &["embed"], &["census"]] {
        let out = run(dir.path(), SL2, args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(report(&out)["report"].is_object());
    }
}

#[test]
fn disconnected_torus_swap() {
    let dir = TempDir::new().unwrap();
    let config = r#"{"datum": {"torus": 2}, "q": 3, "param": ["1/2", "1/2"],
      "pi0": {"table": [[0, 1], [1, 0]], "generators": [{"element": 1, "matrix": [[0, 1], [1, 0]]}]}}"#;
    let out = run(dir.path(), config, &["series", "geom"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(report(&out)["report"]["predicted_irreducibles"].is_number());
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    // unknown field
    assert_eq!(run(dir.path(), r#"{"qq": 3}"#, &["datum"]).status.code(), Some(1));
    // malformed JSON
    assert_eq!(run(dir.path(), "{", &["datum"]).status.code(), Some(1));
    // p does not divide q
    let bad_p = r#"{"datum": {"family": "A", "rank": 1, "isogeny": "sc"}, "q": 9, "p": 2, "param": ["1/2"]}"#;
    assert_eq!(run(dir.path(), bad_p, &["series", "rat"]).status.code(), Some(1));
    // wrong dual group
    let wrong = SL2.replace("PGL", "GL");
    assert_eq!(run(dir.path(), &wrong, &["compare"]).status.code(), Some(1));
    // unknown subcommand
    let out = Command::new(env!("CARGO_BIN_EXE_dlseries")).arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.json");
    let out = run(dir.path(), SL2, &["series", "rat", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(r["command"], "series rat");
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let sweep = r#"{"sweep": {"types": ["A1", "A2"], "qs": [2, 3]}, "denominator_bound": 6}"#;
    let a = run(dir.path(), sweep, &["sweep", "--jobs", "1"]);
    let b = run(dir.path(), sweep, &["sweep", "--jobs", "4"]);
    let c = run(dir.path(), sweep, &["sweep", "--jobs", "4"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    let census = r#"{"census": {"family": "GL", "n": 2, "q": 5}}"#;
    assert_eq!(
        run(dir.path(), census, &["census", "--jobs", "1"]).stdout,
        run(dir.path(), census, &["census", "--jobs", "3"]).stdout
    );
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    let small = run(dir.path(), SL2, &["series", "rat", "--max-weyl", "1"]);
    assert_eq!(small.status.code(), Some(1), "Weyl cap below |W| is refused");
    let a = report(&run(dir.path(), SL2, &["series", "rat"]));
    let b = report(&run(dir.path(), SL2, &["series", "rat", "--denominator-bound", "4"]));
    assert_ne!(a["config_hash"], b["config_hash"]);
}
