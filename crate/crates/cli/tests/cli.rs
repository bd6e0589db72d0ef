//! End-to-end tests of the command-line surface: exit codes, deterministic
//! output bytes, config-file round trips and cache persistence.

use std::path::Path;
use std::process::{Command, Output};

fn modfun(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modfun")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn verlinde_examples() {
    let out = modfun(&["verlinde", "--builtin", "su2:1", "--genus", "2"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "4");

    let out = modfun(&["verlinde", "--builtin", "su2:2", "--genus", "2"]);
    assert_eq!(stdout(&out).trim(), "10");

    let out = modfun(&["verlinde", "--builtin", "dg:Z2", "--genus", "2"]);
    assert_eq!(stdout(&out).trim(), "16");

    // labels by name
    let out = modfun(&["verlinde", "--builtin", "su2:1", "--genus", "1", "--labels", "0"]);
    assert_eq!(stdout(&out).trim(), "2");
}

#[test]
fn usage_and_validation_exit_code_2() {
    let out = modfun(&["verlinde", "--genus", "2"]);
    assert_eq!(out.status.code(), Some(2)); // neither --builtin nor --mf

    let out = modfun(&["verlinde", "--builtin", "nope:1", "--genus", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = modfun(&["tr", "--builtin", "su2:1", "--t", "0.5", "--g", "1", "--n", "1"]);
    assert_eq!(out.status.code(), Some(2)); // t must be an exact rational

    let out = modfun(&["tr", "--builtin", "su2:1", "--t", "0", "--g", "0", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2)); // unstable topology
}

#[test]
fn fusion_table_su2_level1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fusion.json");
    let out = modfun(&["fusion", "--builtin", "su2:1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("8 fusion entries"));
    let parsed: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = parsed["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    // N_{110} = 1, N_{111} = 0
    let find = |a: &str, b: &str, c: &str| {
        rows.iter()
            .find(|r| r["channels"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect::<Vec<_>>() == vec![a, b, c])
            .unwrap()["exact"]
            .as_str()
            .unwrap()
            .to_string()
    };
    assert_eq!(find("1", "1", "0"), "1");
    assert_eq!(find("1", "1", "1"), "0");
}

#[test]
fn tr_outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out = modfun(&["tr", "--builtin", "su2:2", "--t", "1", "--g", "1", "--n", "1", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn crosscheck_passes_and_corrupt_data_is_localized() {
    let out = modfun(&["crosscheck", "--builtin", "su2:1", "--t", "1", "--gn", "0,3;1,1"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("cross-check passed"));

    // negative control: perturb one S-matrix entry by 1e-3
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mf.json");
    let out = modfun(&["export", "--builtin", "su2:1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let mut cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let entry = &mut cfg["s_under_inverse"][0][1][0];
    *entry = serde_json::Value::from(entry.as_f64().unwrap() + 1e-3);
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = modfun(&["crosscheck", "--mf", path.to_str().unwrap(), "--t", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr).into_owned();
    assert!(err.contains("S̲ᵀS̲ = C"), "report should name the failed invariant: {err}");
}

#[test]
fn exported_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sl3.json");
    let out = modfun(&["export", "--builtin", "slN:3,1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let direct = modfun(&["verlinde", "--builtin", "slN:3,1", "--genus", "2"]);
    let via_file = modfun(&["verlinde", "--mf", path.to_str().unwrap(), "--genus", "2"]);
    assert_eq!(stdout(&direct), stdout(&via_file));
}

#[test]
fn hurwitz_command_reports_small_deviation() {
    let out = modfun(&["hurwitz", "--builtin", "slN:2,3", "--labels", "0,0", "--order", "3"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).contains("max deviation"));
}

#[test]
fn cache_file_round_trip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.cache");
    let out = modfun(&[
        "crosscheck", "--builtin", "su2:1", "--t", "1", "--gn", "1,1", "--cache", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&path).unwrap();
    assert!(body.lines().count() > 0);
    for line in body.lines() {
        assert_eq!(line.split(';').count(), 3, "bad record: {line}");
    }
    // sorted
    let mut lines: Vec<&str> = body.lines().collect();
    let orig = lines.clone();
    lines.sort();
    assert_eq!(orig, lines);

    // corrupt line is reported with its number
    std::fs::write(&path, "garbage line\n").unwrap();
    let out = modfun(&[
        "crosscheck", "--builtin", "su2:1", "--t", "1", "--gn", "1,1", "--cache", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn config_schema_is_documented_shape() {
    // the exported file carries exactly the documented fields
    let dir = tempfile::tempdir().unwrap();
    let path: std::path::PathBuf = dir.path().join("su2.json");
    modfun(&["export", "--builtin", "su2:1", "--out", path.to_str().unwrap()]);
    let cfg: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(Path::new(&path)).unwrap()).unwrap();
    for key in ["name", "labels", "dagger", "s_under_inverse", "r", "c"] {
        assert!(cfg.get(key).is_some(), "missing {key}");
    }
    assert_eq!(cfg["r"][1].as_str().unwrap(), "1/4");
    assert_eq!(cfg["c"].as_str().unwrap(), "1");
}
