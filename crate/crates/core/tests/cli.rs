//! End-to-end checks of the command-line front end: exit codes, scenario
//! files, overrides, and byte-identical reports across runs.

use std::process::Command;

fn crithom() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crithom"))
}

#[test]
fn usage_error_is_exit_2() {
    let out = crithom().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = crithom().arg("no-such-command").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = crithom().args(["hp", "--bogus-flag", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gm_check_passes_from_scenario_file() {
    let dir = std::env::temp_dir().join("crithom-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let scenario = dir.join("gm.json");
    std::fs::write(
        &scenario,
        r#"{ "command": "gm-check", "payload": { "family": "x^3 - t*x" } }"#,
    )
    .unwrap();
    let out = crithom()
        .args(["gm-check", "--scenario", scenario.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"flat\": true"));
    assert!(text.contains("\"residue\": \"0\""));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = std::env::temp_dir().join("crithom-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let scenario = dir.join("scan.json");
    std::fs::write(
        &scenario,
        r#"{ "command": "family-scan", "payload": { "family": "x^3 - t*x", "grid": [0, 1, 2, -1] }, "seed": 9 }"#,
    )
    .unwrap();
    let out_a = dir.join("a.json");
    let out_b = dir.join("b.json");
    for out in [&out_a, &out_b] {
        let status = crithom()
            .args([
                "family-scan",
                "--scenario",
                scenario.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b, "identical scenarios must produce byte-identical reports");
    let text = String::from_utf8(a).unwrap();
    assert!(text.contains("\"constant\": true"));
    assert!(text.contains("t,dim_even,dim_odd,stable"), "CSV table embedded in the report");
}

#[test]
fn flags_override_scenario_defaults() {
    // ext-basic with two different seeds: identical Ext dims (seed
    // independence), different quintics behind them.
    let out1 = crithom().args(["ext-basic", "--seed", "3"]).output().unwrap();
    let out5 = crithom().args(["ext-basic", "--seed", "5"]).output().unwrap();
    assert_eq!(out1.status.code(), Some(0));
    assert_eq!(out5.status.code(), Some(0));
    for out in [&out1, &out5] {
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("Ext: (1, 59, 84, 1)"));
    }
}

#[test]
fn hochschild_check_and_hp_pass_for_curved_model() {
    let out = crithom()
        .args(["hochschild-check", "--bar-window", "5"])
        .env("CRITHOM_TRUNC", "6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let dir = std::env::temp_dir().join("crithom-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let scenario = dir.join("hp.json");
    std::fs::write(
        &scenario,
        r#"{ "command": "hp", "payload": { "power": 10, "h": "-x^2" }, "bar_window": 5 }"#,
    )
    .unwrap();
    let out = crithom()
        .args(["hp", "--scenario", scenario.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"odd\": 1"));
    assert!(text.contains("\"stable\": true"));
}
