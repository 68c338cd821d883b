//! Batch front-end: one scenario per invocation, deterministic reports.
//!
//! Usage:
//!   crithom <subcommand> [--scenario file.json] [--out file]
//!           [--trunc D] [--bar-window N] [--u-window N] [--seed S]
//!
//! The scenario file may also carry the command; a bare subcommand runs
//! with defaults.  CRITHOM_TRUNC and CRITHOM_BAR_WINDOW set default
//! truncations.  Exit codes: 0 pass, 2 usage error, 3 unstable result,
//! 4 invariant violation.

use std::process::ExitCode;

use serde_json::{json, Value};

use crithom::scenario::{run, Scenario, COMMANDS};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match real_main(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!(
                "usage: crithom <subcommand> [--scenario file.json] [--out file] \
                 [--trunc D] [--bar-window N] [--u-window N] [--seed S]"
            );
            eprintln!("subcommands: {}", COMMANDS.join(", "));
            ExitCode::from(2)
        }
    }
}

fn real_main(args: &[String]) -> Result<i32, String> {
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        return Err("a subcommand is required".into());
    }
    let command = args[0].clone();
    if !COMMANDS.contains(&command.as_str()) {
        return Err(format!("unknown subcommand `{command}`"));
    }
    let mut scenario_path: Option<String> = None;
    let mut out_path: Option<String> = None;
    let mut trunc: Option<u64> = std::env::var("CRITHOM_TRUNC").ok().and_then(|v| v.parse().ok());
    let mut bar_window: Option<u64> =
        std::env::var("CRITHOM_BAR_WINDOW").ok().and_then(|v| v.parse().ok());
    let mut u_window: Option<i64> = None;
    let mut seed: Option<u64> = None;
    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        let value = || -> Result<&String, String> {
            args.get(i + 1).ok_or_else(|| format!("flag {flag} needs a value"))
        };
        match flag {
            "--scenario" => scenario_path = Some(value()?.clone()),
            "--out" => out_path = Some(value()?.clone()),
            "--trunc" => trunc = Some(value()?.parse().map_err(|_| "bad --trunc")?),
            "--bar-window" => bar_window = Some(value()?.parse().map_err(|_| "bad --bar-window")?),
            "--u-window" => u_window = Some(value()?.parse().map_err(|_| "bad --u-window")?),
            "--seed" => seed = Some(value()?.parse().map_err(|_| "bad --seed")?),
            other => return Err(format!("unknown flag `{other}`")),
        }
        i += 2;
    }
    let mut doc: Value = match &scenario_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read scenario {path}: {e}"))?;
            serde_json::from_str(&text).map_err(|e| format!("bad scenario JSON: {e}"))?
        }
        None => json!({ "command": command }),
    };
    // The command on the command line wins; flags override the document.
    doc["command"] = json!(command);
    if let Some(t) = trunc {
        doc["trunc"] = json!(t);
    }
    if let Some(n) = bar_window {
        doc["bar_window"] = json!(n);
    }
    if let Some(u) = u_window {
        doc["u_window"] = json!(u);
    }
    if let Some(s) = seed {
        doc["seed"] = json!(s);
    }
    let scenario = Scenario::from_json(&doc)?;
    let (report, outcome) = run(&scenario);
    let text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    match out_path.or_else(|| doc.get("out").and_then(Value::as_str).map(str::to_string)) {
        Some(path) => {
            std::fs::write(&path, text.as_bytes()).map_err(|e| format!("cannot write {path}: {e}"))?;
            println!("{}", report["status"].as_str().unwrap_or(""));
        }
        None => println!("{text}"),
    }
    Ok(outcome.code())
}
