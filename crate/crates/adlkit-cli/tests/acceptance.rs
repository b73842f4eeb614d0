//! Acceptance check for the command-line tool: for a fixed seed and
//! configuration, every report must be byte-identical run over run and at any
//! worker count, in both output formats, whether written to stdout or a file.
//!
//! Each sub-check prints one `criterion ...: PASS`/`FAIL` line; the test fails
//! if any sub-check does.

use std::path::{Path, PathBuf};
use std::process::Command;

fn class_file(dir: &Path) -> PathBuf {
    let values: Vec<Vec<Vec<f64>>> = (0..5)
        .map(|h| {
            (0..4)
                .map(|x| vec![if x >= h { 1.0 } else { 0.0 }])
                .collect()
        })
        .collect();
    let body = serde_json::json!({
        "num_hypotheses": 5,
        "num_points": 4,
        "dim": 1,
        "values": values,
        "weights": [0.4, 0.3, 0.2, 0.1],
    });
    let path = dir.join("thresholds.json");
    std::fs::write(&path, serde_json::to_vec(&body).unwrap()).unwrap();
    path
}

fn capture(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_adlkit"))
        .args(args)
        .output()
        .map_err(|e| format!("spawn failed: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "adlkit {:?} exited with {:?}: {}",
            args,
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out.stdout)
}

/// Runs one fixed invocation twice per worker count and demands a single
/// byte string across all of it.
fn identical_across_workers(base_args: &[&str]) -> Result<(), String> {
    let mut reference: Option<Vec<u8>> = None;
    for workers in ["1", "2", "4"] {
        for repeat in 0..2 {
            let mut args = base_args.to_vec();
            args.extend_from_slice(&["--workers", workers]);
            let bytes = capture(&args)?;
            if bytes.is_empty() {
                return Err("report was empty".to_string());
            }
            match &reference {
                None => reference = Some(bytes),
                Some(expected) => {
                    if &bytes != expected {
                        return Err(format!(
                            "output diverged at workers={workers} repeat={repeat}"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}

fn file_matches_stdout(dir: &Path, base_args: &[&str]) -> Result<(), String> {
    let stdout = capture(base_args)?;
    let path = dir.join("report.out");
    let path_str = path.to_str().unwrap();
    let mut args = base_args.to_vec();
    args.extend_from_slice(&["--output", path_str]);
    let silent = capture(&args)?;
    if !silent.is_empty() {
        return Err("stdout was not empty when --output was given".to_string());
    }
    let written = std::fs::read(&path).map_err(|e| format!("read {path_str}: {e}"))?;
    if written != stdout {
        return Err("file bytes differ from stdout bytes".to_string());
    }
    Ok(())
}

#[test]
fn acceptance_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let class = class_file(dir.path());
    let input = class.to_str().unwrap();

    let checks: Vec<(&str, Vec<Vec<&str>>)> = vec![
        (
            "separation report is byte-stable",
            vec![vec![
                "separation",
                "--d",
                "3",
                "--alpha",
                "1",
                "--eps",
                "0.3,0.01",
                "--trials",
                "1500",
                "--seed",
                "42",
            ]],
        ),
        (
            "chain report is byte-stable",
            vec![
                vec![
                    "chain", "--input", input, "--a", "0.5", "--trials", "2000", "--seed", "11",
                ],
                vec![
                    "chain", "--input", input, "--a", "0.5", "--trials", "2000", "--seed", "11",
                    "--format", "csv",
                ],
            ],
        ),
        (
            "ball report is byte-stable",
            vec![vec![
                "ball", "--d", "4", "--M", "1.5", "--sigma", "1", "--trials", "2000", "--eps",
                "0.8", "--seed", "6",
            ]],
        ),
        (
            "repbound report is byte-stable",
            vec![vec![
                "repbound", "--input", input, "--m", "8,32", "--trials", "1500", "--target", "1",
                "--seed", "9",
            ]],
        ),
        (
            "sketch-verify report is byte-stable",
            vec![vec![
                "sketch-verify",
                "--d",
                "6",
                "--M",
                "2",
                "--trials",
                "4000",
                "--seed",
                "13",
            ]],
        ),
    ];

    let mut failures = Vec::new();
    for (name, invocations) in &checks {
        let result = invocations
            .iter()
            .try_for_each(|args| identical_across_workers(args));
        match result {
            Ok(()) => println!("criterion {name}: PASS"),
            Err(why) => {
                println!("criterion {name}: FAIL - {why}");
                failures.push(*name);
            }
        }
    }

    let name = "written report matches stdout";
    match file_matches_stdout(
        dir.path(),
        &[
            "cover", "--input", input, "--eps", "0.3,0.1", "--seed", "2", "--format", "csv",
        ],
    ) {
        Ok(()) => println!("criterion {name}: PASS"),
        Err(why) => {
            println!("criterion {name}: FAIL - {why}");
            failures.push(name);
        }
    }

    assert!(failures.is_empty(), "failed: {failures:?}");
}
