//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Criteria 1 to 9 and the library half of 10 run through the validation
//! checks; the rest of 10 drives the binary and inspects its JSON report.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::Instant;

use hypegbms::validate::{run_check, CheckOutcome};
use serde_json::Value;

const SEED: u64 = 42;

const CRITERIA: [(&str, &str); 10] = [
    ("distance-agreement", "three distance formulas agree on 1000 pairs"),
    ("exp-log-roundtrip", "exp after log returns the target"),
    ("euclidean-limit", "near-zero curvature reproduces Euclidean GBMS"),
    ("mobius-frechet-scaling", "Möbius/Fréchet mean gap scales cubically"),
    ("density-ascent", "mean kernel density never drops"),
    ("kde-gradient", "analytic gradient matches central differences"),
    (
        "metric-oracles",
        "ARI and NMI match brute force on all small partitions",
    ),
    ("end-to-end", "hierarchical fixture recovered by a bandwidth sweep"),
    ("complexity-scaling", "one iteration scales quadratically in N"),
    ("stopping-criteria", "movement and entropy stopping rules"),
];

/// Runs `cluster` on identical rows and checks the stop and the report's trace.
fn report_trace() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = dir.path().join("same.csv");
    fs::write(&input, "1.5,2,3\n".repeat(12)).map_err(|e| e.to_string())?;
    let report = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_hypegbms"))
        .args(["cluster", "--sigma", "0.5", "--curvature", "-1", "--input"])
        .arg(&input)
        .arg("--output")
        .arg(dir.path().join("labels.csv"))
        .arg("--report")
        .arg(&report)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let r: Value =
        serde_json::from_str(&fs::read_to_string(&report).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let deltas = r["avg_movement"].as_array().ok_or("report lacks avg_movement")?;
    let entropies = r["entropy"].as_array().ok_or("report lacks entropy")?;
    if r["iterations"] != 1 || r["stop_reason"] != "movement" {
        return Err(format!(
            "identical rows: {} iterations, stop_reason {}",
            r["iterations"], r["stop_reason"]
        ));
    }
    if deltas.len() != 1 || entropies.len() != 1 {
        return Err("trace length differs from iteration count".into());
    }
    Ok(format!("report: Δ {}, H {}", deltas[0], entropies[0]))
}

fn line(index: usize, summary: &str, o: &CheckOutcome, extra: Option<&Result<String, String>>) -> bool {
    let passed = o.passed && extra.is_none_or(|r| r.is_ok());
    let mut detail = o.detail.clone();
    if let Some(r) = extra {
        let s = match r {
            Ok(s) => s.clone(),
            Err(e) => format!("report check failed: {e}"),
        };
        detail = format!("{detail}; {s}");
    }
    println!(
        "{} {:>2}. {:<24} measured {:<12.4e} threshold {:<14} {:>7.3}s / {}s  {summary} [{detail}]",
        if passed { "PASS" } else { "FAIL" },
        index + 1,
        o.name,
        o.measured,
        o.threshold.to_string(),
        o.elapsed.as_secs_f64(),
        o.time_limit.as_secs(),
    );
    passed
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, summary)) in CRITERIA.iter().enumerate() {
        let outcome = match run_check(name, SEED) {
            Ok(o) => o,
            Err(e) => {
                println!("FAIL {:>2}. {name}: {e}", i + 1);
                failures += 1;
                continue;
            }
        };
        let extra = (*name == "stopping-criteria").then(report_trace);
        if !line(i, summary, &outcome, extra.as_ref()) {
            failures += 1;
        }
    }
    println!(
        "\n{} of {} criteria passed in {:.1}s",
        CRITERIA.len() - failures,
        CRITERIA.len(),
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
