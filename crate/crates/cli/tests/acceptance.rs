//! Acceptance run: one PASS/FAIL line per criterion, each within its time budget.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lrdspde::verify::{self, Check, VerifyOptions};

struct Outcome {
    passed: bool,
    detail: String,
}

fn timed(id: u8, budget_secs: u64, body: impl FnOnce() -> Outcome) -> (bool, Duration) {
    let start = Instant::now();
    let out = body();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_secs);
    let passed = out.passed && elapsed < budget;
    let mut detail = out.detail;
    if elapsed >= budget {
        detail.push_str("; over the time budget");
    }
    println!(
        "{} criterion {id}: {detail} ({:.2} s, budget {budget_secs} s)",
        if passed { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    (passed, elapsed)
}

fn from_check(c: Check) -> Outcome {
    let metrics: Vec<String> = c.metrics.iter().map(|(k, v)| format!("{k}={v:.3e}")).collect();
    Outcome { passed: c.passed, detail: format!("{} [{}] {}", c.name, metrics.join(", "), c.detail) }
}

/// Runs `verify` through the binary and returns the report bytes.
fn verify_bytes(dir: &Path, name: &str, threads: Option<&str>) -> Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lrdspde"));
    cmd.current_dir(dir).args(["verify", "--out", name]);
    if let Some(n) = threads {
        cmd.env("RAYON_NUM_THREADS", n);
    }
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("verify exited with {:?}", out.status.code()));
    }
    std::fs::read(dir.join(name)).map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let check = verify::check_worker_invariance(&VerifyOptions::default());
    let mut detail = format!("in-process 1 vs 3 workers: {}", check.detail);
    let mut passed = check.passed;
    let binary = (|| -> Result<(bool, bool), String> {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = verify_bytes(dir.path(), "first.json", Some("1"))?;
        let second = verify_bytes(dir.path(), "second.json", Some("1"))?;
        let wide = verify_bytes(dir.path(), "wide.json", Some("4"))?;
        Ok((first == second, first == wide))
    })();
    match binary {
        Ok((rerun, workers)) => {
            detail.push_str(&format!("; rerun byte-identical: {rerun}; 1 vs 4 workers byte-identical: {workers}"));
            passed &= rerun && workers;
        }
        Err(e) => {
            detail.push_str(&format!("; binary run failed: {e}"));
            passed = false;
        }
    }
    Outcome { passed, detail }
}

fn main() -> ExitCode {
    let opts = VerifyOptions::default();
    let mut results = vec![
        timed(1, 10, || from_check(verify::check_density_forms())),
        timed(2, 30, || from_check(verify::check_bochner())),
        timed(3, 5, || from_check(verify::check_mittag_leffler())),
        timed(4, 30, || from_check(verify::check_heat_limit_closed_form())),
        timed(5, 120, || from_check(verify::check_heat_convergence())),
        timed(6, 300, || from_check(verify::check_frbe_convergence())),
        timed(7, 300, || from_check(verify::check_monte_carlo(&opts))),
        timed(8, 60, || from_check(verify::check_divergence())),
    ];
    // three full verify runs; the budget is for the overhead beyond the single run it audits
    let one_run: Duration = results.iter().map(|r| r.1).sum();
    results.push(timed(9, 60 + one_run.as_secs() + 1, determinism));
    let failed = results.iter().filter(|r| !r.0).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
