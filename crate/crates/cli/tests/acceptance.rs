//! Criterion 10: every fixture rerun yields byte-identical outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use tempfile::TempDir;

const FIXTURES: [(&str, &str); 8] = [
    ("solve", "solve_zero.json"),
    ("solve", "solve_manufactured.json"),
    ("solve", "solve_obstacle.json"),
    ("study", "study_repeated_limit.json"),
    ("study", "study_cracked_disk.json"),
    ("study", "study_cracked_disk_neumann.json"),
    ("study", "study_fixed_hole.json"),
    ("study", "study_obstacle.json"),
];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(cmd: &str, config: &Path, out: &Path, jobs: Option<&str>) -> bool {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mosco-lab"));
    c.args([cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    if let Some(j) = jobs {
        c.args(["--jobs", j]);
    }
    c.env("MOSCO_LAB_SEED", "20261018").status().map(|s| s.success()).unwrap_or(false)
}

/// All output files except wall-clock timings.
fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timings.txt")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

fn main() -> ExitCode {
    let dir = TempDir::new().unwrap();
    let mut failures = Vec::new();
    for (cmd, name) in FIXTURES {
        let a = dir.path().join(format!("{name}.a"));
        let b = dir.path().join(format!("{name}.b"));
        let c = dir.path().join(format!("{name}.c"));
        let ok = run(cmd, &fixture(name), &a, None)
            && run(cmd, &fixture(name), &b, Some("1"))
            && run(cmd, &a.join("manifest.json"), &c, Some("3"));
        if !ok {
            failures.push(format!("{name}: run failed"));
            continue;
        }
        let (sa, sb, sc) = (snapshot(&a), snapshot(&b), snapshot(&c));
        if sa.is_empty() || sa != sb || sa != sc {
            failures.push(format!("{name}: outputs differ"));
        }
    }
    let pass = failures.is_empty();
    println!(
        "criterion 10 determinism: {} ({} fixtures, rerun, --jobs 1 and rerun from manifest){}",
        if pass { "PASS" } else { "FAIL" },
        FIXTURES.len(),
        if pass { String::new() } else { format!(": {failures:?}") }
    );
    if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
