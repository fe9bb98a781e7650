use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mosco_lab::mesh::{read_mesh_file, write_mesh};
use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mosco-lab"))
        .args(args)
        .env_remove("MOSCO_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn run_cmd(cmd: &str, config: &Path, out: &Path) -> Output {
    run(&[cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn mesh_round_trip() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.mesh2d");
    let o = run(&["mesh", "--family", "cracked_disk", "--delta", "0.25", "--h", "0.05", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let written = fs::read(&out).unwrap();
    let mut again = Vec::new();
    write_mesh(&read_mesh_file(&out).unwrap(), &mut again).unwrap();
    assert_eq!(written, again);

    for (family, extra) in [("dumbbell", ["--width", "0.25"]), ("fixed_hole", ["--radius", "0.25"])] {
        let out = dir.path().join(format!("{family}.mesh2d"));
        let o = run(&["mesh", "--family", family, extra[0], extra[1], "--h", "0.1", "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(read_mesh_file(&out).unwrap().n_triangles() > 0);
    }
}

#[test]
fn mesh_usage_errors() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.mesh2d");
    let out = out.to_str().unwrap();
    let o = run(&["mesh", "--family", "cracked_disk", "--delta", "1.5", "--h", "0.05", "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("delta must satisfy 0 <= delta < 1"), "{}", stderr(&o));
    let o = run(&["mesh", "--family", "cracked_disk", "--h", "0.05", "--out", out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--delta"));
    assert_eq!(code(&run(&["mesh", "--family", "torus", "--h", "0.05", "--out", out])), 2);
    assert_eq!(code(&run(&["mesh", "--bogus"])), 2);
    assert!(!Path::new(out).exists());
}

#[test]
fn solve_zero_data() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("traj");
    let o = run_cmd("solve", &fixture("solve_zero.json"), &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = json(&out.join("manifest.json"));
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs.iter().filter(|o| o.ends_with(".field")).count(), 6);
    for f in &outputs {
        assert!(out.join(f).exists(), "{f}");
        if f.ends_with(".field") {
            let text = fs::read_to_string(out.join(f)).unwrap();
            for line in text.lines().skip(1) {
                let v: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
                assert_eq!(v, 0.0);
            }
        }
    }
    assert_eq!(manifest["metrics"]["l2v_norm"].as_f64(), Some(0.0));
}

#[test]
fn solve_manufactured_solution() {
    let dir = TempDir::new().unwrap();
    let o = run_cmd("solve", &fixture("solve_manufactured.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(&dir.path().join("manifest.json"));
    let err = m["metrics"]["l2v_error"].as_f64().unwrap();
    assert!(err < 1e-2, "l2v_error {err}");
    assert!(m["metrics"]["alpha_est"].as_f64().unwrap() > 0.5);
    assert_eq!(m["effective_seed"].as_u64(), Some(7));
    assert_eq!(m["inputs"]["config"].as_str().unwrap().len(), 64);
}

#[test]
fn solve_obstacle_is_feasible() {
    let dir = TempDir::new().unwrap();
    let o = run_cmd("solve", &fixture("solve_obstacle.json"), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = json(&dir.path().join("manifest.json"));
    assert!(m["metrics"]["min_margin"].as_f64().unwrap() >= -1e-12);
    assert!(m["metrics"]["weak_vi_residual"].as_f64().unwrap() >= -1e-9);
}

#[test]
fn solve_error_codes() {
    let dir = TempDir::new().unwrap();
    let o = run_cmd("solve", &fixture("malformed.json"), &dir.path().join("a"));
    assert_eq!(code(&o), 2);
    let o = run_cmd("solve", &fixture("does_not_exist.json"), &dir.path().join("b"));
    assert_eq!(code(&o), 2);
    let o = run_cmd("solve", &fixture("solve_blowup.json"), &dir.path().join("c"));
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("time step 2"), "{}", stderr(&o));
    let o = run_cmd("study", &fixture("solve_zero.json"), &dir.path().join("d"));
    assert_eq!(code(&o), 2);
}

fn report(dir: &Path) -> Value {
    json(&dir.join("report.json"))
}

#[test]
fn study_fixtures() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("repeated");
    let o = run_cmd("study", &fixture("study_repeated_limit.json"), &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(&out);
    assert_eq!(r["verdict"], "decreasing_to_floor");
    let floor = r["floor"].as_f64().unwrap();
    for key in ["err_l2h1", "err_cl2", "err_grad"] {
        assert!(r[key].as_array().unwrap().iter().all(|e| e.as_f64().unwrap() <= floor));
    }
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("n,param,err_L2H1,err_CL2,err_grad,floor,verdict\n"));
    assert_eq!(csv.lines().count(), 4);

    for (name, verdict) in [
        ("study_cracked_disk.json", "decreasing_to_floor"),
        ("study_cracked_disk_neumann.json", "decreasing_to_floor"),
        ("study_obstacle.json", "decreasing_to_floor"),
        ("study_fixed_hole.json", "stagnant"),
    ] {
        let out = dir.path().join(name);
        let o = run_cmd("study", &fixture(name), &out);
        assert_eq!(code(&o), 0, "{name}: {}", stderr(&o));
        assert_eq!(report(&out)["verdict"], verdict, "{name}");
        let m = json(&out.join("manifest.json"));
        assert_eq!(m["metrics"]["verdict"], verdict);
        for f in m["outputs"].as_array().unwrap() {
            assert!(out.join(f.as_str().unwrap()).exists());
        }
    }
}

#[test]
fn seed_override_is_recorded() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mosco-lab"))
        .args(["solve", "--config", fixture("solve_manufactured.json").to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .env("MOSCO_LAB_SEED", "123")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&dir.path().join("manifest.json"))["effective_seed"].as_u64(), Some(123));
}
