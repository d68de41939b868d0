use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rlprop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlprop")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scene_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes/empty_room.json")
}

fn write_config(dir: &Path, scene: &Path, extra: &str) -> PathBuf {
    let p = dir.join("run.json");
    fs::write(
        &p,
        format!(
            r#"{{"scene": {:?}, "delta_theta_rad": 0.05, "delta_phi_rad": 0.05, "max_reflections": 1{extra}}}"#,
            scene.to_str().unwrap()
        ),
    )
    .unwrap();
    p
}

fn simulated(dir: &Path) -> PathBuf {
    let cfg = write_config(dir, &scene_path(), "");
    let out = dir.join("out");
    let o = rlprop(&["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(code(&rlprop(&["--help"])), 0);
    assert_eq!(code(&rlprop(&["--version"])), 0);
    assert_eq!(code(&rlprop(&[])), 1);
    assert_eq!(code(&rlprop(&["frobnicate"])), 1);
    assert_eq!(code(&rlprop(&["slice"])), 1);
    assert_eq!(code(&rlprop(&["simulate"])), 1);
}

#[test]
fn missing_scene_is_a_config_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &dir.path().join("nope.json"), "");
    let out = dir.path().join("out");
    let o = rlprop(&["--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("scene file not found"));
    assert!(!out.exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &scene_path(), r#", "max_bounces": 3"#);
    let o =
        rlprop(&["--config", cfg.to_str().unwrap(), "--out-dir", dir.path().join("o").to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn simulate_then_analyse() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulated(dir.path());
    for f in ["grid.rlg", "power_slice.csv", "delay_spread_slice.csv", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let o = out.to_str().unwrap();

    let slice = dir.path().join("s.csv");
    let r = rlprop(&[
        "--out-dir",
        o,
        "slice",
        "--height",
        "1.5",
        "--quantity",
        "delay-spread",
        "--output",
        slice.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    let text = fs::read_to_string(&slice).unwrap();
    assert!(text.starts_with("x,y,z,delay_spread_ns\n"));
    assert_eq!(text.lines().count(), 1 + 20 * 12);

    let r = rlprop(&["--out-dir", o, "pdp", "--x", "6.1", "--y", "2.2", "--z", "1.1"]);
    assert_eq!(code(&r), 0);
    let pdp = stdout(&r);
    assert!(pdp.starts_with("delay_ns,power_dbm\n"));
    assert!(pdp.lines().count() >= 2);

    let r = rlprop(&["--out-dir", o, "pdp", "--x", "60", "--y", "2", "--z", "1"]);
    assert_eq!(code(&r), 1);

    let r = rlprop(&["--out-dir", o, "coverage", "--sensitivity", "30", "--height", "1.5"]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).contains("covered 0 of"));

    let img = dir.path().join("h.ppm");
    let r = rlprop(&[
        "--out-dir",
        o,
        "export",
        "--height",
        "1.5",
        "--min",
        "-90",
        "--max",
        "-30",
        "--output",
        img.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    assert!(fs::read(&img).unwrap().starts_with(b"P6\n20 12\n255\n"));
    assert!(dir.path().join("h.scale.txt").is_file());

    let r = rlprop(&["--out-dir", o, "slice", "--height", "7.5"]);
    assert_eq!(code(&r), 1);
}

#[test]
fn compare_reports_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulated(dir.path());
    let m = dir.path().join("m.csv");
    fs::write(&m, "# campaign A\nx,y,z,power_dbm\n6.1,2.2,1.1,-55\n8.0,4.0,2.0,-60\n").unwrap();
    let report = dir.path().join("r.csv");
    let r = rlprop(&[
        "--out-dir",
        out.to_str().unwrap(),
        "compare",
        "--measurements",
        m.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).contains("points compared: 2"));
    assert_eq!(fs::read_to_string(&report).unwrap().lines().count(), 3);

    fs::write(&m, "x,y\n1,2\n").unwrap();
    let r = rlprop(&["--out-dir", out.to_str().unwrap(), "compare", "--measurements", m.to_str().unwrap()]);
    assert_eq!(code(&r), 1);
}

#[test]
fn corrupt_grid_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("grid.rlg");
    fs::write(&g, b"not a grid at all").unwrap();
    let r = rlprop(&["slice", "--grid", g.to_str().unwrap(), "--height", "1"]);
    assert_eq!(code(&r), 2);
    let r = rlprop(&["--out-dir", dir.path().join("none").to_str().unwrap(), "slice", "--height", "1"]);
    assert_eq!(code(&r), 1);
}
