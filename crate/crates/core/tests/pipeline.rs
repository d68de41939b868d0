use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rlprop::analysis::{self, render_ppm, MeasurementPoint, MeasurementSet, RunError};
use rlprop::em::C0;
use rlprop::grid::{GridError, Quantity, ResultPlane};
use rlprop::ray::Execution;
use rlprop::scene::parse_scene;
use rlprop::Vec3;

const F: f64 = 2.44e9;

fn friis_dbm(d: f64) -> f64 {
    20.0 * (C0 / F / (4.0 * PI * d)).log10()
}

fn empty_scene() -> rlprop::scene::Scene {
    parse_scene(
        r#"{"bounds": {"min": [0, 0, 0], "max": [30, 30, 4]},
            "transmitters": [{"position": [15.1, 14.9, 1.6], "frequency_hz": 2.44e9, "antenna": {"kind": "isotropic"}}]}"#,
        "test",
    )
    .unwrap()
}

fn config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let scene = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenes/empty_room.json");
    let p = dir.join("cfg.json");
    fs::write(
        &p,
        format!(
            r#"{{"scene": {:?}, "delta_theta_rad": 0.05, "delta_phi_rad": 0.05, "tx_power_dbm": 10{extra}}}"#,
            scene.to_str().unwrap()
        ),
    )
    .unwrap();
    p
}

#[test]
fn heatmap_matches_golden_image() {
    let values = vec![
        -120.0,
        -100.0,
        -90.0,
        -80.0,
        -70.0,
        f64::NEG_INFINITY,
        -55.0,
        -50.0,
        -45.0,
        -40.0,
        -35.0,
        -30.0,
        -25.0,
        -20.0,
        -5.0,
        -60.0,
    ];
    let plane = ResultPlane {
        quantity: Quantity::Power,
        height_m: 1.0,
        layer: 2,
        nx: 4,
        ny: 4,
        x: vec![0.25, 0.75, 1.25, 1.75],
        y: vec![0.25, 0.75, 1.25, 1.75],
        z: 1.25,
        values,
    };
    let golden = fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/heatmap_4x4.ppm")).unwrap();
    assert_eq!(render_ppm(&plane, -100.0, -20.0).unwrap(), golden);
}

#[test]
fn coverage_is_the_friis_disk() {
    let scene = empty_scene();
    let cfg = analysis::RunConfig {
        delta_theta_rad: PI / 180.0,
        delta_phi_rad: PI / 180.0,
        ..analysis::RunConfig::for_scene("unused")
    };
    let (grid, _) = analysis::simulate(&scene, &cfg, Execution::Parallel).unwrap();
    let sensitivity = -65.0;
    let mask = analysis::coverage(&grid, sensitivity, 1.6).unwrap();
    let tx = scene.transmitters[0].position;
    let mut checked = 0;
    for j in 0..mask.power.ny {
        for i in 0..mask.power.nx {
            let c = Vec3::new(mask.power.x[i], mask.power.y[j], mask.power.z);
            let expected = friis_dbm(c.distance(tx));
            let got = mask.mask[j * mask.power.nx + i];
            if (expected - sensitivity).abs() < 0.05 || c.distance(tx) < 0.5 {
                continue;
            }
            assert_eq!(got, Some(expected >= sensitivity), "cell ({i}, {j})");
            checked += 1;
        }
    }
    assert!(checked > 3000);
    assert!(mask.covered > 0 && mask.covered < mask.reached);
    let never = analysis::coverage(&grid, 30.0, 1.6).unwrap();
    assert_eq!(never.fraction, 0.0);
}

#[test]
fn comparison_with_known_offsets() {
    let scene = empty_scene();
    let cfg = analysis::RunConfig {
        delta_theta_rad: PI / 90.0,
        delta_phi_rad: PI / 90.0,
        ..analysis::RunConfig::for_scene("unused")
    };
    let (grid, _) = analysis::simulate(&scene, &cfg, Execution::Deterministic).unwrap();
    let spots =
        [Vec3::new(3.2, 4.1, 1.0), Vec3::new(20.0, 25.0, 2.2), Vec3::new(10.0, 10.0, 0.3), Vec3::new(27.0, 3.0, 3.1)];
    let offsets = [1.0, -1.0, 3.0, -3.0];
    let points = spots
        .iter()
        .zip(offsets)
        .map(|(&p, off)| {
            let sim = grid.received_power_dbm(grid.cell_at(p).unwrap());
            MeasurementPoint { position: p, power_dbm: sim - off }
        })
        .collect();
    let set = MeasurementSet { points, metadata: vec![] };
    let report = analysis::compare(&grid, &set).unwrap();
    let s = report.statistics.unwrap();
    assert!((s.mean_abs_error_db - 2.0).abs() < 1e-9);
    assert!((s.std_db - 5f64.sqrt()).abs() < 1e-9);
    assert_eq!(report.flagged, 0);

    let outside = MeasurementSet {
        points: vec![MeasurementPoint { position: Vec3::new(40.0, 1.0, 1.0), power_dbm: -50.0 }],
        metadata: vec![],
    };
    assert!(analysis::compare(&grid, &outside).is_err());
}

#[test]
fn run_writes_manifest_echoing_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#", "heatmap": {"min_dbm": -80, "max_dbm": -20}"#);
    let out = dir.path().join("out");
    let summary = analysis::run(&cfg, &out, Execution::Deterministic, Some(1)).unwrap();
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m, summary.manifest);
    let e = &m["effective"];
    assert_eq!(e["transmitters"][0]["power_dbm"], 10.0);
    assert_eq!(e["transmitters"][0]["frequency_hz"], 2.44e9);
    assert_eq!(e["delta_theta_rad"], 0.05);
    assert_eq!(e["max_reflections"], 6);
    assert_eq!(e["execution"], "deterministic");
    assert_eq!(e["workers"], 1);
    assert_eq!(m["grid"]["nx"], 20);
    assert_eq!(m["grid"]["ny"], 12);
    assert_eq!(m["stats"]["rays_launched"], summary.stats.rays_launched);
    assert!(out.join("power_heatmap.ppm").is_file());
    assert!(out.join("power_heatmap.scale.txt").is_file());
}

#[test]
fn failed_run_leaves_no_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), r#", "slice_height_m": 2.999999"#);
    let out = dir.path().join("out");
    assert!(analysis::run(&cfg, &out, Execution::Deterministic, None).is_ok());

    // the slice fails after the grid dump has been written
    let cfg = config(dir.path(), r#", "slice_height_m": 5.0"#);
    let out = dir.path().join("bad");
    let err = analysis::run(&cfg, &out, Execution::Deterministic, None).unwrap_err();
    assert!(matches!(err, RunError::Grid(GridError::HeightOutOfBounds { .. })), "{err}");
    assert_eq!(err.exit_code(), 1);
    assert!(!out.exists());

    let keep = dir.path().join("keep");
    fs::create_dir(&keep).unwrap();
    fs::write(keep.join("notes.txt"), "mine").unwrap();
    assert!(analysis::run(&cfg, &keep, Execution::Deterministic, None).is_err());
    assert_eq!(fs::read_dir(&keep).unwrap().count(), 1);

    let cfg = config(dir.path(), r#", "heatmap": {"min_dbm": -20, "max_dbm": -80}"#);
    let err = analysis::run(&cfg, &out, Execution::Deterministic, None).unwrap_err();
    assert!(matches!(err, RunError::Config(_)), "{err}");
}
