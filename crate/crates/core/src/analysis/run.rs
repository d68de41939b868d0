use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use super::{export_heatmap, load_config, RunConfig, RunError};
use crate::grid::{write_grid, FieldGrid, Quantity};
use crate::ray::{trace, Execution, TraceStats};
use crate::scene::{load_scene, Scene};

/// Files written by [`run`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutputs {
    pub grid: PathBuf,
    pub power_slice: PathBuf,
    pub delay_spread_slice: PathBuf,
    pub manifest: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heatmap: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub stats: TraceStats,
    pub wall_clock_s: f64,
    pub outputs: RunOutputs,
    pub manifest: serde_json::Value,
}

/// Loads a config and its scene, applying the config's transmitter overrides.
pub fn prepare(config_path: impl AsRef<Path>) -> Result<(RunConfig, PathBuf, Scene), RunError> {
    let (cfg, scene_path) = load_config(config_path)?;
    if !scene_path.is_file() {
        return Err(RunError::Config(format!("scene file not found: {}", scene_path.display())));
    }
    let mut scene = load_scene(&scene_path)?;
    for tx in &mut scene.transmitters {
        if let Some(f) = cfg.frequency_hz {
            tx.frequency_hz = f;
        }
        if let Some(p) = cfg.tx_power_dbm {
            tx.power_dbm = p;
        }
        if let Some(a) = cfg.antenna {
            tx.antenna = a;
        }
    }
    Ok((cfg, scene_path, scene))
}

/// Traces every transmitter of `scene` into a fresh grid.
pub fn simulate(scene: &Scene, cfg: &RunConfig, execution: Execution) -> Result<(FieldGrid, TraceStats), RunError> {
    let first = scene.transmitters.first().ok_or_else(|| RunError::Config("scene has no transmitters".into()))?;
    let frequency = first.frequency_hz;
    if scene.transmitters.iter().any(|t| t.frequency_hz != frequency) {
        return Err(RunError::Config("all transmitters must share one carrier frequency".into()));
    }
    let grid = FieldGrid::new(&scene.bounds, cfg.grid(), frequency)?;
    let launch = cfg.launch();
    let mut stats = TraceStats::default();
    for tx in 0..scene.transmitters.len() {
        stats += trace(scene, tx, &launch, &grid, execution).map_err(|e| RunError::Config(e.to_string()))?;
    }
    let mut grid = grid;
    grid.shrink();
    Ok((grid, stats))
}

struct Cleanup {
    created: Vec<PathBuf>,
    dir: Option<PathBuf>,
    armed: bool,
}

impl Cleanup {
    fn track(&mut self, p: &Path) {
        self.created.push(p.to_path_buf());
    }
}

impl Drop for Cleanup {
    fn drop(&mut self) {
        if !self.armed {
            return;
        }
        for p in &self.created {
            let _ = fs::remove_file(p);
        }
        if let Some(d) = &self.dir {
            let _ = fs::remove_dir(d);
        }
    }
}

/// Runs the configured simulation and writes the grid dump, power and
/// delay-spread slices, an optional heatmap and a manifest to `out_dir`.
/// Nothing is left behind on failure.
pub fn run(
    config_path: impl AsRef<Path>,
    out_dir: impl AsRef<Path>,
    execution: Execution,
    workers: Option<usize>,
) -> Result<RunSummary, RunError> {
    let config_path = config_path.as_ref();
    let out_dir = out_dir.as_ref();
    let (cfg, scene_path, scene) = prepare(config_path)?;
    let started = Instant::now();
    let (grid, stats) = match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| RunError::Runtime(format!("cannot start worker pool: {e}")))?;
            pool.install(|| simulate(&scene, &cfg, execution))?
        }
        None => simulate(&scene, &cfg, execution)?,
    };
    let wall_clock_s = started.elapsed().as_secs_f64();

    let mut cleanup =
        Cleanup { created: Vec::new(), dir: (!out_dir.exists()).then(|| out_dir.to_path_buf()), armed: true };
    fs::create_dir_all(out_dir).map_err(|e| RunError::io(format!("cannot create {}", out_dir.display()), e))?;
    let outputs = RunOutputs {
        grid: out_dir.join("grid.rlg"),
        power_slice: out_dir.join("power_slice.csv"),
        delay_spread_slice: out_dir.join("delay_spread_slice.csv"),
        manifest: out_dir.join("manifest.json"),
        heatmap: cfg.heatmap.map(|_| out_dir.join("power_heatmap.ppm")),
    };

    cleanup.track(&outputs.grid);
    write_grid(&grid, &outputs.grid)?;
    let power = grid.plane_slice(cfg.slice_height_m, Quantity::Power)?;
    cleanup.track(&outputs.power_slice);
    power.write_csv(&outputs.power_slice)?;
    let spread = grid.plane_slice(cfg.slice_height_m, Quantity::DelaySpread)?;
    cleanup.track(&outputs.delay_spread_slice);
    spread.write_csv(&outputs.delay_spread_slice)?;
    if let (Some(scale), Some(path)) = (cfg.heatmap, &outputs.heatmap) {
        cleanup.track(path);
        cleanup.track(&super::heatmap::sidecar_path(path));
        export_heatmap(&power, path, scale.min_dbm, scale.max_dbm)?;
    }

    let g = grid.geometry();
    let manifest = json!({
        "version": concat!("rlprop ", env!("CARGO_PKG_VERSION")),
        "config": config_path,
        "scene": scene_path,
        "effective": {
            "frequency_hz": grid.wave().frequency_hz,
            "transmitters": scene.transmitters,
            "rx_antenna": cfg.rx_antenna,
            "delta_theta_rad": cfg.delta_theta_rad,
            "delta_phi_rad": cfg.delta_phi_rad,
            "max_reflections": cfg.max_reflections,
            "max_transmissions": cfg.max_transmissions,
            "max_diffractions": cfg.max_diffractions,
            "power_floor_db": cfg.power_floor_db,
            "diffraction": cfg.diffraction,
            "delta_t_s": cfg.delta_t_s,
            "cuboid_m": cfg.cuboid_m,
            "slice_height_m": cfg.slice_height_m,
            "heatmap": cfg.heatmap,
            "execution": execution,
            "workers": workers.unwrap_or_else(rayon::current_num_threads),
        },
        "grid": {
            "nx": g.nx,
            "ny": g.ny,
            "nz": g.nz,
            "components": grid.total_components(),
        },
        "stats": stats,
        "wall_clock_s": wall_clock_s,
        "outputs": outputs,
    });
    cleanup.track(&outputs.manifest);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&outputs.manifest, text + "\n")
        .map_err(|e| RunError::io(format!("cannot write {}", outputs.manifest.display()), e))?;
    cleanup.armed = false;
    Ok(RunSummary { stats, wall_clock_s, outputs, manifest })
}
