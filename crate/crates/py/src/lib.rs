//! Python bindings for `rlprop`.
//!
//! ```python
//! import rlprop
//! scene = rlprop.Scene.load("scenes/empty_room.json")
//! grid, stats = rlprop.simulate(scene, delta_theta=0.02, delta_phi=0.02)
//! grid.received_power(4.0, 2.0, 1.5)
//! ```

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rlprop::analysis::{self, MeasurementPoint, MeasurementSet, RunConfig, RunError};
use rlprop::em;
use rlprop::grid::{self as grid_mod, GridError, Quantity};
use rlprop::ray::{Execution, LaunchConfig, TraceStats};
use rlprop::scene::{self, AntennaKind, AntennaPattern, MaterialSpec, SceneError};
use rlprop::Vec3;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn run_err(e: RunError) -> PyErr {
    match e {
        RunError::Io { .. } => PyOSError::new_err(e.to_string()),
        RunError::Runtime(_) => PyRuntimeError::new_err(e.to_string()),
        RunError::Grid(GridError::Io(_)) => PyOSError::new_err(e.to_string()),
        _ => value_err(e),
    }
}

fn grid_err(e: GridError) -> PyErr {
    run_err(RunError::Grid(e))
}

fn scene_err(e: SceneError) -> PyErr {
    match e {
        SceneError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => value_err(e),
    }
}

fn antenna(kind: &str, peak_gain_dbi: Option<f64>) -> PyResult<AntennaPattern> {
    let base = match kind {
        "isotropic" => AntennaPattern::isotropic(),
        "monopole" => AntennaPattern::monopole(),
        other => return Err(value_err(format!("unknown antenna kind '{other}'"))),
    };
    Ok(AntennaPattern { peak_gain_dbi: peak_gain_dbi.unwrap_or(base.peak_gain_dbi), ..base })
}

fn quantity(name: &str) -> PyResult<Quantity> {
    match name {
        "power" => Ok(Quantity::Power),
        "delay_spread" => Ok(Quantity::DelaySpread),
        other => Err(value_err(format!("quantity must be 'power' or 'delay_spread', got '{other}'"))),
    }
}

fn stats_dict<'py>(py: Python<'py>, s: &TraceStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("rays_launched", s.rays_launched)?;
    d.set_item("segments", s.segments)?;
    d.set_item("reflected_children", s.reflected_children)?;
    d.set_item("transmitted_children", s.transmitted_children)?;
    d.set_item("diffracted_children", s.diffracted_children)?;
    Ok(d)
}

/// A validated propagation scene.
#[pyclass(frozen, module = "rlprop")]
struct Scene {
    inner: scene::Scene,
}

#[pymethods]
impl Scene {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        scene::load_scene(&path).map(|inner| Scene { inner }).map_err(scene_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        scene::parse_scene(text, "<string>").map(|inner| Scene { inner }).map_err(scene_err)
    }

    fn to_json(&self) -> String {
        scene::scene_to_json(&self.inner)
    }

    /// `((xmin, ymin, zmin), (xmax, ymax, zmax))`
    #[getter]
    fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        let b = self.inner.bounds;
        (b.min.into(), b.max.into())
    }

    #[getter]
    fn obstacle_count(&self) -> usize {
        self.inner.obstacles.len()
    }

    #[getter]
    fn human_count(&self) -> usize {
        self.inner.humans.len()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        scene::enumerate_edges(&self.inner).len()
    }

    /// One dict per transmitter.
    #[getter]
    fn transmitters<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .transmitters
            .iter()
            .map(|t| {
                let d = PyDict::new(py);
                d.set_item("position", <[f64; 3]>::from(t.position))?;
                d.set_item("power_dbm", t.power_dbm)?;
                d.set_item("frequency_hz", t.frequency_hz)?;
                d.set_item(
                    "antenna",
                    match t.antenna.kind {
                        AntennaKind::Isotropic => "isotropic",
                        AntennaKind::Monopole => "monopole",
                    },
                )?;
                d.set_item("peak_gain_dbi", t.antenna.peak_gain_dbi)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        let b = self.inner.bounds.extent();
        format!(
            "Scene({} x {} x {} m, {} obstacles, {} humans, {} transmitters)",
            b.x,
            b.y,
            b.z,
            self.inner.obstacles.len(),
            self.inner.humans.len(),
            self.inner.transmitters.len()
        )
    }
}

/// Cuboid matrix of multipath components.
#[pyclass(frozen, module = "rlprop")]
struct FieldGrid {
    inner: grid_mod::FieldGrid,
}

impl FieldGrid {
    fn cell(&self, x: f64, y: f64, z: f64) -> PyResult<usize> {
        self.inner.cell_at(Vec3::new(x, y, z)).map_err(grid_err)
    }
}

#[pymethods]
impl FieldGrid {
    /// Reads a grid dump written by `save` or the command-line simulator.
    #[staticmethod]
    fn load(py: Python<'_>, path: PathBuf) -> PyResult<Self> {
        py.detach(|| grid_mod::read_grid(&path)).map(|inner| FieldGrid { inner }).map_err(grid_err)
    }

    fn save(&self, py: Python<'_>, path: PathBuf) -> PyResult<()> {
        py.detach(|| grid_mod::write_grid(&self.inner, &path)).map_err(grid_err)
    }

    /// `(nx, ny, nz)`
    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.geometry().dims()
    }

    #[getter]
    fn cell_size(&self) -> f64 {
        self.inner.geometry().cell
    }

    #[getter]
    fn origin(&self) -> [f64; 3] {
        self.inner.geometry().origin.into()
    }

    #[getter]
    fn frequency_hz(&self) -> f64 {
        self.inner.wave().frequency_hz
    }

    #[getter]
    fn total_components(&self) -> usize {
        self.inner.total_components()
    }

    /// Received power (dBm) of the cell containing the point; `-inf` where no ray arrived.
    fn received_power(&self, x: f64, y: f64, z: f64) -> PyResult<f64> {
        Ok(self.inner.received_power_dbm(self.cell(x, y, z)?))
    }

    /// First-to-last arrival spread (ns), or `None` where no ray arrived.
    fn delay_spread(&self, x: f64, y: f64, z: f64) -> PyResult<Option<f64>> {
        Ok(self.inner.delay_spread_ns(self.cell(x, y, z)?))
    }

    /// `[(delay_ns, power_dbm), ...]` sorted by delay.
    fn pdp(&self, x: f64, y: f64, z: f64) -> PyResult<Vec<(f64, f64)>> {
        Ok(self.inner.pdp(self.cell(x, y, z)?).into_iter().map(|e| (e.delay_ns, e.power_dbm)).collect())
    }

    /// Complex field vectors `[(ex, ey, ez), ...]` (V/m, RMS) of the cell's components.
    fn fields(&self, x: f64, y: f64, z: f64) -> PyResult<Vec<[Complex64; 3]>> {
        Ok(self.inner.components(self.cell(x, y, z)?).iter().map(|c| c.field().0).collect())
    }

    /// Horizontal layer as a dict with `x`, `y`, `z`, `layer` and row-major
    /// `values[j][i]`. No-data is `-inf` for power and `nan` for delay spread.
    #[pyo3(signature = (height, quantity = "power"))]
    fn slice<'py>(&self, py: Python<'py>, height: f64, quantity: &str) -> PyResult<Bound<'py, PyDict>> {
        let plane = self.inner.plane_slice(height, self::quantity(quantity)?).map_err(grid_err)?;
        let rows: Vec<Vec<f64>> = plane.values.chunks(plane.nx.max(1)).map(<[f64]>::to_vec).collect();
        let d = PyDict::new(py);
        d.set_item("quantity", plane.quantity.column())?;
        d.set_item("x", plane.x)?;
        d.set_item("y", plane.y)?;
        d.set_item("z", plane.z)?;
        d.set_item("layer", plane.layer)?;
        d.set_item("values", rows)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let [nx, ny, nz] = self.dims();
        format!("FieldGrid({nx} x {ny} x {nz} cells of {} m, {} components)", self.cell_size(), self.total_components())
    }
}

/// Air-to-material Fresnel coefficients as a dict of complex numbers
/// (`gamma_s`, `gamma_p`, `t_s`, `t_p`).
#[pyfunction]
#[pyo3(signature = (eps_r, sigma, frequency_hz, theta_i, pec = false))]
fn fresnel_coefficients<'py>(
    py: Python<'py>,
    eps_r: f64,
    sigma: f64,
    frequency_hz: f64,
    theta_i: f64,
    pec: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let material = MaterialSpec { pec, ..MaterialSpec::new("custom", eps_r, sigma) };
    material.validate().map_err(scene_err)?;
    let c = em::fresnel_coefficients(&material, frequency_hz, theta_i);
    let d = PyDict::new(py);
    d.set_item("gamma_s", c.gamma_s)?;
    d.set_item("gamma_p", c.gamma_p)?;
    d.set_item("t_s", c.t_s)?;
    d.set_item("t_p", c.t_p)?;
    Ok(d)
}

/// Linear antenna gain toward `direction`.
#[pyfunction]
#[pyo3(signature = (kind, direction, peak_gain_dbi = None))]
fn antenna_gain(kind: &str, direction: [f64; 3], peak_gain_dbi: Option<f64>) -> PyResult<f64> {
    Ok(em::antenna_gain(&antenna(kind, peak_gain_dbi)?, Vec3::from(direction)))
}

/// Unit launch directions of the angular lattice.
#[pyfunction]
fn launch_directions(delta_theta: f64, delta_phi: f64) -> PyResult<Vec<[f64; 3]>> {
    let cfg = LaunchConfig { delta_theta, delta_phi, ..LaunchConfig::default() };
    cfg.validate().map_err(value_err)?;
    Ok(rlprop::ray::launch_directions(&cfg).into_iter().map(Into::into).collect())
}

/// Traces every transmitter of `scene` and returns `(grid, stats)`.
#[pyfunction]
#[pyo3(signature = (
    scene,
    *,
    delta_theta = std::f64::consts::PI / 180.0,
    delta_phi = std::f64::consts::PI / 180.0,
    max_reflections = 6,
    max_transmissions = 3,
    max_diffractions = 1,
    power_floor_db = -150.0,
    diffraction = true,
    delta_t_s = 1e-6,
    cuboid_m = 0.5,
    rx_antenna = "isotropic",
    deterministic = false,
))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    scene: &Scene,
    delta_theta: f64,
    delta_phi: f64,
    max_reflections: u32,
    max_transmissions: u32,
    max_diffractions: u32,
    power_floor_db: f64,
    diffraction: bool,
    delta_t_s: f64,
    cuboid_m: f64,
    rx_antenna: &str,
    deterministic: bool,
) -> PyResult<(FieldGrid, Bound<'py, PyDict>)> {
    let cfg = RunConfig {
        delta_theta_rad: delta_theta,
        delta_phi_rad: delta_phi,
        max_reflections,
        max_transmissions,
        max_diffractions,
        power_floor_db,
        diffraction,
        delta_t_s,
        cuboid_m,
        rx_antenna: antenna(rx_antenna, None)?,
        ..RunConfig::for_scene("")
    };
    cfg.validate().map_err(run_err)?;
    let execution = if deterministic { Execution::Deterministic } else { Execution::Parallel };
    let (grid, stats) = py.detach(|| analysis::simulate(&scene.inner, &cfg, execution)).map_err(run_err)?;
    Ok((FieldGrid { inner: grid }, stats_dict(py, &stats)?))
}

/// Runs a configuration file end to end and returns the manifest as a dict.
#[pyfunction]
#[pyo3(signature = (config, out_dir, deterministic = false, workers = None))]
fn run<'py>(
    py: Python<'py>,
    config: PathBuf,
    out_dir: PathBuf,
    deterministic: bool,
    workers: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let execution = if deterministic { Execution::Deterministic } else { Execution::Parallel };
    let summary = py.detach(|| analysis::run(&config, &out_dir, execution, workers)).map_err(run_err)?;
    py.import("json")?.call_method1("loads", (summary.manifest.to_string(),))
}

/// Mean absolute error and population std of signed errors, or `None` for no input.
#[pyfunction]
fn error_statistics(errors: Vec<f64>) -> Option<(f64, f64, usize)> {
    analysis::error_statistics(&errors).map(|s| (s.mean_abs_error_db, s.std_db, s.count))
}

/// Compares `[(x, y, z, power_dbm), ...]` against the grid.
#[pyfunction]
fn compare<'py>(
    py: Python<'py>,
    grid: &FieldGrid,
    measurements: Vec<(f64, f64, f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let set = MeasurementSet {
        points: measurements
            .into_iter()
            .map(|(x, y, z, p)| MeasurementPoint { position: Vec3::new(x, y, z), power_dbm: p })
            .collect(),
        metadata: Vec::new(),
    };
    let report = analysis::compare(&grid.inner, &set).map_err(run_err)?;
    let d = PyDict::new(py);
    let points: Vec<(f64, Option<f64>, Option<f64>)> =
        report.points.iter().map(|p| (p.measured_dbm, p.simulated_dbm, p.error_db)).collect();
    d.set_item("points", points)?;
    d.set_item("flagged", report.flagged)?;
    match report.statistics {
        Some(s) => {
            d.set_item("mean_abs_error_db", s.mean_abs_error_db)?;
            d.set_item("std_db", s.std_db)?;
            d.set_item("count", s.count)?;
        }
        None => d.set_item("count", 0)?,
    }
    Ok(d)
}

/// Coverage of one layer: dict with `covered`, `reached`, `fraction` and a
/// row-major `mask[j][i]` of `True`/`False`/`None`.
#[pyfunction]
fn coverage<'py>(py: Python<'py>, grid: &FieldGrid, sensitivity_dbm: f64, height: f64) -> PyResult<Bound<'py, PyDict>> {
    let c = analysis::coverage(&grid.inner, sensitivity_dbm, height).map_err(run_err)?;
    let rows: Vec<Vec<Option<bool>>> = c.mask.chunks(c.power.nx.max(1)).map(<[Option<bool>]>::to_vec).collect();
    let d = PyDict::new(py);
    d.set_item("covered", c.covered)?;
    d.set_item("reached", c.reached)?;
    d.set_item("fraction", c.fraction)?;
    d.set_item("mask", rows)?;
    Ok(d)
}

/// Watts to dBm and back, for convenience.
#[pyfunction]
fn watts_to_dbm(w: f64) -> f64 {
    em::watts_to_dbm(w)
}

#[pyfunction]
fn dbm_to_watts(dbm: f64) -> f64 {
    em::dbm_to_watts(dbm)
}

#[pymodule]
#[pyo3(name = "rlprop")]
fn rlprop_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scene>()?;
    m.add_class::<FieldGrid>()?;
    m.add_function(wrap_pyfunction!(fresnel_coefficients, m)?)?;
    m.add_function(wrap_pyfunction!(antenna_gain, m)?)?;
    m.add_function(wrap_pyfunction!(launch_directions, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(error_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    m.add_function(wrap_pyfunction!(watts_to_dbm, m)?)?;
    m.add_function(wrap_pyfunction!(dbm_to_watts, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
