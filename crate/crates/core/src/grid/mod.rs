//! The cuboid matrix.
//!
//! Every ray segment deposits, in each cell its chord crosses, one
//! multipath component sampled where the ray passes closest to the cell
//! center. Rays that share an interaction history (the same path key) are
//! lattice neighbours of one physical path, so each cell keeps only the
//! component of that path whose ray passed nearest to its center.

mod dump;
mod metrics;
mod plane;

use std::cmp::Ordering;
use std::sync::Mutex;

use num_complex::Complex32;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::em::{FieldVec, WaveNumbers};
use crate::geometry::{Aabb, Vec3};
use crate::ray::{Segment, SegmentSink, Signature};
use crate::scene::AntennaPattern;

pub use dump::{read_grid, write_grid, GRID_MAGIC};
pub use metrics::PdpEntry;
pub use plane::{Quantity, ResultPlane};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("invalid grid configuration: {0}")]
    InvalidConfig(String),
    #[error("height {height} m lies outside the grid (z from {min} to {max} m)")]
    HeightOutOfBounds { height: f64, min: f64, max: f64 },
    #[error("position {0:?} lies outside the grid")]
    OutOfGrid([f64; 3]),
    #[error("malformed grid dump: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    /// Cuboid edge length (m).
    pub cuboid_m: f64,
    /// Coherence window (s).
    pub delta_t_s: f64,
    pub rx_antenna: AntennaPattern,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { cuboid_m: 0.5, delta_t_s: 1e-6, rx_antenna: AntennaPattern::isotropic() }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.cuboid_m > 0.0 && self.cuboid_m.is_finite()) {
            return Err(GridError::InvalidConfig(format!("cuboid edge must be > 0, got {}", self.cuboid_m)));
        }
        if !(self.delta_t_s > 0.0 && self.delta_t_s.is_finite()) {
            return Err(GridError::InvalidConfig(format!("Δt must be > 0, got {}", self.delta_t_s)));
        }
        if !self.rx_antenna.peak_gain_dbi.is_finite() {
            return Err(GridError::InvalidConfig("receiver antenna gain must be finite".into()));
        }
        Ok(())
    }
}

/// Cell layout: `nx·ny·nz` cubes of edge `cell` starting at `origin`.
/// Cell `(i, j, k)` has flat index `(k·ny + j)·nx + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: Vec3,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl GridGeometry {
    /// Tiles `bounds`; a partial last cell on an axis is extended to a full one.
    pub fn covering(bounds: &Aabb, cell: f64) -> Self {
        let e = bounds.extent();
        let n = |len: f64| ((len / cell) - 1e-9).ceil().max(1.0) as usize;
        GridGeometry { origin: bounds.min, cell, nx: n(e.x), ny: n(e.y), nz: n(e.z) }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn aabb(&self) -> Aabb {
        let size = Vec3::new(self.nx as f64, self.ny as f64, self.nz as f64) * self.cell;
        Aabb::new(self.origin, self.origin + size)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        (index % self.nx, (index / self.nx) % self.ny, index / (self.nx * self.ny))
    }

    pub fn center(&self, index: usize) -> Vec3 {
        let (i, j, k) = self.coords(index);
        self.origin + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.cell
    }

    fn axis_cell(&self, axis: usize, value: f64) -> Option<usize> {
        let n = self.dims()[axis];
        let u = (value - self.origin.get(axis)) / self.cell;
        if !(u >= 0.0 && u <= n as f64) {
            return None;
        }
        Some((u.floor() as usize).min(n - 1))
    }

    /// Cell containing `p`; points on the far faces belong to the last cell.
    pub fn locate(&self, p: Vec3) -> Option<usize> {
        Some(self.index(self.axis_cell(0, p.x)?, self.axis_cell(1, p.y)?, self.axis_cell(2, p.z)?))
    }

    /// Layer index containing height `z`.
    pub fn layer(&self, z: f64) -> Result<usize, GridError> {
        self.axis_cell(2, z).ok_or(GridError::HeightOutOfBounds {
            height: z,
            min: self.origin.z,
            max: self.origin.z + self.nz as f64 * self.cell,
        })
    }

    /// Visits every cell crossed by `origin + t·direction`, `t ∈ [t0, t1]`,
    /// with the entry and exit parameters of the chord. Cells touched only
    /// at a point or along an edge are skipped.
    pub fn traverse(&self, origin: Vec3, direction: Vec3, t0: f64, t1: f64, mut visit: impl FnMut(usize, f64, f64)) {
        let Some(slab) = self.aabb().slab(origin, direction) else {
            return;
        };
        let t_start = slab.t_enter.max(t0);
        let t_end = slab.t_exit.min(t1);
        if !(t_end > t_start) {
            return;
        }
        let p = origin + direction * t_start;
        let dims = self.dims();
        let mut idx = [0i64; 3];
        let mut step = [0i64; 3];
        let mut t_max = [f64::INFINITY; 3];
        let mut t_delta = [f64::INFINITY; 3];
        for a in 0..3 {
            let d = direction.get(a);
            let u = (p.get(a) - self.origin.get(a)) / self.cell;
            let mut i = u.floor() as i64;
            if d < 0.0 && u == u.floor() {
                i -= 1;
            }
            idx[a] = i.clamp(0, dims[a] as i64 - 1);
            if d > 0.0 {
                step[a] = 1;
                t_max[a] = (self.origin.get(a) + (idx[a] + 1) as f64 * self.cell - origin.get(a)) / d;
                t_delta[a] = self.cell / d;
            } else if d < 0.0 {
                step[a] = -1;
                t_max[a] = (self.origin.get(a) + idx[a] as f64 * self.cell - origin.get(a)) / d;
                t_delta[a] = -self.cell / d;
            }
        }
        let mut t_enter = t_start;
        loop {
            let axis = if t_max[0] <= t_max[1] && t_max[0] <= t_max[2] {
                0
            } else if t_max[1] <= t_max[2] {
                1
            } else {
                2
            };
            let t_exit = t_max[axis].min(t_end);
            if t_exit > t_enter + 1e-12 {
                visit(self.index(idx[0] as usize, idx[1] as usize, idx[2] as usize), t_enter, t_exit);
            }
            if t_exit >= t_end {
                break;
            }
            idx[axis] += step[axis];
            if idx[axis] < 0 || idx[axis] >= dims[axis] as i64 {
                break;
            }
            t_enter = t_enter.max(t_max[axis]);
            t_max[axis] += t_delta[axis];
        }
    }
}

/// One stored arrival.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipathComponent {
    /// Field at the sample point (V/m, RMS).
    pub field: [Complex32; 3],
    /// Arrival delay (s).
    pub delay_s: f64,
    pub path_key: u64,
    /// Propagation direction at arrival.
    pub arrival: [f32; 3],
    /// Distance from the sample point to the cell center (m).
    pub miss: f32,
    pub signature: Signature,
}

impl MultipathComponent {
    pub fn new(field: &FieldVec, delay_s: f64, arrival: Vec3, miss: f64, path_key: u64, signature: Signature) -> Self {
        let c = |z: num_complex::Complex64| Complex32::new(z.re as f32, z.im as f32);
        MultipathComponent {
            field: [c(field.0[0]), c(field.0[1]), c(field.0[2])],
            delay_s,
            path_key,
            arrival: [arrival.x as f32, arrival.y as f32, arrival.z as f32],
            miss: miss as f32,
            signature,
        }
    }

    pub fn field(&self) -> FieldVec {
        let c = |z: Complex32| num_complex::Complex64::new(z.re as f64, z.im as f64);
        FieldVec([c(self.field[0]), c(self.field[1]), c(self.field[2])])
    }

    pub fn arrival(&self) -> Vec3 {
        Vec3::new(self.arrival[0] as f64, self.arrival[1] as f64, self.arrival[2] as f64)
    }

    fn field_bits(&self) -> [u32; 6] {
        let f = &self.field;
        [
            f[0].re.to_bits(),
            f[0].im.to_bits(),
            f[1].re.to_bits(),
            f[1].im.to_bits(),
            f[2].re.to_bits(),
            f[2].im.to_bits(),
        ]
    }

    /// Total order used to pick one component per path and cell: nearest
    /// miss first, then earliest delay, then field bits.
    fn preference(&self, o: &MultipathComponent) -> Ordering {
        self.miss
            .total_cmp(&o.miss)
            .then(self.delay_s.total_cmp(&o.delay_s))
            .then_with(|| self.field_bits().cmp(&o.field_bits()))
    }
}

/// The cuboid matrix with per-cell component lists.
#[derive(Debug)]
pub struct FieldGrid {
    geometry: GridGeometry,
    config: GridConfig,
    wave: WaveNumbers,
    /// Each list is kept sorted by path key.
    cells: Vec<Mutex<Vec<MultipathComponent>>>,
}

impl FieldGrid {
    pub fn new(bounds: &Aabb, config: GridConfig, frequency_hz: f64) -> Result<Self, GridError> {
        config.validate()?;
        if !(frequency_hz > 0.0 && frequency_hz.is_finite()) {
            return Err(GridError::InvalidConfig(format!("frequency must be > 0, got {frequency_hz}")));
        }
        let geometry = GridGeometry::covering(bounds, config.cuboid_m);
        Self::with_geometry(geometry, config, frequency_hz)
    }

    pub fn with_geometry(geometry: GridGeometry, config: GridConfig, frequency_hz: f64) -> Result<Self, GridError> {
        if geometry.len() > u32::MAX as usize {
            return Err(GridError::InvalidConfig(format!("{} cells exceed the supported maximum", geometry.len())));
        }
        let cells = (0..geometry.len()).map(|_| Mutex::new(Vec::new())).collect();
        Ok(FieldGrid { geometry, config, wave: WaveNumbers::new(frequency_hz), cells })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn wave(&self) -> &WaveNumbers {
        &self.wave
    }

    /// Copy of the components stored in `cell`, ordered by delay then path key.
    pub fn components(&self, cell: usize) -> Vec<MultipathComponent> {
        let mut v = self.cells[cell].lock().expect("cell lock").clone();
        v.sort_by(|a, b| a.delay_s.total_cmp(&b.delay_s).then(a.path_key.cmp(&b.path_key)));
        v
    }

    pub fn component_count(&self, cell: usize) -> usize {
        self.cells[cell].lock().expect("cell lock").len()
    }

    pub fn total_components(&self) -> usize {
        self.cells.iter().map(|c| c.lock().expect("cell lock").len()).sum()
    }

    /// Cell containing `p`.
    pub fn cell_at(&self, p: Vec3) -> Result<usize, GridError> {
        self.geometry.locate(p).ok_or(GridError::OutOfGrid([p.x, p.y, p.z]))
    }

    /// Inserts `c` unless the cell already holds a preferred component of
    /// the same path.
    pub fn insert(&self, cell: usize, c: MultipathComponent) {
        let mut list = self.cells[cell].lock().expect("cell lock");
        match list.binary_search_by_key(&c.path_key, |x| x.path_key) {
            Ok(i) => {
                if c.preference(&list[i]) == Ordering::Less {
                    list[i] = c;
                }
            }
            Err(i) => list.insert(i, c),
        }
    }

    /// Deposits one segment into every cell its chord crosses.
    pub fn deposit(&self, seg: &Segment) {
        let geometry = self.geometry;
        geometry.traverse(seg.origin, seg.direction, 0.0, seg.length, |cell, t0, t1| {
            let center = geometry.center(cell);
            let t = (center - seg.origin).dot(seg.direction).clamp(t0, t1);
            let miss = center.distance(seg.point_at(t));
            let mut list = self.cells[cell].lock().expect("cell lock");
            let slot = list.binary_search_by_key(&seg.path_key, |x| x.path_key);
            if let Ok(i) = slot {
                if (miss as f32) > list[i].miss {
                    return;
                }
            }
            let c = MultipathComponent::new(
                &seg.field_at(t),
                seg.delay_at(t),
                seg.direction,
                miss,
                seg.path_key,
                seg.signature,
            );
            match slot {
                Ok(i) => {
                    if c.preference(&list[i]) == Ordering::Less {
                        list[i] = c;
                    }
                }
                Err(i) => list.insert(i, c),
            }
        });
    }

    /// Releases spare list capacity after tracing.
    pub fn shrink(&mut self) {
        for c in &mut self.cells {
            c.get_mut().expect("cell lock").shrink_to_fit();
        }
    }
}

impl SegmentSink for FieldGrid {
    fn accept(&self, segment: &Segment) {
        self.deposit(segment);
    }
}
