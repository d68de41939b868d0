//! Binary grid dump, all values little-endian:
//!
//! ```text
//! magic        8 bytes  "RLGRID\0\x01"
//! nx, ny, nz   u32 × 3
//! origin       f64 × 3
//! cell         f64
//! frequency    f64      Hz
//! delta_t      f64      s
//! rx antenna   u8 kind (0 isotropic, 1 monopole), f64 peak gain dBi
//! cells        u64      number of non-empty cells that follow
//! per cell     u32 index, u32 count, then count records of
//!              field re/im f32 × 6, delay f64, path key u64,
//!              arrival f32 × 3, miss f32, reflections u8,
//!              transmissions u8, diffractions u8
//! ```
//!
//! Cells appear in index order, components in path-key order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex32;

use super::{FieldGrid, GridConfig, GridError, GridGeometry, MultipathComponent};
use crate::geometry::Vec3;
use crate::ray::Signature;
use crate::scene::{AntennaKind, AntennaPattern};

pub const GRID_MAGIC: [u8; 8] = *b"RLGRID\0\x01";

pub fn write_grid(grid: &FieldGrid, path: impl AsRef<Path>) -> Result<(), GridError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_to(grid, &mut w)?;
    w.flush()?;
    Ok(())
}

fn write_to(grid: &FieldGrid, w: &mut impl Write) -> Result<(), GridError> {
    let g = grid.geometry;
    w.write_all(&GRID_MAGIC)?;
    for n in [g.nx, g.ny, g.nz] {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for v in [g.origin.x, g.origin.y, g.origin.z, g.cell, grid.wave.frequency_hz, grid.config.delta_t_s] {
        w.write_all(&v.to_le_bytes())?;
    }
    let kind: u8 = match grid.config.rx_antenna.kind {
        AntennaKind::Isotropic => 0,
        AntennaKind::Monopole => 1,
    };
    w.write_all(&[kind])?;
    w.write_all(&grid.config.rx_antenna.peak_gain_dbi.to_le_bytes())?;
    let lists: Vec<_> = grid.cells.iter().map(|c| c.lock().expect("cell lock")).collect();
    let non_empty = lists.iter().filter(|l| !l.is_empty()).count() as u64;
    w.write_all(&non_empty.to_le_bytes())?;
    for (index, list) in lists.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        w.write_all(&(index as u32).to_le_bytes())?;
        w.write_all(&(list.len() as u32).to_le_bytes())?;
        for c in list.iter() {
            for z in c.field {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
            w.write_all(&c.delay_s.to_le_bytes())?;
            w.write_all(&c.path_key.to_le_bytes())?;
            for a in c.arrival {
                w.write_all(&a.to_le_bytes())?;
            }
            w.write_all(&c.miss.to_le_bytes())?;
            w.write_all(&[c.signature.reflections, c.signature.transmissions, c.signature.diffractions])?;
        }
    }
    Ok(())
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], GridError> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => GridError::Format("truncated file".into()),
            _ => GridError::Io(e),
        })?;
        Ok(b)
    }
    fn u8(&mut self) -> Result<u8, GridError> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> Result<u32, GridError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64, GridError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f32(&mut self) -> Result<f32, GridError> {
        Ok(f32::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64, GridError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<FieldGrid, GridError> {
    let mut r = Reader { inner: BufReader::new(File::open(path)?) };
    if r.bytes::<8>()? != GRID_MAGIC {
        return Err(GridError::Format("bad magic; not a grid dump".into()));
    }
    let (nx, ny, nz) = (r.u32()? as usize, r.u32()? as usize, r.u32()? as usize);
    let origin = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
    let cell = r.f64()?;
    let frequency = r.f64()?;
    let delta_t = r.f64()?;
    let kind = match r.u8()? {
        0 => AntennaKind::Isotropic,
        1 => AntennaKind::Monopole,
        k => return Err(GridError::Format(format!("unknown antenna kind {k}"))),
    };
    let gain = r.f64()?;
    let config =
        GridConfig { cuboid_m: cell, delta_t_s: delta_t, rx_antenna: AntennaPattern { kind, peak_gain_dbi: gain } };
    config.validate().map_err(|e| GridError::Format(e.to_string()))?;
    let geometry = GridGeometry { origin, cell, nx, ny, nz };
    let mut grid = FieldGrid::with_geometry(geometry, config, frequency)?;
    let cells = r.u64()?;
    let mut last: Option<usize> = None;
    for _ in 0..cells {
        let index = r.u32()? as usize;
        if index >= geometry.len() || last.is_some_and(|l| index <= l) {
            return Err(GridError::Format(format!("cell index {index} out of order or range")));
        }
        last = Some(index);
        let count = r.u32()? as usize;
        let list = grid.cells[index].get_mut().expect("cell lock");
        list.reserve_exact(count);
        for _ in 0..count {
            let mut field = [Complex32::new(0.0, 0.0); 3];
            for z in &mut field {
                *z = Complex32::new(r.f32()?, r.f32()?);
            }
            let delay_s = r.f64()?;
            let path_key = r.u64()?;
            let arrival = [r.f32()?, r.f32()?, r.f32()?];
            let miss = r.f32()?;
            let signature = Signature { reflections: r.u8()?, transmissions: r.u8()?, diffractions: r.u8()? };
            if list.last().is_some_and(|p: &MultipathComponent| p.path_key >= path_key) {
                return Err(GridError::Format(format!("cell {index}: components not in key order")));
            }
            list.push(MultipathComponent { field, delay_s, path_key, arrival, miss, signature });
        }
    }
    if r.inner.read(&mut [0u8; 1])? != 0 {
        return Err(GridError::Format("trailing bytes".into()));
    }
    Ok(grid)
}
