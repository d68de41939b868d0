//! Binary PPM (P6) heatmaps, one pixel per cell, north (max y) up.
//!
//! A value `v` maps to `c = clamp((v − min)/(max − min), 0, 1)` and then
//! linearly through blue (0) → cyan (0.25) → green (0.5) → yellow (0.75) →
//! red (1); channels are `round(255·x)`. No-data cells are black.

use std::fs;
use std::path::{Path, PathBuf};

use super::RunError;
use crate::grid::ResultPlane;

const STOPS: [[f64; 3]; 5] = [[0.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [1.0, 0.0, 0.0]];

/// Color of normalized value `c ∈ [0, 1]`.
pub fn ramp(c: f64) -> [u8; 3] {
    let c = c.clamp(0.0, 1.0) * 4.0;
    let k = (c.floor() as usize).min(3);
    let f = c - k as f64;
    let mut out = [0u8; 3];
    for (ch, o) in out.iter_mut().enumerate() {
        let v = STOPS[k][ch] + (STOPS[k + 1][ch] - STOPS[k][ch]) * f;
        *o = (255.0 * v).round() as u8;
    }
    out
}

pub fn render_ppm(plane: &ResultPlane, min: f64, max: f64) -> Result<Vec<u8>, RunError> {
    if plane.values.is_empty() {
        return Err(RunError::Config("cannot render an empty plane".into()));
    }
    if !(min < max && min.is_finite() && max.is_finite()) {
        return Err(RunError::Config(format!("invalid color scale [{min}, {max}]")));
    }
    let mut out = format!("P6\n{} {}\n255\n", plane.nx, plane.ny).into_bytes();
    for j in (0..plane.ny).rev() {
        for i in 0..plane.nx {
            let v = plane.value(i, j);
            if ResultPlane::is_no_data(v) {
                out.extend_from_slice(&[0, 0, 0]);
            } else {
                out.extend_from_slice(&ramp((v - min) / (max - min)));
            }
        }
    }
    Ok(out)
}

pub(crate) fn sidecar_path(image: &Path) -> PathBuf {
    image.with_extension("scale.txt")
}

/// Writes the image and a `<name>.scale.txt` sidecar with the scale limits.
pub fn export_heatmap(plane: &ResultPlane, path: impl AsRef<Path>, min: f64, max: f64) -> Result<PathBuf, RunError> {
    let path = path.as_ref();
    let bytes = render_ppm(plane, min, max)?;
    fs::write(path, bytes).map_err(|e| RunError::io(format!("cannot write {}", path.display()), e))?;
    let sidecar = sidecar_path(path);
    let text = format!(
        "quantity {}\nmin {min}\nmax {max}\nramp blue,cyan,green,yellow,red\nno_data black\n",
        plane.quantity.column()
    );
    fs::write(&sidecar, text).map_err(|e| RunError::io(format!("cannot write {}", sidecar.display()), e))?;
    Ok(sidecar)
}
