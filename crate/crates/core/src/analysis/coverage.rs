use std::fmt::Write as _;

use serde::Serialize;

use super::RunError;
use crate::grid::{FieldGrid, Quantity, ResultPlane};

/// Cells of one layer whose received power meets a sensitivity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageMask {
    pub sensitivity_dbm: f64,
    pub power: ResultPlane,
    /// Row-major like the plane; `None` where no ray arrived.
    pub mask: Vec<Option<bool>>,
    pub covered: usize,
    pub reached: usize,
    /// `covered / reached`, 0 when nothing was reached.
    pub fraction: f64,
}

impl CoverageMask {
    pub fn to_csv(&self) -> String {
        let p = &self.power;
        let mut out = String::from("x,y,z,covered\n");
        for j in 0..p.ny {
            for i in 0..p.nx {
                let v = match self.mask[j * p.nx + i] {
                    Some(true) => "1",
                    Some(false) => "0",
                    None => "nan",
                };
                let _ = writeln!(out, "{},{},{},{}", p.x[i], p.y[j], p.z, v);
            }
        }
        out
    }
}

pub fn coverage(grid: &FieldGrid, sensitivity_dbm: f64, height: f64) -> Result<CoverageMask, RunError> {
    if sensitivity_dbm.is_nan() {
        return Err(RunError::Config("sensitivity must be a number".into()));
    }
    let power = grid.plane_slice(height, Quantity::Power)?;
    let mask: Vec<Option<bool>> =
        power.values.iter().map(|&v| (!ResultPlane::is_no_data(v)).then_some(v >= sensitivity_dbm)).collect();
    let reached = mask.iter().filter(|m| m.is_some()).count();
    let covered = mask.iter().filter(|m| **m == Some(true)).count();
    let fraction = if reached == 0 { 0.0 } else { covered as f64 / reached as f64 };
    Ok(CoverageMask { sensitivity_dbm, power, mask, covered, reached, fraction })
}
