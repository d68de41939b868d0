use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FieldGrid, GridError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// Received power (dBm); `−∞` marks cells no ray reached.
    Power,
    /// Delay spread (ns); NaN marks cells no ray reached.
    DelaySpread,
}

impl Quantity {
    pub fn column(&self) -> &'static str {
        match self {
            Quantity::Power => "power_dbm",
            Quantity::DelaySpread => "delay_spread_ns",
        }
    }
}

/// A horizontal layer of one derived quantity. `values` is row-major with
/// x varying fastest: `values[j·nx + i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultPlane {
    pub quantity: Quantity,
    pub height_m: f64,
    pub layer: usize,
    pub nx: usize,
    pub ny: usize,
    /// Cell-center x coordinates (nx entries).
    pub x: Vec<f64>,
    /// Cell-center y coordinates (ny entries).
    pub y: Vec<f64>,
    /// Cell-center height of the layer.
    pub z: f64,
    pub values: Vec<f64>,
}

impl ResultPlane {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn is_no_data(v: f64) -> bool {
        !v.is_finite()
    }

    pub fn data_count(&self) -> usize {
        self.values.iter().filter(|v| !Self::is_no_data(**v)).count()
    }

    /// `x,y,z,<quantity>` rows, no-data written as `nan`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("x,y,z,{}\n", self.quantity.column());
        for j in 0..self.ny {
            for i in 0..self.nx {
                let v = self.value(i, j);
                let _ = if Self::is_no_data(v) {
                    writeln!(out, "{},{},{},nan", self.x[i], self.y[j], self.z)
                } else {
                    writeln!(out, "{},{},{},{}", self.x[i], self.y[j], self.z, v)
                };
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<(), GridError> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }
}

impl FieldGrid {
    /// The layer containing `height` (a height on the top face selects the
    /// top layer).
    pub fn plane_slice(&self, height: f64, quantity: Quantity) -> Result<ResultPlane, GridError> {
        let g = self.geometry;
        let layer = g.layer(height)?;
        let mut values = Vec::with_capacity(g.nx * g.ny);
        for j in 0..g.ny {
            for i in 0..g.nx {
                let cell = g.index(i, j, layer);
                values.push(match quantity {
                    Quantity::Power => self.received_power_dbm(cell),
                    Quantity::DelaySpread => self.delay_spread_ns(cell).unwrap_or(f64::NAN),
                });
            }
        }
        let center = |axis_origin: f64, n: usize| (0..n).map(|i| axis_origin + (i as f64 + 0.5) * g.cell).collect();
        Ok(ResultPlane {
            quantity,
            height_m: height,
            layer,
            nx: g.nx,
            ny: g.ny,
            x: center(g.origin.x, g.nx),
            y: center(g.origin.y, g.ny),
            z: g.origin.z + (layer as f64 + 0.5) * g.cell,
            values,
        })
    }
}
