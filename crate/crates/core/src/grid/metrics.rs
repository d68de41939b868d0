use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{FieldGrid, MultipathComponent};
use crate::em::{antenna_gain, received_power_watts, watts_to_dbm, FieldVec, ETA0};

/// One power delay profile entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdpEntry {
    pub delay_ns: f64,
    pub power_dbm: f64,
}

impl FieldGrid {
    fn rx_weight(&self, c: &MultipathComponent) -> f64 {
        antenna_gain(&self.config.rx_antenna, c.arrival()).sqrt()
    }

    /// Received power in `cell` (W). Components are binned into consecutive
    /// Δt windows from the earliest arrival; fields add coherently within a
    /// bin (weighted by the receive amplitude pattern), powers add across
    /// bins.
    pub fn received_power_watts(&self, cell: usize) -> f64 {
        let comps = self.components(cell);
        let Some(first) = comps.first() else {
            return 0.0;
        };
        let t0 = first.delay_s;
        let mut bins: BTreeMap<u64, FieldVec> = BTreeMap::new();
        for c in &comps {
            let bin = ((c.delay_s - t0) / self.config.delta_t_s).floor() as u64;
            *bins.entry(bin).or_default() += c.field() * Complex64::new(self.rx_weight(c), 0.0);
        }
        bins.values().map(|e| received_power_watts(e, &self.wave, 1.0)).sum()
    }

    /// Received power in dBm; `−∞` for an empty cell or full cancellation.
    pub fn received_power_dbm(&self, cell: usize) -> f64 {
        watts_to_dbm(self.received_power_watts(cell))
    }

    /// First-to-last arrival spread (ns); `None` for an empty cell.
    pub fn delay_spread_ns(&self, cell: usize) -> Option<f64> {
        let list = self.cells[cell].lock().expect("cell lock");
        let min = list.iter().map(|c| c.delay_s).min_by(f64::total_cmp)?;
        let max = list.iter().map(|c| c.delay_s).max_by(f64::total_cmp)?;
        Some((max - min) * 1e9)
    }

    /// Per-component delay and received power, sorted by delay.
    pub fn pdp(&self, cell: usize) -> Vec<PdpEntry> {
        self.components(cell)
            .iter()
            .map(|c| {
                let g = antenna_gain(&self.config.rx_antenna, c.arrival());
                PdpEntry {
                    delay_ns: c.delay_s * 1e9,
                    power_dbm: watts_to_dbm(received_power_watts(&c.field(), &self.wave, g)),
                }
            })
            .collect()
    }

    /// Upper bound on the coherent bin sum: `(Σ|E_i|)²` through the aperture (W).
    pub fn coherent_bound_watts(&self, cell: usize) -> f64 {
        let amp: f64 = self.components(cell).iter().map(|c| self.rx_weight(c) * c.field().norm()).sum();
        amp * amp / ETA0 * self.wave.aperture(1.0)
    }
}
