use std::f64::consts::PI;

use super::LaunchConfig;
use crate::geometry::Vec3;

const LATTICE_EPS: f64 = 1e-9;

/// One launch direction with its position in the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaunchDirection {
    pub direction: Vec3,
    /// Ring index: 0 is the north pole, `rings + 1` the south pole.
    pub theta_index: u32,
    pub phi_index: u32,
}

/// The spherical launch lattice: both poles plus interior rings
/// `θ = iΔθ < π` at azimuths `φ = jΔφ < 2π`.
#[derive(Debug, Clone)]
pub struct LaunchLattice {
    delta_theta: f64,
    delta_phi: f64,
    rings: u32,
    per_ring: u32,
}

impl LaunchLattice {
    pub fn new(cfg: &LaunchConfig) -> Self {
        let rings = count_below(cfg.delta_theta, PI) - 1;
        let per_ring = count_below(cfg.delta_phi, 2.0 * PI);
        LaunchLattice { delta_theta: cfg.delta_theta, delta_phi: cfg.delta_phi, rings, per_ring }
    }

    pub fn len(&self) -> usize {
        self.rings as usize * self.per_ring as usize + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lattice order: north pole, rings by increasing θ (each by increasing
    /// φ), south pole.
    pub fn get(&self, index: usize) -> LaunchDirection {
        let last = self.len() - 1;
        if index == 0 {
            return LaunchDirection { direction: Vec3::Z, theta_index: 0, phi_index: 0 };
        }
        if index == last {
            return LaunchDirection { direction: -Vec3::Z, theta_index: self.rings + 1, phi_index: 0 };
        }
        let i = (index - 1) / self.per_ring as usize;
        let j = (index - 1) % self.per_ring as usize;
        let theta = (i + 1) as f64 * self.delta_theta;
        let phi = j as f64 * self.delta_phi;
        LaunchDirection { direction: Vec3::from_spherical(theta, phi), theta_index: i as u32 + 1, phi_index: j as u32 }
    }

    fn index_of(&self, theta_index: u32, phi_index: u32) -> usize {
        if theta_index == 0 {
            0
        } else if theta_index > self.rings {
            self.len() - 1
        } else {
            1 + (theta_index as usize - 1) * self.per_ring as usize + phi_index as usize
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = LaunchDirection> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    /// Index of the lattice direction closest to `direction`. Exact ties go
    /// to the lower index.
    pub fn nearest(&self, direction: Vec3) -> usize {
        let d = direction.normalized();
        let theta = d.z.clamp(-1.0, 1.0).acos();
        let phi = d.y.atan2(d.x).rem_euclid(2.0 * PI);
        let i0 = (theta / self.delta_theta).floor() as i64;
        let j0 = (phi / self.delta_phi).floor() as i64;
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        let mut consider = |idx: usize| {
            let dot = self.get(idx).direction.dot(d);
            if dot > best.0 || (dot == best.0 && idx < best.1) {
                best = (dot, idx);
            }
        };
        consider(0);
        consider(self.len() - 1);
        for i in [i0, i0 + 1] {
            if i < 1 || i > self.rings as i64 {
                continue;
            }
            for j in [j0, j0 + 1] {
                let j = j.rem_euclid(self.per_ring as i64) as u32;
                consider(self.index_of(i as u32, j));
            }
        }
        best.1
    }
}

fn count_below(step: f64, limit: f64) -> u32 {
    let mut n = 0u32;
    while (n as f64) * step < limit - LATTICE_EPS {
        n += 1;
    }
    n
}

/// All launch directions in lattice order.
pub fn launch_directions(cfg: &LaunchConfig) -> Vec<Vec3> {
    LaunchLattice::new(cfg).iter().map(|l| l.direction).collect()
}
