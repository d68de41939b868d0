use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use super::{path_key, Amplitude, EdgeSource, PathEvent, RayState, Segment, Signature, TraceStats, Tracer};
use crate::em::{self, phase};
use crate::geometry::{Vec3, EPS_GEOM};
use crate::scene::Wedge;

/// Rays closer than this to grazing the edge (sin β0) do not diffract.
const MIN_SIN_BETA: f64 = 1e-3;
/// Incident directions this close to a wedge face are skipped (rad).
const FACE_GUARD: f64 = 1e-6;

/// Closest point of `wedge` to the ray line, with the ray parameter there and
/// the miss distance.
fn closest_on_edge(wedge: &Wedge, origin: Vec3, direction: Vec3) -> Option<(Vec3, f64, f64)> {
    let e = wedge.direction;
    let b = e.dot(direction);
    let denom = 1.0 - b * b;
    if denom < 1e-12 {
        return None;
    }
    let w = wedge.start - origin;
    let u = ((b * w.dot(direction) - w.dot(e)) / denom).clamp(0.0, wedge.length());
    let q = wedge.start + e * u;
    let t = (q - origin).dot(direction);
    let miss = (q - origin - direction * t).norm();
    Some((q, t, miss))
}

impl Tracer<'_> {
    /// Spawns diffracted fans from wedges the launch ray passes within half a
    /// lattice cell of. A diffraction point is claimed only by the lattice ray
    /// nearest to it, and only when the transmitter sees it.
    pub(super) fn diffract(&self, index: usize, ray: &RayState, t_hit: f64, stats: &mut TraceStats) {
        let spec = &self.scene.transmitters[self.tx as usize];
        let half_cell = self.cfg.delta_theta.max(self.cfg.delta_phi) / SQRT_2;
        for wedge in &self.wedges {
            let Some((q, t, miss)) = closest_on_edge(wedge, ray.origin, ray.direction) else {
                continue;
            };
            let h = t * half_cell;
            if t <= EPS_GEOM || t > t_hit + h || miss > h {
                continue;
            }
            let to_q = q - spec.position;
            let s_prime = to_q.norm();
            let incidence = to_q / s_prime;
            if wedge.direction.cross(incidence).norm() < MIN_SIN_BETA {
                continue;
            }
            let phi_in = wedge.angle_of(wedge.perpendicular(-incidence));
            if phi_in < FACE_GUARD || phi_in > wedge.n * PI - FACE_GUARD {
                continue;
            }
            if self.lattice.nearest(incidence) != index {
                continue;
            }
            if self.scene.intersect(spec.position, incidence).distance < s_prime - 1e-6 {
                continue;
            }
            let reference = em::launch_reference(spec, incidence);
            if !self.above_floor(&reference) {
                continue;
            }
            let incident_field = reference * (phase(self.wave.k * s_prime) / s_prime);
            let source = Arc::new(EdgeSource { wedge: wedge.clone(), point: q, incidence, incident_field, s_prime });
            let mut history = ray.history.clone();
            history.push(PathEvent::Diffract(wedge.obstacle, wedge.index));
            let path_key = path_key(&history);
            let cos_b = incidence.dot(wedge.direction);
            let sin_b = (1.0 - cos_b * cos_b).max(0.0).sqrt();
            let mut j = 0;
            loop {
                let phi = (j as f64 + 0.5) * self.cfg.delta_phi;
                if phi >= wedge.n * PI {
                    break;
                }
                j += 1;
                let direction = (wedge.direction * cos_b + wedge.direction_at(phi) * sin_b).normalized();
                let hit = self.scene.intersect(q, direction);
                self.sink.accept(&Segment {
                    tx: self.tx,
                    origin: q,
                    direction,
                    length: hit.distance,
                    s_start: s_prime,
                    amplitude: Amplitude::Edge(source.clone()),
                    wave: self.wave,
                    signature: Signature { diffractions: 1, ..Signature::default() },
                    path_key,
                });
                stats.diffracted_children += 1;
                stats.segments += 1;
            }
        }
    }
}
