//! Ray launching and tracing.
//!
//! Each launch direction is traced depth-first: find the nearest hit, hand
//! the free segment to the sink, then spawn reflected and transmitted
//! children. Rays leaving the launch point may also spawn a fan of
//! diffracted rays at nearby illuminated wedges.

mod diffraction;
mod launch;

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::PI;
use std::hash::{Hash, Hasher};
use std::ops::AddAssign;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::em::{self, phase, FieldVec, WaveNumbers, C0};
use crate::geometry::Vec3;
use crate::scene::{enumerate_edges, HitTarget, ObstacleId, Scene, Wedge};

pub use launch::{launch_directions, LaunchDirection, LaunchLattice};

#[derive(Debug, Error, PartialEq)]
pub enum TraceError {
    #[error("invalid launch configuration: {0}")]
    InvalidConfig(String),
    #[error("transmitter index {0} out of range")]
    NoSuchTransmitter(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaunchConfig {
    pub delta_theta: f64,
    pub delta_phi: f64,
    pub max_reflections: u32,
    pub max_transmissions: u32,
    /// 0 or 1; only single diffraction is modelled.
    pub max_diffractions: u32,
    /// Rays whose 1 m reference amplitude falls this far below the
    /// transmitter's peak launch amplitude are dropped (dB, ≤ 0).
    pub power_floor_db: f64,
    pub diffraction_enabled: bool,
}

impl Default for LaunchConfig {
    fn default() -> Self {
        LaunchConfig {
            delta_theta: PI / 180.0,
            delta_phi: PI / 180.0,
            max_reflections: 6,
            max_transmissions: 3,
            max_diffractions: 1,
            power_floor_db: -150.0,
            diffraction_enabled: true,
        }
    }
}

impl LaunchConfig {
    pub fn validate(&self) -> Result<(), TraceError> {
        for (name, d) in [("delta_theta", self.delta_theta), ("delta_phi", self.delta_phi)] {
            if !(d > 0.0 && d <= PI / 2.0 + 1e-12) {
                return Err(TraceError::InvalidConfig(format!("{name} must lie in (0, π/2], got {d}")));
            }
        }
        if !self.power_floor_db.is_finite() || self.power_floor_db > 0.0 {
            return Err(TraceError::InvalidConfig(format!(
                "power_floor_db must be finite and ≤ 0, got {}",
                self.power_floor_db
            )));
        }
        if self.max_diffractions > 1 {
            return Err(TraceError::InvalidConfig(format!(
                "max_diffractions above 1 is not supported (got {})",
                self.max_diffractions
            )));
        }
        Ok(())
    }

    fn diffracts(&self) -> bool {
        self.diffraction_enabled && self.max_diffractions > 0
    }
}

/// Interaction counts along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Signature {
    pub reflections: u8,
    pub transmissions: u8,
    pub diffractions: u8,
}

/// An in-flight ray. `field` is the amplitude referenced to 1 m: the field at
/// unfolded path length `s` is `field · e^{−jks} / s`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct RayState {
    pub origin: Vec3,
    pub direction: Vec3,
    pub field: FieldVec,
    pub s: f64,
    pub signature: Signature,
    pub history: Vec<PathEvent>,
    pub path_key: u64,
}

impl RayState {
    fn child(
        &self,
        origin: Vec3,
        direction: Vec3,
        field: FieldVec,
        s: f64,
        signature: Signature,
        event: PathEvent,
    ) -> RayState {
        let mut history = self.history.clone();
        history.push(event);
        RayState { origin, direction, field, s, signature, path_key: path_key(&history), history }
    }
}

/// The source of a diffracted ray fan.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSource {
    pub wedge: Wedge,
    pub point: Vec3,
    /// Unit direction from the transmitter to `point`.
    pub incidence: Vec3,
    /// Incident field at `point`.
    pub incident_field: FieldVec,
    /// Transmitter to `point` distance.
    pub s_prime: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Amplitude {
    /// Spherical wave with a 1 m reference amplitude along the unfolded path.
    Spherical(FieldVec),
    /// Edge-diffracted wave.
    Edge(Arc<EdgeSource>),
}

/// A straight, unobstructed piece of a ray path.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub tx: u16,
    pub origin: Vec3,
    pub direction: Vec3,
    pub length: f64,
    /// Unfolded path length at `origin`.
    pub s_start: f64,
    pub amplitude: Amplitude,
    pub wave: WaveNumbers,
    pub signature: Signature,
    /// Identifies the sequence of interactions (transmitter, surfaces,
    /// edges) that produced this segment.
    pub path_key: u64,
}

/// Shortest unfolded distance at which fields are evaluated (m).
pub const MIN_FIELD_DISTANCE: f64 = 1e-3;

impl Segment {
    pub fn point_at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }

    pub fn end(&self) -> Vec3 {
        self.point_at(self.length)
    }

    /// Arrival delay at distance `t` along the segment (s).
    pub fn delay_at(&self, t: f64) -> f64 {
        (self.s_start + t) / C0
    }

    /// Field at distance `t` along the segment.
    pub fn field_at(&self, t: f64) -> FieldVec {
        match &self.amplitude {
            Amplitude::Spherical(a) => {
                let s = (self.s_start + t).max(MIN_FIELD_DISTANCE);
                *a * (phase(self.wave.k * s) / s)
            }
            Amplitude::Edge(src) => {
                let s = t.max(MIN_FIELD_DISTANCE);
                em::diffracted_field(
                    &src.wedge,
                    &src.incident_field,
                    src.incidence,
                    self.direction,
                    &self.wave,
                    src.s_prime,
                    s,
                )
                .unwrap_or(FieldVec::ZERO)
            }
        }
    }
}

/// Consumer of traced segments. Called concurrently in parallel mode.
pub trait SegmentSink: Sync {
    fn accept(&self, segment: &Segment);
}

impl<F: Fn(&Segment) + Sync> SegmentSink for F {
    fn accept(&self, segment: &Segment) {
        self(segment)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TraceStats {
    pub rays_launched: u64,
    pub segments: u64,
    pub reflected_children: u64,
    pub transmitted_children: u64,
    pub diffracted_children: u64,
}

impl TraceStats {
    pub fn children(&self) -> u64 {
        self.reflected_children + self.transmitted_children + self.diffracted_children
    }
}

impl AddAssign for TraceStats {
    fn add_assign(&mut self, o: TraceStats) {
        self.rays_launched += o.rays_launched;
        self.segments += o.segments;
        self.reflected_children += o.reflected_children;
        self.transmitted_children += o.transmitted_children;
        self.diffracted_children += o.diffracted_children;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    /// Lattice order on the calling thread; bit-reproducible.
    Deterministic,
    /// Launch directions spread over the rayon pool.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub(crate) enum PathEvent {
    Launch(u16),
    Reflect(ObstacleId, u8),
    Transmit(ObstacleId, u8),
    Diffract(ObstacleId, u8),
}

impl PathEvent {
    /// Reflections off perpendicular planes commute: either order maps the
    /// source to the same image.
    fn commutes_with(self, other: PathEvent) -> bool {
        match (self, other) {
            (PathEvent::Reflect(_, a), PathEvent::Reflect(_, b)) => a / 2 != b / 2,
            _ => false,
        }
    }
}

/// Hash of the lexicographically least event sequence equivalent to
/// `history` under commutation, so both orders of a corner bounce share a key.
pub(crate) fn path_key(history: &[PathEvent]) -> u64 {
    let mut rest = history.to_vec();
    let mut h = DefaultHasher::new();
    while !rest.is_empty() {
        let mut best: Option<usize> = None;
        for i in 0..rest.len() {
            if rest[..i].iter().all(|e| e.commutes_with(rest[i])) && best.is_none_or(|b| rest[i] < rest[b]) {
                best = Some(i);
            }
        }
        rest.remove(best.expect("first event is always free")).hash(&mut h);
    }
    h.finish()
}

struct Tracer<'a> {
    scene: &'a Scene,
    cfg: &'a LaunchConfig,
    tx: u16,
    wave: WaveNumbers,
    floor_amplitude: f64,
    lattice: LaunchLattice,
    wedges: Vec<Wedge>,
    sink: &'a dyn SegmentSink,
}

/// Traces every launch direction of transmitter `tx` and streams segments to
/// `sink`.
pub fn trace(
    scene: &Scene,
    tx: usize,
    cfg: &LaunchConfig,
    sink: &dyn SegmentSink,
    execution: Execution,
) -> Result<TraceStats, TraceError> {
    cfg.validate()?;
    let spec = scene.transmitters.get(tx).ok_or(TraceError::NoSuchTransmitter(tx))?;
    let peak = (30.0 * spec.power_watts() * spec.antenna.peak_gain_linear()).sqrt();
    let tracer = Tracer {
        scene,
        cfg,
        tx: tx as u16,
        wave: WaveNumbers::new(spec.frequency_hz),
        floor_amplitude: peak * 10f64.powf(cfg.power_floor_db / 20.0),
        lattice: LaunchLattice::new(cfg),
        wedges: if cfg.diffracts() { enumerate_edges(scene) } else { Vec::new() },
        sink,
    };
    let n = tracer.lattice.len();
    let stats = match execution {
        Execution::Deterministic => {
            let mut total = TraceStats::default();
            for i in 0..n {
                total += tracer.launch(i);
            }
            total
        }
        Execution::Parallel => {
            (0..n).into_par_iter().map(|i| tracer.launch(i)).reduce(TraceStats::default, |mut a, b| {
                a += b;
                a
            })
        }
    };
    Ok(stats)
}

impl Tracer<'_> {
    fn segment(&self, ray: &RayState, length: f64) -> Segment {
        Segment {
            tx: self.tx,
            origin: ray.origin,
            direction: ray.direction,
            length,
            s_start: ray.s,
            amplitude: Amplitude::Spherical(ray.field),
            wave: self.wave,
            signature: ray.signature,
            path_key: ray.path_key,
        }
    }

    fn above_floor(&self, field: &FieldVec) -> bool {
        field.norm() >= self.floor_amplitude && field.norm() > 0.0
    }

    fn launch(&self, index: usize) -> TraceStats {
        let mut stats = TraceStats { rays_launched: 1, ..Default::default() };
        let spec = &self.scene.transmitters[self.tx as usize];
        let direction = self.lattice.get(index).direction;
        let field = em::launch_reference(spec, direction);
        if !self.above_floor(&field) {
            return stats;
        }
        let history = vec![PathEvent::Launch(self.tx)];
        let root = RayState {
            origin: spec.position,
            direction,
            field,
            s: 0.0,
            signature: Signature::default(),
            path_key: path_key(&history),
            history,
        };
        let mut stack = vec![root];
        let mut first = true;
        while let Some(ray) = stack.pop() {
            let hit = self.scene.intersect(ray.origin, ray.direction);
            self.sink.accept(&self.segment(&ray, hit.distance));
            stats.segments += 1;
            if first {
                first = false;
                if !self.wedges.is_empty() {
                    self.diffract(index, &ray, hit.distance, &mut stats);
                }
            }
            let HitTarget::Obstacle(id) = hit.target else {
                continue;
            };
            let material = self.scene.material_of(id);
            let f = self.wave.frequency_hz;
            let s_hit = ray.s + hit.distance;
            // pushed transmitted-first so the reflected branch is traced first
            if (ray.signature.transmissions as u32) < self.cfg.max_transmissions && !material.is_pec() {
                let body = &self.scene.body(id).shape;
                let chord = body.slab(hit.point, ray.direction).map(|s| s.t_exit.max(0.0)).unwrap_or(0.0);
                let cos_i = -ray.direction.dot(hit.normal);
                let through = em::transmit(&ray.field, ray.direction, hit.normal, chord * cos_i, material, f);
                // the slab phase replaces free-space phase over the chord
                let field = through * phase(-self.wave.k * chord);
                if self.above_floor(&field) {
                    stats.transmitted_children += 1;
                    stack.push(ray.child(
                        hit.point + ray.direction * chord,
                        ray.direction,
                        field,
                        s_hit + chord,
                        Signature { transmissions: ray.signature.transmissions + 1, ..ray.signature },
                        PathEvent::Transmit(id, hit.face),
                    ));
                }
            }
            if (ray.signature.reflections as u32) < self.cfg.max_reflections {
                let r = em::reflect(&ray.field, ray.direction, hit.normal, material, f);
                if self.above_floor(&r.field) {
                    stats.reflected_children += 1;
                    stack.push(ray.child(
                        hit.point,
                        r.direction,
                        r.field,
                        s_hit,
                        Signature { reflections: ray.signature.reflections + 1, ..ray.signature },
                        PathEvent::Reflect(id, hit.face),
                    ));
                }
            }
        }
        stats
    }
}
