use std::f64::consts::PI;

use super::{ObstacleId, Scene};
use crate::geometry::Vec3;

/// A diffracting wedge edge.
///
/// Angles around the edge are measured from face 0: a direction `w`
/// perpendicular to the edge has angle `atan2(w·face0_normal, w·face0_tangent)`
/// in `[0, 2π)`, so face 0 sits at angle 0 and face 1 at `n·π`.
#[derive(Debug, Clone, PartialEq)]
pub struct Wedge {
    pub obstacle: ObstacleId,
    /// 0..12 for box edges.
    pub index: u8,
    pub start: Vec3,
    pub end: Vec3,
    /// Unit vector from `start` to `end`.
    pub direction: Vec3,
    pub face0_normal: Vec3,
    pub face1_normal: Vec3,
    /// Unit vector lying in face 0, perpendicular to the edge, pointing away from it.
    pub face0_tangent: Vec3,
    /// Interior (material) angle of the wedge (rad).
    pub interior_angle: f64,
    /// Exterior angle divided by π.
    pub n: f64,
}

impl Wedge {
    /// A perfectly thin half-plane (n = 2) whose upper face has normal
    /// `face0_normal` and extends from the edge along `face0_tangent`.
    pub fn half_plane(start: Vec3, end: Vec3, face0_normal: Vec3, face0_tangent: Vec3) -> Wedge {
        Wedge {
            obstacle: ObstacleId(u32::MAX),
            index: 0,
            start,
            end,
            direction: (end - start).normalized(),
            face0_normal,
            face1_normal: -face0_normal,
            face0_tangent,
            interior_angle: 0.0,
            n: 2.0,
        }
    }

    pub fn length(&self) -> f64 {
        self.start.distance(self.end)
    }

    /// Component of `v` perpendicular to the edge.
    pub fn perpendicular(&self, v: Vec3) -> Vec3 {
        v - self.direction * v.dot(self.direction)
    }

    /// Angle of `v` around the edge, in `[0, 2π)`.
    pub fn angle_of(&self, v: Vec3) -> f64 {
        let a = v.dot(self.face0_normal).atan2(v.dot(self.face0_tangent));
        if a < 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    /// Unit vector perpendicular to the edge at angle `phi`.
    pub fn direction_at(&self, phi: f64) -> Vec3 {
        self.face0_tangent * phi.cos() + self.face0_normal * phi.sin()
    }

    /// Closest point on the edge segment to `p`.
    pub fn closest_point(&self, p: Vec3) -> Vec3 {
        let u = (p - self.start).dot(self.direction).clamp(0.0, self.length());
        self.start + self.direction * u
    }
}

/// One descriptor per edge of every obstacle (and human) flagged as
/// diffracting. Edges shared by touching boxes are reported once per box.
pub fn enumerate_edges(scene: &Scene) -> Vec<Wedge> {
    let mut out = Vec::new();
    for (id, body) in scene.bodies() {
        if !body.diffracting {
            continue;
        }
        let b = body.shape;
        let corner = |sides: [usize; 3]| {
            Vec3::new(
                if sides[0] == 0 { b.min.x } else { b.max.x },
                if sides[1] == 0 { b.min.y } else { b.max.y },
                if sides[2] == 0 { b.min.z } else { b.max.z },
            )
        };
        let mut index = 0u8;
        for axis in 0..3 {
            let (ua, va) = ((axis + 1) % 3, (axis + 2) % 3);
            for su in 0..2 {
                for sv in 0..2 {
                    let mut s0 = [0usize; 3];
                    s0[ua] = su;
                    s0[va] = sv;
                    let mut s1 = s0;
                    s1[axis] = 1;
                    let sign = |s: usize| if s == 0 { -1.0 } else { 1.0 };
                    let n0 = Vec3::axis(ua) * sign(su);
                    let n1 = Vec3::axis(va) * sign(sv);
                    out.push(Wedge {
                        obstacle: id,
                        index,
                        start: corner(s0),
                        end: corner(s1),
                        direction: Vec3::axis(axis),
                        face0_normal: n0,
                        face1_normal: n1,
                        face0_tangent: -n1,
                        interior_angle: PI / 2.0,
                        n: 1.5,
                    });
                    index += 1;
                }
            }
        }
    }
    out
}
