use crate::geometry::Vec3;
use crate::scene::{AntennaKind, AntennaPattern};

/// Linear gain toward `direction`. Monopoles are vertical: `g_peak·sin²θ`
/// with θ measured from +z.
pub fn antenna_gain(pattern: &AntennaPattern, direction: Vec3) -> f64 {
    match pattern.kind {
        AntennaKind::Isotropic => 1.0,
        AntennaKind::Monopole => {
            let d = direction.try_normalize().unwrap_or(Vec3::Z);
            let sin2 = (1.0 - d.z * d.z).max(0.0);
            pattern.peak_gain_linear() * sin2
        }
    }
}

/// Polarization unit vector of the launched field: the spherical θ̂ vector
/// for `direction`. At the poles φ is taken as 0, giving ±x̂. Used for both
/// monopoles and isotropic sources.
pub fn polarization_frame(direction: Vec3) -> Vec3 {
    let d = direction.normalized();
    let cos_t = d.z.clamp(-1.0, 1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let (cos_p, sin_p) = if sin_t > 1e-12 { (d.x / sin_t, d.y / sin_t) } else { (1.0, 0.0) };
    Vec3::new(cos_t * cos_p, cos_t * sin_p, -sin_t)
}
