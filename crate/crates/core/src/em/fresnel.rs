//! Fresnel reflection and thin-slab transmission.
//!
//! Polarization frame at an interface with unit normal `n` (facing the
//! incoming ray) and propagation direction `d`:
//!
//! * `ŝ = (d × n)/|d × n|` (perpendicular to the plane of incidence);
//!   at normal incidence any unit vector tangent to the surface is used.
//! * `p̂ = d × ŝ` for the incident ray and `p̂_r = d_r × ŝ` for the reflected one.
//!
//! With this frame a perfect conductor has `Γs = −1`, `Γp = +1`, and at normal
//! incidence both polarizations see the same physical reflection.

use num_complex::Complex64;

use super::{phase, FieldVec, WaveNumbers};
use crate::geometry::Vec3;
use crate::scene::MaterialSpec;

/// Air → material interface coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelCoefficients {
    pub gamma_s: Complex64,
    pub gamma_p: Complex64,
    pub t_s: Complex64,
    pub t_p: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection {
    pub direction: Vec3,
    pub field: FieldVec,
}

/// Coefficients for incidence angle `theta_i` (rad, from the normal) on
/// `material` at `frequency_hz`.
pub fn fresnel_coefficients(material: &MaterialSpec, frequency_hz: f64, theta_i: f64) -> FresnelCoefficients {
    if material.is_pec() {
        return FresnelCoefficients {
            gamma_s: Complex64::new(-1.0, 0.0),
            gamma_p: Complex64::new(1.0, 0.0),
            t_s: Complex64::new(0.0, 0.0),
            t_p: Complex64::new(0.0, 0.0),
        };
    }
    let eps = material.complex_permittivity(frequency_hz);
    let (sin_i, cos_i) = theta_i.sin_cos();
    // n·cosθt, continued with Re ≥ 0
    let root = (eps - sin_i * sin_i).sqrt();
    let n = eps.sqrt();
    let gamma_s = (cos_i - root) / (cos_i + root);
    let gamma_p = (eps * cos_i - root) / (eps * cos_i + root);
    let t_s = 2.0 * cos_i / (cos_i + root);
    let t_p = 2.0 * n * cos_i / (eps * cos_i + root);
    FresnelCoefficients { gamma_s, gamma_p, t_s, t_p }
}

/// Entry × exit interface factors for a slab of `material` in air.
fn slab_interfaces(material: &MaterialSpec, frequency_hz: f64, cos_i: f64) -> (Complex64, Complex64) {
    let eps = material.complex_permittivity(frequency_hz);
    let sin2 = 1.0 - cos_i * cos_i;
    let root = (eps - sin2).sqrt();
    let s = 4.0 * cos_i * root / ((cos_i + root) * (cos_i + root));
    let p = 4.0 * eps * cos_i * root / ((eps * cos_i + root) * (eps * cos_i + root));
    (s, p)
}

fn incidence_frame(direction: Vec3, normal: Vec3) -> (Vec3, Vec3) {
    let c = direction.cross(normal);
    let len = c.norm();
    let s = if len < 1e-12 { normal.any_orthogonal() } else { c / len };
    (s, direction.cross(s))
}

fn incidence_cos(direction: Vec3, normal: Vec3) -> f64 {
    (-direction.dot(normal)).clamp(0.0, 1.0)
}

/// Specular reflection of a field travelling along `direction` off a surface
/// with unit `normal` (`direction·normal < 0`).
pub fn reflect(
    field: &FieldVec,
    direction: Vec3,
    normal: Vec3,
    material: &MaterialSpec,
    frequency_hz: f64,
) -> Reflection {
    let cos_i = incidence_cos(direction, normal);
    let reflected = (direction - normal * (2.0 * direction.dot(normal))).normalized();
    let coeffs = fresnel_coefficients(material, frequency_hz, cos_i.acos());
    let (s, p_in) = incidence_frame(direction, normal);
    let p_out = reflected.cross(s);
    let e_s = field.component(s);
    let e_p = field.component(p_in);
    let out = FieldVec::along(s, coeffs.gamma_s * e_s) + FieldVec::along(p_out, coeffs.gamma_p * e_p);
    Reflection { direction: reflected, field: out.orthogonalized(reflected) }
}

/// Thin-slab transmission: the ray keeps its direction; the field is scaled
/// by both interface coefficients, attenuated by `exp(−α·t_path)` with
/// `α = k·|Im sqrt(ε)|`, and delayed by `k·Re sqrt(ε)·t_path`. `t_path` is the
/// refracted chord through a slab of normal thickness `thickness`.
pub fn transmit(
    field: &FieldVec,
    direction: Vec3,
    normal: Vec3,
    thickness: f64,
    material: &MaterialSpec,
    frequency_hz: f64,
) -> FieldVec {
    if material.is_pec() {
        return FieldVec::ZERO;
    }
    let wave = WaveNumbers::new(frequency_hz);
    let cos_i = incidence_cos(direction, normal);
    let (ts, tp) = slab_interfaces(material, frequency_hz, cos_i);
    let n = material.complex_permittivity(frequency_hz).sqrt();
    let sin_t = (1.0 - cos_i * cos_i).sqrt() / n.re;
    let cos_t = (1.0 - sin_t * sin_t).max(1e-12).sqrt();
    let path = thickness.max(0.0) / cos_t;
    let alpha = wave.k * n.im.abs();
    let propagation = phase(wave.k * n.re * path) * (-alpha * path).exp();
    let (s, p) = incidence_frame(direction, normal);
    let out = FieldVec::along(s, ts * field.component(s)) + FieldVec::along(p, tp * field.component(p));
    (out * propagation).orthogonalized(direction)
}
