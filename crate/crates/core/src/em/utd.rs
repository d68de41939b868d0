//! Uniform theory of diffraction for perfectly conducting wedges
//! (Kouyoumjian–Pathak).
//!
//! ```text
//! D_{s,h} = −e^{−jπ/4} / (2n·sqrt(2πk)·sin β0) ·
//!     [ cot((π+(φ−φ'))/2n)·F(kL·a⁺(φ−φ')) + cot((π−(φ−φ'))/2n)·F(kL·a⁻(φ−φ'))
//!     ∓ ( cot((π+(φ+φ'))/2n)·F(kL·a⁺(φ+φ')) + cot((π−(φ+φ'))/2n)·F(kL·a⁻(φ+φ')) ) ]
//! ```
//!
//! `L = s·s'/(s+s')·sin²β0` (spherical incidence), `a±(β) = 2cos²((2nπN± − β)/2)`
//! with `N±` the integer closest to satisfying `2πnN± − β = ±π`. The upper sign
//! is the soft (Dirichlet) coefficient.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use super::{phase, transition_function, EmError, FieldVec, WaveNumbers};
use crate::geometry::Vec3;
use crate::scene::Wedge;

/// Allowed mismatch between incident and diffracted edge angles (rad).
pub const KELLER_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// E parallel to the edge-fixed plane of incidence (Dirichlet).
    Soft,
    /// E perpendicular to it (Neumann).
    Hard,
}

struct EdgeAngles {
    sin_beta0: f64,
    phi_in: f64,
    phi_out: f64,
}

fn edge_angles(wedge: &Wedge, incidence: Vec3, diffraction: Vec3) -> Result<EdgeAngles, EmError> {
    let e = wedge.direction;
    let beta_in = incidence.dot(e).clamp(-1.0, 1.0).acos();
    let beta_out = diffraction.dot(e).clamp(-1.0, 1.0).acos();
    let mismatch = (beta_in - beta_out).abs();
    if mismatch > KELLER_TOLERANCE {
        return Err(EmError::NotOnKellerCone(mismatch));
    }
    let sin_beta0 = beta_in.sin();
    if sin_beta0 < 1e-9 {
        return Err(EmError::AlongEdge);
    }
    Ok(EdgeAngles {
        sin_beta0,
        // φ' is the angle of the direction pointing back to the source
        phi_in: wedge.angle_of(wedge.perpendicular(-incidence)),
        phi_out: wedge.angle_of(wedge.perpendicular(diffraction)),
    })
}

/// `cot((π + sign·β)/2n)·F(kL·a^{sign}(β))`, finite through shadow boundaries.
fn term(n: f64, beta: f64, sign: f64, kl: f64) -> Complex64 {
    let mut beta = beta;
    if ((PI + sign * beta) / (2.0 * n)).sin().abs() < 1e-12 {
        // exactly on a shadow boundary: take the one-sided limit
        beta += 1e-9;
    }
    let nn = ((beta + sign * PI) / (2.0 * PI * n)).round();
    let a = 2.0 * ((2.0 * n * PI * nn - beta) / 2.0).cos().powi(2);
    let arg = (PI + sign * beta) / (2.0 * n);
    arg.cos() / arg.sin() * transition_function(kl * a)
}

/// Soft and hard coefficients `(D_s, D_h)` for distances `s_prime` (source →
/// edge) and `s` (edge → observer).
pub fn utd_coefficients(
    wedge: &Wedge,
    incidence: Vec3,
    diffraction: Vec3,
    wave: &WaveNumbers,
    s_prime: f64,
    s: f64,
) -> Result<(Complex64, Complex64), EmError> {
    if !(s_prime > 0.0) {
        return Err(EmError::NonPositiveDistance(s_prime));
    }
    if !(s > 0.0) {
        return Err(EmError::NonPositiveDistance(s));
    }
    let ang = edge_angles(wedge, incidence, diffraction)?;
    let n = wedge.n;
    let k = wave.k;
    let l = s * s_prime / (s + s_prime) * ang.sin_beta0 * ang.sin_beta0;
    let kl = k * l;
    let diff = ang.phi_out - ang.phi_in;
    let sum = ang.phi_out + ang.phi_in;
    let incident = term(n, diff, 1.0, kl) + term(n, diff, -1.0, kl);
    let reflected = term(n, sum, 1.0, kl) + term(n, sum, -1.0, kl);
    let pre = -Complex64::from_polar(1.0, -FRAC_PI_4) / (2.0 * n * (2.0 * PI * k).sqrt() * ang.sin_beta0);
    Ok((pre * (incident - reflected), pre * (incident + reflected)))
}

/// Single diffraction coefficient for the requested polarization.
pub fn utd_diffraction(
    wedge: &Wedge,
    incidence: Vec3,
    diffraction: Vec3,
    wave: &WaveNumbers,
    polarization: Polarization,
    s_prime: f64,
    s: f64,
) -> Result<Complex64, EmError> {
    let (ds, dh) = utd_coefficients(wedge, incidence, diffraction, wave, s_prime, s)?;
    Ok(match polarization {
        Polarization::Soft => ds,
        Polarization::Hard => dh,
    })
}

/// Diffracted field at distance `s` from the diffraction point, given the
/// incident field there. Applies the dyadic coefficient in edge-fixed
/// coordinates, the spreading factor `sqrt(s'/(s(s'+s)))` and phase `e^{−jks}`.
pub fn diffracted_field(
    wedge: &Wedge,
    incident_field: &FieldVec,
    incidence: Vec3,
    diffraction: Vec3,
    wave: &WaveNumbers,
    s_prime: f64,
    s: f64,
) -> Result<FieldVec, EmError> {
    let (ds, dh) = utd_coefficients(wedge, incidence, diffraction, wave, s_prime, s)?;
    let e = wedge.direction;
    let phi_in = -(e.cross(incidence)).normalized();
    let beta_in = phi_in.cross(incidence);
    let phi_out = e.cross(diffraction).normalized();
    let beta_out = phi_out.cross(diffraction);
    let field = FieldVec::along(beta_out, -ds * incident_field.component(beta_in))
        + FieldVec::along(phi_out, -dh * incident_field.component(phi_in));
    let spread = (s_prime / (s * (s_prime + s))).sqrt();
    Ok(field * (phase(wave.k * s) * spread))
}
