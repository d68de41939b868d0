//! Per-interaction electromagnetics.
//!
//! Fields are RMS phasors with time convention `e^{jωt}`, so propagation over
//! a distance `s` multiplies by `e^{−jks}`. Power density is `|E|²/η0` with
//! `η0 = 120π Ω`, which makes the isotropic far field `|E| = sqrt(30·P·g)/d`
//! and the received power through an aperture `g·λ²/4π` reproduce Friis
//! exactly.

mod antenna;
mod fresnel;
mod transition;
mod utd;

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::Vec3;
use crate::scene::TransmitterSpec;

pub use antenna::{antenna_gain, polarization_frame};
pub use fresnel::{fresnel_coefficients, reflect, transmit, FresnelCoefficients, Reflection};
pub use transition::{fresnel_integrals, transition_function};
pub use utd::{diffracted_field, utd_coefficients, utd_diffraction, Polarization};

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity (F/m).
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Free-space impedance used throughout (Ω).
pub const ETA0: f64 = 120.0 * PI;

#[derive(Debug, Error, PartialEq)]
pub enum EmError {
    #[error("distance must be positive (got {0} m)")]
    NonPositiveDistance(f64),
    #[error("directions violate the Keller cone condition (|β_in − β_out| = {0:.3e} rad)")]
    NotOnKellerCone(f64),
    #[error("ray is parallel to the edge")]
    AlongEdge,
}

/// Frequency with its derived wavelength and wavenumber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumbers {
    pub frequency_hz: f64,
    pub wavelength: f64,
    pub k: f64,
}

impl WaveNumbers {
    pub fn new(frequency_hz: f64) -> Self {
        let wavelength = C0 / frequency_hz;
        WaveNumbers { frequency_hz, wavelength, k: 2.0 * PI / wavelength }
    }

    /// Effective aperture of a receive antenna with linear gain `g` (m²).
    pub fn aperture(&self, g: f64) -> f64 {
        g * self.wavelength * self.wavelength / (4.0 * PI)
    }
}

/// Complex electric field vector (V/m, RMS).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldVec(pub [Complex64; 3]);

impl FieldVec {
    pub const ZERO: FieldVec = FieldVec([Complex64::new(0.0, 0.0); 3]);

    /// `amplitude · v`.
    pub fn along(v: Vec3, amplitude: Complex64) -> Self {
        FieldVec([amplitude * v.x, amplitude * v.y, amplitude * v.z])
    }

    /// Projection onto a real unit vector, `Σ E_i v_i`.
    pub fn component(&self, v: Vec3) -> Complex64 {
        self.0[0] * v.x + self.0[1] * v.y + self.0[2] * v.z
    }

    pub fn norm_squared(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Removes any component along `d`.
    pub fn orthogonalized(&self, d: Vec3) -> FieldVec {
        *self - FieldVec::along(d, self.component(d))
    }

    pub fn scale(&self, s: f64) -> FieldVec {
        *self * Complex64::new(s, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

impl Add for FieldVec {
    type Output = FieldVec;
    fn add(self, o: FieldVec) -> FieldVec {
        FieldVec([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for FieldVec {
    fn add_assign(&mut self, o: FieldVec) {
        *self = *self + o;
    }
}

impl Sub for FieldVec {
    type Output = FieldVec;
    fn sub(self, o: FieldVec) -> FieldVec {
        FieldVec([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for FieldVec {
    type Output = FieldVec;
    fn neg(self) -> FieldVec {
        FieldVec([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<Complex64> for FieldVec {
    type Output = FieldVec;
    fn mul(self, c: Complex64) -> FieldVec {
        FieldVec([self.0[0] * c, self.0[1] * c, self.0[2] * c])
    }
}

/// `e^{−jx}`.
#[inline]
pub fn phase(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, -x)
}

/// Launch field referenced to 1 m: `sqrt(30·Pt·g(d))` along the antenna's
/// polarization vector, zero phase.
pub fn launch_reference(tx: &TransmitterSpec, direction: Vec3) -> FieldVec {
    let g = antenna_gain(&tx.antenna, direction);
    let amplitude = (30.0 * tx.power_watts() * g).sqrt();
    FieldVec::along(polarization_frame(direction), Complex64::new(amplitude, 0.0))
}

/// Free-space field radiated by `tx` at distance `d` along `direction`:
/// magnitude `sqrt(30·Pt·g)/d`, phase `−k·d`.
pub fn initial_field(tx: &TransmitterSpec, direction: Vec3, d: f64) -> Result<FieldVec, EmError> {
    if !(d > 0.0) {
        return Err(EmError::NonPositiveDistance(d));
    }
    let wave = WaveNumbers::new(tx.frequency_hz);
    Ok(launch_reference(tx, direction) * (phase(wave.k * d) / d))
}

/// Received power (W) of a field through an aperture of gain `g`.
pub fn received_power_watts(field: &FieldVec, wave: &WaveNumbers, g: f64) -> f64 {
    field.norm_squared() / ETA0 * wave.aperture(g)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w * 1e3).log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}
