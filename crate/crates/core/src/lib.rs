//! Deterministic 3D ray-launching radio propagation for indoor scenes.
//!
//! Rays are launched on a spherical lattice from each transmitter and traced
//! through a scene of box obstacles with geometrical-optics reflection and
//! transmission plus UTD edge diffraction. Every ray segment deposits a
//! multipath component in each cuboid it crosses; received power, delay
//! spread and power delay profiles are derived per cuboid.

pub mod analysis;
pub mod em;
pub mod geometry;
pub mod grid;
pub mod ray;
pub mod scene;

pub use geometry::{Aabb, Vec3};
