//! State vectors, noise channels, Born-rule sampling and numeric spectra.

pub mod channel;
pub mod density;
pub mod eigen;
pub mod measure;
pub mod rng;
pub mod sector;
pub mod state;

pub use num_complex::Complex64 as C64;

/// Dense state vectors are limited to this many qubits.
pub const MAX_DENSE_QUBITS: usize = 20;
