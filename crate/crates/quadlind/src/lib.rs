//! Master-equation construction and non-Hermitian spectral analysis for open
//! quadratic bosonic systems.
//!
//! The crate builds local and self-consistent (dressed) Lindblad models for
//! networks of coupled bosonic modes attached to thermal baths, derives the
//! closed first-moment dynamics of any such model, performs adiabatic
//! elimination of fast modes, and detects/classifies exceptional points of
//! the resulting effective non-Hermitian Hamiltonians. A brute-force
//! truncated-Fock integrator serves as the ground truth for every step.

pub mod bath;
pub mod ep;
pub mod fock;
pub mod linalg;
pub mod lindblad;
pub mod moments;
pub mod nambu;
pub mod reduction;
pub mod scenario;

pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type CMat = ndarray::Array2<Complex64>;
pub type CVec = ndarray::Array1<Complex64>;
