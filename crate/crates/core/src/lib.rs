//! One-dimensional wave-packet dynamics, random-discontinuous-motion sampling,
//! detector scenarios, Lorentz kinematics and Aharonov-Casher loop phases, with
//! a seeded batch runner in [`cli`].

pub mod aharonov_casher;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod optics;
pub mod quadrature;
pub mod rdm;
pub mod relativity;
pub mod sampling;
pub mod stats;
pub mod units;

pub use error::{Error, Result};
pub use grid::{Grid1D, WaveFunction};
pub use units::UnitSystem;
