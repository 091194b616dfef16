//! Frequency-domain model of a laser-driven optomechanical cavity with a
//! squeezed-vacuum input.
//!
//! The pipeline runs [`params`] → [`operating_point`] → [`spectra`] →
//! [`energetics`], with [`sweep`] built on top for phase and squeezing scans,
//! stability maps and baseline calibration.

pub mod constants;
pub mod energetics;
pub mod error;
pub mod operating_point;
pub mod parallel;
pub mod params;
pub mod quadrature;
pub mod spectra;
pub mod sweep;

pub use energetics::{
    assemble_energy, assemble_energy_with, energy_decomposition, integrate_component, EnergyDecomposition,
    EnergyReport, EnergySource, Numerics, TempConvention,
};
pub use error::{Error, Result};
pub use operating_point::{resolve_operating_point, OperatingPoint, StabilityReport};
pub use parallel::Execution;
pub use params::{derive_photon_stats, Drive, SqueezeField, SystemParams};
pub use spectra::{Component, SpectralKernel, SpectrumPoint};
