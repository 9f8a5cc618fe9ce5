//! Pass bands, super band gaps and transmission spectra of one-dimensional
//! wave systems whose unit cells are generalised Fibonacci tilings.
//!
//! The pipeline: [`systems`] builds element transfer matrices, [`tracemap`]
//! evolves cell traces without forming products, [`superbandgap`] certifies
//! frequencies that stay in a gap for every later generation, [`dispersion`]
//! gives the Bloch spectrum of each periodic approximant and [`transmission`]
//! handles finite stacks.

pub mod algebra;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod superbandgap;
pub mod systems;
pub mod tiling;
pub mod tracemap;
pub mod transmission;
pub mod validate;

pub use algebra::Mat2;
pub use dispersion::{band_diagram, bloch_point, passbands, BandDiagram, BlochPoint, PassBand};
pub use error::{Error, Result};
pub use grid::{FrequencyGrid, GridScale};
pub use superbandgap::{membership, sweep, GapInterval, GapReport, SbgCertificate};
pub use systems::{presets, BeamParams, MassSpringParams, RodParams, SystemSpec};
pub use tiling::{Letter, TilingRule, TilingWord};
pub use tracemap::{trace_sequence, TraceSequence};
pub use transmission::{global_transfer, transmission_coefficient, transmission_profile, Stack, StackSpec};
