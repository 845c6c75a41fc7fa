//! Stationary quantum noise on a finite frequency grid: spectral density
//! pairs, circulant realizations, thermal/vacuum decomposition, synthesis of
//! arbitrary densities from the standard pair, operator-valued integrators and
//! single-mode thermal algebra.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod error;
pub mod fourier;
pub mod mode;
pub mod model;
pub mod qsi;
pub mod spectra;
pub mod synthesis;

pub use error::{Error, Result};
pub use fourier::{Circulant, PhaseTable, TimeKernel, Transformer};
pub use model::{
    CorrelationSequence, ModularMatrix, Realization, SpectralAmplitudes, StationaryModel,
};
pub use spectra::{
    Classification, Mask, NoiseClass, SpectralDensityPair, SpectralGrid, Support, SupportMasks,
};
