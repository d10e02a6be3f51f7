//! Neutral-kaon dynamics: single-kaon oscillations, entangled pairs,
//! Lindblad decoherence, EPR observables and entanglement measures.
//!
//! All quantities use ħ = 1 with time in units of the K_S lifetime τ_S.
//! See [`constants::UnitSystem`] for conversion from MeV and seconds.

// `!(x > y)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod constants;
pub mod error;
pub mod kaon;
pub mod measures;
pub mod medium;
pub mod numkernel;
pub mod observables;
pub mod openquantum;
pub mod pairs;
pub mod table;

pub use config::{ConfigFile, Units};
pub use constants::{KaonConstants, UnitSystem};
pub use error::{KaonError, Result};
pub use kaon::{Basis, KaonVec, QuasiSpinHamiltonian};
pub use measures::EntanglementReport;
pub use medium::MediumParams;
pub use numkernel::{CMatrix, Complex, Side, Spectrum};
pub use observables::{AsymmetrySample, CorrelationReport, FitResult, Outcome};
pub use openquantum::{DensityMatrix, LindbladSpec, PairDecoherenceSolution, System};
pub use pairs::{RegenerationCoefficients, TwoKaonVec};
