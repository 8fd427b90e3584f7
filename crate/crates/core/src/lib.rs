//! Sparse plane-wave decomposition of sound fields captured by a spherical
//! microphone array (SMA) and a set of surrounding linear arrays (LMAs).
//!
//! Three reconstruction methods are provided on a shared direction grid:
//!
//! * SMA-only sparse recovery in the spherical-harmonic (HOA) domain,
//! * one-step joint recovery on the row-stacked HOA + LMA dictionary,
//! * two-stage residue refinement: the SMA estimate is projected into the
//!   LMA signal domain, subtracted from the LMA observations and the residue
//!   is decomposed again with the LMA dictionary before the two coefficient
//!   sets are summed.
//!
//! All solvers share one joint-sparse IRLS implementation ([`irls`]). The
//! [`roomsim`] module produces reverberant test scenes with a shoebox
//! image-source model, and [`metrics`] scores energy maps against ground truth.

pub mod config;
pub mod dictionary;
pub mod error;
pub mod export;
pub mod geometry;
pub mod irls;
pub mod metrics;
pub mod pipeline;
pub mod roomsim;
pub mod run;
pub mod sigproc;
pub mod specfun;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Speed of sound used throughout unless a room overrides it (m/s).
pub const SPEED_OF_SOUND: f64 = 343.0;
