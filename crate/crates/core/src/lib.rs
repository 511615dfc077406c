//! Single-photon inelastic decay in a finite Josephson array terminated by a
//! Cooper-pair box.
//!
//! The crate covers three levels of description:
//!
//! * [`toy_model`]: the exactly solvable resonant level coupled to an
//!   equidistant (or arbitrary) broadened bath.
//! * [`chain`] and [`fgr`]: array eigenmodes and thermodynamic-limit golden
//!   rule rates per 2n+1-photon bath.
//! * [`selfconsistent`]: finite-size self-energies with bare, partially
//!   dressed and fully dressed propagators, rate extraction and disorder
//!   sweeps.
//!
//! [`experiment`] ties these together behind a TOML config; the `photon-decay`
//! binary is a thin wrapper around it.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod error;
pub mod experiment;
pub mod fgr;
pub mod fit;
pub mod output;
pub mod quad;
pub mod selfconsistent;
pub mod special;
pub mod toy_model;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
