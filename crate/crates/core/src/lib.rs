//! Diversity metrics and budgeted curation for trajectory datasets.
//!
//! Demonstrations are turned into paths ([`paths`]), compared with signature
//! kernels ([`kernels`]), summarized through the spectrum of the normalized
//! Gram matrix ([`spectra`]), and curated into diverse fixed-size subsets
//! ([`select`]). [`cli`] wires these into the `sigcurate` command.

pub mod cli;
pub mod error;
mod fsutil;
pub mod kernels;
pub mod paths;
pub mod rng;
pub mod select;
pub mod spectra;

pub use error::{Error, Result};
