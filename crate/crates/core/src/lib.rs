//! Computational harmonic analysis on the circle group.
//!
//! Sparse Fourier spectra with exact coefficient forms, Rudin–Shapiro and
//! Riesz-type products, singularity witnesses, spectral idempotents,
//! L1-minimal interpolation and the planar set constructions that go with
//! the Wiener–Pitt phenomenon.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod approx;
pub mod error;
mod fft;
pub mod riesz;
pub mod rrs;
pub mod rudinshapiro;
pub mod spectra;
pub mod tower;
pub mod trigcore;
pub mod witness;
pub mod wpsets;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
