//! Density-matrix simulation of undoing a projective measurement.
//!
//! A qubit is stored in the three-qubit phase-flip code, one physical qubit
//! is read out by photon counting, and decoding with a majority vote brings
//! the stored state back. Alongside the cycle itself the crate has the noise
//! and detection models, state and process tomography with
//! maximum-likelihood reconstruction, and bootstrap error bars.
//!
//! Qubit 0 is the most significant bit of a basis index. Every random
//! quantity is driven by an explicit seed; see [`rng`].

pub mod channels;
pub mod circuits;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod protocol;
pub mod rng;
pub mod state;
pub mod tolerance;
pub mod tomography;

pub use error::{Error, Result};

// The guide's code blocks run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/code.md")]
    mod code {}
    #[doc = include_str!("../../../book/src/readout.md")]
    mod readout {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/tomography.md")]
    mod tomography {}
    #[doc = include_str!("../../../book/src/calibration.md")]
    mod calibration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
