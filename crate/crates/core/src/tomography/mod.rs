//! Finite-shot tomography: count simulation, maximum-likelihood
//! reconstruction, single-qubit process matrices and bootstrap errors.

pub mod bootstrap;
pub mod counts;
pub mod mle;
pub mod process;

pub use bootstrap::{bootstrap, BootstrapResult};
pub use counts::{all_settings, read_jsonl, simulate_counts, write_jsonl, CountRecord, Setting};
pub use mle::{mle_reconstruct, MleOptions, MleResult, Observations};
pub use process::{process_fidelity, process_tomography, standard_inputs, ChiMatrix};
