//! Mendelian randomization with correlated horizontal pleiotropy correction.
//!
//! Two Gibbs samplers are provided: [`mr_corr`] for independent instruments
//! and [`mr_corr2`] for correlated instruments grouped into LD blocks.

pub mod error;
pub mod ld_reference;
pub mod linalg;
pub mod model;
pub mod mr_corr;
pub mod mr_corr2;
pub mod par;
pub mod posterior;
pub mod rng;
pub mod simulator;
pub mod summary_data;

pub use error::{Error, Result};
pub use model::{Constraints, Hyperparams, McmcConfig, SamplerState, Trace};
pub use summary_data::HarmonizedDataset;
