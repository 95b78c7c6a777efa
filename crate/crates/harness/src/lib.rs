//! Experiment orchestration for the TMCMC versus RWM study: the comparison
//! table, theoretical speed curves, timing and diffusion-limit checks.

pub mod config;
pub mod curves;
pub mod error;
pub mod limit;
pub mod manifest;
pub mod reference;
pub mod table1;
pub mod timing;

pub use config::{ExperimentConfig, TargetSpec};
pub use error::{HarnessError, Result};
