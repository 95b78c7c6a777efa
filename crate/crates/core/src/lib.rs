//! Additive transformation-based MCMC and random-walk Metropolis samplers,
//! their limiting diffusion theory, and chain diagnostics.

pub mod diagnostics;
pub mod error;
pub mod kernels;
pub mod optimize;
pub mod quadrature;
pub mod scaling;
pub mod sde;
pub mod seeding;
pub mod special;
pub mod targets;

pub use error::{Error, Result};
pub use kernels::{run_chain, run_ensemble, ChainTrace, KernelConfig, KernelKind, RecordPolicy, StepResult};
pub use scaling::{optimal_scale, ScalingFamily, ScalingReport, Variant};
pub use seeding::{derive_seed, rng_from_seed, SimRng};
pub use targets::{Marginal, Psi, StateVector, TargetModel, ThetaSchedule};
