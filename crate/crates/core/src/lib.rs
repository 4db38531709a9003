//! Offline KL-regularized contextual bandits.
//!
//! This crate is the allocation-only (`no_std` + `alloc`) algorithmic core:
//!
//! - [`instance`], [`policy`], [`dataset`]: validated tabular domain types.
//! - [`sampling`]: seeded offline data generation from `rho x pi_ref`.
//! - [`solvers`]: the pessimistic KL-regularized learner, its no-penalty
//!   ablation and empirical best-arm selection.
//! - [`evaluation`]: closed-form optimal policy, regularized objective,
//!   suboptimality (two independent routes) and coverage coefficients.
//! - [`forge`]: greedy Gilbert-Varshamov codes and the hard-instance families.
//! - [`stats`], [`mc`]: rate fitting and the single-replication kernel used by
//!   the Monte Carlo harness in the `klbandit` crate.
//!
//! IO, file formats, parallel experiment dispatch and the CLI live in the
//! companion `klbandit` crate.
#![no_std]

extern crate alloc;

pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod forge;
pub mod instance;
pub mod math;
pub mod mc;
pub mod policy;
pub mod sampling;
pub mod solvers;
pub mod stats;
pub mod table;

pub use dataset::{Dataset, Record};
pub use error::{Error, Result};
pub use evaluation::{EvalReport, Objective};
pub use instance::{Instance, InstanceMeta, InstanceSpec, Noise};
pub use policy::Policy;
pub use sampling::SeedSpec;
pub use solvers::{Algo, SolverConfig, SolverDiagnostics};
pub use table::Table;

/// Tolerance on probability-vector sums.
pub const SUM_TOLERANCE: f64 = 1e-12;
