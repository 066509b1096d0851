//! Randomized approximation algorithms for unconstrained k-submodular maximization.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernel`]: ground-set dimensions, assignments in `{0, 1, ..., k}^V`, the
//!   meet/join lattice operations and marginal-gain probing.
//! - [`oracle`]: nonnegative k-submodular function representations, seeded
//!   instance generation, exhaustive validation and query accounting.
//! - [`solvers`]: the sequential randomized framework, every probability rule,
//!   exact expectation over the rule's randomness and brute-force optima.
//! - [`lemma_lab`]: analysis-level checks of the per-step inequalities that the
//!   approximation guarantees rest on.
//! - [`bench`]: experiment records, certification runs and the ratio table used
//!   by the `ksubmax` command-line tool.

pub mod bench;
pub mod error;
pub mod kernel;
pub mod lemma_lab;
pub mod oracle;
pub mod seed;
pub mod solvers;

pub use error::{Error, Result};
pub use kernel::{Assignment, Dims, MarginalVector};
pub use oracle::{CountingOracle, OracleSpec, ValidationMethod, ValidationReport};
pub use solvers::{ElementOrder, ProbabilityRule, RunReport, StepDistribution};
