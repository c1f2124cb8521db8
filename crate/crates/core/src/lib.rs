//! Linear contracts for multi-agent teams with combinatorial success
//! probabilities.
//!
//! A principal delegates a project to `n` agents. Agent `i` controls a set of
//! actions `A_i`; each action has a cost, and the set of all actions taken
//! determines the success probability of the project through a monotone set
//! function `f`. A linear contract pays agent `i` a fraction `alpha_i` of the
//! reward on success. This crate provides:
//!
//! - the domain model (instances, contracts, utilities) in [`model`],
//! - reward-function families and value/demand oracles in [`oracles`],
//! - potential-function machinery, Nash and subset-stability checks in
//!   [`equilibrium`],
//! - approximation algorithms with certified guarantees in [`algorithms`],
//! - exact brute-force and envelope oracles in [`exact`],
//! - canonical and random instance generators in [`instances`].
//!
//! Core numerics are generic over a [`scalar::Scalar`] so that rational-valued
//! instances can be solved exactly; the approximation algorithms require a
//! floating-point [`scalar::RealScalar`].

pub mod algorithms;
pub mod equilibrium;
mod error;
pub mod exact;
pub mod instances;
pub mod model;
pub mod oracles;
pub mod scalar;
pub mod set;

pub use error::{Error, Result};
pub use model::{Contract, Instance, NumericConfig, TieBreak};
pub use scalar::{RealScalar, Scalar};
pub use set::ActionSet;

/// Default floating-point scalar used by the CLI and the generators.
pub type Value = f64;

/// Exact rational scalar for tolerance-free computations on rational-valued
/// reward families.
pub type Rational = num_rational::BigRational;

/// Agent index, dense in `0..n`.
pub type AgentId = usize;

/// Action index, dense in `0..m`.
pub type ActionId = usize;
