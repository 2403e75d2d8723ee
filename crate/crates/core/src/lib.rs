//! Exact finite-volume Gibbs probabilities for lattice interaction models and
//! their high-temperature cluster expansion.
//!
//! The crate is organised bottom-up:
//!
//! * [`lattice`]: points of ℤ^ν, the L1 metric, cubes Λ_N.
//! * [`graphkit`]: lattice Steiner sizes S(B), associated trees and tracks,
//!   the interaction-set collection 𝔅 and the constants L and λ₀.
//! * [`model`]: site distributions, potentials, cylinder events, and the
//!   Ising / Potts / custom builders.
//! * [`exactgibbs`]: brute-force finite-volume probabilities P_N(A).
//! * [`cumulants`]: joint semi-invariants with respect to the product measure.
//! * [`expansion`]: families, the series terms J_A(N, n), stabilization, the
//!   certified tail bound, and the thermodynamic-limit report.

pub mod budget;
pub mod cumulants;
pub mod error;
pub mod exactgibbs;
pub mod expansion;
pub mod graphkit;
pub mod lattice;
pub mod model;
pub mod observable;
pub mod record;
pub mod sum;

pub use budget::Budget;
pub use error::{Error, Result};
pub use lattice::{LatticePoint, Region};
pub use record::VerificationRecord;
