//! Solver and verification toolkit for persuasion games in which sender and
//! receiver both hold maxmin expected utility preferences over a common,
//! set-valued prior.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: games, experiments, strategies, joint distributions and the
//!   three payoff functionals (single prior, maxmin over priors, maxmin over
//!   priors and experiments), plus canonicalization of an experiment through a
//!   receiver strategy.
//! * [`lp`]: a small dense two-phase simplex used by every feasibility and
//!   value computation.
//! * [`obedience`]: half-space, saddle-point and exposed-face tests that
//!   certify the obedient strategy as a best response.
//! * [`minimax`]: the receiver's maxmin best-response value as a linear program.
//! * [`binary`]: the two-state, two-action geometry and the constructive
//!   no-gain argument.
//! * [`sender`]: sender optimization over statistical and ambiguous experiments.
//! * [`campaign`]: seeded randomized verification campaigns.

pub mod binary;
pub mod campaign;
pub mod error;
pub mod hull;
pub mod lp;
pub mod minimax;
pub mod model;
pub mod obedience;
pub mod sampling;
pub mod sender;

pub use error::{Error, Result};

/// Tolerance ledger. Each level sits two or more orders of magnitude above
/// the previous one.
pub mod tol {
    /// Row sums and simplex membership at construction.
    pub const REPRESENTATION: f64 = 1e-12;
    /// Payoff ties when collecting argmin faces.
    pub const TIE: f64 = 1e-10;
    /// Obedience slack and best-response value gaps.
    pub const FEASIBILITY: f64 = 1e-8;
    /// Sender value comparisons.
    pub const VALUE: f64 = 1e-6;
}
