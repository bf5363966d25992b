//! Identification bounds for conditional outcome distributions when the
//! conditioning covariate is classified under two different schemes.
//!
//! The setting: a study reports the distribution of an outcome `y` given a
//! group label `w`, but decisions must be made for groups labeled under a
//! different scheme `x`. Knowing (fully or partially) how the two labelings
//! cross-classify the same population, the feasible values of features of
//! `P(y|x)` — event probabilities, means, quantiles — form intervals. This
//! crate computes those intervals:
//!
//! - [`prob`] — distributions on a finite outcome support, label sets, the
//!   cross-classification joint `P(w, x)`, and scenario validation.
//! - [`closed_form`] — closed-form event-probability bounds for a binary
//!   split of the `x` scheme, point identification under aggregation, and
//!   per-subgroup bounds when `x` refines a single `w` category.
//! - [`dominance`] — mean and quantile bounds via truncation envelopes that
//!   are extreme under first-order stochastic dominance.
//! - [`lp`] — a small dense two-phase simplex solver with box bounds.
//! - [`sharp`] — LP-assembled sharp bounds on `P(y=1|x)` for general finite
//!   label sets, bounded-variation constraints, and partial knowledge of
//!   `P(w, x)` (marginals-only sweeps, candidate sets).
//! - [`oracle`] — an independent grid-enumeration verifier and a seeded
//!   scenario generator for property tests.

pub mod bound;
pub mod closed_form;
pub mod dominance;
pub mod error;
pub mod lp;
pub mod oracle;
pub mod prob;
pub mod sharp;

pub use bound::{BoundInterval, Method};
pub use error::{Error, Result};
pub use prob::{
    AggregationStructure, DiscreteDistribution, JointWX, LabelSet, Scenario, WXKnowledge,
    PROB_SUM_TOL,
};
