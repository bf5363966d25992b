//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Counts matrix was empty or had no positive entry.
    #[error("counts matrix is empty or all zero")]
    InvalidCounts,

    /// A row, column, or share that must carry positive mass does not.
    #[error("{axis} {index} has zero total mass")]
    DegenerateMargin { axis: &'static str, index: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid label set: {0}")]
    InvalidLabels(String),

    #[error("invalid joint table: {0}")]
    InvalidJoint(String),

    /// Conditioning on an event of probability zero (`p = 1` leaves no mass
    /// on the conditioned cell).
    #[error("conditioning event has probability zero (p = {p})")]
    DegenerateConditioning { p: f64 },

    /// The joint does not have the deterministic aggregation structure the
    /// operation requires.
    #[error("joint structure does not aggregate as required")]
    NotAggregation,

    #[error("wrong shape: operation requires {expected}")]
    WrongShape { expected: &'static str },

    #[error("unsupported shape: {detail}")]
    UnsupportedShape { detail: &'static str },

    /// Operation needs `P(w, x)` itself, not marginals or candidates.
    #[error("operation requires full knowledge of P(w,x)")]
    NeedsFullJoint,

    #[error("solver stalled after {iterations} simplex iterations")]
    SolverStalled { iterations: usize },

    /// The feasible set is empty. The bound system is solvable for any
    /// well-formed scenario, so this signals bad input data.
    #[error("scenario is inconsistent: {detail}")]
    InconsistentScenario { detail: String },

    /// Bounded-variation deltas contradict the rest of the scenario.
    #[error("bounded-variation constraints are infeasible: deltas too tight")]
    BvTooTight,

    /// Grid enumeration refused to start because it would visit too many
    /// nodes.
    #[error("enumeration would visit {required} grid nodes, budget is {budget}")]
    TooLarge { required: u128, budget: u64 },

    /// No grid point satisfied the row constraints at the configured
    /// tolerance; retry with at least the suggested one.
    #[error(
        "no grid point satisfies the constraints; widen constraint_tol to at least {suggested}"
    )]
    NoFeasibleGridPoint { suggested: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
