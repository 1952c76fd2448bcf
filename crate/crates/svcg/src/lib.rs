//! Weighted congestion games under Shapley-value cost sharing.
//!
//! A game is a finite set of weighted players choosing resource subsets;
//! each resource charges a polynomial cost on its total load and the joint
//! cost `C_e(x) = x * c_e(x)` is split among the users of `e`. This crate
//! provides:
//!
//! - [`game`]: the game/profile model, load evaluation, and the JSON file
//!   format shared by the CLI, generator, and tests;
//! - [`sharing`]: exact Shapley shares (subset-weighted closed form),
//!   a permutation-sampling estimator with median-of-batches amplification,
//!   and proportional shares;
//! - [`potential`]: the exact potential, its player-set-limited variant, and
//!   partial potentials (differences of limited potentials);
//! - [`solver`]: phased improvement dynamics that compute an
//!   alpha-approximate pure Nash equilibrium with a move-by-move trace;
//! - [`analysis`]: brute-force optimizers, equilibrium verification,
//!   measured vs. closed-form price-of-anarchy and stretch bounds, and
//!   Shapley/proportional sandwich certificates;
//! - [`generator`]: seeded random instance generation.
//!
//! All quantities are `f64`; equality assertions use the global relative
//! tolerance [`numeric::REL_TOL`].

pub mod analysis;
pub mod game;
pub mod generator;
pub mod numeric;
pub mod potential;
pub mod sharing;
pub mod solver;

pub use game::{Game, Profile};
pub use sharing::{SampleConfig, ShareMethod};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The game violates a structural invariant.
    #[error("invalid game: {0}")]
    InvalidGame(String),

    /// A profile does not fit the game it is applied to.
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    /// A documented operation precondition was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Exact Shapley requested for a user set above the enumeration cap;
    /// the caller should switch to sampling.
    #[error("exact size exceeded: {users} users on one resource (cap {cap})")]
    ExactSizeExceeded { users: usize, cap: usize },

    /// An enumeration-based operation refused to run above its cap.
    #[error("enumeration cap exceeded: {0}")]
    CapExceeded(String),

    /// The requested gamma leaves no positive room in `1/theta - 2*gamma`.
    #[error("gamma violates stretch constraint: gamma = {gamma}, maximal admissible gamma for degree {degree} is {max_admissible}")]
    GammaTooLarge {
        gamma: f64,
        degree: usize,
        max_admissible: f64,
    },

    /// The closed-form bound denominator is non-positive at this `rho`.
    #[error("rho exceeds admissible range for degree {degree}: rho = {rho}")]
    RhoOutOfRange { rho: f64, degree: usize },

    /// The solver exceeded the step bound that the phased dynamics
    /// cannot legitimately exceed; this signals an implementation bug, so
    /// the partial trace is attached for diagnosis.
    #[error("step budget exceeded: {steps} moves > budget {budget}")]
    StepBudgetExceeded {
        steps: u64,
        budget: f64,
        trace: Box<solver::SolveTrace>,
    },

    /// Generator parameters are internally inconsistent.
    #[error("inconsistent generator parameters: {0}")]
    InconsistentParams(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
