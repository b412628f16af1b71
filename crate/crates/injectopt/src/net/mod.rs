//! The social-network instance model: follower graph, retweet probabilities,
//! type matrices, injection policies, exposure states, and the engagement and
//! diversity functionals.
//!
//! Everything in this module is immutable after construction and safe to
//! share across threads; all operations are pure functions of their inputs.

mod instance;
mod matrices;
mod policy;

pub use instance::{sanitize_edges, InputWarning, Instance, InstanceError};
pub use matrices::{build_type_matrices, limiting_state, SolveOptions, TypeMatrices};
pub use policy::{
    diversity, engagement, validate_policy, InjectionPolicy, NetError, PolicyViolation, State,
    BUDGET_TOLERANCE,
};
