use thiserror::Error;

/// Errors surfaced by filter and planner operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A particle set whose weights are all zero (or negative) cannot be
    /// normalised.
    #[error("degenerate track {label}: particle weights sum to zero")]
    DegenerateTrack { label: u64 },

    /// Exhaustive planning over |A|^S joint actions was refused because the
    /// candidate count exceeds the configured cap.
    #[error("brute-force planning needs {required} evaluations, cap is {cap}")]
    CandidateCapExceeded { required: u128, cap: u128 },

    /// A planner was invoked with no agents or an empty action set.
    #[error("planner invoked with empty {what}")]
    EmptyPlannerInput { what: &'static str },
}
