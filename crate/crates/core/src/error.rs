use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("fault tolerance f must be at least 1")]
    ZeroFaultTolerance,
    #[error("channel balance must be at least 1")]
    ZeroBalance,
    #[error("initial state sums to {got}, expected {expected}")]
    BalanceMismatch { expected: u64, got: u64 },
    #[error("leader contract {0} is not among the listed contracts")]
    LeaderNotListed(u32),
    #[error("register transaction lacks a valid signature from {0}")]
    IncompleteRegister(String),
    #[error("pre-register contents do not match")]
    MismatchedPreRegister,
}
