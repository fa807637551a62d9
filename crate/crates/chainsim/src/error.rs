use thunderdome_core::{ActorId, ContractId};

use crate::contract::Phase;

/// Why a transaction was included in a block but had no effect.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Reject {
    #[error("unknown contract {0}")]
    UnknownContract(ContractId),
    #[error("contract {0} already deployed")]
    AlreadyDeployed(ContractId),
    #[error("sender is not allowed to do this")]
    Unauthorized,
    #[error("{who} cannot pay {amount}")]
    InsufficientFunds { who: ActorId, amount: u64 },
    #[error("already funded")]
    AlreadyFunded,
    #[error("channel not fully funded")]
    NotFunded,
    #[error("wrong phase {0:?}")]
    WrongPhase(Phase),
    #[error("invalid register transaction: {0}")]
    BadRegister(String),
    #[error("duplicate")]
    Duplicate,
    #[error("invalid publication: {0}")]
    BadPublication(&'static str),
    #[error("invalid state: {0}")]
    BadState(&'static str),
    #[error("cross-check from {0}, which is not a peer")]
    UnknownPeer(ContractId),
    #[error("close already in progress")]
    CloseInProgress,
}
