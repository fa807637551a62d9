//! The blockchain and the per-payment-channel contract.
//!
//! Transactions are applied one block at a time. Each contract tracks
//! deposits, warden collateral, warden publications, proofs of fraud and the
//! cross-check exchange with the other contracts of a virtual channel. No
//! handler looks at the block height or the clock: every transition is
//! triggered by a transaction.

mod contract;
mod error;
mod ledger;
pub mod settlement;
mod tx;

pub use contract::{Bank, ChainEvent, ContractState, Phase, VcClosure, WardenCell};
pub use error::Reject;
pub use ledger::{Block, BlockEntry, BlockOutput, ChainConfig, Ledger};
pub use tx::{DeployParams, Sender, Tx, TxBody, TxKind, WsClaim};
