//! Shared vocabulary of the simulator: actor identities, canonical encoding,
//! simulated signatures, channel states, quorum certificates, proofs of fraud
//! and the register transaction.

pub mod codec;
pub mod collateral;
pub mod crypto;
pub mod error;
pub mod ids;
pub mod register;
pub mod state;

pub use codec::{Canonical, Encoder};
pub use collateral::{quorum_size, required_collateral};
pub use crypto::{digest, sign, verify, Digest, Signature, SigningKey};
pub use error::CoreError;
pub use ids::{ActorId, ActorKind, ChannelId, ContractId, Label};
pub use register::{
    assemble_register, make_register_tx, match_pre_registers, ContractInfo, PreRegister, RegisterBody, RegisterTx,
};
pub use state::{
    validate_proof_of_fraud, verify_quorum, ChannelState, ProofOfFraud, QuorumCert, SignedStatePublication,
    UpdateAnnouncement, VirtualLock,
};

/// Coins are whole units; there are no fractional amounts anywhere.
pub type Coins = u64;
