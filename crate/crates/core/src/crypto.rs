//! Simulated signatures.
//!
//! A signature is the pair (signer, digest of the signed bytes). Its fields are
//! private and the only constructor is [`SigningKey::sign`], so a signature for
//! an actor can only come from code holding that actor's key. Forgery is
//! therefore impossible by construction rather than by hardness.

use std::fmt;

use sha2::{Digest as _, Sha256};

use crate::ids::ActorId;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn short(&self) -> String {
        hex::encode(&self.0[..6])
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.short())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

pub fn digest(bytes: &[u8]) -> Digest {
    Digest(Sha256::digest(bytes).into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature {
    signer: ActorId,
    payload_digest: Digest,
}

impl Signature {
    pub fn signer(&self) -> ActorId {
        self.signer
    }

    pub fn payload_digest(&self) -> Digest {
        self.payload_digest
    }
}

/// Held only by the actor it names. Not `Clone`.
#[derive(Debug)]
pub struct SigningKey {
    owner: ActorId,
}

impl SigningKey {
    pub fn new(owner: ActorId) -> SigningKey {
        SigningKey { owner }
    }

    pub fn owner(&self) -> ActorId {
        self.owner
    }

    pub fn sign(&self, msg: &[u8]) -> Signature {
        Signature { signer: self.owner, payload_digest: digest(msg) }
    }
}

pub fn sign(key: &SigningKey, msg: &[u8]) -> Signature {
    key.sign(msg)
}

pub fn verify(sig: &Signature, signer: ActorId, msg: &[u8]) -> bool {
    sig.signer == signer && sig.payload_digest == digest(msg)
}
