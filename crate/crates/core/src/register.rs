use std::collections::BTreeSet;

use crate::codec::{Canonical, Encoder};
use crate::crypto::{digest, verify, Digest, Signature, SigningKey};
use crate::error::CoreError;
use crate::ids::{ActorId, ChannelId, ContractId};
use crate::state::ChannelState;
use crate::Coins;

/// Contracts that back the virtual channel, in path order, and the one that
/// breaks equal-sequence ties during cross-checking.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ContractInfo {
    pub contracts: Vec<ContractId>,
    pub leader: ContractId,
}

/// Unsigned contents of the register transaction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RegisterBody {
    pub vc: ChannelId,
    /// Main parties in path order; the first and last are the end parties.
    pub parties: Vec<ActorId>,
    /// Union of all committees, sorted and deduplicated.
    pub wardens: Vec<ActorId>,
    pub initial_state: ChannelState,
    pub balance: Coins,
    pub contract_info: ContractInfo,
}

impl RegisterBody {
    pub fn new(
        parties: Vec<ActorId>,
        committees: &[Vec<ActorId>],
        initial_state: ChannelState,
        balance: Coins,
        contract_info: ContractInfo,
    ) -> Result<RegisterBody, CoreError> {
        if balance == 0 {
            return Err(CoreError::ZeroBalance);
        }
        let got = initial_state.total();
        if got != balance {
            return Err(CoreError::BalanceMismatch { expected: balance, got });
        }
        if !contract_info.contracts.contains(&contract_info.leader) {
            return Err(CoreError::LeaderNotListed(contract_info.leader.0));
        }
        let wardens: BTreeSet<_> = committees.iter().flatten().copied().collect();
        Ok(RegisterBody {
            vc: initial_state.channel_id,
            parties,
            wardens: wardens.into_iter().collect(),
            initial_state,
            balance,
            contract_info,
        })
    }

    pub fn end_parties(&self) -> [ActorId; 2] {
        [self.parties[0], *self.parties.last().expect("at least two parties")]
    }
}

impl Canonical for RegisterBody {
    fn encode(&self) -> Encoder {
        let mut enc = Encoder::new("thunderdome/register/v1");
        enc.channel(self.vc);
        enc.seq(&self.parties, |e, p| {
            e.actor(p);
        });
        enc.seq(&self.wardens, |e, w| {
            e.actor(w);
        });
        enc.nested(&self.initial_state).u64(self.balance);
        enc.seq(&self.contract_info.contracts, |e, c| {
            e.contract(*c);
        });
        enc.contract(self.contract_info.leader);
        enc
    }
}

/// Register transaction: the body plus one signature per main party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterTx {
    pub body: RegisterBody,
    pub sigs: Vec<Signature>,
}

impl RegisterTx {
    pub fn verify(&self) -> Result<(), CoreError> {
        let bytes = self.body.to_bytes();
        for p in &self.body.parties {
            if !self.sigs.iter().any(|s| verify(s, *p, &bytes)) {
                return Err(CoreError::IncompleteRegister(p.label().to_string()));
            }
        }
        Ok(())
    }

    pub fn digest(&self) -> Digest {
        digest(&self.body.to_bytes())
    }

    pub fn vc(&self) -> ChannelId {
        self.body.vc
    }

    pub fn is_leader(&self, contract: ContractId) -> bool {
        self.body.contract_info.leader == contract
    }
}

/// What an end party sends the intermediaries before the register transaction
/// exists: the proposed body and its own signature over it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreRegister {
    pub body: RegisterBody,
    pub sig: Signature,
}

impl PreRegister {
    pub fn new(key: &SigningKey, body: RegisterBody) -> PreRegister {
        let sig = key.sign(&body.to_bytes());
        PreRegister { body, sig }
    }
}

/// An intermediary proceeds only if every pre-register carries the same body
/// and a valid signature from its sender.
pub fn match_pre_registers(pres: &[PreRegister]) -> Result<RegisterBody, CoreError> {
    let first = pres.first().ok_or(CoreError::MismatchedPreRegister)?;
    for p in pres {
        if p.body != first.body || !verify(&p.sig, p.sig.signer(), &p.body.to_bytes()) {
            return Err(CoreError::MismatchedPreRegister);
        }
    }
    Ok(first.body.clone())
}

pub fn assemble_register(body: RegisterBody, sigs: Vec<Signature>) -> Result<RegisterTx, CoreError> {
    let bytes = body.to_bytes();
    let mut kept: Vec<Signature> = Vec::with_capacity(body.parties.len());
    for p in &body.parties {
        match sigs.iter().find(|s| verify(s, *p, &bytes)) {
            Some(s) => kept.push(*s),
            None => return Err(CoreError::IncompleteRegister(p.label().to_string())),
        }
    }
    Ok(RegisterTx { body, sigs: kept })
}

/// Builds the body and collects a signature from every key. Party order is
/// the order of `keys`.
pub fn make_register_tx(
    keys: &[&SigningKey],
    committees: &[Vec<ActorId>],
    initial_state: ChannelState,
    balance: Coins,
    contract_info: ContractInfo,
) -> Result<RegisterTx, CoreError> {
    let parties = keys.iter().map(|k| k.owner()).collect();
    let body = RegisterBody::new(parties, committees, initial_state, balance, contract_info)?;
    let bytes = body.to_bytes();
    let sigs = keys.iter().map(|k| k.sign(&bytes)).collect();
    assemble_register(body, sigs)
}
