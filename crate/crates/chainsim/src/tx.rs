use std::fmt;

use thunderdome_core::{
    ActorId, ChannelId, Coins, ContractId, ProofOfFraud, RegisterTx, SignedStatePublication, UpdateAnnouncement,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sender {
    Actor(ActorId),
    Contract(ContractId),
}

impl fmt::Display for Sender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sender::Actor(a) => write!(f, "{a}"),
            Sender::Contract(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TxKind {
    DeployChannel,
    FundParty,
    FundWarden,
    CollabClosePC,
    RegisterVC,
    PublishState,
    SubmitProofs,
    CrossCheck,
    ClosePcAfterVc,
}

impl TxKind {
    pub fn name(self) -> &'static str {
        match self {
            TxKind::DeployChannel => "DeployChannel",
            TxKind::FundParty => "FundParty",
            TxKind::FundWarden => "FundWarden",
            TxKind::CollabClosePC => "CollabClosePC",
            TxKind::RegisterVC => "RegisterVC",
            TxKind::PublishState => "PublishState",
            TxKind::SubmitProofs => "SubmitProofs",
            TxKind::CrossCheck => "CrossCheck",
            TxKind::ClosePcAfterVc => "ClosePcAfterVc",
        }
    }
}

/// Parameters fixed when a payment-channel contract is deployed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeployParams {
    pub channel: ChannelId,
    /// Left and right party; the left one deploys.
    pub parties: [ActorId; 2],
    pub deposits: [Coins; 2],
    pub committee: Vec<ActorId>,
    pub f: u32,
    /// Collateral each warden must lock.
    pub collateral: Coins,
}

/// A candidate closing state together with the contract whose own warden
/// publications produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WsClaim {
    pub ann: UpdateAnnouncement,
    pub origin: ContractId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TxBody {
    DeployChannel {
        contract: ContractId,
        params: DeployParams,
    },
    FundParty {
        contract: ContractId,
    },
    FundWarden {
        contract: ContractId,
    },
    /// One half of a collaborative close; the contract closes once both
    /// parties submitted the same fully signed state.
    CollabClosePC {
        contract: ContractId,
        ann: UpdateAnnouncement,
    },
    /// Starts a unilateral virtual-channel close. `fee` is paid by the sender.
    RegisterVC {
        contract: ContractId,
        register: RegisterTx,
        fee: Coins,
    },
    PublishState {
        contract: ContractId,
        vc: Option<SignedStatePublication>,
        pc: Option<SignedStatePublication>,
    },
    SubmitProofs {
        contract: ContractId,
        proofs: Vec<ProofOfFraud>,
    },
    /// Contract-to-contract query. `ws: None` is the NULL reply.
    CrossCheck {
        from: ContractId,
        to: ContractId,
        register: RegisterTx,
        ws: Option<WsClaim>,
    },
    /// Unilateral payment-channel close request.
    ClosePcAfterVc {
        contract: ContractId,
    },
}

impl TxBody {
    pub fn kind(&self) -> TxKind {
        match self {
            TxBody::DeployChannel { .. } => TxKind::DeployChannel,
            TxBody::FundParty { .. } => TxKind::FundParty,
            TxBody::FundWarden { .. } => TxKind::FundWarden,
            TxBody::CollabClosePC { .. } => TxKind::CollabClosePC,
            TxBody::RegisterVC { .. } => TxKind::RegisterVC,
            TxBody::PublishState { .. } => TxKind::PublishState,
            TxBody::SubmitProofs { .. } => TxKind::SubmitProofs,
            TxBody::CrossCheck { .. } => TxKind::CrossCheck,
            TxBody::ClosePcAfterVc { .. } => TxKind::ClosePcAfterVc,
        }
    }

    /// The contract the transaction is addressed to.
    pub fn contract(&self) -> ContractId {
        match self {
            TxBody::DeployChannel { contract, .. }
            | TxBody::FundParty { contract }
            | TxBody::FundWarden { contract }
            | TxBody::CollabClosePC { contract, .. }
            | TxBody::RegisterVC { contract, .. }
            | TxBody::PublishState { contract, .. }
            | TxBody::SubmitProofs { contract, .. }
            | TxBody::ClosePcAfterVc { contract } => *contract,
            TxBody::CrossCheck { to, .. } => *to,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tx {
    pub sender: Sender,
    pub body: TxBody,
}

impl Tx {
    pub fn from_actor(actor: ActorId, body: TxBody) -> Tx {
        Tx { sender: Sender::Actor(actor), body }
    }

    pub fn kind(&self) -> TxKind {
        self.body.kind()
    }

    pub fn summary(&self) -> String {
        let c = self.body.contract();
        match &self.body {
            TxBody::RegisterVC { register, fee, .. } => {
                format!("{}@{c} vc={} fee={fee}", self.kind().name(), register.vc())
            }
            TxBody::PublishState { vc, pc, .. } => format!(
                "PublishState@{c} vc_seq={} pc_seq={}",
                vc.as_ref().map_or("-".into(), |p| p.announcement.seq().to_string()),
                pc.as_ref().map_or("-".into(), |p| p.announcement.seq().to_string()),
            ),
            TxBody::SubmitProofs { proofs, .. } => format!("SubmitProofs@{c} n={}", proofs.len()),
            TxBody::CrossCheck { from, ws, .. } => match ws {
                Some(w) => format!("CrossCheck {from}->{c} seq={} origin={}", w.ann.seq(), w.origin),
                None => format!("CrossCheck {from}->{c} NULL"),
            },
            TxBody::CollabClosePC { ann, .. } => format!("CollabClosePC@{c} seq={}", ann.seq()),
            _ => format!("{}@{c}", self.kind().name()),
        }
    }
}
