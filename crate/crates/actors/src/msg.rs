use thunderdome_chainsim::{ChainEvent, Tx};
use thunderdome_core::{ChannelId, ChannelState, PreRegister, RegisterTx, Signature, UpdateAnnouncement};
use thunderdome_netsim::Payload;

/// Why a payment-channel update is proposed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Purpose {
    Lock,
    /// Release the lock according to this virtual-channel state.
    Unlock {
        target: UpdateAnnouncement,
    },
}

#[derive(Clone, Debug)]
pub enum Msg {
    /// Party to the collecting intermediary. End parties also sign `s_1`.
    PreRegister {
        pre: PreRegister,
        s1_sig: Option<Signature>,
    },
    /// Collector to every party once all pre-registers match.
    Register {
        register: RegisterTx,
        s1: UpdateAnnouncement,
    },
    /// Party to every warden of the virtual channel.
    OpenVc {
        register: RegisterTx,
        s1: UpdateAnnouncement,
    },
    /// Warden signature over the register digest.
    OpenAck {
        sig: Signature,
    },
    /// Payment-channel update offered to the counterparty.
    PcPropose {
        channel: ChannelId,
        state: ChannelState,
        sig: Signature,
        purpose: Purpose,
    },
    PcAccept {
        channel: ChannelId,
        sig: Signature,
    },
    PcRefuse {
        channel: ChannelId,
    },
    /// Fully signed payment-channel state, sent to its committee.
    PcUpdate {
        ann: UpdateAnnouncement,
    },
    PcAck {
        ann: UpdateAnnouncement,
        sig: Signature,
    },
    /// The sender's lock on `channel` has a quorum certificate.
    LockDone {
        channel: ChannelId,
    },
    Abort,
    /// Virtual-channel update from the proposing end party.
    Propose {
        state: ChannelState,
        sig: Signature,
    },
    CoSign {
        state: ChannelState,
        sig: Signature,
    },
    /// Fully signed virtual-channel state, sent to every warden.
    Announce {
        ann: UpdateAnnouncement,
    },
    WardenSig {
        ann: UpdateAnnouncement,
        sig: Signature,
    },
    CloseRequest {
        ann: UpdateAnnouncement,
    },
    CollabPcRequest {
        ann: UpdateAnnouncement,
    },
    CollabPcAgree {
        ann: UpdateAnnouncement,
    },
    Tx(Tx),
    Chain(ChainEvent),
}

impl Payload for Msg {
    fn kind(&self) -> &'static str {
        match self {
            Msg::PreRegister { .. } => "PreRegister",
            Msg::Register { .. } => "Register",
            Msg::OpenVc { .. } => "OpenVc",
            Msg::OpenAck { .. } => "OpenAck",
            Msg::PcPropose { .. } => "PcPropose",
            Msg::PcAccept { .. } => "PcAccept",
            Msg::PcRefuse { .. } => "PcRefuse",
            Msg::PcUpdate { .. } => "PcUpdate",
            Msg::PcAck { .. } => "PcAck",
            Msg::LockDone { .. } => "LockDone",
            Msg::Abort => "Abort",
            Msg::Propose { .. } => "Propose",
            Msg::CoSign { .. } => "CoSign",
            Msg::Announce { .. } => "Announce",
            Msg::WardenSig { .. } => "WardenSig",
            Msg::CloseRequest { .. } => "CloseRequest",
            Msg::CollabPcRequest { .. } => "CollabPcRequest",
            Msg::CollabPcAgree { .. } => "CollabPcAgree",
            Msg::Tx(tx) => tx.kind().name(),
            Msg::Chain(_) => "ChainEvent",
        }
    }

    fn summary(&self) -> String {
        match self {
            Msg::PcPropose { channel, state, purpose, .. } => {
                let what = match purpose {
                    Purpose::Lock => "lock".to_string(),
                    Purpose::Unlock { target } => format!("unlock@{}", target.seq()),
                };
                format!("PcPropose {channel} seq={} {what}", state.seq)
            }
            Msg::PcUpdate { ann } | Msg::PcAck { ann, .. } => {
                format!("{} {} seq={}", self.kind(), ann.channel(), ann.seq())
            }
            Msg::Propose { state, .. } | Msg::CoSign { state, .. } => format!("{} seq={}", self.kind(), state.seq),
            Msg::Announce { ann }
            | Msg::WardenSig { ann, .. }
            | Msg::CloseRequest { ann }
            | Msg::CollabPcRequest { ann }
            | Msg::CollabPcAgree { ann } => format!("{} {} seq={}", self.kind(), ann.channel(), ann.seq()),
            Msg::Tx(tx) => tx.summary(),
            Msg::Chain(ev) => ev.summary(),
            _ => self.kind().to_string(),
        }
    }
}
