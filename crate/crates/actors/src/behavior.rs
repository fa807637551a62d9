use thunderdome_core::ActorId;

/// Protocol phases the engine runs in order. Each ends when the network is
/// quiescent and no actor wants to act.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Deploy,
    Open,
    Updates,
    Close,
    PcClose,
}

impl Stage {
    pub const ALL: [Stage; 5] = [Stage::Deploy, Stage::Open, Stage::Updates, Stage::Close, Stage::PcClose];

    /// Block tag for transactions mined during the stage.
    pub fn tag(self) -> &'static str {
        match self {
            Stage::Deploy => "deploy",
            Stage::Open => "open",
            Stage::Updates => "update",
            Stage::Close => "close",
            Stage::PcClose => "pc-close",
        }
    }
}

/// When an offline party or a crashed warden stops.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Step(u64),
    Stage(Stage),
}

impl Activation {
    pub fn reached(self, now: u64, stage: Stage) -> bool {
        match self {
            Activation::Step(s) => now >= s,
            Activation::Stage(s) => stage >= s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitMode {
    /// Two different states with the same sequence number.
    SameSeq,
    /// The low committees stop at `X_{i}`, the high ones also get `Y_{i+1}`.
    SplitSeq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartyBehavior {
    Honest,
    /// Stops sending and processing; messages already sent still arrive.
    Offline {
        from: Activation,
    },
    /// The two end parties share keys, sign two conflicting states, show each
    /// to a different half of the committees, then close on both sides at once.
    DoubleStateColluder {
        partner: ActorId,
        mode: SplitMode,
    },
    /// Requests to close with its own older state `seq` and immediately closes
    /// unilaterally, withholding proofs.
    OldStateCloser {
        seq: u64,
    },
    /// Locks its own contribution shifted by `delta` when opening.
    InconsistentFunder {
        delta: i64,
    },
    /// Accepts `partner`'s close request without checking it and closes the
    /// other side unilaterally.
    CollusiveIntermediary {
        partner: ActorId,
    },
}

impl PartyBehavior {
    pub fn is_honest(self) -> bool {
        matches!(self, PartyBehavior::Honest)
    }

    /// Offline parties are faulty but never equivocate.
    pub fn is_offline(self) -> bool {
        matches!(self, PartyBehavior::Offline { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WardenBehavior {
    Honest,
    /// Publishes its highest stored state with sequence number at most `seq`.
    StalePublisher {
        seq: u64,
    },
    /// Signs every well-formed announcement, including conflicting ones.
    DoubleSigner,
    /// Never sends its signatures to `target` and never publishes.
    Withholder {
        target: ActorId,
    },
    /// Stops entirely once `from` is reached.
    Crash {
        from: Activation,
    },
}

impl WardenBehavior {
    pub fn is_honest(self) -> bool {
        matches!(self, WardenBehavior::Honest)
    }
}
