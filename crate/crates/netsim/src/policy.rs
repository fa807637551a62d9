use std::collections::BTreeSet;

use thunderdome_core::ActorId;

use crate::network::Endpoint;

pub const DEFAULT_HORIZON: u64 = 50;

/// Delay every message of `kind` sent by `target` by exactly `delay` steps
/// (clamped to the horizon).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Censorship {
    pub target: ActorId,
    pub kind: String,
    pub delay: u64,
}

/// Drop messages from a Byzantine sender. `None` fields match anything.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DropRule {
    pub from: ActorId,
    pub to: Option<Endpoint>,
    pub kind: Option<String>,
}

#[derive(Clone, Debug)]
pub struct AdversaryPolicy {
    pub seed: u64,
    pub horizon: u64,
    pub censorship_targets: Vec<Censorship>,
    pub drop_rules: Vec<DropRule>,
    /// Delay every honest message by the full horizon.
    pub stall_all: bool,
    /// Senders whose messages the drop rules may apply to.
    pub byzantine: BTreeSet<ActorId>,
}

impl AdversaryPolicy {
    pub fn new(seed: u64, horizon: u64) -> AdversaryPolicy {
        assert!(horizon >= 1, "horizon must be at least one step");
        AdversaryPolicy {
            seed,
            horizon,
            censorship_targets: Vec::new(),
            drop_rules: Vec::new(),
            stall_all: false,
            byzantine: BTreeSet::new(),
        }
    }

    pub fn is_byzantine(&self, from: &Endpoint) -> bool {
        matches!(from, Endpoint::Actor(a) if self.byzantine.contains(a))
    }

    pub(crate) fn censorship_delay(&self, from: &Endpoint, kind: &str) -> Option<u64> {
        let Endpoint::Actor(sender) = from else { return None };
        self.censorship_targets
            .iter()
            .filter(|c| c.target == *sender && c.kind == kind)
            .map(|c| c.delay.clamp(1, self.horizon))
            .max()
    }

    pub(crate) fn drops(&self, from: &Endpoint, to: &Endpoint, kind: &str) -> bool {
        let Endpoint::Actor(sender) = from else { return false };
        if !self.byzantine.contains(sender) {
            return false;
        }
        self.drop_rules.iter().any(|r| {
            r.from == *sender && r.to.as_ref().is_none_or(|t| t == to) && r.kind.as_deref().is_none_or(|k| k == kind)
        })
    }
}
