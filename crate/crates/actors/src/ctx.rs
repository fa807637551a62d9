use thunderdome_chainsim::{Tx, TxBody};
use thunderdome_core::ActorId;
use thunderdome_netsim::Endpoint;

use crate::behavior::Stage;
use crate::msg::Msg;

/// What an actor sees while handling one input, and where its output goes.
pub struct Ctx {
    pub me: ActorId,
    pub now: u64,
    pub stage: Stage,
    pub(crate) out: Vec<(Endpoint, Msg)>,
    pub(crate) notes: Vec<String>,
}

impl Ctx {
    pub fn new(me: ActorId, now: u64, stage: Stage) -> Ctx {
        Ctx { me, now, stage, out: Vec::new(), notes: Vec::new() }
    }

    pub fn send(&mut self, to: ActorId, msg: Msg) {
        self.out.push((Endpoint::Actor(to), msg));
    }

    pub fn broadcast<'a>(&mut self, to: impl IntoIterator<Item = &'a ActorId>, msg: &Msg) {
        for a in to {
            self.send(*a, msg.clone());
        }
    }

    pub fn submit(&mut self, body: TxBody) {
        self.out.push((Endpoint::Chain, Msg::Tx(Tx::from_actor(self.me, body))));
    }

    /// Decision-log entry.
    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn outbox(&self) -> &[(Endpoint, Msg)] {
        &self.out
    }

    pub fn take(self) -> (Vec<(Endpoint, Msg)>, Vec<String>) {
        (self.out, self.notes)
    }
}
