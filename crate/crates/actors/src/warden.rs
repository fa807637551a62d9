use std::collections::BTreeMap;
use std::sync::Arc;

use thunderdome_chainsim::{ChainEvent, TxBody};
use thunderdome_core::{ActorId, RegisterTx, SignedStatePublication, SigningKey, UpdateAnnouncement};

use crate::behavior::{Stage, WardenBehavior};
use crate::ctx::Ctx;
use crate::msg::Msg;
use crate::topology::Topology;

/// A warden of one payment-channel committee. It stores every virtual-channel
/// and payment-channel announcement it signs and publishes on request.
pub struct WardenActor {
    pub id: ActorId,
    key: SigningKey,
    pub behavior: WardenBehavior,
    pub committee: usize,
    topo: Arc<Topology>,
    register: Option<RegisterTx>,
    /// Signed virtual-channel announcements by sequence number.
    pub vc_signed: BTreeMap<u64, Vec<UpdateAnnouncement>>,
    pub pc_signed: BTreeMap<u64, UpdateAnnouncement>,
    published_vc: bool,
    published_pc: bool,
}

impl WardenActor {
    pub fn new(id: ActorId, behavior: WardenBehavior, topo: Arc<Topology>) -> WardenActor {
        let committee = topo.committee_of(id).expect("warden belongs to a committee");
        let init = topo.initial_pc_state(committee);
        let [l, r] = topo.pc_parties(committee);
        // Both parties signed the opening state when the channel was set up.
        let ann = UpdateAnnouncement::new(
            init.clone(),
            init.sign_with(&SigningKey::new(l)),
            init.sign_with(&SigningKey::new(r)),
        );
        WardenActor {
            id,
            key: SigningKey::new(id),
            behavior,
            committee,
            topo,
            register: None,
            vc_signed: BTreeMap::new(),
            pc_signed: BTreeMap::from([(1, ann)]),
            published_vc: false,
            published_pc: false,
        }
    }

    pub fn active(&self, now: u64, stage: Stage) -> bool {
        !matches!(self.behavior, WardenBehavior::Crash { from } if from.reached(now, stage))
    }

    /// Number of announcements signed for virtual-channel sequence `seq`.
    pub fn signatures_at(&self, seq: u64) -> usize {
        self.vc_signed.get(&seq).map_or(0, Vec::len)
    }

    pub fn on_msg(&mut self, from: ActorId, msg: Msg, ctx: &mut Ctx) {
        match msg {
            Msg::OpenVc { register, s1 } => self.on_open(from, register, s1, ctx),
            Msg::Announce { ann } => self.on_announce(ann, ctx),
            Msg::PcUpdate { ann } => self.on_pc_update(from, ann, ctx),
            Msg::Chain(ChainEvent::Deployed { contract }) if contract == Topology::contract(self.committee) => {
                ctx.submit(TxBody::FundWarden { contract });
            }
            _ => {}
        }
    }

    fn on_open(&mut self, from: ActorId, register: RegisterTx, s1: UpdateAnnouncement, ctx: &mut Ctx) {
        if register.verify().is_err()
            || register.body.initial_state != s1.state
            || !s1.signed_by(register.body.end_parties())
            || !register.body.wardens.contains(&self.id)
        {
            return;
        }
        if self.register.is_none() {
            self.register = Some(register.clone());
            self.vc_signed.entry(1).or_default().push(s1);
        }
        let sig = self.key.sign(&register.digest().0);
        ctx.send(from, Msg::OpenAck { sig });
    }

    fn on_announce(&mut self, ann: UpdateAnnouncement, ctx: &mut Ctx) {
        let well_formed =
            self.register.is_some() && self.topo.valid_vc_state(&ann.state) && ann.signed_by(self.topo.ends());
        if !well_formed {
            return;
        }
        let seq = ann.seq();
        let sign = match self.behavior {
            WardenBehavior::DoubleSigner => !self.vc_signed.get(&seq).is_some_and(|v| v.contains(&ann)),
            _ => {
                let stored = self.vc_signed.keys().next_back().copied().unwrap_or(0);
                !self.published_vc && seq == stored + 1 && !self.vc_signed.contains_key(&seq)
            }
        };
        if !sign {
            return;
        }
        self.vc_signed.entry(seq).or_default().push(ann.clone());
        let sig = self.key.sign(&ann.warden_payload());
        for p in self.topo.ends() {
            if matches!(self.behavior, WardenBehavior::Withholder { target } if target == p) {
                continue;
            }
            ctx.send(p, Msg::WardenSig { ann: ann.clone(), sig });
        }
    }

    fn on_pc_update(&mut self, from: ActorId, ann: UpdateAnnouncement, ctx: &mut Ctx) {
        let k = self.committee;
        let parties = self.topo.pc_parties(k);
        let deposits: u64 = self.topo.deposits().iter().sum();
        if ann.channel() != Topology::pc(k) || !ann.signed_by(parties) || ann.state.total() != deposits {
            return;
        }
        let stored = self.pc_signed.keys().next_back().copied().unwrap_or(0);
        let fresh = ann.seq() == stored + 1 && !self.published_pc;
        let repeat = self.pc_signed.get(&ann.seq()) == Some(&ann);
        if fresh {
            self.pc_signed.insert(ann.seq(), ann.clone());
        } else if !repeat && !matches!(self.behavior, WardenBehavior::DoubleSigner) {
            return;
        }
        let sig = self.key.sign(&ann.warden_payload());
        ctx.send(from, Msg::PcAck { ann, sig });
    }

    fn highest_vc(&self) -> Option<&UpdateAnnouncement> {
        let cap = match self.behavior {
            WardenBehavior::StalePublisher { seq } => seq,
            _ => u64::MAX,
        };
        self.vc_signed.range(..=cap).next_back().and_then(|(_, v)| v.first())
    }

    fn highest_pc(&self) -> Option<&UpdateAnnouncement> {
        self.pc_signed.values().next_back()
    }

    /// Publication decision once the virtual channel is registered on this
    /// warden's contract. Made without seeing any other warden's decision.
    pub fn publish_vc(&mut self, now: u64, stage: Stage) -> Option<TxBody> {
        if !self.active(now, stage) || self.published_vc || matches!(self.behavior, WardenBehavior::Withholder { .. }) {
            return None;
        }
        let vc = self.highest_vc()?.clone();
        self.published_vc = true;
        let pc = self.highest_pc().cloned();
        Some(TxBody::PublishState {
            contract: Topology::contract(self.committee),
            vc: Some(SignedStatePublication::new(&self.key, vc)),
            pc: pc.map(|p| SignedStatePublication::new(&self.key, p)),
        })
    }

    /// Publication decision for a unilateral payment-channel close.
    pub fn publish_pc(&mut self, now: u64, stage: Stage) -> Option<TxBody> {
        if !self.active(now, stage) || self.published_pc || matches!(self.behavior, WardenBehavior::Withholder { .. }) {
            return None;
        }
        let pc = self.highest_pc()?.clone();
        self.published_pc = true;
        Some(TxBody::PublishState {
            contract: Topology::contract(self.committee),
            vc: None,
            pc: Some(SignedStatePublication::new(&self.key, pc)),
        })
    }

    /// Wardens have nothing to do at idle.
    pub fn on_stage(&mut self, _stage: Stage, _ctx: &mut Ctx) {}
}

#[cfg(test)]
mod tests {
    use thunderdome_core::make_register_tx;

    use super::*;
    use crate::behavior::Activation;
    use crate::topology::VC_ID;

    fn setup(behavior: WardenBehavior) -> (Arc<Topology>, WardenActor, Vec<SigningKey>) {
        let topo = Arc::new(Topology::new(2, 1, (3, 7), 0, 3, 0).unwrap());
        let keys: Vec<SigningKey> = topo.parties.iter().map(|p| SigningKey::new(*p)).collect();
        let mut w = WardenActor::new(topo.committees[0][0], behavior, topo.clone());
        let refs: Vec<&SigningKey> = keys.iter().collect();
        let reg = make_register_tx(&refs, &topo.committees, topo.s1(), topo.v, topo.contract_info()).unwrap();
        let mut ctx = Ctx::new(w.id, 0, Stage::Open);
        let s1 = ann(&topo, &keys, 1, 3);
        w.on_msg(keys[0].owner(), Msg::OpenVc { register: reg, s1 }, &mut ctx);
        assert!(matches!(ctx.outbox(), [(_, Msg::OpenAck { .. })]));
        (topo, w, keys)
    }

    fn ann(topo: &Topology, keys: &[SigningKey], seq: u64, a: u64) -> UpdateAnnouncement {
        let [ea, eb] = topo.ends();
        let st = thunderdome_core::ChannelState::new(VC_ID, seq, &[(ea, a), (eb, topo.v - a)]);
        UpdateAnnouncement::new(st.clone(), st.sign_with(&keys[0]), st.sign_with(&keys[2]))
    }

    fn announce(w: &mut WardenActor, a: UpdateAnnouncement) -> usize {
        let mut ctx = Ctx::new(w.id, 0, Stage::Updates);
        w.on_msg(a.sigs[0].signer(), Msg::Announce { ann: a }, &mut ctx);
        ctx.outbox().len()
    }

    #[test]
    fn honest_signs_only_the_next_sequence() {
        let (topo, mut w, keys) = setup(WardenBehavior::Honest);
        assert_eq!(announce(&mut w, ann(&topo, &keys, 3, 1)), 0, "gap");
        assert_eq!(announce(&mut w, ann(&topo, &keys, 2, 1)), 2, "next, to both ends");
        assert_eq!(announce(&mut w, ann(&topo, &keys, 2, 9)), 0, "conflicting same seq");
        assert_eq!(w.signatures_at(2), 1);
    }

    #[test]
    fn double_signer_signs_conflicts() {
        let (topo, mut w, keys) = setup(WardenBehavior::DoubleSigner);
        announce(&mut w, ann(&topo, &keys, 2, 1));
        announce(&mut w, ann(&topo, &keys, 2, 9));
        assert_eq!(w.signatures_at(2), 2);
    }

    #[test]
    fn stale_publisher_publishes_its_cap() {
        let (topo, mut w, keys) = setup(WardenBehavior::StalePublisher { seq: 2 });
        for s in 2..=4 {
            announce(&mut w, ann(&topo, &keys, s, s));
        }
        let Some(TxBody::PublishState { vc: Some(p), .. }) = w.publish_vc(0, Stage::Close) else { panic!() };
        assert_eq!(p.announcement.seq(), 2);
        assert!(w.publish_vc(0, Stage::Close).is_none(), "publishes once");
    }

    #[test]
    fn honest_stops_signing_after_publishing() {
        let (topo, mut w, keys) = setup(WardenBehavior::Honest);
        announce(&mut w, ann(&topo, &keys, 2, 1));
        w.publish_vc(0, Stage::Close).unwrap();
        assert_eq!(announce(&mut w, ann(&topo, &keys, 3, 1)), 0);
    }

    #[test]
    fn withholder_skips_target_and_never_publishes() {
        let (topo, mut w, keys) = setup(WardenBehavior::Withholder { target: topo_end(1) });
        assert_eq!(announce(&mut w, ann(&topo, &keys, 2, 1)), 1);
        assert!(w.publish_vc(0, Stage::Close).is_none());
    }

    fn topo_end(i: usize) -> ActorId {
        Topology::new(2, 1, (3, 7), 0, 3, 0).unwrap().ends()[i]
    }

    #[test]
    fn crashed_warden_is_silent() {
        let (_, mut w, _) = setup(WardenBehavior::Crash { from: Activation::Step(5) });
        assert!(w.active(4, Stage::Close));
        assert!(w.publish_vc(5, Stage::Close).is_none());
    }
}
