use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thunderdome_chainsim::{ChainEvent, DeployParams, TxBody};
use thunderdome_core::{
    assemble_register, match_pre_registers, quorum_size, verify, ActorId, Canonical, ChannelState, Digest, PreRegister,
    ProofOfFraud, RegisterTx, Signature, SignedStatePublication, SigningKey, UpdateAnnouncement,
};

use crate::behavior::{PartyBehavior, SplitMode, Stage};
use crate::ctx::Ctx;
use crate::msg::{Msg, Purpose};
use crate::topology::{Topology, VC_ID};

/// One party's view of an adjacent payment channel.
#[derive(Clone, Debug)]
pub struct PcView {
    pub k: usize,
    pub counterparty: ActorId,
    pub is_left: bool,
    /// Latest state signed by both parties.
    pub latest: UpdateAnnouncement,
    outgoing: Option<(ChannelState, Purpose)>,
    refused: bool,
    purposes: BTreeMap<u64, Purpose>,
    acks: BTreeMap<u64, BTreeSet<ActorId>>,
    /// Highest sequence number with a quorum certificate from the committee.
    pub committed_seq: u64,
    pub lock_committed: bool,
    /// Virtual-channel state the lock was released by, off-chain.
    pub unlock_target: Option<UpdateAnnouncement>,
    /// The virtual channel is registered on this channel's contract.
    pub on_chain: bool,
    pub closed: bool,
}

impl PcView {
    pub fn locked(&self) -> bool {
        self.latest.state.lock.is_some()
    }
}

enum Verdict {
    Accept,
    Refuse,
    Defer,
}

/// A main party of the path: an end party or an intermediary.
pub struct PartyActor {
    pub id: ActorId,
    key: SigningKey,
    pub behavior: PartyBehavior,
    topo: Arc<Topology>,
    pub pos: usize,
    rng: ChaCha8Rng,
    pub pcs: BTreeMap<usize, PcView>,

    pres: BTreeMap<ActorId, (PreRegister, Option<Signature>)>,
    pub register: Option<RegisterTx>,
    s1: Option<UpdateAnnouncement>,
    open_acks: BTreeMap<usize, BTreeSet<ActorId>>,
    pub open_confirmed: bool,
    locks_done: BTreeSet<(usize, ActorId)>,
    pub aborted: bool,

    /// Virtual-channel states this end party signed that carry both signatures.
    pub signed_vc: Vec<UpdateAnnouncement>,
    proposal: Option<ChannelState>,
    vc_acks: BTreeMap<Digest, BTreeMap<usize, BTreeSet<ActorId>>>,
    /// Latest virtual-channel state with a quorum certificate from every committee.
    pub committed: Option<UpdateAnnouncement>,
    updates_left: u32,
    archive: Vec<(ActorId, UpdateAnnouncement, Signature)>,
    split: Option<(UpdateAnnouncement, UpdateAnnouncement)>,

    pub requests: BTreeMap<ActorId, UpdateAnnouncement>,
    pub settled_ws: Option<UpdateAnnouncement>,
    pub my_request: Option<UpdateAnnouncement>,
    unilateral_all: bool,
    registered: BTreeSet<usize>,
    incoming: BTreeMap<usize, (ChannelState, Signature, Purpose)>,

    collab: BTreeSet<usize>,
    pc_close_sent: BTreeSet<usize>,
}

impl PartyActor {
    pub fn new(id: ActorId, behavior: PartyBehavior, topo: Arc<Topology>, updates: u32, seed: u64) -> PartyActor {
        let pos = topo.position(id).expect("party is on the path");
        let pcs = topo
            .adjacent(pos)
            .into_iter()
            .map(|k| {
                let [l, r] = topo.pc_parties(k);
                let init = topo.initial_pc_state(k);
                let latest = UpdateAnnouncement::new(
                    init.clone(),
                    init.sign_with(&SigningKey::new(l)),
                    init.sign_with(&SigningKey::new(r)),
                );
                let view = PcView {
                    k,
                    counterparty: if l == id { r } else { l },
                    is_left: l == id,
                    latest,
                    outgoing: None,
                    refused: false,
                    purposes: BTreeMap::new(),
                    acks: BTreeMap::new(),
                    committed_seq: 1,
                    lock_committed: false,
                    unlock_target: None,
                    on_chain: false,
                    closed: false,
                };
                (k, view)
            })
            .collect();
        PartyActor {
            id,
            key: SigningKey::new(id),
            behavior,
            topo,
            pos,
            rng: ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9 * (pos as u64 + 1))),
            pcs,
            pres: BTreeMap::new(),
            register: None,
            s1: None,
            open_acks: BTreeMap::new(),
            open_confirmed: false,
            locks_done: BTreeSet::new(),
            aborted: false,
            signed_vc: Vec::new(),
            proposal: None,
            vc_acks: BTreeMap::new(),
            committed: None,
            updates_left: updates,
            archive: Vec::new(),
            split: None,
            requests: BTreeMap::new(),
            settled_ws: None,
            my_request: None,
            unilateral_all: false,
            registered: BTreeSet::new(),
            incoming: BTreeMap::new(),
            collab: BTreeSet::new(),
            pc_close_sent: BTreeSet::new(),
        }
    }

    pub fn active(&self, now: u64, stage: Stage) -> bool {
        match self.behavior {
            PartyBehavior::Offline { from } => !from.reached(now, stage),
            _ => true,
        }
    }

    pub fn is_end(&self) -> bool {
        self.pos == 0 || self.pos == self.topo.hops()
    }

    fn collector(&self) -> ActorId {
        self.topo.parties[1]
    }

    fn cheats_on_close(&self) -> bool {
        matches!(
            self.behavior,
            PartyBehavior::DoubleStateColluder { .. }
                | PartyBehavior::OldStateCloser { .. }
                | PartyBehavior::CollusiveIntermediary { .. }
        )
    }

    /// The virtual channel is open from this party's point of view.
    pub fn vc_open(&self) -> bool {
        self.open_confirmed && !self.aborted && self.locks_done.len() == 2 * self.topo.hops()
    }

    /// Highest-sequence virtual-channel state signed by both end parties.
    pub fn close_state(&self) -> Option<&UpdateAnnouncement> {
        self.signed_vc.iter().max_by_key(|a| a.seq())
    }

    /// State an intermediary releases its locks by, once known.
    pub fn close_target(&self) -> Option<UpdateAnnouncement> {
        if let Some(ws) = &self.settled_ws {
            return Some(ws.clone());
        }
        let [a, b] = self.topo.ends();
        match (self.requests.get(&a), self.requests.get(&b)) {
            (Some(x), Some(y)) if x == y => Some(x.clone()),
            _ => None,
        }
    }

    pub fn on_stage(&mut self, stage: Stage, ctx: &mut Ctx) {
        match stage {
            Stage::Deploy => self.deploy(ctx),
            Stage::Open => self.pre_register(ctx),
            Stage::Updates => {
                if self.pos == 0 && self.vc_open() {
                    self.next_update(ctx);
                }
            }
            Stage::Close => self.start_close(ctx),
            Stage::PcClose => self.start_pc_close(ctx),
        }
    }

    pub fn on_msg(&mut self, from: ActorId, msg: Msg, ctx: &mut Ctx) {
        match msg {
            Msg::PreRegister { pre, s1_sig } => self.on_pre_register(from, pre, s1_sig, ctx),
            Msg::Register { register, s1 } => self.on_register(register, s1, ctx),
            Msg::OpenAck { sig } => self.on_open_ack(sig, ctx),
            Msg::PcPropose { channel, state, sig, purpose } => {
                let k = channel.0 as usize;
                if self.pcs.get(&k).is_some_and(|pc| pc.counterparty == from) {
                    self.on_propose(k, state, sig, purpose, ctx);
                }
            }
            Msg::PcAccept { channel, sig } => self.on_accept(channel.0 as usize, from, sig, ctx),
            Msg::PcRefuse { channel } => {
                if let Some(pc) = self.pcs.get_mut(&(channel.0 as usize)) {
                    if pc.counterparty == from && pc.outgoing.take().is_some() {
                        pc.refused = true;
                        ctx.note(format!("{} refused on {channel}", from));
                    }
                }
            }
            Msg::PcAck { ann, sig } => self.on_pc_ack(ann, sig, ctx),
            Msg::LockDone { channel } => {
                self.locks_done.insert((channel.0 as usize, from));
            }
            Msg::Abort => {
                if !self.aborted {
                    self.aborted = true;
                    ctx.note("abort received");
                }
            }
            Msg::Propose { state, sig } => self.on_vc_propose(from, state, sig, ctx),
            Msg::CoSign { state, sig } => self.on_cosign(from, state, sig, ctx),
            Msg::WardenSig { ann, sig } => self.on_warden_sig(ann, sig, ctx),
            Msg::CloseRequest { ann } => self.on_close_request(from, ann, ctx),
            Msg::CollabPcRequest { ann } => self.on_collab_request(from, ann, ctx),
            Msg::CollabPcAgree { ann } => {
                let k = ann.channel().0 as usize;
                if self.collab.contains(&k) && self.pcs.get(&k).is_some_and(|pc| pc.latest == ann && !pc.closed) {
                    ctx.submit(TxBody::CollabClosePC { contract: Topology::contract(k), ann });
                }
            }
            Msg::Chain(ev) => self.on_chain(ev, ctx),
            _ => {}
        }
    }

    // ---- deployment and opening ----

    fn deploy(&mut self, ctx: &mut Ctx) {
        let k = self.pos;
        if k >= self.topo.hops() {
            return;
        }
        let params = DeployParams {
            channel: Topology::pc(k),
            parties: self.topo.pc_parties(k),
            deposits: self.topo.deposits(),
            committee: self.topo.committees[k].clone(),
            f: self.topo.f,
            collateral: self.topo.collateral,
        };
        ctx.submit(TxBody::DeployChannel { contract: Topology::contract(k), params });
    }

    fn pre_register(&mut self, ctx: &mut Ctx) {
        let pre = PreRegister::new(&self.key, self.topo.register_body());
        let s1_sig = self.is_end().then(|| self.topo.s1().sign_with(&self.key));
        ctx.send(self.collector(), Msg::PreRegister { pre, s1_sig });
    }

    fn on_pre_register(&mut self, from: ActorId, pre: PreRegister, s1_sig: Option<Signature>, ctx: &mut Ctx) {
        if self.id != self.collector() || self.register.is_some() || pre.sig.signer() != from {
            return;
        }
        self.pres.insert(from, (pre, s1_sig));
        if self.pres.len() < self.topo.parties.len() {
            return;
        }
        let list: Vec<PreRegister> = self.pres.values().map(|(p, _)| p.clone()).collect();
        let [a, b] = self.topo.ends();
        let built = match_pre_registers(&list).and_then(|body| {
            let sigs = list.iter().map(|p| p.sig).collect();
            assemble_register(body, sigs)
        });
        let s1 = match (&built, self.pres[&a].1, self.pres[&b].1) {
            (Ok(reg), Some(sa), Some(sb)) => {
                let ann = UpdateAnnouncement::new(reg.body.initial_state.clone(), sa, sb);
                ann.signed_by([a, b]).then_some(ann)
            }
            _ => None,
        };
        match (built, s1) {
            (Ok(register), Some(s1)) => {
                ctx.note("register assembled");
                let msg = Msg::Register { register, s1 };
                ctx.broadcast(&self.topo.parties.clone(), &msg);
            }
            _ => {
                ctx.note("pre-registers do not match; aborting");
                self.aborted = true;
                ctx.broadcast(&self.topo.parties.clone(), &Msg::Abort);
            }
        }
    }

    fn on_register(&mut self, register: RegisterTx, s1: UpdateAnnouncement, ctx: &mut Ctx) {
        let ok = register.verify().is_ok()
            && register.body == self.topo.register_body()
            && register.body.initial_state == s1.state
            && s1.signed_by(self.topo.ends());
        if !ok || self.register.is_some() {
            return;
        }
        if self.is_end() {
            self.signed_vc.push(s1.clone());
        }
        let msg = Msg::OpenVc { register: register.clone(), s1: s1.clone() };
        ctx.broadcast(&register.body.wardens, &msg);
        self.register = Some(register);
        self.s1 = Some(s1);
    }

    fn on_open_ack(&mut self, sig: Signature, ctx: &mut Ctx) {
        let Some(reg) = &self.register else { return };
        let w = sig.signer();
        let Some(c) = self.topo.committee_of(w) else { return };
        if !verify(&sig, w, &reg.digest().0) {
            return;
        }
        self.open_acks.entry(c).or_default().insert(w);
        let q = quorum_size(self.topo.f);
        let all = (0..self.topo.hops()).all(|c| self.open_acks.get(&c).is_some_and(|s| s.len() >= q));
        if all && !self.open_confirmed {
            self.open_confirmed = true;
            ctx.note("open confirmed by every committee");
            if !self.aborted && self.pcs.get(&self.pos).is_some_and(|pc| pc.is_left) {
                self.propose_lock(self.pos, ctx);
            }
            self.retry_incoming(ctx);
        }
    }

    fn propose_lock(&mut self, k: usize, ctx: &mut Ctx) {
        let latest = self.pcs[&k].latest.state.clone();
        let state = match self.behavior {
            PartyBehavior::InconsistentFunder { delta } => {
                ctx.note(format!("locking a contribution shifted by {delta}"));
                self.topo.lock_state(k, &latest, 0, delta)
            }
            _ => self.topo.lock_state(k, &latest, 0, 0),
        };
        self.propose(k, state, Purpose::Lock, ctx);
    }

    // ---- payment-channel updates ----

    fn propose(&mut self, k: usize, state: ChannelState, purpose: Purpose, ctx: &mut Ctx) {
        let sig = state.sign_with(&self.key);
        let pc = self.pcs.get_mut(&k).expect("adjacent channel");
        pc.outgoing = Some((state.clone(), purpose.clone()));
        pc.refused = false;
        let to = pc.counterparty;
        ctx.send(to, Msg::PcPropose { channel: Topology::pc(k), state, sig, purpose });
    }

    fn judge(&self, k: usize, state: &ChannelState, purpose: &Purpose) -> Verdict {
        let pc = &self.pcs[&k];
        match purpose {
            Purpose::Lock => {
                if !self.open_confirmed {
                    return Verdict::Defer;
                }
                if self.aborted || pc.locked() || *state != self.topo.lock_state(k, &pc.latest.state, 0, 0) {
                    return Verdict::Refuse;
                }
                Verdict::Accept
            }
            Purpose::Unlock { target } => {
                if !pc.locked() || pc.on_chain || *state != self.topo.unlock_state(k, &pc.latest.state, &target.state) {
                    return Verdict::Refuse;
                }
                if !self.topo.valid_vc_state(&target.state) || !target.signed_by(self.topo.ends()) {
                    return Verdict::Refuse;
                }
                match self.behavior {
                    PartyBehavior::OldStateCloser { .. } | PartyBehavior::CollusiveIntermediary { .. } => {
                        return Verdict::Accept
                    }
                    PartyBehavior::DoubleStateColluder { .. } => return Verdict::Refuse,
                    _ => {}
                }
                if self.is_end() {
                    let mine = self.close_state();
                    let fine = mine.is_none_or(|m| target == m || target.seq() > m.seq());
                    return if fine { Verdict::Accept } else { Verdict::Refuse };
                }
                match self.close_target() {
                    Some(t) if t == *target => Verdict::Accept,
                    Some(_) => Verdict::Refuse,
                    None => Verdict::Defer,
                }
            }
        }
    }

    fn on_propose(&mut self, k: usize, state: ChannelState, sig: Signature, purpose: Purpose, ctx: &mut Ctx) {
        let cp = self.pcs[&k].counterparty;
        if !verify(&sig, cp, &state.to_bytes()) || state.seq != self.pcs[&k].latest.seq() + 1 {
            return;
        }
        match self.judge(k, &state, &purpose) {
            Verdict::Defer => {
                self.incoming.insert(k, (state, sig, purpose));
            }
            Verdict::Refuse => {
                ctx.note(format!("refusing update on {}", Topology::pc(k)));
                ctx.send(cp, Msg::PcRefuse { channel: Topology::pc(k) });
                if purpose == Purpose::Lock {
                    self.aborted = true;
                    ctx.broadcast(&self.topo.parties.clone(), &Msg::Abort);
                }
            }
            Verdict::Accept => {
                let mine = state.sign_with(&self.key);
                self.install(k, state, mine, sig, purpose, ctx);
                ctx.send(cp, Msg::PcAccept { channel: Topology::pc(k), sig: mine });
            }
        }
    }

    fn on_accept(&mut self, k: usize, from: ActorId, sig: Signature, ctx: &mut Ctx) {
        let Some(pc) = self.pcs.get_mut(&k) else { return };
        if pc.counterparty != from {
            return;
        }
        let Some((state, purpose)) = pc.outgoing.take() else { return };
        if !verify(&sig, from, &state.to_bytes()) {
            pc.outgoing = Some((state, purpose));
            return;
        }
        let mine = state.sign_with(&self.key);
        self.install(k, state, mine, sig, purpose, ctx);
    }

    /// Records a dual-signed update and sends it to the committee.
    fn install(
        &mut self,
        k: usize,
        state: ChannelState,
        mine: Signature,
        theirs: Signature,
        purpose: Purpose,
        ctx: &mut Ctx,
    ) {
        let pc = self.pcs.get_mut(&k).expect("adjacent channel");
        let ann = if pc.is_left {
            UpdateAnnouncement::new(state, mine, theirs)
        } else {
            UpdateAnnouncement::new(state, theirs, mine)
        };
        pc.purposes.insert(ann.seq(), purpose);
        pc.latest = ann.clone();
        ctx.broadcast(&self.topo.committees[k], &Msg::PcUpdate { ann });
    }

    fn on_pc_ack(&mut self, ann: UpdateAnnouncement, sig: Signature, ctx: &mut Ctx) {
        let k = ann.channel().0 as usize;
        let w = sig.signer();
        let q = quorum_size(self.topo.f);
        let Some(pc) = self.pcs.get_mut(&k) else { return };
        if ann != pc.latest || !self.topo.committees[k].contains(&w) || !verify(&sig, w, &ann.warden_payload()) {
            return;
        }
        let seq = ann.seq();
        let acks = pc.acks.entry(seq).or_default();
        acks.insert(w);
        if acks.len() < q || pc.committed_seq >= seq {
            return;
        }
        pc.committed_seq = seq;
        match pc.purposes.get(&seq).cloned() {
            Some(Purpose::Lock) => {
                pc.lock_committed = true;
                ctx.note(format!("lock on {} certified", Topology::pc(k)));
                for e in self.topo.ends() {
                    if e == self.id {
                        self.locks_done.insert((k, self.id));
                    } else {
                        ctx.send(e, Msg::LockDone { channel: Topology::pc(k) });
                    }
                }
            }
            Some(Purpose::Unlock { target }) => {
                ctx.note(format!("{} unlocked at vc seq {}", Topology::pc(k), target.seq()));
                pc.unlock_target = Some(target);
                if ctx.stage == Stage::Close {
                    self.drive(ctx);
                }
            }
            None => {}
        }
    }

    fn retry_incoming(&mut self, ctx: &mut Ctx) {
        for (k, (state, sig, purpose)) in std::mem::take(&mut self.incoming) {
            self.on_propose(k, state, sig, purpose, ctx);
        }
    }

    // ---- virtual-channel updates ----

    fn last_vc_seq(&self) -> u64 {
        self.close_state().map_or(0, |a| a.seq())
    }

    fn next_update(&mut self, ctx: &mut Ctx) {
        if self.updates_left == 0 {
            if let PartyBehavior::DoubleStateColluder { partner, mode } = self.behavior {
                self.equivocate(partner, mode, ctx);
            }
            return;
        }
        let v = self.topo.v;
        let a = self.rng.gen_range(0..=v);
        let [ea, eb] = self.topo.ends();
        let state = ChannelState::new(VC_ID, self.last_vc_seq() + 1, &[(ea, a), (eb, v - a)]);
        let sig = state.sign_with(&self.key);
        self.proposal = Some(state.clone());
        ctx.send(eb, Msg::Propose { state, sig });
    }

    fn on_vc_propose(&mut self, from: ActorId, state: ChannelState, sig: Signature, ctx: &mut Ctx) {
        let [ea, eb] = self.topo.ends();
        let ok = self.id == eb
            && from == ea
            && self.vc_open()
            && self.topo.valid_vc_state(&state)
            && state.seq == self.last_vc_seq() + 1
            && verify(&sig, ea, &state.to_bytes());
        if !ok {
            return;
        }
        let mine = state.sign_with(&self.key);
        let ann = UpdateAnnouncement::new(state.clone(), sig, mine);
        self.signed_vc.push(ann.clone());
        let wardens = self.register.as_ref().expect("open").body.wardens.clone();
        ctx.broadcast(&wardens, &Msg::Announce { ann });
        ctx.send(ea, Msg::CoSign { state, sig: mine });
    }

    fn on_cosign(&mut self, from: ActorId, state: ChannelState, sig: Signature, ctx: &mut Ctx) {
        if self.proposal.as_ref() != Some(&state)
            || from != self.topo.ends()[1]
            || !verify(&sig, from, &state.to_bytes())
        {
            return;
        }
        self.proposal = None;
        let ann = UpdateAnnouncement::new(state.clone(), state.sign_with(&self.key), sig);
        self.signed_vc.push(ann.clone());
        let wardens = self.register.as_ref().expect("open").body.wardens.clone();
        ctx.broadcast(&wardens, &Msg::Announce { ann: ann.clone() });
        self.check_certified(&ann, ctx);
    }

    fn on_warden_sig(&mut self, ann: UpdateAnnouncement, sig: Signature, ctx: &mut Ctx) {
        let w = sig.signer();
        let Some(c) = self.topo.committee_of(w) else { return };
        if !verify(&sig, w, &ann.warden_payload()) {
            return;
        }
        self.archive.push((w, ann.clone(), sig));
        if let Some((x, y)) = &self.split {
            if ann == *x && c >= self.split_mid() {
                let y = y.clone();
                ctx.send(w, Msg::Announce { ann: y });
            }
        }
        self.vc_acks.entry(ann.digest()).or_default().entry(c).or_default().insert(w);
        self.check_certified(&ann, ctx);
    }

    /// Warden signatures can arrive before the co-signature, so this runs on both.
    fn check_certified(&mut self, ann: &UpdateAnnouncement, ctx: &mut Ctx) {
        if !self.signed_vc.contains(ann) {
            return;
        }
        let q = quorum_size(self.topo.f);
        let Some(acks) = self.vc_acks.get(&ann.digest()) else { return };
        let certified = (0..self.topo.hops()).all(|c| acks.get(&c).is_some_and(|s| s.len() >= q));
        if !certified || self.committed.as_ref().is_some_and(|a| a.seq() >= ann.seq()) {
            return;
        }
        self.committed = Some(ann.clone());
        if self.pos == 0 && self.updates_left > 0 && ann.seq() == self.last_vc_seq() {
            self.updates_left -= 1;
            self.next_update(ctx);
        }
    }

    fn split_mid(&self) -> usize {
        self.topo.hops().div_ceil(2)
    }

    /// Signs two conflicting states with the partner's key and shows each to
    /// a different half of the committees.
    fn equivocate(&mut self, partner: ActorId, mode: SplitMode, ctx: &mut Ctx) {
        let partner_key = SigningKey::new(partner);
        let [ea, eb] = self.topo.ends();
        let v = self.topo.v;
        let base = self.last_vc_seq();
        let make = |seq: u64, a: u64| {
            let st = ChannelState::new(VC_ID, seq, &[(ea, a), (eb, v - a)]);
            UpdateAnnouncement::new(st.clone(), st.sign_with(&self.key), st.sign_with(&partner_key))
        };
        let x = make(base + 1, v);
        let y_seq = if mode == SplitMode::SameSeq { base + 1 } else { base + 2 };
        let y = make(y_seq, 0);
        self.signed_vc.push(x.clone());
        self.signed_vc.push(y.clone());
        let mid = self.split_mid();
        ctx.note(format!("equivocating: seq {} to low committees, seq {} to high ones", x.seq(), y.seq()));
        for (c, committee) in self.topo.committees.clone().iter().enumerate() {
            let ann = match mode {
                SplitMode::SameSeq if c >= mid => y.clone(),
                _ => x.clone(),
            };
            ctx.broadcast(committee, &Msg::Announce { ann });
        }
        if mode == SplitMode::SplitSeq {
            self.split = Some((x, y));
        }
    }

    // ---- closing the virtual channel ----

    fn own_contract(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.pos - 1
        }
    }

    fn start_close(&mut self, ctx: &mut Ctx) {
        if self.register.is_none() || !self.is_end() {
            return;
        }
        let request = match self.behavior {
            PartyBehavior::DoubleStateColluder { .. } => {
                self.register_vc(self.own_contract(), ctx);
                return;
            }
            PartyBehavior::OldStateCloser { seq } => {
                let old = self.signed_vc.iter().filter(|a| a.seq() <= seq).max_by_key(|a| a.seq()).cloned();
                self.register_vc(self.own_contract(), ctx);
                old
            }
            _ => self.close_state().cloned(),
        };
        if let Some(ann) = request {
            self.my_request = Some(ann.clone());
            ctx.broadcast(&self.topo.intermediaries().to_vec(), &Msg::CloseRequest { ann });
        }
    }

    fn on_close_request(&mut self, from: ActorId, ann: UpdateAnnouncement, ctx: &mut Ctx) {
        if self.is_end() || !self.topo.is_end(from) || !ann.signed_by(self.topo.ends()) {
            return;
        }
        self.requests.insert(from, ann.clone());
        if let PartyBehavior::CollusiveIntermediary { partner } = self.behavior {
            if from == partner {
                ctx.note("accepting partner's close request unchecked");
                let side = if partner == self.topo.ends()[0] { 0 } else { 1 };
                if let Some(k) = self.topo.toward(self.pos, side) {
                    let latest = self.pcs[&k].latest.state.clone();
                    if self.pcs[&k].locked() {
                        let st = self.topo.unlock_state(k, &latest, &ann.state);
                        self.propose(k, st, Purpose::Unlock { target: ann }, ctx);
                    }
                }
                if let Some(k) = self.topo.toward(self.pos, 1 - side) {
                    self.register_vc(k, ctx);
                }
            }
            return;
        }
        self.drive(ctx);
    }

    fn register_vc(&mut self, k: usize, ctx: &mut Ctx) {
        let Some(register) = self.register.clone() else { return };
        let pc = self.pcs.get_mut(&k).expect("adjacent channel");
        pc.outgoing = None;
        self.registered.insert(k);
        ctx.note(format!("registering the virtual channel at {}", Topology::contract(k)));
        ctx.submit(TxBody::RegisterVC { contract: Topology::contract(k), register, fee: self.topo.fee });
    }

    fn in_flight(&self) -> bool {
        self.registered.iter().any(|k| !self.pcs[k].closed)
    }

    fn locked_open(&self, k: usize) -> bool {
        let pc = &self.pcs[&k];
        pc.locked() && !pc.closed && !pc.on_chain
    }

    /// Intermediary close logic, run whenever its knowledge changes.
    fn drive(&mut self, ctx: &mut Ctx) {
        if self.is_end() || self.cheats_on_close() || ctx.stage != Stage::Close {
            return;
        }
        let [a, b] = self.topo.ends();
        if self.settled_ws.is_none() && !self.unilateral_all {
            if let (Some(x), Some(y)) = (self.requests.get(&a), self.requests.get(&b)) {
                if x != y {
                    ctx.note("end parties request different states; closing every channel on-chain");
                    self.unilateral_all = true;
                }
            }
        }
        self.retry_incoming(ctx);
        for k in self.topo.adjacent(self.pos) {
            if !self.locked_open(k) || self.pcs[&k].outgoing.is_some() || self.registered.contains(&k) {
                continue;
            }
            if self.unilateral_all {
                if !self.in_flight() {
                    self.register_vc(k, ctx);
                }
                continue;
            }
            let Some(target) = self.close_target() else { continue };
            let cp = self.pcs[&k].counterparty;
            let proposer = self.topo.unlock_proposer(k) == self.id;
            if self.topo.is_end(cp) {
                match self.requests.get(&cp) {
                    Some(r) if *r == target => {
                        if proposer {
                            self.propose_unlock(k, target, ctx);
                        }
                    }
                    Some(_) if self.settled_ws.is_some() && !self.in_flight() => self.register_vc(k, ctx),
                    _ => {}
                }
            } else if proposer {
                self.propose_unlock(k, target, ctx);
            }
        }
    }

    fn propose_unlock(&mut self, k: usize, target: UpdateAnnouncement, ctx: &mut Ctx) {
        let st = self.topo.unlock_state(k, &self.pcs[&k].latest.state, &target.state);
        self.propose(k, st, Purpose::Unlock { target }, ctx);
    }

    /// Fraud proofs against the given publications from the warden signatures
    /// this party collected.
    pub fn proofs_against(&self, pubs: &[SignedStatePublication]) -> Vec<ProofOfFraud> {
        let mut out: Vec<ProofOfFraud> = Vec::new();
        for p in pubs {
            if out.iter().any(|x| x.accused == p.warden) {
                continue;
            }
            let published = &p.announcement;
            let hit = self.archive.iter().find(|(w, a, _)| {
                *w == p.warden
                    && (a.seq() > published.seq() || (a.seq() == published.seq() && a.state != published.state))
            });
            if let Some((_, a, sig)) = hit {
                out.push(ProofOfFraud {
                    accused: p.warden,
                    published: p.clone(),
                    conflicting: a.clone(),
                    conflicting_sig: *sig,
                });
            }
        }
        out
    }

    /// Another party registered and then went quiet; submit proofs for it.
    pub fn on_stall(&mut self, k: usize, pubs: &[SignedStatePublication], ctx: &mut Ctx) -> bool {
        if self.cheats_on_close() || !self.pcs.contains_key(&k) {
            return false;
        }
        let proofs = self.proofs_against(pubs);
        ctx.note(format!("submitting {} proofs for a stalled close", proofs.len()));
        ctx.submit(TxBody::SubmitProofs { contract: Topology::contract(k), proofs });
        true
    }

    fn on_chain(&mut self, ev: ChainEvent, ctx: &mut Ctx) {
        let k = ev.contract().0 as usize;
        match ev {
            ChainEvent::Deployed { .. } => {
                if self.pcs.get(&k).is_some_and(|pc| !pc.is_left) {
                    ctx.submit(TxBody::FundParty { contract: Topology::contract(k) });
                }
            }
            ChainEvent::VcRegistered { closer, .. } => {
                if let Some(pc) = self.pcs.get_mut(&k) {
                    pc.on_chain = true;
                    pc.outgoing = None;
                }
                if closer != self.id {
                    self.registered.remove(&k);
                }
                self.incoming.remove(&k);
                self.drive(ctx);
            }
            ChainEvent::PublicationsReady { publications, .. } => {
                if self.registered.contains(&k) {
                    let proofs = if self.cheats_on_close() { Vec::new() } else { self.proofs_against(&publications) };
                    ctx.submit(TxBody::SubmitProofs { contract: Topology::contract(k), proofs });
                }
            }
            ChainEvent::VcSettled { ws, .. } => {
                if self.settled_ws.is_none() {
                    ctx.note(format!("virtual channel settled at seq {}", ws.seq()));
                }
                self.settled_ws = Some(ws);
                if let Some(pc) = self.pcs.get_mut(&k) {
                    pc.closed = true;
                }
                self.drive(ctx);
            }
            ChainEvent::PcClosed { .. } => {
                if let Some(pc) = self.pcs.get_mut(&k) {
                    pc.closed = true;
                }
                self.drive(ctx);
            }
            ChainEvent::PcCloseRequested { .. } => {}
        }
    }

    // ---- closing the payment channels ----

    fn start_pc_close(&mut self, ctx: &mut Ctx) {
        for pc in self.pcs.values() {
            if pc.is_left && !pc.closed && !pc.locked() {
                self.collab.insert(pc.k);
                ctx.send(pc.counterparty, Msg::CollabPcRequest { ann: pc.latest.clone() });
            }
        }
    }

    fn on_collab_request(&mut self, from: ActorId, ann: UpdateAnnouncement, ctx: &mut Ctx) {
        let k = ann.channel().0 as usize;
        let Some(pc) = self.pcs.get(&k) else { return };
        if pc.counterparty != from || pc.latest != ann || pc.locked() || pc.closed {
            return;
        }
        self.collab.insert(k);
        ctx.send(from, Msg::CollabPcAgree { ann: ann.clone() });
        ctx.submit(TxBody::CollabClosePC { contract: Topology::contract(k), ann });
    }

    /// Called when the network is quiet. Returns true if the party acted.
    pub fn on_idle(&mut self, ctx: &mut Ctx) -> bool {
        match ctx.stage {
            Stage::Open => {
                let pending = self.pcs.values().any(|pc| matches!(pc.outgoing, Some((_, Purpose::Lock))));
                if pending && !self.aborted {
                    ctx.note("lock proposal unanswered; aborting");
                    for pc in self.pcs.values_mut() {
                        pc.outgoing = None;
                    }
                    self.aborted = true;
                    ctx.broadcast(&self.topo.parties.clone(), &Msg::Abort);
                    return true;
                }
                false
            }
            Stage::Close => self.close_idle(ctx),
            Stage::PcClose => {
                let open: Vec<usize> = self
                    .pcs
                    .values()
                    .filter(|pc| !pc.closed && !pc.locked() && !self.pc_close_sent.contains(&pc.k))
                    .map(|pc| pc.k)
                    .collect();
                let Some(k) = open.first().copied() else { return false };
                self.pc_close_sent.insert(k);
                ctx.note(format!("closing {} unilaterally", Topology::pc(k)));
                ctx.submit(TxBody::ClosePcAfterVc { contract: Topology::contract(k) });
                true
            }
            _ => false,
        }
    }

    fn close_idle(&mut self, ctx: &mut Ctx) -> bool {
        if self.register.is_none() || self.cheats_on_close() || self.in_flight() {
            return false;
        }
        let candidates: Vec<usize> =
            self.topo.adjacent(self.pos).into_iter().filter(|k| self.locked_open(*k)).collect();
        if candidates.is_empty() {
            return false;
        }
        if self.is_end() {
            self.register_vc(candidates[0], ctx);
            return true;
        }
        let stuck = candidates.iter().copied().find(|k| {
            let pc = &self.pcs[k];
            pc.outgoing.is_some() || pc.refused || self.incoming.contains_key(k)
        });
        let silent = candidates.iter().copied().find(|k| {
            let side = if *k < self.pos { 0 } else { 1 };
            !self.requests.contains_key(&self.topo.ends()[side])
        });
        let k = stuck.or(silent).unwrap_or(candidates[0]);
        self.incoming.remove(&k);
        self.register_vc(k, ctx);
        true
    }
}
