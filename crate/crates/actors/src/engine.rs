use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thunderdome_chainsim::{ChainConfig, ChainEvent, Ledger, Phase, Tx};
use thunderdome_core::{ActorId, Coins, ContractId};
use thunderdome_netsim::{AdversaryPolicy, Endpoint, Network, Trace};

use crate::behavior::{PartyBehavior, Stage, WardenBehavior};
use crate::ctx::Ctx;
use crate::msg::Msg;
use crate::party::PartyActor;
use crate::topology::Topology;
use crate::warden::WardenActor;

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub topo: Topology,
    pub policy: AdversaryPolicy,
    pub chain: ChainConfig,
    /// Virtual-channel updates the left end party proposes.
    pub updates: u32,
    /// Actors not listed are honest.
    pub party_behaviors: BTreeMap<ActorId, PartyBehavior>,
    pub warden_behaviors: BTreeMap<ActorId, WardenBehavior>,
    /// Order the transactions of a block by the adversary's RNG instead of
    /// by arrival.
    pub shuffle_blocks: bool,
    pub max_steps: u64,
    pub keep_trace_lines: bool,
    /// On-chain balance every actor starts with.
    pub start_balance: Coins,
}

impl EngineConfig {
    pub fn new(topo: Topology, seed: u64) -> EngineConfig {
        EngineConfig {
            topo,
            policy: AdversaryPolicy::new(seed, thunderdome_netsim::DEFAULT_HORIZON),
            chain: ChainConfig::default(),
            updates: 3,
            party_behaviors: BTreeMap::new(),
            warden_behaviors: BTreeMap::new(),
            shuffle_blocks: false,
            max_steps: 20_000,
            keep_trace_lines: false,
            start_balance: 1_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub steps: u64,
    /// The step budget ran out with honest messages still undelivered.
    pub liveness_violation: bool,
    pub budget_exhausted: bool,
}

/// Drives every actor and the chain through the protocol stages on one clock.
pub struct Engine {
    pub topo: Arc<Topology>,
    pub net: Network<Msg>,
    pub ledger: Ledger,
    pub parties: BTreeMap<ActorId, PartyActor>,
    pub wardens: BTreeMap<ActorId, WardenActor>,
    pub stage: Stage,
    pub start_balance: Coins,
    shuffle_blocks: bool,
    max_steps: u64,
    exhausted: bool,
    liveness_violation: bool,
    stall_tried: BTreeSet<(ContractId, ActorId)>,
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Engine {
        let topo = Arc::new(cfg.topo);
        let seed = cfg.policy.seed;
        let parties: BTreeMap<_, _> = topo
            .parties
            .iter()
            .map(|p| {
                let b = cfg.party_behaviors.get(p).copied().unwrap_or(PartyBehavior::Honest);
                (*p, PartyActor::new(*p, b, topo.clone(), cfg.updates, seed))
            })
            .collect();
        let wardens: BTreeMap<_, _> = topo
            .wardens()
            .map(|w| {
                let b = cfg.warden_behaviors.get(&w).copied().unwrap_or(WardenBehavior::Honest);
                (w, WardenActor::new(w, b, topo.clone()))
            })
            .collect();
        let balances = parties.keys().chain(wardens.keys()).map(|a| (*a, cfg.start_balance)).collect();
        Engine {
            net: Network::new(cfg.policy, cfg.keep_trace_lines),
            ledger: Ledger::new(cfg.chain, balances),
            parties,
            wardens,
            stage: Stage::Deploy,
            start_balance: cfg.start_balance,
            shuffle_blocks: cfg.shuffle_blocks,
            max_steps: cfg.max_steps,
            exhausted: false,
            liveness_violation: false,
            stall_tried: BTreeSet::new(),
            topo,
        }
    }

    pub fn run(&mut self) -> RunReport {
        for stage in Stage::ALL {
            self.run_stage(stage);
        }
        self.report()
    }

    pub fn report(&self) -> RunReport {
        RunReport {
            steps: self.net.now(),
            liveness_violation: self.liveness_violation,
            budget_exhausted: self.exhausted,
        }
    }

    pub fn trace(&self) -> &Trace {
        self.net.trace()
    }

    pub fn run_stage(&mut self, stage: Stage) {
        self.stage = stage;
        self.net.note("engine", format!("stage {}", stage.tag()));
        let now = self.net.now();
        let ids: Vec<ActorId> = self.parties.keys().copied().collect();
        for id in ids {
            let p = self.parties.get_mut(&id).expect("known party");
            if !p.active(now, stage) {
                continue;
            }
            let mut ctx = Ctx::new(id, now, stage);
            p.on_stage(stage, &mut ctx);
            self.flush(ctx);
        }
        self.drain();
        while !self.exhausted && self.idle() {
            self.drain();
        }
    }

    fn drain(&mut self) {
        while !self.net.is_quiescent() && !self.exhausted {
            self.net.fast_forward();
            if self.net.now() >= self.max_steps {
                self.exhausted = true;
                self.liveness_violation = self.net.pending_honest() > 0;
                return;
            }
            let mut txs = Vec::new();
            for env in self.net.step() {
                match (env.to, env.payload) {
                    (Endpoint::Chain, Msg::Tx(tx)) => txs.push(tx),
                    (Endpoint::Chain, _) => {}
                    (Endpoint::Actor(to), msg) => {
                        let from = match env.from {
                            Endpoint::Actor(a) => a,
                            Endpoint::Chain => to,
                        };
                        self.deliver(from, to, msg);
                    }
                }
            }
            if !txs.is_empty() {
                self.mine(txs);
            }
        }
    }

    fn deliver(&mut self, from: ActorId, to: ActorId, msg: Msg) {
        let (now, stage) = (self.net.now(), self.stage);
        let mut ctx = Ctx::new(to, now, stage);
        if let Some(p) = self.parties.get_mut(&to) {
            if !p.active(now, stage) {
                return;
            }
            p.on_msg(from, msg, &mut ctx);
        } else if let Some(w) = self.wardens.get_mut(&to) {
            if !w.active(now, stage) {
                return;
            }
            w.on_msg(from, msg, &mut ctx);
        }
        self.flush(ctx);
    }

    fn flush(&mut self, ctx: Ctx) {
        let me = ctx.me;
        let (out, notes) = ctx.take();
        for n in notes {
            self.net.note(me.label(), n);
        }
        for (to, msg) in out {
            self.net.send(Endpoint::Actor(me), to, msg);
        }
    }

    fn mine(&mut self, mut txs: Vec<Tx>) {
        if self.shuffle_blocks {
            self.net.shuffle(&mut txs);
        }
        let out = self.ledger.mine_block(self.net.now(), self.stage.tag(), txs);
        for ev in out.events {
            self.route(ev);
        }
        for tx in out.cross_checks {
            self.net.send(Endpoint::Chain, Endpoint::Chain, Msg::Tx(tx));
        }
        if !out.co_delivered.is_empty() {
            let d = self.net.draw_delay();
            for tx in out.co_delivered {
                self.net.send_after(Endpoint::Chain, Endpoint::Chain, Msg::Tx(tx), d);
            }
        }
    }

    fn route(&mut self, ev: ChainEvent) {
        let k = ev.contract().0 as usize;
        let (now, stage) = (self.net.now(), self.stage);
        let mut to: Vec<ActorId> = self.topo.pc_parties(k).to_vec();
        match &ev {
            ChainEvent::Deployed { .. } => to.extend(self.topo.committees[k].iter().copied()),
            ChainEvent::VcSettled { .. } => to = self.topo.parties.clone(),
            ChainEvent::VcRegistered { .. } | ChainEvent::PcCloseRequested { .. } => {
                // Every warden decides before any publication is sent.
                let vc = matches!(ev, ChainEvent::VcRegistered { .. });
                let decided: Vec<_> = self.topo.committees[k]
                    .iter()
                    .filter_map(|w| {
                        let warden = self.wardens.get_mut(w).expect("known warden");
                        let body = if vc { warden.publish_vc(now, stage) } else { warden.publish_pc(now, stage) };
                        body.map(|b| (*w, b))
                    })
                    .collect();
                for (w, body) in decided {
                    self.net.send(Endpoint::Actor(w), Endpoint::Chain, Msg::Tx(Tx::from_actor(w, body)));
                }
            }
            _ => {}
        }
        for a in to {
            self.net.send(Endpoint::Chain, Endpoint::Actor(a), Msg::Chain(ev.clone()));
        }
    }

    /// One idle action, in a fixed priority order. Returns false when nobody
    /// has anything left to do in this stage.
    fn idle(&mut self) -> bool {
        let held = self.ledger.flush_held();
        if !held.is_empty() {
            for tx in held {
                self.net.send(Endpoint::Chain, Endpoint::Chain, Msg::Tx(tx));
            }
            return true;
        }
        let (now, stage) = (self.net.now(), self.stage);
        let stalled: Vec<_> = self
            .ledger
            .contracts()
            .filter(|c| c.phase == Phase::VcCrossChecking && c.ws_final && !c.proofs_submitted())
            .map(|c| (c.id, c.parties, c.publications.clone()))
            .collect();
        for (id, parties, pubs) in stalled {
            for p in parties {
                if !self.stall_tried.insert((id, p)) {
                    continue;
                }
                let party = self.parties.get_mut(&p).expect("known party");
                if !party.active(now, stage) {
                    continue;
                }
                let mut ctx = Ctx::new(p, now, stage);
                let acted = party.on_stall(id.0 as usize, &pubs, &mut ctx);
                self.flush(ctx);
                if acted {
                    return true;
                }
            }
        }
        let order: Vec<ActorId> = self.topo.intermediaries().iter().chain(self.topo.ends().iter()).copied().collect();
        for id in order {
            let p = self.parties.get_mut(&id).expect("known party");
            if !p.active(now, stage) {
                continue;
            }
            let mut ctx = Ctx::new(id, now, stage);
            let acted = p.on_idle(&mut ctx);
            self.flush(ctx);
            if acted {
                return true;
            }
        }
        false
    }

    /// Current on-chain balance of `who`.
    pub fn balance(&self, who: ActorId) -> Coins {
        self.ledger.balance(who)
    }
}
