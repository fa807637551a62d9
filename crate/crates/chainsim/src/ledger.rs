use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thunderdome_core::{ActorId, ChannelId, Coins, ContractId};

use crate::contract::{Bank, ChainEvent, ContractState, Output, Phase};
use crate::error::Reject;
use crate::tx::{Sender, Tx, TxBody, TxKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainConfig {
    /// Contracts exchange candidates before settling. Disabling this is an
    /// ablation; it reintroduces the split-state attack.
    pub cross_check: bool,
    /// Hold a virtual channel's cross-checks until every contract has emitted
    /// its own, then release them together so they land in one block.
    pub force_same_block: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig { cross_check: true, force_same_block: false }
    }
}

#[derive(Clone, Debug)]
pub struct BlockEntry {
    pub sender: Sender,
    pub kind: TxKind,
    pub contract: ContractId,
    pub outcome: Result<(), Reject>,
    pub summary: String,
}

#[derive(Clone, Debug)]
pub struct Block {
    pub height: u64,
    /// Network step at which the block was mined.
    pub step: u64,
    /// Caller-supplied label, used to attribute transactions to protocol phases.
    pub tag: &'static str,
    pub entries: Vec<BlockEntry>,
    pub events: Vec<ChainEvent>,
}

#[derive(Debug, Default)]
pub struct BlockOutput {
    pub events: Vec<ChainEvent>,
    /// Cross-checks to schedule normally.
    pub cross_checks: Vec<Tx>,
    /// Cross-checks that must be scheduled with one shared delay.
    pub co_delivered: Vec<Tx>,
}

pub struct Ledger {
    config: ChainConfig,
    blocks: Vec<Block>,
    contracts: BTreeMap<ContractId, ContractState>,
    bank: Bank,
    total: Coins,
    held: BTreeMap<ChannelId, Vec<Tx>>,
    own_decided: BTreeMap<ChannelId, BTreeSet<ContractId>>,
    released: BTreeSet<ChannelId>,
    violations: Vec<String>,
}

impl Ledger {
    pub fn new(config: ChainConfig, balances: BTreeMap<ActorId, Coins>) -> Ledger {
        let bank = Bank::new(balances);
        let total = bank.total();
        Ledger {
            config,
            blocks: Vec::new(),
            contracts: BTreeMap::new(),
            bank,
            total,
            held: BTreeMap::new(),
            own_decided: BTreeMap::new(),
            released: BTreeSet::new(),
            violations: Vec::new(),
        }
    }

    pub fn config(&self) -> ChainConfig {
        self.config
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn contract(&self, id: ContractId) -> Option<&ContractState> {
        self.contracts.get(&id)
    }

    pub fn contracts(&self) -> impl Iterator<Item = &ContractState> {
        self.contracts.values()
    }

    pub fn balance(&self, who: ActorId) -> Coins {
        self.bank.balance(who)
    }

    pub fn balances(&self) -> &BTreeMap<ActorId, Coins> {
        self.bank.balances()
    }

    /// Coins in existence; constant for the life of the ledger.
    pub fn total_coins(&self) -> Coins {
        self.total
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    /// External balances plus everything held by contracts equals the
    /// initial supply.
    pub fn conserved(&self) -> bool {
        self.bank.total() + self.contracts.values().map(|c| c.escrow()).sum::<Coins>() == self.total
    }

    /// Applies `txs` in order as one block.
    pub fn mine_block(&mut self, step: u64, tag: &'static str, txs: Vec<Tx>) -> BlockOutput {
        let mut result = BlockOutput::default();
        let mut entries = Vec::with_capacity(txs.len());
        for tx in txs {
            let mut out = Vec::new();
            let summary = tx.summary();
            let (kind, contract, sender) = (tx.kind(), tx.body.contract(), tx.sender);
            let outcome = self.apply(tx, &mut out);
            entries.push(BlockEntry { sender, kind, contract, outcome, summary });
            for o in out {
                match o {
                    Output::Event(e) => result.events.push(e),
                    Output::Emit(t) => self.route_cross_check(t, &mut result),
                    Output::OwnDecided(vc) => {
                        self.own_decided.entry(vc).or_default().insert(contract);
                        self.maybe_release(vc, &mut result);
                    }
                    Output::Violation(v) => self.violations.push(v),
                }
            }
        }
        if !self.conserved() {
            self.violations.push(format!("coin conservation broken at height {}", self.blocks.len()));
        }
        self.blocks.push(Block { height: self.blocks.len() as u64, step, tag, entries, events: result.events.clone() });
        result
    }

    fn route_cross_check(&mut self, tx: Tx, result: &mut BlockOutput) {
        let TxBody::CrossCheck { register, .. } = &tx.body else { unreachable!("contracts only emit cross-checks") };
        let vc = register.vc();
        if self.config.force_same_block && !self.released.contains(&vc) {
            self.held.entry(vc).or_default().push(tx);
        } else {
            result.cross_checks.push(tx);
        }
    }

    fn maybe_release(&mut self, vc: ChannelId, result: &mut BlockOutput) {
        if !self.config.force_same_block || self.released.contains(&vc) {
            return;
        }
        let Some(held) = self.held.get(&vc) else { return };
        let TxBody::CrossCheck { register, .. } = &held[0].body else { return };
        let all = &register.body.contract_info.contracts;
        let decided = self.own_decided.get(&vc).map_or(0, |s| s.len());
        if decided == all.len() {
            self.released.insert(vc);
            result.co_delivered.extend(self.held.remove(&vc).unwrap_or_default());
        }
    }

    /// Releases every held cross-check. Called when the network is idle, so
    /// a channel whose other contracts never decide cannot stall.
    pub fn flush_held(&mut self) -> Vec<Tx> {
        let mut out = Vec::new();
        for (vc, txs) in std::mem::take(&mut self.held) {
            self.released.insert(vc);
            out.extend(txs);
        }
        out
    }

    fn apply(&mut self, tx: Tx, out: &mut Vec<Output>) -> Result<(), Reject> {
        let cross_check = self.config.cross_check;
        let id = tx.body.contract();
        if let TxBody::DeployChannel { contract, params } = tx.body {
            let Sender::Actor(sender) = tx.sender else { return Err(Reject::Unauthorized) };
            if self.contracts.contains_key(&contract) {
                return Err(Reject::AlreadyDeployed(contract));
            }
            if sender != params.parties[0] {
                return Err(Reject::Unauthorized);
            }
            self.bank.debit(sender, params.deposits[0])?;
            self.contracts.insert(contract, ContractState::deploy(contract, params));
            out.push(Output::Event(ChainEvent::Deployed { contract }));
            return Ok(());
        }
        let c = self.contracts.get_mut(&id).ok_or(Reject::UnknownContract(id))?;
        let bank = &mut self.bank;
        match (tx.sender, tx.body) {
            (Sender::Contract(_), TxBody::CrossCheck { from, register, ws, .. }) => {
                if !cross_check {
                    return Err(Reject::WrongPhase(c.phase));
                }
                c.cross_check(bank, from, register, ws, out)
            }
            (Sender::Contract(_), _) | (_, TxBody::CrossCheck { .. }) => Err(Reject::Unauthorized),
            (Sender::Actor(a), body) => match body {
                TxBody::FundParty { .. } => c.fund_party(bank, a),
                TxBody::FundWarden { .. } => c.fund_warden(bank, a),
                TxBody::CollabClosePC { ann, .. } => c.collab_close(bank, a, ann, out),
                TxBody::RegisterVC { register, fee, .. } => c.register_vc(bank, a, register, fee, out),
                TxBody::PublishState { vc, pc, .. } => c.publish(bank, a, vc, pc, cross_check, out),
                TxBody::SubmitProofs { proofs, .. } => c.submit_proofs(bank, a, proofs, out),
                TxBody::ClosePcAfterVc { .. } => c.request_pc_close(bank, a, out),
                TxBody::DeployChannel { .. } | TxBody::CrossCheck { .. } => unreachable!(),
            },
        }
    }

    /// `(party_txs, warden_txs)` included under `tag` and addressed to
    /// `contract`, accepted or not.
    pub fn count_txs(&self, tag: &str, contract: ContractId) -> (usize, usize) {
        let mut counts = (0, 0);
        for e in self.blocks.iter().filter(|b| b.tag == tag).flat_map(|b| &b.entries) {
            if e.contract != contract {
                continue;
            }
            match e.sender {
                Sender::Actor(a) if a.is_warden() => counts.1 += 1,
                Sender::Actor(_) => counts.0 += 1,
                Sender::Contract(_) => {}
            }
        }
        counts
    }

    /// Contracts that settled a virtual channel, with the state applied.
    pub fn settled(&self) -> Vec<(ContractId, &thunderdome_core::ChannelState)> {
        self.contracts.values().filter_map(|c| c.closure.as_ref().map(|cl| (c.id, &cl.ws.state))).collect()
    }

    pub fn all_closed(&self) -> bool {
        self.contracts.values().all(|c| c.phase == Phase::PcClosed)
    }

    /// One line per transaction and event, grouped by block.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for b in &self.blocks {
            let _ = writeln!(s, "block {} step={} tag={}", b.height, b.step, b.tag);
            for e in &b.entries {
                let verdict = match &e.outcome {
                    Ok(()) => "ok".to_string(),
                    Err(r) => format!("rejected: {r}"),
                };
                let _ = writeln!(s, "  tx {} {} [{}]", e.sender, e.summary, verdict);
            }
            for ev in &b.events {
                let _ = writeln!(s, "  event {}", ev.summary());
            }
        }
        let _ = writeln!(s, "balances");
        for (who, bal) in self.bank.balances() {
            let _ = writeln!(s, "  {who}\t{bal}");
        }
        s
    }
}
