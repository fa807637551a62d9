use std::collections::{BTreeMap, BTreeSet};

use thunderdome_core::{
    quorum_size, validate_proof_of_fraud, ActorId, ChannelId, ChannelState, Coins, ContractId, ProofOfFraud,
    RegisterTx, SignedStatePublication, UpdateAnnouncement,
};

use crate::error::Reject;
use crate::settlement::{fee_split, forfeits_vc};
use crate::tx::{DeployParams, Tx, TxBody, WsClaim};

/// External (off-contract) coin balances.
#[derive(Clone, Debug, Default)]
pub struct Bank {
    balances: BTreeMap<ActorId, Coins>,
}

impl Bank {
    pub fn new(balances: BTreeMap<ActorId, Coins>) -> Bank {
        Bank { balances }
    }

    pub fn balance(&self, who: ActorId) -> Coins {
        self.balances.get(&who).copied().unwrap_or(0)
    }

    pub fn balances(&self) -> &BTreeMap<ActorId, Coins> {
        &self.balances
    }

    pub fn total(&self) -> Coins {
        self.balances.values().sum()
    }

    pub(crate) fn debit(&mut self, who: ActorId, amount: Coins) -> Result<(), Reject> {
        let bal = self.balances.entry(who).or_insert(0);
        if *bal < amount {
            return Err(Reject::InsufficientFunds { who, amount });
        }
        *bal -= amount;
        Ok(())
    }

    pub(crate) fn credit(&mut self, who: ActorId, amount: Coins) {
        *self.balances.entry(who).or_insert(0) += amount;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Open,
    VcRegistered,
    VcCollecting,
    VcCrossChecking,
    VcClosed,
    PcClosed,
}

impl Phase {
    fn vc_in_progress(self) -> bool {
        matches!(self, Phase::VcRegistered | Phase::VcCollecting | Phase::VcCrossChecking)
    }
}

/// One warden's collateral in one contract. A warden serving two committees
/// has two independent cells.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WardenCell {
    pub funded: bool,
    pub slashed: bool,
    /// Coins currently locked in this cell.
    pub held: Coins,
}

/// What the contract did with the virtual channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcClosure {
    pub ws: UpdateAnnouncement,
    pub origin: ContractId,
    pub proven_cheaters: u32,
    pub forfeited: bool,
    pub fee_paid_to: Vec<ActorId>,
    pub fee_shortfall: usize,
}

/// Notifications the chain makes observable to actors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainEvent {
    Deployed {
        contract: ContractId,
    },
    VcRegistered {
        contract: ContractId,
        vc: ChannelId,
        closer: ActorId,
    },
    /// The first `2f + 1` accepted publications, in arrival order.
    PublicationsReady {
        contract: ContractId,
        vc: ChannelId,
        publications: Vec<SignedStatePublication>,
    },
    VcSettled {
        contract: ContractId,
        vc: ChannelId,
        ws: UpdateAnnouncement,
        proven_cheaters: u32,
        forfeited: bool,
    },
    PcCloseRequested {
        contract: ContractId,
        by: ActorId,
    },
    PcClosed {
        contract: ContractId,
        payouts: Vec<(ActorId, Coins)>,
        penalized: Option<ActorId>,
    },
}

impl ChainEvent {
    pub fn contract(&self) -> ContractId {
        match self {
            ChainEvent::Deployed { contract }
            | ChainEvent::VcRegistered { contract, .. }
            | ChainEvent::PublicationsReady { contract, .. }
            | ChainEvent::VcSettled { contract, .. }
            | ChainEvent::PcCloseRequested { contract, .. }
            | ChainEvent::PcClosed { contract, .. } => *contract,
        }
    }

    pub fn summary(&self) -> String {
        match self {
            ChainEvent::Deployed { contract } => format!("deployed {contract}"),
            ChainEvent::VcRegistered { contract, vc, closer } => format!("{vc} registered at {contract} by {closer}"),
            ChainEvent::PublicationsReady { contract, publications, .. } => {
                format!("{contract} has {} publications", publications.len())
            }
            ChainEvent::VcSettled { contract, ws, proven_cheaters, forfeited, .. } => {
                format!("{contract} settled seq={} proofs={proven_cheaters} forfeited={forfeited}", ws.seq())
            }
            ChainEvent::PcCloseRequested { contract, by } => format!("{by} requests close of {contract}"),
            ChainEvent::PcClosed { contract, payouts, penalized } => format!(
                "{contract} closed payouts={payouts:?} penalized={}",
                penalized.map_or("-".into(), |p| p.to_string())
            ),
        }
    }
}

#[allow(clippy::large_enum_variant)]
pub(crate) enum Output {
    Event(ChainEvent),
    Emit(Tx),
    /// The contract decided a candidate from its own publications.
    OwnDecided(ChannelId),
    Violation(String),
}

/// On-chain state of one payment channel and of the virtual channel routed
/// through it.
#[derive(Clone, Debug)]
pub struct ContractState {
    pub id: ContractId,
    pub channel_id: ChannelId,
    pub parties: [ActorId; 2],
    pub deposits: [Coins; 2],
    pub funded: [bool; 2],
    pub f: u32,
    pub collateral: Coins,
    pub cells: BTreeMap<ActorId, WardenCell>,
    pub phase: Phase,
    pub register: Option<RegisterTx>,
    pub closer: Option<ActorId>,
    pub fee: Coins,
    /// Part of the fee paid out to wardens at settlement.
    pub fee_spent: Coins,
    fee_escrow: Coins,
    party_funds: Coins,
    /// Accepted virtual-channel publications in arrival order.
    pub publications: Vec<SignedStatePublication>,
    /// Payment-channel states carried alongside publications.
    pub pc_publications: Vec<SignedStatePublication>,
    pub ws: Option<WsClaim>,
    pub ws_adopted: bool,
    pub ws_final: bool,
    /// Sequence numbers the candidate took, in order.
    pub ws_history: Vec<u64>,
    pub heard_from: BTreeSet<ContractId>,
    pub sent_to: BTreeSet<ContractId>,
    proof_submitters: BTreeSet<ActorId>,
    pub slashed: BTreeSet<ActorId>,
    pub closure: Option<VcClosure>,
    pub pc_close_requester: Option<ActorId>,
    collab: BTreeMap<ActorId, UpdateAnnouncement>,
    /// Everything paid out of this contract, by recipient.
    pub payouts: BTreeMap<ActorId, Coins>,
    pub penalized: Option<ActorId>,
}

impl ContractState {
    pub(crate) fn deploy(id: ContractId, p: DeployParams) -> ContractState {
        let cells = p.committee.iter().map(|w| (*w, WardenCell::default())).collect();
        ContractState {
            id,
            channel_id: p.channel,
            parties: p.parties,
            deposits: p.deposits,
            funded: [true, false],
            f: p.f,
            collateral: p.collateral,
            cells,
            phase: Phase::Open,
            register: None,
            closer: None,
            fee: 0,
            fee_spent: 0,
            fee_escrow: 0,
            party_funds: p.deposits[0],
            publications: Vec::new(),
            pc_publications: Vec::new(),
            ws: None,
            ws_adopted: false,
            ws_final: false,
            ws_history: Vec::new(),
            heard_from: BTreeSet::new(),
            sent_to: BTreeSet::new(),
            proof_submitters: BTreeSet::new(),
            slashed: BTreeSet::new(),
            closure: None,
            pc_close_requester: None,
            collab: BTreeMap::new(),
            payouts: BTreeMap::new(),
            penalized: None,
        }
    }

    /// Coins currently held by the contract.
    pub fn escrow(&self) -> Coins {
        self.party_funds + self.fee_escrow + self.cells.values().map(|c| c.held).sum::<Coins>()
    }

    pub fn channel_total(&self) -> Coins {
        self.deposits[0] + self.deposits[1]
    }

    pub fn committee(&self) -> impl Iterator<Item = ActorId> + '_ {
        self.cells.keys().copied()
    }

    pub fn is_party(&self, who: ActorId) -> bool {
        self.parties.contains(&who)
    }

    pub fn counterparty(&self, who: ActorId) -> Option<ActorId> {
        match self.parties {
            [l, r] if l == who => Some(r),
            [l, r] if r == who => Some(l),
            _ => None,
        }
    }

    pub fn fully_funded(&self) -> bool {
        self.funded == [true, true]
    }

    pub fn peers(&self) -> Vec<ContractId> {
        self.register.as_ref().map_or_else(Vec::new, |r| {
            r.body.contract_info.contracts.iter().copied().filter(|c| *c != self.id).collect()
        })
    }

    pub fn proofs_submitted(&self) -> bool {
        !self.proof_submitters.is_empty()
    }

    pub fn has_submitted(&self, who: ActorId) -> bool {
        self.proof_submitters.contains(&who)
    }

    fn is_leader(&self, c: ContractId) -> bool {
        self.register.as_ref().is_some_and(|r| r.is_leader(c))
    }

    pub(crate) fn fund_party(&mut self, bank: &mut Bank, sender: ActorId) -> Result<(), Reject> {
        if sender != self.parties[1] {
            return Err(Reject::Unauthorized);
        }
        if self.funded[1] {
            return Err(Reject::AlreadyFunded);
        }
        bank.debit(sender, self.deposits[1])?;
        self.funded[1] = true;
        self.party_funds += self.deposits[1];
        Ok(())
    }

    pub(crate) fn fund_warden(&mut self, bank: &mut Bank, sender: ActorId) -> Result<(), Reject> {
        let amount = self.collateral;
        let cell = self.cells.get_mut(&sender).ok_or(Reject::Unauthorized)?;
        if cell.funded {
            return Err(Reject::AlreadyFunded);
        }
        if self.phase == Phase::PcClosed {
            return Err(Reject::WrongPhase(self.phase));
        }
        bank.debit(sender, amount)?;
        cell.funded = true;
        cell.held = amount;
        Ok(())
    }

    fn check_register(&self, reg: &RegisterTx) -> Result<(), Reject> {
        reg.verify().map_err(|e| Reject::BadRegister(e.to_string()))?;
        if !reg.body.contract_info.contracts.contains(&self.id) {
            return Err(Reject::BadRegister("contract not listed".into()));
        }
        if !self.parties.iter().all(|p| reg.body.parties.contains(p)) {
            return Err(Reject::BadRegister("channel parties not listed".into()));
        }
        if let Some(known) = &self.register {
            if known.digest() != reg.digest() {
                return Err(Reject::BadRegister("different virtual channel".into()));
            }
        }
        Ok(())
    }

    pub(crate) fn register_vc(
        &mut self,
        bank: &mut Bank,
        sender: ActorId,
        reg: RegisterTx,
        fee: Coins,
        out: &mut Vec<Output>,
    ) -> Result<(), Reject> {
        if !self.is_party(sender) {
            return Err(Reject::Unauthorized);
        }
        if self.phase.vc_in_progress() || self.closer.is_some() {
            return Err(Reject::Duplicate);
        }
        if self.phase != Phase::Open {
            return Err(Reject::WrongPhase(self.phase));
        }
        if self.pc_close_requester.is_some() {
            return Err(Reject::CloseInProgress);
        }
        if !self.fully_funded() {
            return Err(Reject::NotFunded);
        }
        self.check_register(&reg)?;
        bank.debit(sender, fee)?;
        self.fee = fee;
        self.fee_escrow = fee;
        self.closer = Some(sender);
        let vc = reg.vc();
        self.register = Some(reg);
        self.phase = Phase::VcRegistered;
        out.push(Output::Event(ChainEvent::VcRegistered { contract: self.id, vc, closer: sender }));
        Ok(())
    }

    fn check_pc_publication(&self, p: &SignedStatePublication) -> Result<(), Reject> {
        let ann = &p.announcement;
        if ann.channel() != self.channel_id || !ann.signed_by(self.parties) {
            return Err(Reject::BadPublication("payment-channel state not signed by both parties"));
        }
        if ann.state.total() != self.channel_total() {
            return Err(Reject::BadPublication("payment-channel state does not match deposits"));
        }
        if let (Some(lock), Some(reg)) = (ann.state.lock, &self.register) {
            if lock.vc != reg.vc() || lock.amount != reg.body.balance {
                return Err(Reject::BadPublication("lock does not match the registered channel"));
            }
        }
        Ok(())
    }

    fn check_vc_publication(&self, p: &SignedStatePublication) -> Result<(), Reject> {
        let reg = self.register.as_ref().ok_or(Reject::WrongPhase(self.phase))?;
        let ann = &p.announcement;
        if ann.channel() != reg.vc() || !ann.signed_by(reg.body.end_parties()) {
            return Err(Reject::BadPublication("state not signed by both end parties"));
        }
        if ann.state.total() != reg.body.balance || ann.state.lock.is_some() {
            return Err(Reject::BadPublication("state does not conserve the channel balance"));
        }
        Ok(())
    }

    pub(crate) fn publish(
        &mut self,
        bank: &mut Bank,
        sender: ActorId,
        vc: Option<SignedStatePublication>,
        pc: Option<SignedStatePublication>,
        cross_check: bool,
        out: &mut Vec<Output>,
    ) -> Result<(), Reject> {
        let cell = self.cells.get(&sender).ok_or(Reject::Unauthorized)?;
        if !cell.funded {
            return Err(Reject::NotFunded);
        }
        for p in vc.iter().chain(pc.iter()) {
            if p.warden != sender || !p.is_valid() {
                return Err(Reject::BadPublication("warden signature"));
            }
        }
        let pc = match pc {
            Some(p) if self.check_pc_publication(&p).is_ok() => Some(p),
            _ => None,
        };
        if self.phase.vc_in_progress() {
            let vc = vc.ok_or(Reject::BadPublication("missing virtual-channel state"))?;
            self.check_vc_publication(&vc)?;
            if self.publications.iter().any(|p| p.warden == sender) {
                return Err(Reject::Duplicate);
            }
            self.publications.push(vc);
            if let Some(p) = pc {
                self.pc_publications.push(p);
            }
            if self.phase == Phase::VcRegistered {
                self.phase = Phase::VcCollecting;
            }
            if self.phase == Phase::VcCollecting && self.publications.len() >= quorum_size(self.f) {
                self.reach_quorum(cross_check, out);
            }
            self.try_settle(bank, out);
            return Ok(());
        }
        if self.pc_close_requester.is_some() && self.phase == Phase::Open {
            let p = pc.ok_or(Reject::BadPublication("missing payment-channel state"))?;
            if self.pc_publications.iter().any(|q| q.warden == sender) {
                return Err(Reject::Duplicate);
            }
            self.pc_publications.push(p);
            if self.pc_publications.len() >= quorum_size(self.f) {
                self.decide_pc_close(bank, out);
            }
            return Ok(());
        }
        Err(Reject::WrongPhase(self.phase))
    }

    fn reach_quorum(&mut self, cross_check: bool, out: &mut Vec<Output>) {
        self.phase = Phase::VcCrossChecking;
        let q = quorum_size(self.f);
        let first = self.publications[..q].to_vec();
        if self.ws.is_none() {
            // Strictly greater keeps the first-received among equal maxima.
            let mut best = &first[0];
            for p in &first[1..] {
                if p.announcement.seq() > best.announcement.seq() {
                    best = p;
                }
            }
            let claim = WsClaim { ann: best.announcement.clone(), origin: self.id };
            self.set_ws(claim, false);
            if cross_check {
                self.query_unheard(out);
            } else {
                self.ws_final = true;
            }
            // After the queries, so the ledger holds them before it checks
            // whether the channel can be released.
            if let Some(reg) = &self.register {
                out.push(Output::OwnDecided(reg.vc()));
            }
        }
        self.check_final();
        let vc = self.register.as_ref().map(|r| r.vc()).expect("registered");
        out.push(Output::Event(ChainEvent::PublicationsReady { contract: self.id, vc, publications: first }));
    }

    fn set_ws(&mut self, claim: WsClaim, adopted: bool) {
        self.ws_history.push(claim.ann.seq());
        self.ws = Some(claim);
        self.ws_adopted = adopted;
    }

    fn query_unheard(&mut self, out: &mut Vec<Output>) {
        let (Some(reg), Some(ws)) = (&self.register, &self.ws) else { return };
        for peer in self.peers() {
            if self.heard_from.contains(&peer) || !self.sent_to.insert(peer) {
                continue;
            }
            out.push(Output::Emit(Tx {
                sender: crate::tx::Sender::Contract(self.id),
                body: TxBody::CrossCheck { from: self.id, to: peer, register: reg.clone(), ws: Some(ws.clone()) },
            }));
        }
    }

    fn check_final(&mut self) {
        if self.ws.is_some() && self.peers().iter().all(|p| self.heard_from.contains(p)) {
            self.ws_final = true;
        }
    }

    /// Higher sequence wins; on equal sequence and different value the
    /// leader's candidate wins, and between two non-leaders the lower
    /// contract index.
    fn prefers(&self, new: &WsClaim, cur: &WsClaim) -> bool {
        if new.ann.seq() != cur.ann.seq() {
            return new.ann.seq() > cur.ann.seq();
        }
        if new.ann.state == cur.ann.state {
            return false;
        }
        let rank = |c: ContractId| (!self.is_leader(c), c);
        rank(new.origin) < rank(cur.origin)
    }

    pub(crate) fn cross_check(
        &mut self,
        bank: &mut Bank,
        from: ContractId,
        reg: RegisterTx,
        ws: Option<WsClaim>,
        out: &mut Vec<Output>,
    ) -> Result<(), Reject> {
        self.check_register(&reg)?;
        if !reg.body.contract_info.contracts.contains(&from) || from == self.id {
            return Err(Reject::UnknownPeer(from));
        }
        if !self.heard_from.insert(from) {
            return Err(Reject::Duplicate);
        }
        if self.register.is_none() {
            self.register = Some(reg.clone());
        }
        if let Some(claim) = ws {
            match &self.ws {
                None => {
                    self.set_ws(claim, true);
                    self.sent_to.insert(from);
                    out.push(Output::Emit(Tx {
                        sender: crate::tx::Sender::Contract(self.id),
                        body: TxBody::CrossCheck { from: self.id, to: from, register: reg, ws: None },
                    }));
                    self.query_unheard(out);
                }
                Some(cur) => {
                    if self.prefers(&claim, cur) {
                        self.set_ws(claim, self.ws_adopted);
                    }
                }
            }
        }
        self.check_final();
        self.try_settle(bank, out);
        Ok(())
    }

    pub(crate) fn submit_proofs(
        &mut self,
        bank: &mut Bank,
        sender: ActorId,
        proofs: Vec<ProofOfFraud>,
        out: &mut Vec<Output>,
    ) -> Result<(), Reject> {
        if !self.is_party(sender) {
            return Err(Reject::Unauthorized);
        }
        if self.phase != Phase::VcCrossChecking {
            return Err(Reject::WrongPhase(self.phase));
        }
        if !self.proof_submitters.insert(sender) {
            return Err(Reject::Duplicate);
        }
        let vc = self.register.as_ref().map(|r| r.vc()).expect("registered");
        for pof in proofs {
            let counted = self.publications.contains(&pof.published);
            if !counted || pof.conflicting.channel() != vc || !validate_proof_of_fraud(&pof) {
                continue;
            }
            let Some(cell) = self.cells.get_mut(&pof.accused) else { continue };
            if cell.slashed {
                continue;
            }
            cell.slashed = true;
            let amount = std::mem::take(&mut cell.held);
            self.slashed.insert(pof.accused);
            bank.credit(sender, amount);
            *self.payouts.entry(sender).or_insert(0) += amount;
        }
        self.try_settle(bank, out);
        Ok(())
    }

    fn try_settle(&mut self, bank: &mut Bank, out: &mut Vec<Output>) {
        if self.phase == Phase::VcCrossChecking && self.ws_final && !self.proof_submitters.is_empty() {
            self.settle(bank, out);
        }
    }

    /// Highest-sequence payment-channel state published so far, first
    /// received on ties. Falls back to the deposits when nothing valid arrived.
    fn pc_base(&self) -> ChannelState {
        let mut best: Option<&SignedStatePublication> = None;
        for p in &self.pc_publications {
            if best.is_none_or(|b| p.announcement.seq() > b.announcement.seq()) {
                best = Some(p);
            }
        }
        match best {
            Some(p) => p.announcement.state.clone(),
            None => ChannelState::new(
                self.channel_id,
                0,
                &[(self.parties[0], self.deposits[0]), (self.parties[1], self.deposits[1])],
            ),
        }
    }

    fn settle(&mut self, bank: &mut Bank, out: &mut Vec<Output>) {
        let claim = self.ws.clone().expect("final candidate");
        let reg = self.register.clone().expect("registered");
        let closer = self.closer.expect("registered by a party");
        let [l, r] = self.parties;
        let base = self.pc_base();
        let mut pay = [base.balance_of(l), base.balance_of(r)];
        let x = self.slashed.len() as u32;
        let forfeited = forfeits_vc(self.f, x);
        if let Some(lock) = base.lock {
            if forfeited {
                let side = if self.counterparty(closer) == Some(l) { 0 } else { 1 };
                pay[side] += lock.amount;
            } else {
                let [end_a, end_b] = reg.body.end_parties();
                pay[0] += claim.ann.state.balance_of(end_a);
                pay[1] += claim.ann.state.balance_of(end_b);
            }
        }
        if pay[0] + pay[1] != self.party_funds {
            out.push(Output::Violation(format!(
                "{}: settlement pays {} but holds {}",
                self.id,
                pay[0] + pay[1],
                self.party_funds
            )));
            return;
        }

        let eligible: Vec<ActorId> =
            self.publications.iter().map(|p| p.warden).filter(|w| !self.slashed.contains(w)).collect();
        let split = fee_split(self.fee, self.f, eligible.len());
        let paid_to: Vec<ActorId> = eligible[..split.paid].to_vec();
        for w in &paid_to {
            self.pay(bank, *w, split.per_slot, Pool::Fee);
        }
        self.fee_spent = split.per_slot * paid_to.len() as Coins;
        self.pay(bank, closer, split.refund, Pool::Fee);

        self.closure = Some(VcClosure {
            ws: claim.ann.clone(),
            origin: claim.origin,
            proven_cheaters: x,
            forfeited,
            fee_paid_to: paid_to,
            fee_shortfall: split.shortfall,
        });
        self.phase = Phase::VcClosed;
        out.push(Output::Event(ChainEvent::VcSettled {
            contract: self.id,
            vc: reg.vc(),
            ws: claim.ann,
            proven_cheaters: x,
            forfeited,
        }));
        self.close_pc(bank, [(l, pay[0]), (r, pay[1])], None, out);
    }

    fn pay(&mut self, bank: &mut Bank, who: ActorId, amount: Coins, pool: Pool) {
        if amount == 0 {
            return;
        }
        let from = match pool {
            Pool::Fee => &mut self.fee_escrow,
            Pool::Party => &mut self.party_funds,
        };
        *from = from.checked_sub(amount).expect("pool covers payment");
        bank.credit(who, amount);
        *self.payouts.entry(who).or_insert(0) += amount;
    }

    /// Pays the parties, returns unslashed collateral and any fee still held,
    /// and moves to the terminal phase.
    fn close_pc(
        &mut self,
        bank: &mut Bank,
        pay: [(ActorId, Coins); 2],
        penalized: Option<ActorId>,
        out: &mut Vec<Output>,
    ) {
        for (who, amount) in pay {
            self.pay(bank, who, amount, Pool::Party);
        }
        let returns: Vec<(ActorId, Coins)> =
            self.cells.iter_mut().map(|(w, c)| (*w, std::mem::take(&mut c.held))).collect();
        for (w, amount) in returns {
            if amount > 0 {
                bank.credit(w, amount);
                *self.payouts.entry(w).or_insert(0) += amount;
            }
        }
        if self.fee_escrow > 0 {
            let closer = self.closer.expect("fee paid by closer");
            let amount = self.fee_escrow;
            self.pay(bank, closer, amount, Pool::Fee);
        }
        self.phase = Phase::PcClosed;
        self.penalized = penalized;
        out.push(Output::Event(ChainEvent::PcClosed { contract: self.id, payouts: pay.to_vec(), penalized }));
    }

    /// Whole channel balance to the counterparty of `offender`.
    fn penalize(&mut self, bank: &mut Bank, offender: ActorId, out: &mut Vec<Output>) {
        let other = self.counterparty(offender).expect("party");
        let total = self.party_funds;
        self.close_pc(bank, [(offender, 0), (other, total)], Some(offender), out);
    }

    pub(crate) fn request_pc_close(
        &mut self,
        bank: &mut Bank,
        sender: ActorId,
        out: &mut Vec<Output>,
    ) -> Result<(), Reject> {
        if !self.is_party(sender) {
            return Err(Reject::Unauthorized);
        }
        if !self.fully_funded() {
            return Err(Reject::NotFunded);
        }
        if self.phase == Phase::PcClosed || self.phase == Phase::VcClosed {
            return Err(Reject::WrongPhase(self.phase));
        }
        if self.pc_close_requester.is_some() {
            return Err(Reject::Duplicate);
        }
        if self.phase.vc_in_progress() {
            self.penalize(bank, sender, out);
            return Ok(());
        }
        self.pc_close_requester = Some(sender);
        out.push(Output::Event(ChainEvent::PcCloseRequested { contract: self.id, by: sender }));
        Ok(())
    }

    fn decide_pc_close(&mut self, bank: &mut Bank, out: &mut Vec<Output>) {
        let requester = self.pc_close_requester.expect("requested");
        let base = self.pc_base();
        if base.lock.is_some() {
            self.penalize(bank, requester, out);
            return;
        }
        let [l, r] = self.parties;
        self.close_pc(bank, [(l, base.balance_of(l)), (r, base.balance_of(r))], None, out);
    }

    pub(crate) fn collab_close(
        &mut self,
        bank: &mut Bank,
        sender: ActorId,
        ann: UpdateAnnouncement,
        out: &mut Vec<Output>,
    ) -> Result<(), Reject> {
        if !self.is_party(sender) {
            return Err(Reject::Unauthorized);
        }
        if self.phase != Phase::Open {
            return Err(Reject::WrongPhase(self.phase));
        }
        if self.pc_close_requester.is_some() {
            return Err(Reject::CloseInProgress);
        }
        if !self.fully_funded() {
            return Err(Reject::NotFunded);
        }
        if ann.channel() != self.channel_id || !ann.signed_by(self.parties) {
            return Err(Reject::BadState("needs both party signatures"));
        }
        if ann.state.lock.is_some() || ann.state.total() != self.channel_total() {
            return Err(Reject::BadState("locked or unbalanced"));
        }
        self.collab.insert(sender, ann);
        let [l, r] = self.parties;
        if let (Some(a), Some(b)) = (self.collab.get(&l), self.collab.get(&r)) {
            if a == b {
                let st = a.state.clone();
                self.close_pc(bank, [(l, st.balance_of(l)), (r, st.balance_of(r))], None, out);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Pool {
    Fee,
    Party,
}
