use std::collections::BTreeSet;

use serde::Serialize;
use thunderdome_actors::{Engine, PartyBehavior, Stage, WardenBehavior};
use thunderdome_chainsim::Phase;
use thunderdome_core::{ActorId, ChannelState, Coins, ContractId};

use crate::config::{ConfigError, ScenarioConfig};
use crate::entitlement::{announcement_log, entitled_end};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    EndParty,
    Intermediary,
    Warden,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActorOutcome {
    pub actor: String,
    pub role: Role,
    pub honest: bool,
    /// Counted by the balance check: honest, and nothing of it is still
    /// locked in an open contract.
    pub checked: bool,
    pub start: Coins,
    pub final_balance: Coins,
    /// Collateral still held by contracts.
    pub held: Coins,
    /// Closing fees this actor paid as the registering party.
    pub fees_paid: Coins,
    pub entitled: Coins,
    pub loss: Coins,
    pub slashed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StateSummary {
    pub seq: u64,
    pub balances: Vec<(String, Coins)>,
}

impl From<&ChannelState> for StateSummary {
    fn from(s: &ChannelState) -> StateSummary {
        StateSummary { seq: s.seq, balances: s.balances.iter().map(|(a, c)| (a.to_string(), *c)).collect() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractOutcome {
    pub contract: u32,
    pub phase: String,
    pub closer: Option<String>,
    /// Virtual-channel state the contract settled on-chain.
    pub settled: Option<StateSummary>,
    /// Virtual-channel state the lock was released by off-chain.
    pub unlocked: Option<StateSummary>,
    pub proven_cheaters: u32,
    pub slashed: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TxCount {
    pub tag: String,
    pub contract: u32,
    pub party: usize,
    pub warden: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MessageCounts {
    pub honest_sent: u64,
    pub honest_delivered: u64,
    pub dropped: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExecutionReport {
    pub name: String,
    pub seed: u64,
    pub hops: usize,
    pub f: u32,
    pub horizon: u64,
    pub steps: u64,
    pub budget: u64,
    pub budget_exhausted: bool,
    /// Honest messages were still in flight when the budget ran out.
    pub network_stuck: bool,
    pub vc_opened: bool,
    /// Highest virtual-channel state both end parties signed.
    pub latest_agreed: Option<StateSummary>,
    /// Every contract with an honest, online party reached its final phase.
    pub close_committed: bool,
    /// Every honest, online end party holds certificates for its latest state.
    pub updates_committed: bool,
    pub actors: Vec<ActorOutcome>,
    pub contracts: Vec<ContractOutcome>,
    pub tx_counts: Vec<TxCount>,
    pub messages: MessageCounts,
    pub conserved: bool,
    pub violations: Vec<String>,
    pub trace_digest: String,
}

impl ExecutionReport {
    pub fn actor(&self, label: &str) -> Option<&ActorOutcome> {
        self.actors.iter().find(|a| a.actor == label)
    }

    pub fn contract(&self, k: u32) -> Option<&ContractOutcome> {
        self.contracts.iter().find(|c| c.contract == k)
    }

    pub fn honest_loss(&self) -> Coins {
        self.actors.iter().filter(|a| a.checked).map(|a| a.loss).sum()
    }
}

/// Runs the scenario to completion and returns the engine with its report.
pub fn run_engine(cfg: &ScenarioConfig) -> Result<(Engine, ExecutionReport), ConfigError> {
    let mut engine = Engine::new(cfg.engine_config()?);
    engine.run();
    let report = build_report(cfg, &engine);
    Ok((engine, report))
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ExecutionReport, ConfigError> {
    run_engine(cfg).map(|(_, r)| r)
}

fn party_honest(b: PartyBehavior) -> bool {
    matches!(b, PartyBehavior::Honest | PartyBehavior::Offline { .. })
}

pub fn build_report(cfg: &ScenarioConfig, e: &Engine) -> ExecutionReport {
    let topo = &e.topo;
    let start = e.start_balance;
    let now = e.net.now();
    let run = e.report();
    let log = announcement_log(e);
    let ends = topo.ends();
    let closed = |k: usize| e.ledger.contract(ContractId(k as u32)).is_some_and(|c| c.phase == Phase::PcClosed);
    let fees = |who: ActorId| e.ledger.contracts().filter(|c| c.closer == Some(who)).map(|c| c.fee_spent).sum();
    let online = |p: ActorId| e.parties[&p].active(now, Stage::PcClose);

    let mut actors = Vec::new();
    for (i, p) in topo.parties.iter().enumerate() {
        let actor = &e.parties[p];
        let honest = party_honest(actor.behavior);
        let (role, entitled) = match ends.iter().position(|x| x == p) {
            Some(side) => (Role::EndParty, entitled_end(topo, start, side, &log)),
            None => (Role::Intermediary, start),
        };
        let all_closed = topo.adjacent(i).into_iter().all(closed);
        let final_balance = e.ledger.balance(*p);
        let fees_paid = fees(*p);
        actors.push(ActorOutcome {
            actor: p.to_string(),
            role,
            honest,
            checked: honest && all_closed,
            start,
            final_balance,
            held: 0,
            fees_paid,
            entitled,
            loss: entitled.saturating_sub(final_balance + fees_paid),
            slashed: false,
        });
    }
    for (w, actor) in &e.wardens {
        let honest = actor.behavior == WardenBehavior::Honest;
        let held: Coins = e.ledger.contracts().filter_map(|c| c.cells.get(w)).map(|cell| cell.held).sum();
        let slashed = e.ledger.contracts().any(|c| c.slashed.contains(w));
        let final_balance = e.ledger.balance(*w);
        actors.push(ActorOutcome {
            actor: w.to_string(),
            role: Role::Warden,
            honest,
            checked: honest,
            start,
            final_balance,
            held,
            fees_paid: 0,
            entitled: start,
            loss: if slashed { start } else { start.saturating_sub(final_balance + held) },
            slashed,
        });
    }

    let mut contracts = Vec::new();
    for c in e.ledger.contracts() {
        let k = c.id.0 as usize;
        let unlocked = topo.pc_parties(k).iter().find_map(|p| e.parties[p].pcs[&k].unlock_target.clone());
        contracts.push(ContractOutcome {
            contract: c.id.0,
            phase: format!("{:?}", c.phase),
            closer: c.closer.map(|a| a.to_string()),
            settled: c.closure.as_ref().map(|x| (&x.ws.state).into()),
            unlocked: unlocked.map(|u| (&u.state).into()),
            proven_cheaters: c.closure.as_ref().map_or(0, |x| x.proven_cheaters),
            slashed: c.slashed.iter().map(|a| a.to_string()).collect(),
        });
    }

    let close_committed = !run.budget_exhausted
        && (0..topo.hops()).all(|k| {
            let responsible =
                topo.pc_parties(k).iter().any(|p| e.parties[p].behavior == PartyBehavior::Honest && online(*p));
            !responsible || closed(k)
        });
    let updates_committed = ends.iter().all(|p| {
        let a = &e.parties[p];
        if a.behavior != PartyBehavior::Honest || !a.vc_open() {
            return true;
        }
        // The opening state is certified by the opening quorum.
        a.committed.as_ref().map_or(1, |c| c.seq()) >= a.close_state().map_or(1, |s| s.seq())
    });

    let tags: BTreeSet<&str> = e.ledger.blocks().iter().map(|b| b.tag).collect();
    let mut tx_counts = Vec::new();
    for tag in tags {
        for k in 0..topo.hops() {
            let (party, warden) = e.ledger.count_txs(tag, ContractId(k as u32));
            if party + warden > 0 {
                tx_counts.push(TxCount { tag: tag.to_string(), contract: k as u32, party, warden });
            }
        }
    }

    let latest_agreed = log.iter().max_by_key(|a| a.seq()).map(|a| (&a.state).into());
    ExecutionReport {
        name: cfg.name.clone(),
        seed: cfg.seed,
        hops: cfg.hops,
        f: cfg.f,
        horizon: cfg.horizon,
        steps: run.steps,
        budget: cfg.budget(),
        budget_exhausted: run.budget_exhausted,
        network_stuck: run.liveness_violation,
        vc_opened: ends.iter().any(|p| e.parties[p].vc_open()),
        latest_agreed,
        close_committed,
        updates_committed,
        actors,
        contracts,
        tx_counts,
        messages: MessageCounts {
            honest_sent: e.net.honest_sent(),
            honest_delivered: e.net.honest_delivered(),
            dropped: e.net.dropped(),
        },
        conserved: e.ledger.conserved(),
        violations: e.ledger.violations().to_vec(),
        trace_digest: e.trace().digest().short(),
    }
}
