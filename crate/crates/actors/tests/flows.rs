use thunderdome_actors::{Activation, Engine, EngineConfig, PartyBehavior, SplitMode, Stage, Topology, WardenBehavior};
use thunderdome_chainsim::Phase;
use thunderdome_core::{ActorId, Coins};

const START: Coins = 1_000;
const FEE: Coins = 9;

fn topo(hops: usize, f: u32) -> Topology {
    Topology::new(hops, f, (3, 7), 2, FEE, 0).unwrap()
}

fn run(topo: Topology, seed: u64, tweak: impl FnOnce(&mut EngineConfig)) -> Engine {
    let mut cfg = EngineConfig::new(topo, seed);
    tweak(&mut cfg);
    let mut e = Engine::new(cfg);
    let r = e.run();
    assert!(!r.budget_exhausted, "{r:?}");
    assert!(e.ledger.conserved(), "{:?}", e.ledger.violations());
    e
}

fn party(e: &Engine, i: usize) -> ActorId {
    e.topo.parties[i]
}

/// Share of end party `side` in the state its close request used.
fn share(e: &Engine, side: usize) -> Coins {
    let end = e.topo.ends()[side];
    e.parties[&end].close_state().unwrap().state.balance_of(end)
}

fn fee_paid(e: &Engine, who: ActorId) -> Coins {
    e.ledger.contracts().filter(|c| c.closer == Some(who)).map(|c| c.fee_spent).sum()
}

fn settled_states(e: &Engine) -> Vec<u64> {
    e.ledger.contracts().filter_map(|c| c.closure.as_ref().map(|x| x.ws.seq())).collect()
}

fn offline_at_close() -> PartyBehavior {
    PartyBehavior::Offline { from: Activation::Stage(Stage::Close) }
}

#[test]
fn honest_two_hops_closes_off_chain() {
    let e = run(topo(2, 1), 1, |_| {});
    for c in e.ledger.contracts() {
        assert_eq!(c.phase, Phase::PcClosed);
        assert!(c.closure.is_none() && c.register.is_none());
    }
    let a = &e.parties[&e.topo.ends()[0]];
    assert!(a.vc_open());
    assert_eq!(a.close_state().unwrap().seq(), 4, "s1 plus three updates");
    assert_eq!(a.committed.as_ref().unwrap().seq(), 4);
    assert_eq!(e.balance(party(&e, 0)), START - 3 + share(&e, 0));
    assert_eq!(e.balance(party(&e, 2)), START - 7 + share(&e, 1));
    assert_eq!(e.balance(party(&e, 1)), START);
}

#[test]
fn honest_four_parties() {
    let e = run(topo(3, 1), 5, |_| {});
    assert!(e.ledger.contracts().all(|c| c.phase == Phase::PcClosed && c.closure.is_none()));
    assert_eq!(e.balance(party(&e, 0)), START - 3 + share(&e, 0));
    assert_eq!(e.balance(party(&e, 3)), START - 7 + share(&e, 1));
    assert_eq!(e.balance(party(&e, 1)), START);
    assert_eq!(e.balance(party(&e, 2)), START);
}

#[test]
fn offline_end_party_is_closed_first_by_the_intermediary() {
    let e = run(topo(2, 1), 3, |c| {
        c.party_behaviors.insert(c.topo.parties[2], offline_at_close());
    });
    let sc1 = e.ledger.contracts().nth(1).unwrap();
    assert_eq!(sc1.closer, Some(party(&e, 1)));
    assert!(e.ledger.contracts().next().unwrap().closure.is_none(), "Alice's side unlocked off-chain");
    assert_eq!(e.balance(party(&e, 0)), START - 3 + share(&e, 0));
    assert_eq!(e.balance(party(&e, 2)), START - 7 + share(&e, 1));
    assert_eq!(e.balance(party(&e, 1)) + FEE, START);
}

#[test]
fn offline_intermediary_makes_both_ends_close() {
    let e = run(topo(2, 1), 4, |c| {
        c.party_behaviors.insert(c.topo.parties[1], offline_at_close());
    });
    let closers: Vec<_> = e.ledger.contracts().map(|c| c.closer).collect();
    assert_eq!(closers, [Some(party(&e, 0)), Some(party(&e, 2))]);
    let ws = settled_states(&e);
    assert_eq!(ws, [4, 4]);
    assert_eq!(e.balance(party(&e, 0)) + FEE, START - 3 + share(&e, 0));
    assert_eq!(e.balance(party(&e, 2)) + FEE, START - 7 + share(&e, 1));
}

#[test]
fn intermediary_alone_closes_both_sides() {
    let e = run(topo(2, 1), 6, |c| {
        c.party_behaviors.insert(c.topo.parties[0], offline_at_close());
        c.party_behaviors.insert(c.topo.parties[2], offline_at_close());
    });
    assert!(e.ledger.contracts().all(|c| c.closer == Some(e.topo.parties[1])));
    assert_eq!(e.balance(party(&e, 1)) + 2 * FEE, START);
    assert_eq!(e.balance(party(&e, 0)), START - 3 + share(&e, 0));
}

#[test]
fn same_sequence_split_settles_one_state_everywhere() {
    let t = topo(2, 1);
    let [a, b] = t.ends();
    let e = run(t, 3, |c| {
        c.party_behaviors.insert(a, PartyBehavior::DoubleStateColluder { partner: b, mode: SplitMode::SameSeq });
        c.party_behaviors.insert(b, PartyBehavior::DoubleStateColluder { partner: a, mode: SplitMode::SameSeq });
    });
    let states: Vec<_> = e.ledger.contracts().map(|c| c.closure.as_ref().unwrap().ws.clone()).collect();
    assert_eq!(states[0], states[1]);
    assert_eq!(e.balance(party(&e, 1)), START);
}

#[test]
fn split_sequence_across_three_committees() {
    let t = topo(3, 1);
    let [a, d] = t.ends();
    let e = run(t, 3, |c| {
        c.party_behaviors.insert(a, PartyBehavior::DoubleStateColluder { partner: d, mode: SplitMode::SplitSeq });
        c.party_behaviors.insert(d, PartyBehavior::DoubleStateColluder { partner: a, mode: SplitMode::SplitSeq });
    });
    let ws = settled_states(&e);
    assert_eq!(ws, [6, 6], "the higher state wins on both end contracts");
    assert_eq!(e.balance(party(&e, 1)), START);
    assert_eq!(e.balance(party(&e, 2)), START);
    let middle = e.parties[&party(&e, 1)].pcs[&1].unlock_target.as_ref().unwrap().seq();
    assert_eq!(middle, 6);
}

#[test]
fn old_state_closer_gets_the_latest_state() {
    let e = run(topo(2, 1), 3, |c| {
        c.party_behaviors.insert(c.topo.parties[0], PartyBehavior::OldStateCloser { seq: 2 });
    });
    assert_eq!(settled_states(&e), [4, 4]);
    assert_eq!(e.balance(party(&e, 2)), START - 7 + share(&e, 1));
    let i = party(&e, 1);
    assert_eq!(e.balance(i) + fee_paid(&e, i), START);
}

#[test]
fn inconsistent_lock_aborts_the_opening() {
    let e = run(topo(2, 1), 3, |c| {
        c.party_behaviors.insert(c.topo.parties[1], PartyBehavior::InconsistentFunder { delta: 2 });
    });
    assert!(e.parties.values().all(|p| !p.vc_open()));
    assert!(e.parties[&party(&e, 2)].aborted);
    for p in &e.topo.parties {
        assert_eq!(e.balance(*p), START);
    }
}

#[test]
fn stale_publisher_is_proven_and_slashed() {
    let t = topo(2, 1);
    let [a, b] = t.ends();
    let c1 = t.committees[1].clone();
    let e = run(t, 7, |c| {
        c.party_behaviors.insert(c.topo.parties[1], offline_at_close());
        c.warden_behaviors.insert(c1[0], WardenBehavior::Withholder { target: a });
        c.warden_behaviors.insert(c1[1], WardenBehavior::StalePublisher { seq: 2 });
    });
    let sc1 = e.ledger.contracts().nth(1).unwrap();
    assert_eq!(sc1.closer, Some(b));
    let closure = sc1.closure.as_ref().unwrap();
    assert_eq!(closure.ws.seq(), 4);
    assert_eq!(closure.proven_cheaters, 1);
    assert!(sc1.slashed.contains(&c1[1]));
    let collateral = e.topo.collateral;
    assert!(e.balance(b) + FEE >= START - 7 + share(&e, 1) + collateral);
}

#[test]
fn collusive_intermediary_only_hurts_itself() {
    let t = topo(2, 1);
    let a = t.ends()[0];
    let e = run(t, 8, |c| {
        c.party_behaviors.insert(a, PartyBehavior::OldStateCloser { seq: 1 });
        c.party_behaviors.insert(c.topo.parties[1], PartyBehavior::CollusiveIntermediary { partner: a });
    });
    assert_eq!(e.balance(party(&e, 2)), START - 7 + share(&e, 1));
}

#[test]
fn trace_is_reproducible() {
    let go = |seed| run(topo(2, 1), seed, |c| c.shuffle_blocks = true).trace().digest();
    assert_eq!(go(11), go(11));
    assert_ne!(go(11), go(12));
}
