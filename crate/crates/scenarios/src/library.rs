//! Canned scenarios, one per behavior the suites exercise.

use crate::config::{ModeName, PartySpec, ScenarioConfig, StageName, WardenSpec, When};

fn base(name: &str, hops: usize) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::new(name, 1);
    cfg.hops = hops;
    cfg.margin = 2;
    cfg
}

fn offline(stage: StageName) -> PartySpec {
    PartySpec::Offline { from: When::stage(stage) }
}

pub fn honest() -> ScenarioConfig {
    base("honest", 2)
}

pub fn multihop_honest() -> ScenarioConfig {
    base("multihop_honest", 4)
}

pub fn offline_bob() -> ScenarioConfig {
    let mut cfg = base("offline_bob", 2);
    cfg.party(2, offline(StageName::Close));
    cfg
}

pub fn offline_ingrid() -> ScenarioConfig {
    let mut cfg = base("offline_ingrid", 2);
    cfg.party(1, offline(StageName::Close));
    cfg
}

pub fn offline_ends() -> ScenarioConfig {
    let mut cfg = base("offline_ends", 2);
    cfg.party(0, offline(StageName::Close)).party(2, offline(StageName::Close));
    cfg
}

pub fn collusion_double_state() -> ScenarioConfig {
    let mut cfg = base("collusion_double_state", 2);
    cfg.party(0, PartySpec::DoubleStateColluder { partner: 2, mode: ModeName::SameSeq })
        .party(2, PartySpec::DoubleStateColluder { partner: 0, mode: ModeName::SameSeq });
    cfg
}

pub fn collusion_split_seq() -> ScenarioConfig {
    let mut cfg = base("collusion_split_seq", 3);
    cfg.party(0, PartySpec::DoubleStateColluder { partner: 3, mode: ModeName::SplitSeq })
        .party(3, PartySpec::DoubleStateColluder { partner: 0, mode: ModeName::SplitSeq });
    cfg
}

pub fn old_state_closer() -> ScenarioConfig {
    let mut cfg = base("old_state_closer", 2);
    cfg.party(0, PartySpec::OldStateCloser { seq: 2 });
    cfg
}

pub fn collusive_intermediary() -> ScenarioConfig {
    let mut cfg = base("collusive_intermediary", 2);
    cfg.party(0, PartySpec::OldStateCloser { seq: 1 }).party(1, PartySpec::CollusiveIntermediary { partner: 0 });
    cfg
}

pub fn inconsistent_funder() -> ScenarioConfig {
    let mut cfg = base("inconsistent_funder", 2);
    cfg.party(1, PartySpec::InconsistentFunder { delta: 2 });
    cfg
}

/// Bob closes alone against a committee with a stale publisher and a
/// warden withholding its signatures from Alice.
pub fn stale_publishers() -> ScenarioConfig {
    let mut cfg = base("stale_publishers", 2);
    cfg.seed = 7;
    cfg.party(1, offline(StageName::Close)).warden(1, 0, WardenSpec::Withholder { target: 0 }).warden(
        1,
        1,
        WardenSpec::StalePublisher { seq: 2 },
    );
    cfg
}

/// Two parties and a committee of ten, deploying and closing off-chain.
pub fn cost_optimistic() -> ScenarioConfig {
    let mut cfg = base("cost_optimistic", 2);
    cfg.f = 3;
    cfg
}

/// The intermediary disappears before the close, so each end party
/// registers the virtual channel on its own contract.
pub fn cost_pessimistic_vc() -> ScenarioConfig {
    let mut cfg = base("cost_pessimistic_vc", 2);
    cfg.f = 3;
    cfg.party(1, offline(StageName::Close));
    cfg
}

/// Bob disappears after the virtual channel closed, so the intermediary
/// closes their payment channel unilaterally.
pub fn cost_pessimistic_pc() -> ScenarioConfig {
    let mut cfg = base("cost_pessimistic_pc", 2);
    cfg.f = 3;
    cfg.party(2, offline(StageName::PcClose));
    cfg
}

pub fn all() -> Vec<ScenarioConfig> {
    vec![
        honest(),
        multihop_honest(),
        offline_bob(),
        offline_ingrid(),
        offline_ends(),
        collusion_double_state(),
        collusion_split_seq(),
        old_state_closer(),
        collusive_intermediary(),
        inconsistent_funder(),
        stale_publishers(),
        cost_optimistic(),
        cost_pessimistic_vc(),
        cost_pessimistic_pc(),
    ]
}

pub fn by_name(name: &str) -> Option<ScenarioConfig> {
    all().into_iter().find(|c| c.name == name)
}
