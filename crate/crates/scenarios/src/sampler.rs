//! Randomized behavior assignments. Case and warden pattern are picked by
//! cycling on the run index, so a suite of `cases × patterns` runs covers
//! every combination; the remaining details are drawn from a per-run RNG.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ActorRef, CensorEntry, ModeName, PartySpec, ScenarioConfig, StageName, WardenSpec, When};

/// Party-level situations the security suite must cover.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartyCase {
    Honest,
    OfflineIntermediary,
    OfflineLeft,
    OfflineRight,
    OfflineEnds,
    CollusionSameSeq,
    CollusionSplitSeq,
    /// Both ends and one intermediary collude; needs a second intermediary.
    CollusionWithIntermediary,
    OldStateLeft,
    OldStateRight,
    CollusiveIntermediary,
    InconsistentFunder,
}

impl PartyCase {
    pub const ALL: [PartyCase; 12] = [
        PartyCase::Honest,
        PartyCase::OfflineIntermediary,
        PartyCase::OfflineLeft,
        PartyCase::OfflineRight,
        PartyCase::OfflineEnds,
        PartyCase::CollusionSameSeq,
        PartyCase::CollusionSplitSeq,
        PartyCase::CollusionWithIntermediary,
        PartyCase::OldStateLeft,
        PartyCase::OldStateRight,
        PartyCase::CollusiveIntermediary,
        PartyCase::InconsistentFunder,
    ];

    pub fn applicable(self, hops: usize) -> bool {
        self != PartyCase::CollusionWithIntermediary || hops >= 3
    }

    /// An honest end party starts the close.
    pub fn honest_initiator(self) -> bool {
        !matches!(
            self,
            PartyCase::CollusionSameSeq | PartyCase::CollusionSplitSeq | PartyCase::CollusionWithIntermediary
        )
    }

    pub fn cases(hops: usize) -> Vec<PartyCase> {
        Self::ALL.into_iter().filter(|c| c.applicable(hops)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WardenKind {
    Stale,
    DoubleSigner,
    Withholder,
    Crash,
    /// A random kind per warden.
    Mixed,
}

impl WardenKind {
    pub const ALL: [WardenKind; 5] =
        [WardenKind::Stale, WardenKind::DoubleSigner, WardenKind::Withholder, WardenKind::Crash, WardenKind::Mixed];
}

/// `count` Byzantine wardens of `kind` in every committee.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WardenPattern {
    pub count: u32,
    pub kind: WardenKind,
}

impl WardenPattern {
    /// All patterns with at most `f` Byzantine wardens per committee. The
    /// empty pattern appears once.
    pub fn all(f: u32) -> Vec<WardenPattern> {
        let mut v = vec![WardenPattern { count: 0, kind: WardenKind::Mixed }];
        for count in 1..=f {
            v.extend(WardenKind::ALL.into_iter().map(|kind| WardenPattern { count, kind }));
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct SampleSpace {
    pub hops: usize,
    pub f: u32,
    pub horizon: u64,
    /// Party cases to draw from; empty means every applicable case.
    pub cases: Vec<PartyCase>,
    /// Add up to three censorship rules against honest actors, each delaying
    /// by up to the horizon.
    pub censor: bool,
    /// Delay all honest traffic by the horizon in every fourth run.
    pub stall: bool,
    pub shuffle_blocks: bool,
}

impl SampleSpace {
    pub fn new(hops: usize, f: u32) -> SampleSpace {
        SampleSpace {
            hops,
            f,
            horizon: thunderdome_netsim::DEFAULT_HORIZON,
            cases: Vec::new(),
            censor: false,
            stall: false,
            shuffle_blocks: true,
        }
    }

    pub fn case_list(&self) -> Vec<PartyCase> {
        if self.cases.is_empty() {
            PartyCase::cases(self.hops)
        } else {
            self.cases.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Sample {
    pub run: u64,
    pub case: PartyCase,
    pub pattern: WardenPattern,
    pub cfg: ScenarioConfig,
}

const CENSORABLE: [&str; 7] =
    ["RegisterVC", "PublishState", "SubmitProofs", "WardenSig", "CloseRequest", "PcUpdate", "Announce"];

fn offline_stage(rng: &mut ChaCha8Rng) -> When {
    When::stage(*[StageName::Updates, StageName::Close, StageName::PcClose].choose(rng).expect("non-empty"))
}

pub fn sample(space: &SampleSpace, suite_seed: u64, run: u64) -> Sample {
    let cases = space.case_list();
    let patterns = WardenPattern::all(space.f);
    let case = cases[(run % cases.len() as u64) as usize];
    let pattern = patterns[((run / cases.len() as u64) % patterns.len() as u64) as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(suite_seed ^ run.wrapping_mul(0x9e37_79b9_7f4a_7c15));

    let h = space.hops;
    let mut cfg = ScenarioConfig::new(&format!("{case:?}#{run}"), rng.gen::<u64>() >> 1);
    cfg.hops = h;
    cfg.f = space.f;
    cfg.horizon = space.horizon;
    cfg.margin = rng.gen_range(0..=3);
    cfg.split = [rng.gen_range(1..=6), rng.gen_range(1..=6)];
    cfg.incentive = rng.gen_range(1..=3);
    cfg.leader = rng.gen_range(0..h as u32);
    cfg.updates = rng.gen_range(1..=4);
    cfg.shuffle_blocks = space.shuffle_blocks;
    let upd = cfg.updates as u64;
    let mid = rng.gen_range(1..h);

    match case {
        PartyCase::Honest => {}
        PartyCase::OfflineIntermediary => {
            cfg.party(mid, PartySpec::Offline { from: offline_stage(&mut rng) });
        }
        PartyCase::OfflineLeft => {
            cfg.party(0, PartySpec::Offline { from: offline_stage(&mut rng) });
        }
        PartyCase::OfflineRight => {
            cfg.party(h, PartySpec::Offline { from: offline_stage(&mut rng) });
        }
        PartyCase::OfflineEnds => {
            let from = offline_stage(&mut rng);
            cfg.party(0, PartySpec::Offline { from }).party(h, PartySpec::Offline { from });
        }
        PartyCase::CollusionSameSeq | PartyCase::CollusionSplitSeq | PartyCase::CollusionWithIntermediary => {
            let mode = if case == PartyCase::CollusionSameSeq { ModeName::SameSeq } else { ModeName::SplitSeq };
            cfg.party(0, PartySpec::DoubleStateColluder { partner: h, mode })
                .party(h, PartySpec::DoubleStateColluder { partner: 0, mode });
            if case == PartyCase::CollusionWithIntermediary {
                let side = if rng.gen() { 0 } else { h };
                cfg.party(mid, PartySpec::CollusiveIntermediary { partner: side });
            }
        }
        PartyCase::OldStateLeft => {
            cfg.party(0, PartySpec::OldStateCloser { seq: rng.gen_range(1..=upd) });
        }
        PartyCase::OldStateRight => {
            cfg.party(h, PartySpec::OldStateCloser { seq: rng.gen_range(1..=upd) });
        }
        PartyCase::CollusiveIntermediary => {
            let side = if rng.gen() { 0 } else { h };
            cfg.party(side, PartySpec::OldStateCloser { seq: rng.gen_range(1..=upd) })
                .party(mid, PartySpec::CollusiveIntermediary { partner: side });
        }
        PartyCase::InconsistentFunder => {
            let delta = *[-2i64, -1, 1, 2].choose(&mut rng).expect("non-empty");
            cfg.party(rng.gen_range(0..=h), PartySpec::InconsistentFunder { delta });
        }
    }

    let n = 3 * space.f as usize + 1;
    for c in 0..h {
        let mut seats: Vec<usize> = (0..n).collect();
        seats.shuffle(&mut rng);
        for &j in seats.iter().take(pattern.count as usize) {
            let kind = match pattern.kind {
                WardenKind::Mixed => WardenKind::ALL[rng.gen_range(0..4)],
                k => k,
            };
            let spec = match kind {
                WardenKind::Stale => WardenSpec::StalePublisher { seq: rng.gen_range(1..=upd + 1) },
                WardenKind::DoubleSigner => WardenSpec::DoubleSigner,
                WardenKind::Withholder => WardenSpec::Withholder { target: if rng.gen() { 0 } else { h } },
                _ => WardenSpec::Crash {
                    from: if rng.gen() {
                        When::stage(
                            *[StageName::Open, StageName::Updates, StageName::Close]
                                .choose(&mut rng)
                                .expect("non-empty"),
                        )
                    } else {
                        When { stage: None, step: Some(rng.gen_range(0..40 * space.horizon)) }
                    },
                },
            };
            cfg.warden(c, j, spec);
        }
    }

    if space.censor {
        for _ in 0..rng.gen_range(1..=3) {
            let target = if rng.gen() {
                ActorRef::Party(rng.gen_range(0..=h))
            } else {
                ActorRef::Warden(rng.gen_range(0..h), rng.gen_range(0..n))
            };
            let kind = CENSORABLE.choose(&mut rng).expect("non-empty").to_string();
            cfg.censor.push(CensorEntry { target, kind, delay: rng.gen_range(1..=space.horizon) });
        }
    }
    cfg.stall_all = space.stall && run % 4 == 3;
    Sample { run, case, pattern, cfg }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use super::*;

    #[test]
    fn cycling_covers_every_case_and_pattern_pair() {
        let space = SampleSpace::new(3, 2);
        let total = space.case_list().len() * WardenPattern::all(2).len();
        let seen: BTreeSet<_> = (0..total as u64)
            .map(|r| {
                let s = sample(&space, 5, r);
                (s.case, s.pattern)
            })
            .collect();
        assert_eq!(seen.len(), total);
    }

    #[test]
    fn samples_are_valid_and_reproducible() {
        let mut space = SampleSpace::new(2, 3);
        space.censor = true;
        for r in 0..200 {
            let s = sample(&space, 11, r);
            s.cfg.validate().unwrap();
            assert_eq!(s.cfg, sample(&space, 11, r).cfg);
            for c in 0..2 {
                let bad = (0..10).filter(|&j| s.cfg.warden_spec(c, j) != WardenSpec::Honest).count();
                assert_eq!(bad, s.pattern.count as usize);
            }
        }
    }
}
