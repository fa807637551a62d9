//! Batches of sampled runs fanned out over a thread pool. Results are
//! sorted by run index, so aggregation does not depend on scheduling.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::checks::{check_balance_security, check_conservation, check_liveness, check_same_state};
use crate::config::ScenarioConfig;
use crate::report::{run_scenario, ExecutionReport, StateSummary};
use crate::sampler::{sample, PartyCase, SampleSpace, WardenPattern};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunOutcome {
    pub run: u64,
    pub case: PartyCase,
    pub pattern: WardenPattern,
    pub seed: u64,
    pub security: bool,
    pub liveness: bool,
    pub same_state: bool,
    pub conservation: bool,
    pub honest_loss: u64,
    pub steps: u64,
    pub vc_opened: bool,
    /// Settled or unlocked virtual-channel state per contract. Left empty
    /// when the opening aborted, since any lock was then unwound at the
    /// opening state.
    pub closures: Vec<Option<StateSummary>>,
}

impl RunOutcome {
    fn new(run: u64, case: PartyCase, pattern: WardenPattern, r: &ExecutionReport) -> RunOutcome {
        RunOutcome {
            run,
            case,
            pattern,
            seed: r.seed,
            security: check_balance_security(r),
            liveness: check_liveness(r, r.budget),
            same_state: check_same_state(r),
            conservation: check_conservation(r),
            honest_loss: r.honest_loss(),
            steps: r.steps,
            vc_opened: r.vc_opened,
            closures: if !r.vc_opened {
                Vec::new()
            } else {
                r.contracts.iter().map(|c| c.settled.clone().or_else(|| c.unlocked.clone())).collect()
            },
        }
    }

    /// What must not change when only the network timing changes.
    pub fn outcome_key(&self) -> (bool, bool, bool, bool, &[Option<StateSummary>]) {
        (self.security, self.liveness, self.same_state, self.vc_opened, &self.closures)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub runs: u64,
    pub security_failures: Vec<u64>,
    pub liveness_failures: Vec<u64>,
    pub same_state_failures: Vec<u64>,
    pub conservation_failures: Vec<u64>,
    pub cases: BTreeSet<PartyCase>,
    pub patterns: BTreeSet<WardenPattern>,
    pub outcomes: Vec<RunOutcome>,
}

impl SuiteReport {
    fn collect(name: &str, mut outcomes: Vec<RunOutcome>) -> SuiteReport {
        outcomes.sort_by_key(|o| o.run);
        let failing = |pred: fn(&RunOutcome) -> bool| outcomes.iter().filter(|o| !pred(o)).map(|o| o.run).collect();
        SuiteReport {
            name: name.to_string(),
            runs: outcomes.len() as u64,
            security_failures: failing(|o| o.security),
            liveness_failures: failing(|o| !o.case.honest_initiator() || o.liveness),
            same_state_failures: failing(|o| o.same_state),
            conservation_failures: failing(|o| o.conservation),
            cases: outcomes.iter().map(|o| o.case).collect(),
            patterns: outcomes.iter().map(|o| o.pattern).collect(),
            outcomes,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.security_failures.is_empty()
            && self.liveness_failures.is_empty()
            && self.same_state_failures.is_empty()
            && self.conservation_failures.is_empty()
    }

    pub fn summary(&self) -> String {
        let n = self.runs;
        format!(
            "{}: {n} runs, security {}/{n}, liveness {}/{n}, same-state {}/{n}, conservation {}/{n}, {} cases, {} patterns",
            self.name,
            n - self.security_failures.len() as u64,
            n - self.liveness_failures.len() as u64,
            n - self.same_state_failures.len() as u64,
            n - self.conservation_failures.len() as u64,
            self.cases.len(),
            self.patterns.len(),
        )
    }
}

/// Runs `runs` samples from `space`, each adjusted by `tweak` before it runs.
pub fn run_sampled(
    name: &str,
    space: &SampleSpace,
    seed: u64,
    runs: u64,
    tweak: impl Fn(&mut ScenarioConfig, u64) + Sync,
) -> SuiteReport {
    let outcomes = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut s = sample(space, seed, run);
            tweak(&mut s.cfg, run);
            let r = run_scenario(&s.cfg).expect("sampled configs are valid");
            RunOutcome::new(run, s.case, s.pattern, &r)
        })
        .collect();
    SuiteReport::collect(name, outcomes)
}

/// Colluding end parties that sign conflicting states, alternating between
/// equal and split sequence numbers, with every other run forcing the
/// cross-checks into one block.
pub fn same_state_suite(f: u32, runs: u64, seed: u64, cross_check: bool) -> SuiteReport {
    same_state_suite_on(2, f, runs, seed, cross_check)
}

/// [`same_state_suite`] on a path of `hops` payment channels.
pub fn same_state_suite_on(hops: usize, f: u32, runs: u64, seed: u64, cross_check: bool) -> SuiteReport {
    let name = format!("same-state hops={hops} f={f}{}", if cross_check { "" } else { " without cross-checks" });
    let mut space = SampleSpace::new(hops, f);
    space.cases = vec![PartyCase::CollusionSameSeq, PartyCase::CollusionSplitSeq];
    run_sampled(&name, &space, seed, runs, move |cfg, run| {
        // Split sequences only reach different committees with three hops.
        if hops == 2 && cfg.name.starts_with("CollusionSplitSeq") {
            cfg.hops = 3;
            cfg.leader %= 3;
            for p in cfg.parties.iter_mut() {
                if p.index == 2 {
                    p.index = 3;
                }
                if let crate::config::PartySpec::DoubleStateColluder { partner, .. } = &mut p.behavior {
                    if *partner == 2 {
                        *partner = 3;
                    }
                }
            }
        }
        cfg.force_same_block = run % 2 == 1;
        cfg.cross_check = cross_check;
    })
}

/// Every party case against every warden pattern.
pub fn security_suite(hops: usize, f: u32, runs: u64, seed: u64) -> SuiteReport {
    let mut space = SampleSpace::new(hops, f);
    space.censor = true;
    run_sampled(&format!("security hops={hops} f={f}"), &space, seed, runs, |_, _| {})
}

/// The same samples under horizon `h`, censoring honest actors by up to `h`
/// steps and stalling all honest traffic in every fourth run.
pub fn liveness_suite(hops: usize, f: u32, h: u64, runs: u64, seed: u64) -> SuiteReport {
    let mut space = SampleSpace::new(hops, f);
    space.horizon = h;
    space.censor = true;
    space.stall = true;
    space.cases = PartyCase::cases(hops).into_iter().filter(|c| c.honest_initiator()).collect();
    run_sampled(&format!("liveness hops={hops} f={f} H={h}"), &space, seed, runs, |_, _| {})
}

/// Runs whose outcome differs between two suites over the same samples.
pub fn outcome_differences(a: &SuiteReport, b: &SuiteReport) -> Vec<u64> {
    a.outcomes.iter().zip(&b.outcomes).filter(|(x, y)| x.outcome_key() != y.outcome_key()).map(|(x, _)| x.run).collect()
}
