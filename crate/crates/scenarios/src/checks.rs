use serde::Serialize;

use crate::report::ExecutionReport;

/// Outcome of one property check on a finished run.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub property: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// No checked honest actor ends below what it is owed, fees aside.
pub fn check_balance_security(r: &ExecutionReport) -> bool {
    r.actors.iter().filter(|a| a.checked).all(|a| a.loss == 0)
}

/// Every honest, online party's channels closed within `bound` steps and
/// every update the honest ends signed was certified.
pub fn check_liveness(r: &ExecutionReport, bound: u64) -> bool {
    !r.budget_exhausted && r.steps <= bound && r.close_committed && r.updates_committed
}

/// All contracts that settled the virtual channel on-chain settled the
/// same state.
pub fn check_same_state(r: &ExecutionReport) -> bool {
    let mut settled = r.contracts.iter().filter_map(|c| c.settled.as_ref());
    match settled.next() {
        Some(first) => settled.all(|s| s == first),
        None => true,
    }
}

pub fn check_conservation(r: &ExecutionReport) -> bool {
    r.conserved && r.violations.is_empty()
}

/// Party and warden transactions on `contract` in blocks tagged `tag`.
pub fn count_onchain_txs(r: &ExecutionReport, tag: &str, contract: u32) -> (usize, usize) {
    r.tx_counts.iter().find(|t| t.tag == tag && t.contract == contract).map_or((0, 0), |t| (t.party, t.warden))
}

/// The standard checks, with liveness bounded by the run's step budget.
pub fn evaluate(r: &ExecutionReport) -> Vec<CheckResult> {
    let losers: Vec<String> =
        r.actors.iter().filter(|a| a.checked && a.loss > 0).map(|a| format!("{} -{}", a.actor, a.loss)).collect();
    let settled: Vec<String> =
        r.contracts.iter().filter_map(|c| c.settled.as_ref().map(|s| format!("SC{}@{}", c.contract, s.seq))).collect();
    vec![
        CheckResult {
            name: "balance_security",
            property: "honest actors lose nothing",
            passed: check_balance_security(r),
            detail: if losers.is_empty() { "no losses".into() } else { losers.join(", ") },
        },
        CheckResult {
            name: "liveness",
            property: "honest closes complete in bounded time",
            passed: check_liveness(r, r.budget),
            detail: format!(
                "steps {} of {}, close {}, updates {}",
                r.steps, r.budget, r.close_committed, r.updates_committed
            ),
        },
        CheckResult {
            name: "same_state",
            property: "all contracts settle one state",
            passed: check_same_state(r),
            detail: if settled.is_empty() { "no on-chain settlement".into() } else { settled.join(", ") },
        },
        CheckResult {
            name: "conservation",
            property: "coins are conserved",
            passed: check_conservation(r),
            detail: if r.violations.is_empty() { "every block conserved".into() } else { r.violations.join("; ") },
        },
    ]
}
