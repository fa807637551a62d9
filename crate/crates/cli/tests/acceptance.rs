//! One test per acceptance criterion. Each prints a single
//! `PASS`/`FAIL criterion N: ...` line to stderr before asserting.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thunderdome_gametheory::*;
use thunderdome_scenarios::sampler::{PartyCase, WardenPattern};
use thunderdome_scenarios::suites::{
    liveness_suite, outcome_differences, same_state_suite, same_state_suite_on, security_suite, SuiteReport,
};
use thunderdome_scenarios::{check_same_state, count_onchain_txs, library, run_scenario};

const SAME_STATE_RUNS: u64 = 500;
const SAME_STATE_BUDGET: Duration = Duration::from_secs(60);
const SECURITY_RUNS_PER_F: u64 = 700;
const SECURITY_MIN_RUNS: u64 = 2000;
const SECURITY_BUDGET: Duration = Duration::from_secs(300);
const HORIZONS: [u64; 3] = [10, 50, 200];
const LIVENESS_RUNS: u64 = 150;
const GAME_SAMPLES: usize = 1000;
const TABLE_SAMPLES: usize = 100;
const ORACLE_BUDGET: Duration = Duration::from_secs(120);
const MULTIHOP_RUNS: u64 = 300;

fn report(n: u32, ok: bool, detail: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{} criterion {n}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n}: {detail}");
}

struct Timed {
    reports: Vec<SuiteReport>,
    elapsed: Duration,
}

fn timed(f: impl FnOnce() -> Vec<SuiteReport>) -> Timed {
    let t = Instant::now();
    let reports = f();
    Timed { reports, elapsed: t.elapsed() }
}

fn same_state() -> &'static Timed {
    static S: OnceLock<Timed> = OnceLock::new();
    S.get_or_init(|| timed(|| (1..=3).map(|f| same_state_suite(f, SAME_STATE_RUNS, 100 + f as u64, true)).collect()))
}

fn security() -> &'static Timed {
    static S: OnceLock<Timed> = OnceLock::new();
    S.get_or_init(|| timed(|| (1..=3).map(|f| security_suite(2, f, SECURITY_RUNS_PER_F, 200 + f as u64)).collect()))
}

/// Liveness suites per `f`, one report per horizon.
fn liveness() -> &'static Vec<Vec<SuiteReport>> {
    static S: OnceLock<Vec<Vec<SuiteReport>>> = OnceLock::new();
    S.get_or_init(|| {
        (1..=3)
            .map(|f| HORIZONS.iter().map(|&h| liveness_suite(2, f, h, LIVENESS_RUNS, 300 + f as u64)).collect())
            .collect()
    })
}

struct Multihop {
    same_state: Vec<SuiteReport>,
    security: Vec<SuiteReport>,
    liveness: Vec<SuiteReport>,
}

fn multihop() -> &'static Multihop {
    static S: OnceLock<Multihop> = OnceLock::new();
    S.get_or_init(|| Multihop {
        same_state: (1..=2).map(|f| same_state_suite_on(3, f, MULTIHOP_RUNS, 400 + f as u64, true)).collect(),
        security: (1..=2).map(|f| security_suite(3, f, MULTIHOP_RUNS, 500 + f as u64)).collect(),
        liveness: HORIZONS.iter().map(|&h| liveness_suite(3, 1, h, MULTIHOP_RUNS, 600)).collect(),
    })
}

/// Every run settled or unwound both contracts at one identical state.
fn identical_closures(r: &SuiteReport) -> bool {
    r.outcomes.iter().all(|o| {
        o.same_state
            && o.closures.len() >= 2
            && o.closures.iter().all(|c| c.is_some())
            && o.closures.windows(2).all(|w| w[0] == w[1])
    })
}

fn regime_samples(seed: u64, n: usize) -> Vec<GameParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| GameParams::sample_regime(&mut rng, 1 + (i % 3) as u32)).collect()
}

#[test]
fn criterion_01_same_state_closure() {
    let t = same_state();
    let runs: u64 = t.reports.iter().map(|r| r.runs).sum();
    let identical = t.reports.iter().all(identical_closures);
    let passed = t.reports.iter().all(|r| r.all_passed());
    let cases_hit = t
        .reports
        .iter()
        .all(|r| r.cases.contains(&PartyCase::CollusionSameSeq) && r.cases.contains(&PartyCase::CollusionSplitSeq));
    let ok = identical && passed && cases_hit && runs == 3 * SAME_STATE_RUNS && t.elapsed < SAME_STATE_BUDGET;
    let summary: Vec<String> = t.reports.iter().map(|r| r.summary()).collect();
    report(1, ok, &format!("{runs} runs in {:.1?}, identical closures {identical}; {}", t.elapsed, summary.join("; ")));
}

#[test]
fn criterion_02_balance_security() {
    let t = security();
    let runs: u64 = t.reports.iter().map(|r| r.runs).sum();
    let losses: u64 = t.reports.iter().flat_map(|r| &r.outcomes).map(|o| o.honest_loss).sum();
    let no_failures = t.reports.iter().all(|r| r.security_failures.is_empty());
    let covered =
        t.reports.iter().zip(1..=3).all(|(r, f)| {
            r.cases.len() == PartyCase::cases(2).len() && r.patterns.len() == WardenPattern::all(f).len()
        });
    let ok = no_failures && losses == 0 && covered && runs >= SECURITY_MIN_RUNS && t.elapsed < SECURITY_BUDGET;
    report(
        2,
        ok,
        &format!("{runs} runs in {:.1?}, honest loss {losses}, every case and pattern covered {covered}", t.elapsed),
    );
}

#[test]
fn criterion_03_liveness() {
    let mut failures = 0;
    let mut differences = 0;
    let mut runs = 0;
    for per_f in liveness() {
        for r in per_f {
            failures += r.liveness_failures.len();
            runs += r.runs;
        }
        for w in per_f.windows(2) {
            differences += outcome_differences(&w[0], &w[1]).len();
        }
    }
    let ok = failures == 0 && differences == 0;
    report(
        3,
        ok,
        &format!("{runs} runs over H in {HORIZONS:?}, {failures} liveness failures, {differences} outcome differences"),
    );
}

#[test]
fn criterion_04_strategic_form_table() {
    let mut mismatches = Vec::new();
    for p in regime_samples(4, TABLE_SAMPLES) {
        let nfg = to_nfg(&build_closing_game(&p, false).unwrap());
        let (a, e, d) = (p.alpha, p.eps, p.d);
        let bob_closes = (a - e, a);
        let table = [
            ("Uni", [bob_closes, bob_closes, bob_closes]),
            ("Old", [bob_closes, (a + d, a - d), (a, a - e)]),
            ("New", [bob_closes, (a, a), (a, a - e)]),
        ];
        let shape = nfg.strategies[0].len() == 3 && nfg.strategies[1].len() == 3;
        for (row, cells) in table {
            for (col, (x, y)) in ["Ignore", "Agree", "Disagree"].into_iter().zip(cells) {
                if !shape || nfg.payoff_by_label(&[row, col]) != Some(&[int(x), int(y)][..]) {
                    mismatches.push(format!("{row}/{col} {p:?}"));
                }
            }
        }
    }
    report(4, mismatches.is_empty(), &format!("{TABLE_SAMPLES} parameter sets, {} mismatched cells", mismatches.len()));
}

#[test]
fn criterion_05_equilibrium_sets() {
    let samples = regime_samples(5, GAME_SAMPLES);

    // Old/Ignore survives when Ingrid cannot tell the states apart.
    let old_ignore = samples.iter().all(|p| {
        let nfg = to_nfg(&build_closing_game(p, false).unwrap());
        pure_nash(&nfg).iter().any(|x| nfg.label(x) == ["Old", "Ignore"])
    });

    // With knowledge, Bob's undominated choice is New and Ingrid accepts.
    let expected = vec![
        ("New".to_string(), "Ignore".to_string(), "Ignore".to_string()),
        ("New".to_string(), "Ignore".to_string(), "Agree".to_string()),
    ];
    let informed = samples.iter().all(|p| {
        let g = build_closing_game(p, true).unwrap();
        let robust = undominated_at_root(&g, &backward_induction(&g).unwrap());
        let picks: Vec<_> = robust
            .profiles
            .iter()
            .map(|s| {
                (
                    g.choice(s, "root").unwrap().to_string(),
                    g.choice(s, "Old").unwrap().to_string(),
                    g.choice(s, "New").unwrap().to_string(),
                )
            })
            .collect();
        picks == expected
    });

    let latest = samples.iter().all(|p| bloc_publishes_latest(p).unwrap());

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let cheating = (0..200).all(|i| cheating_equilibrium(&GameParams::sample_fraud_pays(&mut rng, 1 + i % 3)).unwrap());

    let ok = old_ignore && informed && latest && cheating;
    report(
        5,
        ok,
        &format!(
            "Old/Ignore in NE {old_ignore}, informed set is New with Agree or Ignore {informed}, \
             bloc publishes latest over {GAME_SAMPLES} regimes {latest}, fraud-pays admits cheating {cheating}"
        ),
    );
}

#[test]
fn criterion_06_oracle_equivalence() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut disagreements = 0;
    for i in 0..GAME_SAMPLES {
        let f = 1 + (i % 3) as u32;
        let p = if i % 5 == 4 {
            GameParams::sample_fraud_pays(&mut rng, f)
        } else {
            GameParams::sample_regime(&mut rng, f)
        };
        if !oracles_agree(&p).unwrap() {
            disagreements += 1;
        }
    }
    let elapsed = t.elapsed();
    report(
        6,
        disagreements == 0 && elapsed < ORACLE_BUDGET,
        &format!("{GAME_SAMPLES} parameter sets in {elapsed:.1?}, {disagreements} disagreements"),
    );
}

#[test]
fn criterion_07_dishonest_warden_utility() {
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in regime_samples(7, GAME_SAMPLES) {
        let f = p.f as i64;
        for b in 1..=p.f + 1 {
            let a = p.f + 1 - b;
            let (dish, honest) = expected_warden_utility(&p, a, b).unwrap();
            let formula = (p.p1 * int(a as i64) + p.p2() * int(f + 1)) * int(p.k) - int(b as i64 * p.c) * p.p1;
            if dish != formula || dish >= honest {
                bad.push(format!("{p:?} b={b}"));
            }
            let blind = GameParams { p1: Rational64::from_integer(0), ..p };
            let (d0, h0) = expected_warden_utility(&blind, a, b).unwrap();
            if d0 != h0 {
                bad.push(format!("p1=0 {p:?} b={b}"));
            }
            checked += 1;
        }
    }
    report(7, bad.is_empty(), &format!("{checked} (params, b) pairs, {} violations", bad.len()));
}

#[test]
fn criterion_08_main_parties_keep_alpha_minus_eps() {
    let mut n = 0;
    let mut bad = 0;
    for f in 1..=3 {
        for v in sweep(Region::Security, f, GAME_SAMPLES / 3, 80 + f as u64).unwrap() {
            n += 1;
            if !check_security(&v.params).unwrap() || !v.conforms() {
                bad += 1;
            }
        }
    }
    report(8, bad == 0, &format!("{n} sampled regimes, {bad} with a party below alpha - eps"));
}

#[test]
fn criterion_09_transaction_counts() {
    let opt = run_scenario(&library::cost_optimistic()).unwrap();
    let vc = run_scenario(&library::cost_pessimistic_vc()).unwrap();
    let pc = run_scenario(&library::cost_pessimistic_pc()).unwrap();
    let deploy: Vec<_> = (0..2).map(|k| count_onchain_txs(&opt, "deploy", k)).collect();
    let optimistic: Vec<_> = (0..2).map(|k| count_onchain_txs(&opt, "close", k)).collect();
    let (vp, vw) = count_onchain_txs(&vc, "close", 0);
    let (pp, pw) = count_onchain_txs(&pc, "pc-close", 1);
    let committees = [&opt, &vc, &pc].iter().all(|r| r.f == 3);
    let ok = committees
        && deploy.iter().all(|&c| c == (2, 10))
        && optimistic.iter().all(|&c| c == (0, 0))
        && vp == 2
        && (7..=10).contains(&vw)
        && pp == 1
        && (7..=10).contains(&pw);
    report(
        9,
        ok,
        &format!(
            "deploy {deploy:?}, optimistic close {optimistic:?}, pessimistic VC close ({vp}, {vw}), pessimistic PC close ({pp}, {pw})"
        ),
    );
}

#[test]
fn criterion_10_multihop() {
    let m = multihop();
    let same_state = m.same_state.iter().all(|r| r.all_passed() && identical_closures(r));
    let security = m.security.iter().all(|r| r.security_failures.is_empty())
        && m.security.iter().all(|r| r.cases.contains(&PartyCase::CollusionWithIntermediary));
    let live = m.liveness.iter().all(|r| r.liveness_failures.is_empty())
        && m.liveness.windows(2).all(|w| outcome_differences(&w[0], &w[1]).is_empty());

    let mut iso = true;
    for p in regime_samples(10, 50) {
        for knows in [false, true] {
            let two = build_closing_game(&p, knows).unwrap();
            let four = build_multihop_closing_game(&p, 3, knows).unwrap();
            iso &= structurally_isomorphic(&two, &four)
                && equilibria(&two).unwrap().profiles == equilibria(&four).unwrap().profiles;
        }
    }
    report(
        10,
        same_state && security && live && iso,
        &format!(
            "4-party same-state {same_state}, security {security}, liveness {live}, closing game isomorphic {iso}"
        ),
    );
}

#[test]
fn criterion_11_conservation() {
    let m = multihop();
    let all: Vec<&SuiteReport> = same_state()
        .reports
        .iter()
        .chain(&security().reports)
        .chain(liveness().iter().flatten())
        .chain(&m.same_state)
        .chain(&m.security)
        .chain(&m.liveness)
        .collect();
    let runs: u64 = all.iter().map(|r| r.runs).sum();
    let broken: usize = all.iter().map(|r| r.conservation_failures.len()).sum();
    report(11, broken == 0, &format!("{runs} runs across {} suites, {broken} with a non-conserving block", all.len()));
}

#[test]
fn criterion_12_cross_check_ablation() {
    let mut canned = Vec::new();
    for mut cfg in [library::collusion_double_state(), library::collusion_split_seq()] {
        cfg.cross_check = false;
        let r = run_scenario(&cfg).unwrap();
        if !check_same_state(&r) {
            canned.push(r.name);
        }
    }
    let suite = same_state_suite(1, 40, 12, false);
    let ok = !canned.is_empty() && !suite.same_state_failures.is_empty();
    report(
        12,
        ok,
        &format!(
            "without cross-checks same-state fails in {canned:?} and {}/{} suite runs",
            suite.same_state_failures.len(),
            suite.runs
        ),
    );
}
