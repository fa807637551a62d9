//! Command-line front end: single scenario runs, randomized suites and the
//! closing-game analysis.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use rayon::prelude::*;
use serde_json::{json, Value};
use thunderdome_actors::Engine;
use thunderdome_gametheory::{self as gt, analysis::subgame1_equilibria, Efg, GameParams, Region, Solution};
use thunderdome_scenarios::{build_report, evaluate, library, suites, ExecutionReport, ScenarioConfig};

#[derive(Debug, Parser)]
#[command(name = "thunderdome", version, about = "Virtual-channel protocol simulator and closing-game analysis")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Directory for reports and traces [default: $THUNDERDOME_OUT, else
    /// ./thunderdome-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// One JSON document per invocation.
    Machine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Ablation {
    /// Contracts settle without exchanging closing states.
    CrossCheck,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario and check its properties.
    Sim(SimArgs),
    /// Run a randomized suite.
    Suite(SuiteArgs),
    /// Build, solve and print a closing game.
    Game(GameArgs),
    /// Check sampled game parameters against every game property.
    Sweep(SweepArgs),
    /// Print scenario files.
    Dump(DumpArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Library scenario name or path to a scenario file.
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub ablate: Option<Ablation>,
    #[arg(long)]
    pub horizon: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SuiteKind {
    SameState,
    Security,
    Liveness,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    #[arg(value_enum)]
    pub kind: SuiteKind,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub f: u32,
    #[arg(long, default_value_t = 2)]
    pub hops: usize,
    /// Censorship horizon; give it several times to compare outcomes.
    #[arg(long, default_values_t = [50])]
    pub horizon: Vec<u64>,
    #[arg(long, value_enum)]
    pub ablate: Option<Ablation>,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[command(subcommand)]
    pub game: Game,
}

#[derive(Debug, Args, Clone)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 50)]
    pub alpha: i64,
    #[arg(long, default_value_t = 2)]
    pub eps: i64,
    #[arg(long, default_value_t = 6)]
    pub d: i64,
    #[arg(long, default_value_t = 1)]
    pub k: i64,
    #[arg(long, default_value_t = 4)]
    pub c: i64,
    #[arg(long, default_value_t = 3)]
    pub f: u32,
    #[arg(long, default_value_t = 10)]
    pub v: i64,
    /// Knowledge probability as a fraction, e.g. `1/2`.
    #[arg(long, default_value = "1/2")]
    pub p1: Rational64,
    /// Also solve with the exhaustive oracle and compare.
    #[arg(long)]
    pub brute_force: bool,
}

impl ParamArgs {
    fn params(&self) -> Result<GameParams> {
        Ok(GameParams::new(self.alpha, self.eps, self.d, self.k, self.c, self.f, self.v, self.p1)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Game {
    /// Bob's closing game against Ingrid.
    Closing {
        /// Ingrid can tell an old state from the latest one.
        #[arg(long, action = ArgAction::Set, default_value_t = false, num_args = 0..=1, default_missing_value = "true")]
        knows: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Unilateral closing against the warden committee.
    Subgame1 {
        /// Check this many sampled parameter sets from the security regime.
        #[arg(long)]
        sweep: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Raise the fraud profit above the bloc's collateral.
        #[arg(long)]
        d_exceeds_collateral: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Inconsistent funding at opening.
    Opening {
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Samples per region and fault bound.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_values_t = [1, 2, 3])]
    pub f: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// Library scenario name or path; every library scenario when absent.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Only list library scenario names.
    #[arg(long)]
    pub list: bool,
}

/// What a command printed and whether all of its checks passed.
pub struct Outcome {
    pub passed: bool,
    pub text: String,
    pub machine: Value,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        let mut s = match format {
            Format::Text => self.text.clone(),
            Format::Machine => serde_json::to_string(&self.machine).expect("json value serializes"),
        };
        if !s.ends_with('\n') {
            s.push('\n');
        }
        s
    }
}

pub const OUT_ENV: &str = "THUNDERDOME_OUT";

impl Cli {
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("thunderdome-out"))
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Sim(a) => cmd_sim(a, &cli.out_dir()),
        Command::Suite(a) => cmd_suite(a),
        Command::Game(a) => cmd_game(&a.game),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Dump(a) => cmd_dump(a),
    }
}

/// A library scenario by name, otherwise a scenario file.
pub fn load_scenario(spec: &str) -> Result<ScenarioConfig> {
    if let Some(cfg) = library::by_name(spec) {
        return Ok(cfg);
    }
    let path = Path::new(spec);
    if !path.exists() {
        bail!("no library scenario or file named {spec:?}");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ScenarioConfig::from_toml(&text).with_context(|| format!("scenario file {}", path.display()))
}

pub fn simulate(cfg: &ScenarioConfig) -> Result<(Engine, ExecutionReport)> {
    let mut ec = cfg.engine_config()?;
    ec.keep_trace_lines = true;
    let mut e = Engine::new(ec);
    e.run();
    let r = build_report(cfg, &e);
    Ok((e, r))
}

fn cmd_sim(a: &SimArgs, out: &Path) -> Result<Outcome> {
    let mut cfg = load_scenario(&a.scenario)?;
    cfg.seed = a.seed;
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if a.ablate == Some(Ablation::CrossCheck) {
        cfg.cross_check = false;
    }
    cfg.validate()?;
    let (engine, report) = simulate(&cfg)?;
    let checks = evaluate(&report);
    let passed = checks.iter().all(|c| c.passed);

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let stem = format!("{}-{}", if cfg.name.is_empty() { "scenario" } else { &cfg.name }, cfg.seed);
    let report_path = out.join(format!("{stem}.json"));
    let trace_path = out.join(format!("{stem}.trace"));
    fs::write(&report_path, serde_json::to_string_pretty(&report)? + "\n")?;
    let mut trace = engine.trace().lines().join("\n");
    trace.push('\n');
    fs::write(&trace_path, trace)?;

    let mut text = format!(
        "scenario {} seed {} hops {} f {}: {} steps, trace {}\n",
        report.name, report.seed, report.hops, report.f, report.steps, report.trace_digest
    );
    for c in &checks {
        text += &format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    text += &format!("report {}\ntrace {}\n", report_path.display(), trace_path.display());
    let machine = json!({
        "command": "sim",
        "scenario": report.name,
        "seed": report.seed,
        "passed": passed,
        "checks": checks,
        "report": report_path,
        "trace": trace_path,
    });
    Ok(Outcome { passed, text, machine })
}

fn suite_json(r: &suites::SuiteReport) -> Value {
    json!({
        "name": r.name,
        "runs": r.runs,
        "passed": r.all_passed(),
        "security_failures": r.security_failures,
        "liveness_failures": r.liveness_failures,
        "same_state_failures": r.same_state_failures,
        "conservation_failures": r.conservation_failures,
        "cases": r.cases.len(),
        "patterns": r.patterns.len(),
    })
}

fn cmd_suite(a: &SuiteArgs) -> Result<Outcome> {
    if a.ablate.is_some() && a.kind != SuiteKind::SameState {
        bail!("--ablate only applies to the same-state suite");
    }
    let reports: Vec<suites::SuiteReport> = match a.kind {
        SuiteKind::SameState => {
            vec![suites::same_state_suite_on(a.hops, a.f, a.runs, a.seed, a.ablate.is_none())]
        }
        SuiteKind::Security => vec![suites::security_suite(a.hops, a.f, a.runs, a.seed)],
        SuiteKind::Liveness => {
            a.horizon.iter().map(|&h| suites::liveness_suite(a.hops, a.f, h, a.runs, a.seed)).collect()
        }
    };
    let mut passed = reports.iter().all(|r| r.all_passed());
    let mut text: String = reports.iter().map(|r| r.summary() + "\n").collect();
    let mut differing = Vec::new();
    for r in &reports[1..] {
        differing.extend(suites::outcome_differences(&reports[0], r));
    }
    differing.sort_unstable();
    differing.dedup();
    if reports.len() > 1 {
        text += &format!("outcome differences across horizons: {}\n", differing.len());
        passed &= differing.is_empty();
    }
    let machine = json!({
        "command": "suite",
        "passed": passed,
        "suites": reports.iter().map(suite_json).collect::<Vec<_>>(),
        "outcome_differences": differing,
    });
    Ok(Outcome { passed, text, machine })
}

fn describe_solution(g: &Efg, sol: &Solution) -> Vec<String> {
    sol.profiles
        .iter()
        .zip(&sol.values)
        .map(|(s, v)| {
            let v: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("{} -> ({})", g.describe(s), v.join(", "))
        })
        .collect()
}

fn check_line(text: &mut String, checks: &mut Vec<Value>, name: &str, passed: bool) {
    *text += &format!("{} {name}\n", if passed { "PASS" } else { "FAIL" });
    checks.push(json!({ "name": name, "passed": passed }));
}

fn oracle_check(g: &Efg, sol: &Solution, text: &mut String, checks: &mut Vec<Value>) -> Result<bool> {
    let brute = gt::brute_force_spne(g).context("brute-force oracle")?;
    let ok = brute == *sol;
    check_line(text, checks, "brute_force_agrees", ok);
    Ok(ok)
}

fn cmd_game(game: &Game) -> Result<Outcome> {
    let mut text = String::new();
    let mut checks = Vec::new();
    let mut passed = true;
    let mut machine = serde_json::Map::new();
    match game {
        Game::Closing { knows, params } => {
            let p = params.params()?;
            let g = gt::build_closing_game(&p, *knows)?;
            let sol = gt::equilibria(&g)?;
            text += &format!(
                "closing game, counterparty {} the latest state\n",
                if *knows { "knows" } else { "does not know" }
            );
            text += &g.render();
            if !knows {
                let nfg = gt::to_nfg(&g);
                text += "\nstrategic form\n";
                text += &nfg.table();
                machine.insert("table".into(), json!(nfg.table()));
            }
            text += "\nequilibria\n";
            let eq = describe_solution(&g, &sol);
            for line in &eq {
                text += &format!("  {line}\n");
            }
            machine.insert("equilibria".into(), json!(eq));
            if *knows {
                let robust = gt::undominated_at_root(&g, &sol);
                let r = describe_solution(&g, &robust);
                text += "not weakly dominated at the root\n";
                for line in &r {
                    text += &format!("  {line}\n");
                }
                machine.insert("undominated".into(), json!(r));
            }
            let secure = gt::check_security(&p)?;
            check_line(&mut text, &mut checks, "closing_security", secure);
            passed &= secure;
            if params.brute_force {
                passed &= oracle_check(&g, &sol, &mut text, &mut checks)?;
            }
        }
        Game::Subgame1 { sweep, seed, d_exceeds_collateral, params } => {
            let mut p = params.params()?;
            if *d_exceeds_collateral {
                p.d = (p.f as i64 + 1) * p.c + 1;
                p.v = p.v.max(p.d);
                p.eps = p.eps.min(p.d - 1);
            }
            if let Some(n) = sweep {
                let verdicts = gt::sweep(Region::Security, p.f, *n, *seed)?;
                let ok = verdicts.iter().filter(|v| v.bloc_latest && v.secure).count();
                text += &format!("regime holds: {ok}/{n}\n");
                machine.insert("regime_holds".into(), json!(ok));
                machine.insert("samples".into(), json!(n));
                let all = ok == *n;
                check_line(&mut text, &mut checks, "bloc_publishes_latest", all);
                passed &= all;
            } else {
                let g = gt::build_subgame1(&p)?;
                let sol = subgame1_equilibria(&p)?;
                text += &format!(
                    "unilateral closing, f={} c={} d={} v={} ({})\n",
                    p.f,
                    p.c,
                    p.d,
                    p.v,
                    if p.in_security_regime() {
                        "security regime"
                    } else if p.fraud_pays() {
                        "fraud outweighs collateral"
                    } else {
                        "outside both regions"
                    }
                );
                text += &g.render();
                text += "\nequilibria\n";
                let eq = describe_solution(&g, &sol);
                for line in &eq {
                    text += &format!("  {line}\n");
                }
                machine.insert("equilibria".into(), json!(eq));
                let cheating = gt::cheating_equilibrium(&p)?;
                text += &format!("cheating equilibrium: {}\n", if cheating { "yes" } else { "no" });
                machine.insert("cheating".into(), json!(cheating));
                if p.in_security_regime() {
                    let ok = gt::bloc_publishes_latest(&p)?;
                    check_line(&mut text, &mut checks, "bloc_publishes_latest", ok);
                    passed &= ok;
                } else if p.fraud_pays() {
                    check_line(&mut text, &mut checks, "fraud_admits_cheating", cheating);
                    passed &= cheating;
                }
                if params.brute_force {
                    passed &= oracle_check(&g, &sol, &mut text, &mut checks)?;
                }
            }
        }
        Game::Opening { params } => {
            let p = params.params()?;
            for d in 0..=2 * p.v {
                let o = gt::opening_outcome(&p, d);
                text += &format!(
                    "d'={d:<4} alice {:>5} ingrid {:>5}{}\n",
                    o.alice_worst,
                    o.ingrid_worst,
                    if d == p.d { "  (consistent)" } else { "" }
                );
            }
            let ok = gt::check_opening_game(&p)?;
            check_line(&mut text, &mut checks, "inconsistent_opening_hurts_a_colluder", ok);
            passed &= ok;
        }
    }
    machine.insert("command".into(), json!("game"));
    machine.insert("passed".into(), json!(passed));
    machine.insert("checks".into(), json!(checks));
    Ok(Outcome { passed, text, machine: Value::Object(machine) })
}

fn cmd_sweep(a: &SweepArgs) -> Result<Outcome> {
    let jobs: Vec<(Region, u32)> = a.f.iter().flat_map(|&f| [(Region::Security, f), (Region::FraudPays, f)]).collect();
    let results: Vec<(Region, u32, Vec<gt::Verdict>)> = jobs
        .par_iter()
        .map(|&(region, f)| {
            let seed = a.seed ^ ((f as u64) << 8) ^ (region as u64);
            gt::sweep(region, f, a.runs as usize, seed).map(|v| (region, f, v))
        })
        .collect::<Result<_, _>>()?;
    let mut text = String::new();
    let mut rows = Vec::new();
    let mut passed = true;
    for (region, f, verdicts) in &results {
        let n = verdicts.len();
        let count = |pred: fn(&gt::Verdict) -> bool| verdicts.iter().filter(|v| pred(v)).count();
        let conform = count(gt::Verdict::conforms);
        let row = json!({
            "region": format!("{region:?}"),
            "f": f,
            "samples": n,
            "conforming": conform,
            "secure": count(|v| v.secure),
            "cheating": count(|v| v.cheating),
            "oracles_agree": count(|v| v.oracles_agree),
            "knowledge_deters": count(|v| v.knowledge_deters),
            "opening_safe": count(|v| v.opening_safe),
        });
        text += &format!(
            "{region:?} f={f}: conforming {conform}/{n}, secure {}, cheating {}, oracles agree {}\n",
            row["secure"], row["cheating"], row["oracles_agree"]
        );
        passed &= conform == n;
        rows.push(row);
    }
    let machine = json!({ "command": "sweep", "passed": passed, "rows": rows });
    Ok(Outcome { passed, text, machine })
}

fn cmd_dump(a: &DumpArgs) -> Result<Outcome> {
    let cfgs = match &a.scenario {
        Some(s) => vec![load_scenario(s)?],
        None => library::all(),
    };
    let text = if a.list {
        cfgs.iter().map(|c| format!("{}\n", c.name)).collect()
    } else {
        cfgs.iter().map(|c| format!("# {}\n{}", c.name, c.to_toml())).collect::<Vec<_>>().join("\n")
    };
    let machine = json!({
        "command": "dump",
        "passed": true,
        "scenarios": cfgs.iter().map(|c| json!({ "name": c.name, "toml": c.to_toml() })).collect::<Vec<_>>(),
    });
    Ok(Outcome { passed: true, text, machine })
}

/// Process exit code for a finished command.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(o) if o.passed => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}
