use std::fs;
use std::process::Command;

use clap::Parser;
use thunderdome_cli::{exit_code, run, Cli, Format};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_thunderdome"))
}

fn parse(args: &[&str]) -> Cli {
    Cli::try_parse_from(std::iter::once("thunderdome").chain(args.iter().copied())).unwrap()
}

#[test]
fn sim_requires_a_seed() {
    let err = Cli::try_parse_from(["thunderdome", "sim", "--scenario", "honest"]).err().unwrap();
    assert!(err.to_string().contains("--seed"));
    let out = bin().args(["sim", "--scenario", "honest"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sim_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cli = parse(&["--out", out, "sim", "--scenario", "collusion_double_state", "--seed", "7"]);
    let res = run(&cli);
    assert_eq!(exit_code(&res), 0);
    let text = res.unwrap().render(Format::Text);
    assert!(text.contains("PASS same_state"), "{text}");
    let report = fs::read_to_string(dir.path().join("collusion_double_state-7.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["seed"], 7);
    let trace = fs::read_to_string(dir.path().join("collusion_double_state-7.trace")).unwrap();
    assert!(trace.ends_with('\n') && trace.lines().count() > 1);
}

#[test]
fn same_seed_gives_the_same_trace() {
    let dir = tempfile::tempdir().unwrap();
    let digest = |sub: &str| {
        let out = dir.path().join(sub);
        let cli = parse(&[
            "--format",
            "machine",
            "--out",
            out.to_str().unwrap(),
            "sim",
            "--scenario",
            "offline_bob",
            "--seed",
            "3",
        ]);
        run(&cli).unwrap();
        fs::read_to_string(out.join("offline_bob-3.trace")).unwrap()
    };
    assert_eq!(digest("a"), digest("b"));
}

#[test]
fn ablation_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "sim", "--scenario", "collusion_double_state", "--seed", "7"])
        .args(["--ablate", "cross-check"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("FAIL same_state"), "{stdout}");
}

#[test]
fn malformed_scenario_names_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "name = \"bad\"\nseed = 1\nhops = \"two\"\n").unwrap();
    let out = bin()
        .args(["--out", dir.path().to_str().unwrap(), "sim", "--seed", "1", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("bad.toml"), "{stderr}");
    assert!(stderr.contains("hops"), "{stderr}");
    assert!(stderr.contains("line 3"), "{stderr}");
}

#[test]
fn unknown_scenario_is_an_error() {
    let res = run(&parse(&["sim", "--scenario", "no_such_thing", "--seed", "1"]));
    assert_eq!(exit_code(&res), 2);
}

#[test]
fn machine_output_is_one_json_line() {
    let out = bin().args(["--format", "machine", "game", "closing", "--knows=false"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(s.ends_with('\n'));
    assert_eq!(s.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(s.trim_end()).unwrap();
    assert_eq!(v["passed"], true);
}

#[test]
fn closing_game_lists_old_ignore() {
    let res = run(&parse(&["game", "closing", "--knows=false"])).unwrap();
    assert!(res.passed);
    let text = res.render(Format::Text);
    assert!(text.contains("Ignore"), "{text}");
    assert!(text.contains("Old"), "{text}");
}

#[test]
fn fraud_pays_flag_reports_cheating() {
    let res = run(&parse(&["game", "subgame1", "--d-exceeds-collateral"])).unwrap();
    assert!(res.passed);
    assert!(res.render(Format::Text).contains("cheating equilibrium: yes"));
}

#[test]
fn invalid_params_are_rejected() {
    let res = run(&parse(&["game", "closing", "--alpha", "2", "--eps", "2"]));
    assert_eq!(exit_code(&res), 2);
}

#[test]
fn small_suite_passes() {
    let res = run(&parse(&["suite", "security", "--runs", "12", "--seed", "1", "--f", "1"]));
    assert_eq!(exit_code(&res), 0);
}

#[test]
fn dump_round_trips_through_sim() {
    let dir = tempfile::tempdir().unwrap();
    let res = run(&parse(&["--format", "machine", "dump", "--scenario", "honest"])).unwrap();
    let toml = res.machine["scenarios"][0]["toml"].as_str().unwrap().to_string();
    let path = dir.path().join("honest.toml");
    fs::write(&path, toml).unwrap();
    let cli =
        parse(&["--out", dir.path().to_str().unwrap(), "sim", "--seed", "5", "--scenario", path.to_str().unwrap()]);
    assert_eq!(exit_code(&run(&cli)), 0);
}
