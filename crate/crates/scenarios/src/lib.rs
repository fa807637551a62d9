//! Scenario files, a library of canned runs, randomized suites and the
//! property checks applied to each finished run.

mod checks;
mod config;
mod entitlement;
mod report;

pub use checks::{
    check_balance_security, check_conservation, check_liveness, check_same_state, count_onchain_txs, evaluate,
    CheckResult,
};
pub use config::{
    ActorRef, CensorEntry, ConfigError, DropEntry, ModeName, PartyEntry, PartySpec, ScenarioConfig, StageName,
    WardenEntry, WardenSpec, When, SCHEMA_VERSION, STEPS_PER_HORIZON,
};
pub use entitlement::{announcement_log, entitled_end};
pub use report::{
    build_report, run_engine, run_scenario, ActorOutcome, ContractOutcome, ExecutionReport, MessageCounts, Role,
    StateSummary, TxCount,
};

pub mod library;
pub mod sampler;
pub mod suites;
