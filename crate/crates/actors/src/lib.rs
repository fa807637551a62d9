//! Parties and wardens as message-driven state machines, and the engine that
//! runs them against the simulated network and chain.
//!
//! Actors never touch the network or the ledger directly. Each handler gets a
//! [`Ctx`], pushes messages and transactions into it, and the [`Engine`]
//! schedules them. Stages run in order; a stage ends when the network is
//! quiet and no actor's idle handler wants to act.

mod behavior;
mod ctx;
mod engine;
mod msg;
mod party;
mod topology;
mod warden;

pub use behavior::{Activation, PartyBehavior, SplitMode, Stage, WardenBehavior};
pub use ctx::Ctx;
pub use engine::{Engine, EngineConfig, RunReport};
pub use msg::{Msg, Purpose};
pub use party::{PartyActor, PcView};
pub use topology::{Topology, VC_ID};
pub use warden::WardenActor;
