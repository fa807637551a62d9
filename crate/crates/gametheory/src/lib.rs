//! Extensive-form models of channel closing.
//!
//! [`efg`] holds the game tree, [`solve`] the equilibrium solvers,
//! [`nfg`] the strategic form, [`games`] the closing games and
//! [`analysis`] the parameter checks built on them.

pub mod analysis;
pub mod efg;
pub mod games;
pub mod nfg;
pub mod params;
pub mod solve;

pub use analysis::{
    bloc_publishes_latest, cheating_equilibrium, check_opening_game, check_security, expected_warden_utility,
    knowledge_deters, opening_outcome, oracles_agree, sweep, verify, OpeningOutcome, Region, Verdict,
};
pub use efg::{int, Efg, InfoSet, JointStrategy, Node, Payoff, Tree};
pub use games::{
    build_closing_game, build_multihop_closing_game, build_subgame1, closing_game_with, closing_games,
    matching_pennies, structurally_isomorphic, subgame1_leaf, subgame1_values,
};
pub use nfg::{pure_nash, to_nfg, Nfg, PureStrategy};
pub use params::GameParams;
pub use solve::{backward_induction, brute_force_spne, equilibria, nash_via_nfg, undominated_at_root, Solution};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GameError {
    #[error("malformed game: {0}")]
    Malformed(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("backward induction needs perfect information")]
    ImperfectInformation,
    #[error("{0} joint strategies exceed the enumeration cap")]
    TooLarge(u128),
}
