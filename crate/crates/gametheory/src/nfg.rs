use std::fmt::Write as _;

use itertools::Itertools;

use crate::efg::{Efg, JointStrategy, Payoff};

/// A pure strategy of one player: an action for each of its information sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PureStrategy {
    pub label: String,
    /// `(infoset index, action index)` pairs.
    pub choices: Vec<(usize, usize)>,
}

/// Strategic form of a finite game. Payoffs are stored row-major over the
/// players' strategy lists.
#[derive(Clone, Debug)]
pub struct Nfg {
    pub players: Vec<String>,
    pub strategies: Vec<Vec<PureStrategy>>,
    payoffs: Vec<Vec<Payoff>>,
}

impl Nfg {
    fn index(&self, profile: &[usize]) -> usize {
        profile.iter().zip(&self.strategies).fold(0, |acc, (&s, list)| acc * list.len() + s)
    }

    pub fn payoff(&self, profile: &[usize]) -> &[Payoff] {
        &self.payoffs[self.index(profile)]
    }

    pub fn strategy_index(&self, player: usize, label: &str) -> Option<usize> {
        self.strategies[player].iter().position(|s| s.label == label)
    }

    /// Payoff at the profile named by strategy labels.
    pub fn payoff_by_label(&self, labels: &[&str]) -> Option<&[Payoff]> {
        let profile: Option<Vec<usize>> = labels.iter().enumerate().map(|(p, l)| self.strategy_index(p, l)).collect();
        Some(self.payoff(&profile?))
    }

    pub fn profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.strategies.iter().map(|l| 0..l.len()).multi_cartesian_product()
    }

    pub fn label(&self, profile: &[usize]) -> Vec<&str> {
        profile.iter().enumerate().map(|(p, &s)| self.strategies[p][s].label.as_str()).collect()
    }

    /// The joint strategy of `g` that `profile` stands for.
    pub fn joint(&self, g: &Efg, profile: &[usize]) -> JointStrategy {
        let mut js = vec![0; g.infosets().len()];
        for (p, &s) in profile.iter().enumerate() {
            for &(set, a) in &self.strategies[p][s].choices {
                js[set] = a;
            }
        }
        JointStrategy(js)
    }

    /// `s` is never worse than `t` for `player` and strictly better somewhere.
    pub fn weakly_dominates(&self, player: usize, s: usize, t: usize) -> bool {
        let mut strict = false;
        for mut prof in self.profiles().filter(|p| p[player] == 0) {
            prof[player] = s;
            let a = self.payoff(&prof)[player];
            prof[player] = t;
            let b = self.payoff(&prof)[player];
            if a < b {
                return false;
            }
            strict |= a > b;
        }
        strict
    }

    /// Two-player matrix, rows for player 0.
    pub fn table(&self) -> String {
        let mut out = String::new();
        if self.players.len() != 2 {
            let _ = writeln!(out, "{}", self.players.join(" x "));
            for p in self.profiles() {
                let v = self.payoff(&p).iter().join(", ");
                let _ = writeln!(out, "{} | ({v})", self.label(&p).join(", "));
            }
            return out;
        }
        let cells: Vec<Vec<String>> = (0..self.strategies[0].len())
            .map(|r| {
                (0..self.strategies[1].len()).map(|c| format!("({})", self.payoff(&[r, c]).iter().join(", "))).collect()
            })
            .collect();
        let head = format!("{} \\ {}", self.players[0], self.players[1]);
        let w0 = self.strategies[0].iter().map(|s| s.label.len()).chain([head.len()]).max().unwrap_or(0);
        let widths: Vec<usize> = (0..self.strategies[1].len())
            .map(|c| cells.iter().map(|row| row[c].len()).chain([self.strategies[1][c].label.len()]).max().unwrap_or(0))
            .collect();
        let _ = write!(out, "{head:w0$}");
        for (c, s) in self.strategies[1].iter().enumerate() {
            let _ = write!(out, " | {:w$}", s.label, w = widths[c]);
        }
        out.push('\n');
        for (r, s) in self.strategies[0].iter().enumerate() {
            let _ = write!(out, "{:w0$}", s.label);
            for (c, cell) in cells[r].iter().enumerate() {
                let _ = write!(out, " | {:w$}", cell, w = widths[c]);
            }
            out.push('\n');
        }
        out
    }
}

/// Strategic form of `g` over information-set-measurable pure strategies.
/// A player without moves gets the single strategy `-`.
pub fn to_nfg(g: &Efg) -> Nfg {
    let n = g.players().len();
    let strategies: Vec<Vec<PureStrategy>> = (0..n)
        .map(|p| {
            let sets: Vec<usize> = (0..g.infosets().len()).filter(|&s| g.infosets()[s].player == p).collect();
            if sets.is_empty() {
                return vec![PureStrategy { label: "-".into(), choices: Vec::new() }];
            }
            sets.iter()
                .map(|&s| 0..g.infosets()[s].actions.len())
                .multi_cartesian_product()
                .map(|acts| {
                    let choices: Vec<(usize, usize)> = sets.iter().copied().zip(acts).collect();
                    let label = if choices.len() == 1 {
                        let (s, a) = choices[0];
                        g.infosets()[s].actions[a].clone()
                    } else {
                        choices
                            .iter()
                            .map(|&(s, a)| format!("{}:{}", g.infosets()[s].label, g.infosets()[s].actions[a]))
                            .join(" ")
                    };
                    PureStrategy { label, choices }
                })
                .collect()
        })
        .collect();
    let mut nfg = Nfg { players: g.players().to_vec(), strategies, payoffs: Vec::new() };
    let payoffs = nfg.profiles().map(|p| g.outcome(&nfg.joint(g, &p)).to_vec()).collect();
    nfg.payoffs = payoffs;
    nfg
}

/// Cells where no player gains by a unilateral switch.
pub fn pure_nash(nfg: &Nfg) -> Vec<Vec<usize>> {
    nfg.profiles()
        .filter(|prof| {
            let here = nfg.payoff(prof);
            (0..nfg.players.len()).all(|p| {
                let mut alt = prof.clone();
                (0..nfg.strategies[p].len()).all(|s| {
                    alt[p] = s;
                    nfg.payoff(&alt)[p] <= here[p]
                })
            })
        })
        .collect()
}
