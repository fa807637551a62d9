//! The closing games: the unilateral-closing subgame between a closer and the
//! warden committee, and the closing game between an end party and its
//! intermediary.

use std::collections::{BTreeMap, BTreeSet};

use thunderdome_chainsim::settlement::{fee_split, forfeits_vc, slashed_count};

use crate::efg::{int, Efg, Node, NodeId, Payoff, Tree};
use crate::params::GameParams;
use crate::solve::backward_induction;
use crate::GameError;

pub const SUBGAME1_PLAYERS: [&str; 5] = ["P", "Q", "W1", "W2", "W3"];
/// Index of the warden bloc's mover; the bloc acts on W2's utility.
pub const BLOC: usize = 3;
pub const CLOSER: usize = 0;
pub const COUNTER: usize = 1;

pub const BOB_ACTIONS: [&str; 3] = ["Uni", "Old", "New"];
pub const INGRID_ACTIONS: [&str; 3] = ["Ignore", "Agree", "Disagree"];

/// Settlement of one subgame1 history: the bloc sent `a` latest and `b`
/// outdated-but-provable publications after W1's `f` unprovable stale ones,
/// and the closer proved `proofs` frauds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subgame1Leaf {
    pub a: u32,
    pub b: u32,
    pub proofs: u32,
    pub slashed: u32,
    pub forfeited: bool,
    /// The outdated state is what the contract pays out.
    pub stale_stands: bool,
    pub payoff: Vec<Payoff>,
}

pub fn root_label(f: u32, a: u32, b: u32) -> String {
    format!("{f}Pl,{a}Pl+{b}Po")
}

pub fn proof_label(x: u32) -> String {
    format!("PF={x}")
}

/// Payoffs of one history, priced by the contract's settlement rules.
///
/// W1 publishes first, then the bloc, and W3 stays silent, so the first
/// quorum is exactly these `2f + 1` publications. The closer's share in the
/// latest state is taken as zero, which makes forfeiting the virtual balance
/// cost it nothing and is the case most favorable to fraud. A proof carries
/// the accused warden's signature on a newer state, so any proof voids the
/// outdated closing state.
pub fn subgame1_leaf(p: &GameParams, a: u32, b: u32, proofs: u32) -> Subgame1Leaf {
    let f = p.f;
    debug_assert_eq!(a + b, f + 1);
    let quorum = 2 * f + 1;
    let slashed = slashed_count(b, proofs);
    let forfeited = forfeits_vc(f, slashed);
    let stale_stands = a == 0 && slashed == 0;

    let closer_vc = if forfeited {
        0
    } else if stale_stands {
        p.d
    } else {
        0
    };
    let counter_vc = p.v - closer_vc;

    let fee = quorum as u64 * p.k as u64;
    let split = fee_split(fee, f, (quorum - slashed) as usize);
    let per_slot = split.per_slot as i64;
    let w1_paid = split.paid.min(f as usize) as i64;
    let w2_paid = split.paid as i64 - w1_paid;

    let payoff = vec![
        int(p.alpha + closer_vc + slashed as i64 * p.c),
        int(p.alpha + counter_vc - p.v),
        int(w1_paid * per_slot),
        int(w2_paid * per_slot - slashed as i64 * p.c),
        int(0),
    ];
    Subgame1Leaf { a, b, proofs, slashed, forfeited, stale_stands, payoff }
}

/// Unilateral closing by `P`: the bloc picks how many of its `f + 1`
/// publications are outdated, then `P` picks how many frauds to prove.
pub fn build_subgame1(p: &GameParams) -> Result<Efg, GameError> {
    p.validate()?;
    let f = p.f;
    let actions = (0..=f + 1)
        .map(|b| {
            let a = f + 1 - b;
            let proofs = (0..=b).map(|x| (proof_label(x), Tree::Leaf(subgame1_leaf(p, a, b, x).payoff))).collect();
            (root_label(f, a, b), Tree::node(CLOSER, proofs))
        })
        .collect();
    Efg::from_tree(&SUBGAME1_PLAYERS, Tree::node(BLOC, actions))
}

/// `(outdated publications, proofs)` along the equilibrium path of `s`.
pub fn subgame1_path(g: &Efg, s: &crate::JointStrategy) -> (u32, u32) {
    let path = g.path(s);
    let b = path[0].rsplit('+').next().and_then(|t| t.trim_end_matches("Po").parse().ok()).unwrap_or(0);
    let x = path[1].trim_start_matches("PF=").parse().unwrap_or(0);
    (b, x)
}

/// Distinct `(closer, counterparty)` values over the subgame's equilibria.
pub fn subgame1_values(p: &GameParams) -> Result<Vec<(Payoff, Payoff)>, GameError> {
    let g = build_subgame1(p)?;
    let sol = backward_induction(&g)?;
    let set: BTreeSet<(Payoff, Payoff)> = sol.values.iter().map(|v| (v[CLOSER], v[COUNTER])).collect();
    Ok(set.into_iter().collect())
}

/// Closing game with the unilateral branches worth `sub` before the closing
/// cost. `sub` is `(closer, counterparty)` of the unilateral subgame.
pub fn closing_game_with(p: &GameParams, knows: bool, sub: (Payoff, Payoff)) -> Result<Efg, GameError> {
    p.validate()?;
    let eps = int(p.eps);
    let (alpha, d) = (int(p.alpha), int(p.d));
    let bob_closes = vec![sub.0 - eps, sub.1];
    let ingrid_closes = vec![sub.1, sub.0 - eps];
    let ingrid = |after: &str, agree: Vec<Payoff>| {
        let label = if knows { after } else { "Old|New" };
        Tree::in_set(
            1,
            label,
            vec![
                ("Ignore".into(), Tree::Leaf(bob_closes.clone())),
                ("Agree".into(), Tree::Leaf(agree)),
                ("Disagree".into(), Tree::Leaf(ingrid_closes.clone())),
            ],
        )
    };
    let root = Tree::node(
        0,
        vec![
            ("Uni".into(), Tree::Leaf(bob_closes.clone())),
            ("Old".into(), ingrid("Old", vec![alpha + d, alpha - d])),
            ("New".into(), ingrid("New", vec![alpha, alpha])),
        ],
    );
    Efg::from_tree(&["Bob", "Ingrid"], root)
}

/// Bob's closing game. When the unilateral subgame has several equilibrium
/// values the one worst for the counterparty is used; [`closing_games`]
/// builds one game per value.
pub fn build_closing_game(p: &GameParams, knows: bool) -> Result<Efg, GameError> {
    let values = subgame1_values(p)?;
    let worst = values.iter().min_by_key(|v| v.1).copied().expect("a finite game has an equilibrium");
    closing_game_with(p, knows, worst)
}

pub fn closing_games(p: &GameParams, knows: bool) -> Result<Vec<Efg>, GameError> {
    subgame1_values(p)?.into_iter().map(|v| closing_game_with(p, knows, v)).collect()
}

/// Closing game of the last end party on a path with `hops` payment
/// channels. Only that party and its neighbouring intermediary move; every
/// other party keeps its closing profit.
pub fn build_multihop_closing_game(p: &GameParams, hops: usize, knows: bool) -> Result<Efg, GameError> {
    if hops < 2 {
        return Err(GameError::Malformed("a virtual channel needs at least 2 hops".into()));
    }
    let two = build_closing_game(p, knows)?;
    let mut names = vec!["A".to_string()];
    names.extend((1..hops).map(|i| format!("I{i}")));
    names.push("B".into());
    let end = hops;
    let mid = hops - 1;
    let widen = |v: &[Payoff]| {
        let mut out = vec![int(p.alpha); hops + 1];
        out[end] = v[0];
        out[mid] = v[1];
        out
    };
    let tree = rebuild(&two, 0, &|pl| if pl == 0 { end } else { mid }, &widen);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    Efg::from_tree(&refs, tree)
}

fn rebuild(g: &Efg, n: NodeId, player: &dyn Fn(usize) -> usize, widen: &dyn Fn(&[Payoff]) -> Vec<Payoff>) -> Tree {
    match &g.nodes()[n] {
        Node::Terminal { payoff } => Tree::Leaf(widen(payoff)),
        Node::Decision { infoset, children } => {
            let set = &g.infosets()[*infoset];
            let actions =
                set.actions.iter().zip(children).map(|(a, &c)| (a.clone(), rebuild(g, c, player, widen))).collect();
            let info = (set.nodes.len() > 1).then(|| set.label.clone());
            Tree::Move { player: player(set.player), info, actions }
        }
    }
}

/// Same tree shape, action labels and information partition, with a
/// one-to-one map between the movers of both games under which their
/// payoffs agree at every leaf. Players that never move must have constant
/// payoffs.
pub fn structurally_isomorphic(a: &Efg, b: &Efg) -> bool {
    let mut players = BTreeMap::new();
    let mut sets = BTreeMap::new();
    let mut leaves = Vec::new();
    if !walk(a, b, 0, 0, &mut players, &mut sets, &mut leaves) {
        return false;
    }
    let injective = |m: &BTreeMap<usize, usize>| m.values().collect::<BTreeSet<_>>().len() == m.len();
    if !injective(&players) || !injective(&sets) || sets.len() != a.infosets().len() || sets.len() != b.infosets().len()
    {
        return false;
    }
    let constant = |g: &Efg, p: usize| g.terminals().map(|(_, v)| v[p]).collect::<BTreeSet<_>>().len() <= 1;
    let mapped_b: BTreeSet<usize> = players.values().copied().collect();
    leaves.iter().all(|(x, y)| players.iter().all(|(&pa, &pb)| x[pa] == y[pb]))
        && (0..a.players().len()).filter(|p| !players.contains_key(p)).all(|p| constant(a, p))
        && (0..b.players().len()).filter(|p| !mapped_b.contains(p)).all(|p| constant(b, p))
}

type LeafPair = (Vec<Payoff>, Vec<Payoff>);

fn walk(
    a: &Efg,
    b: &Efg,
    na: NodeId,
    nb: NodeId,
    players: &mut BTreeMap<usize, usize>,
    sets: &mut BTreeMap<usize, usize>,
    leaves: &mut Vec<LeafPair>,
) -> bool {
    match (&a.nodes()[na], &b.nodes()[nb]) {
        (Node::Terminal { payoff: x }, Node::Terminal { payoff: y }) => {
            leaves.push((x.clone(), y.clone()));
            true
        }
        (Node::Decision { infoset: sa, children: ca }, Node::Decision { infoset: sb, children: cb }) => {
            let (ia, ib) = (&a.infosets()[*sa], &b.infosets()[*sb]);
            if ia.actions != ib.actions || *sets.entry(*sa).or_insert(*sb) != *sb {
                return false;
            }
            if *players.entry(ia.player).or_insert(ib.player) != ib.player {
                return false;
            }
            ca.iter().zip(cb).all(|(&x, &y)| walk(a, b, x, y, players, sets, leaves))
        }
        _ => false,
    }
}

/// Two simultaneous movers with opposed interests; no pure equilibrium.
pub fn matching_pennies() -> Efg {
    let leaf = |x: i64| Tree::Leaf(vec![int(x), int(-x)]);
    let second = |same: i64| Tree::in_set(1, "guess", vec![("H".into(), leaf(same)), ("T".into(), leaf(-same))]);
    let root = Tree::node(0, vec![("H".into(), second(1)), ("T".into(), second(-1))]);
    Efg::from_tree(&["Even", "Odd"], root).expect("well-formed")
}
