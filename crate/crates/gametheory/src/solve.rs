use std::collections::BTreeSet;

use itertools::Itertools;

use crate::efg::{Efg, JointStrategy, Node, NodeId, Payoff};
use crate::nfg::{pure_nash, to_nfg};
use crate::GameError;

/// Largest joint-strategy space the brute-force oracle enumerates.
pub const BRUTE_FORCE_CAP: u128 = 1_000_000;

/// Bound on the partial equilibria kept per subtree during backward
/// induction; tie-heavy games beyond it are refused rather than truncated.
const BI_CAP: usize = 1_000_000;

/// Pure equilibria of a game, each with its outcome.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    pub profiles: Vec<JointStrategy>,
    pub values: Vec<Vec<Payoff>>,
}

impl Solution {
    fn from_profiles(g: &Efg, mut profiles: Vec<JointStrategy>) -> Solution {
        profiles.sort();
        profiles.dedup();
        let values = profiles.iter().map(|s| g.outcome(s).to_vec()).collect();
        Solution { profiles, values }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Distinct outcome vectors.
    pub fn distinct_values(&self) -> BTreeSet<Vec<Payoff>> {
        self.values.iter().cloned().collect()
    }

    pub fn as_set(&self) -> BTreeSet<JointStrategy> {
        self.profiles.iter().cloned().collect()
    }
}

type Partial = Vec<(usize, usize)>;

/// All pure subgame-perfect equilibria of a perfect-information game. At
/// every node each maximizing action is kept, so ties yield several profiles.
pub fn backward_induction(g: &Efg) -> Result<Solution, GameError> {
    if !g.is_perfect_information() {
        return Err(GameError::ImperfectInformation);
    }
    let parts = solve_node(g, 0)?;
    let profiles = parts
        .into_iter()
        .map(|(part, _)| {
            let mut js = vec![0; g.infosets().len()];
            for (set, a) in part {
                js[set] = a;
            }
            JointStrategy(js)
        })
        .collect();
    Ok(Solution::from_profiles(g, profiles))
}

fn solve_node(g: &Efg, n: NodeId) -> Result<Vec<(Partial, Vec<Payoff>)>, GameError> {
    let (set, children) = match &g.nodes()[n] {
        Node::Terminal { payoff } => return Ok(vec![(Vec::new(), payoff.clone())]),
        Node::Decision { infoset, children } => (*infoset, children),
    };
    let player = g.infosets()[set].player;
    let subs: Vec<Vec<(Partial, Vec<Payoff>)>> =
        children.iter().map(|&c| solve_node(g, c)).collect::<Result<_, _>>()?;
    let combos: usize = subs.iter().map(Vec::len).product();
    if combos > BI_CAP {
        return Err(GameError::TooLarge(combos as u128));
    }
    let mut out = Vec::new();
    for pick in subs.iter().map(|s| s.iter()).multi_cartesian_product() {
        let best = pick.iter().map(|(_, v)| v[player]).max().expect("at least one action");
        let merged: Partial = pick.iter().flat_map(|(p, _)| p.iter().copied()).collect();
        for (a, (_, v)) in pick.iter().enumerate() {
            if v[player] == best {
                let mut part = merged.clone();
                part.push((set, a));
                out.push((part, v.clone()));
            }
        }
    }
    Ok(out)
}

/// Exhaustive equilibrium oracle. For perfect information it keeps joint
/// strategies that are Nash in every subgame; otherwise the Nash equilibria
/// of the whole game.
pub fn brute_force_spne(g: &Efg) -> Result<Solution, GameError> {
    let total = g.joint_strategy_count();
    if total > BRUTE_FORCE_CAP {
        return Err(GameError::TooLarge(total));
    }
    let sizes: Vec<usize> = g.infosets().iter().map(|s| s.actions.len()).collect();
    let perfect = g.is_perfect_information();
    let decisions: Vec<NodeId> =
        (0..g.nodes().len()).filter(|&n| matches!(g.nodes()[n], Node::Decision { .. })).collect();
    if sizes.is_empty() {
        return Ok(Solution::from_profiles(g, vec![JointStrategy(Vec::new())]));
    }
    let mut found = Vec::new();
    for choice in sizes.iter().map(|&k| 0..k).multi_cartesian_product() {
        let js = JointStrategy(choice);
        let ok =
            if perfect { decisions.iter().all(|&h| is_nash_at(g, h, &js)) } else { is_nash_by_enumeration(g, &js) };
        if ok {
            found.push(js);
        }
    }
    Ok(Solution::from_profiles(g, found))
}

/// No player gains in the subgame at `h` by changing its own choices there.
fn is_nash_at(g: &Efg, h: NodeId, js: &JointStrategy) -> bool {
    let here = g.outcome_from(h, js);
    (0..g.players().len()).all(|p| best_response(g, h, p, js) <= here[p])
}

/// Best value `p` can reach from `n` when everyone else follows `js`.
fn best_response(g: &Efg, n: NodeId, p: usize, js: &JointStrategy) -> Payoff {
    match &g.nodes()[n] {
        Node::Terminal { payoff } => payoff[p],
        Node::Decision { infoset, children } => {
            if g.infosets()[*infoset].player == p {
                children.iter().map(|&c| best_response(g, c, p, js)).max().expect("non-empty")
            } else {
                best_response(g, children[js.0[*infoset]], p, js)
            }
        }
    }
}

fn is_nash_by_enumeration(g: &Efg, js: &JointStrategy) -> bool {
    let here = g.outcome(js);
    (0..g.players().len()).all(|p| {
        let own: Vec<usize> = (0..g.infosets().len()).filter(|&s| g.infosets()[s].player == p).collect();
        own.iter().map(|&s| 0..g.infosets()[s].actions.len()).multi_cartesian_product().all(|acts| {
            let mut alt = js.clone();
            for (&s, a) in own.iter().zip(acts) {
                alt.0[s] = a;
            }
            g.outcome(&alt)[p] <= here[p]
        })
    })
}

/// Pure Nash equilibria through the strategic form, as joint strategies.
pub fn nash_via_nfg(g: &Efg) -> Solution {
    let nfg = to_nfg(g);
    let profiles = pure_nash(&nfg).iter().map(|p| nfg.joint(g, p)).collect();
    Solution::from_profiles(g, profiles)
}

/// Equilibrium solver matched to the information structure of `g`.
pub fn equilibria(g: &Efg) -> Result<Solution, GameError> {
    if g.is_perfect_information() {
        backward_induction(g)
    } else {
        Ok(nash_via_nfg(g))
    }
}

/// Drops equilibria whose root action is weakly dominated for the root mover
/// across the continuation profiles that occur in `sol`.
pub fn undominated_at_root(g: &Efg, sol: &Solution) -> Solution {
    let Node::Decision { infoset: root, .. } = &g.nodes()[0] else {
        return sol.clone();
    };
    let mover = g.infosets()[*root].player;
    let k = g.infosets()[*root].actions.len();
    let conts: BTreeSet<JointStrategy> = sol
        .profiles
        .iter()
        .map(|s| {
            let mut c = s.clone();
            c.0[*root] = 0;
            c
        })
        .collect();
    let value = |a: usize, c: &JointStrategy| {
        let mut s = c.clone();
        s.0[*root] = a;
        g.outcome(&s)[mover]
    };
    let dominated = |a: usize| {
        (0..k).any(|b| {
            b != a
                && conts.iter().all(|c| value(b, c) >= value(a, c))
                && conts.iter().any(|c| value(b, c) > value(a, c))
        })
    };
    let keep: Vec<JointStrategy> = sol.profiles.iter().filter(|s| !dominated(s.0[*root])).cloned().collect();
    Solution::from_profiles(g, keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efg::{int, Tree};

    fn leaf(a: i64, b: i64) -> Tree {
        Tree::Leaf(vec![int(a), int(b)])
    }

    #[test]
    fn single_leaf_is_its_own_equilibrium() {
        let g = Efg::from_tree(&["X"], Tree::Leaf(vec![int(5)])).unwrap();
        let s = backward_induction(&g).unwrap();
        assert_eq!(s.values, vec![vec![int(5)]]);
        assert_eq!(brute_force_spne(&g).unwrap(), s);
    }

    #[test]
    fn ties_are_kept() {
        let g = Efg::from_tree(&["X", "Y"], Tree::node(0, vec![("a".into(), leaf(1, 0)), ("b".into(), leaf(1, 5))]))
            .unwrap();
        let s = backward_induction(&g).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(brute_force_spne(&g).unwrap(), s);
    }

    #[test]
    fn empty_threat_is_not_subgame_perfect() {
        // Entry game: the fight threat is a Nash equilibrium but not perfect.
        let g = Efg::from_tree(
            &["E", "M"],
            Tree::node(
                0,
                vec![
                    ("out".into(), leaf(0, 2)),
                    ("in".into(), Tree::node(1, vec![("fight".into(), leaf(-1, -1)), ("share".into(), leaf(1, 1))])),
                ],
            ),
        )
        .unwrap();
        let bi = backward_induction(&g).unwrap();
        assert_eq!(bi.len(), 1);
        assert_eq!(g.path(&bi.profiles[0]), vec!["in", "share"]);
        assert_eq!(brute_force_spne(&g).unwrap(), bi);
        assert_eq!(nash_via_nfg(&g).len(), 2);
    }

    #[test]
    fn imperfect_information_is_refused() {
        let g = Efg::from_tree(
            &["X", "Y"],
            Tree::node(
                0,
                vec![
                    ("l".into(), Tree::in_set(1, "y", vec![("a".into(), leaf(0, 0))])),
                    ("r".into(), Tree::in_set(1, "y", vec![("a".into(), leaf(0, 0))])),
                ],
            ),
        )
        .unwrap();
        assert!(matches!(backward_induction(&g), Err(GameError::ImperfectInformation)));
    }

    #[test]
    fn dominated_root_action_is_dropped() {
        // Y is indifferent after "b"; "b" is at least as good for X either way.
        let g = Efg::from_tree(
            &["X", "Y"],
            Tree::node(
                0,
                vec![
                    ("a".into(), leaf(1, 0)),
                    ("b".into(), Tree::node(1, vec![("p".into(), leaf(2, 0)), ("q".into(), leaf(1, 0))])),
                ],
            ),
        )
        .unwrap();
        let all = backward_induction(&g).unwrap();
        assert_eq!(all.len(), 3);
        let kept = undominated_at_root(&g, &all);
        assert_eq!(kept.len(), 2);
        assert!(kept.profiles.iter().all(|s| s.0[0] == 1));
    }
}
