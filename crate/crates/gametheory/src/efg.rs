use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::Rational64;

use crate::GameError;

pub type Payoff = Rational64;

pub fn int(x: i64) -> Payoff {
    Payoff::from_integer(x)
}

/// Recursive description of a game, turned into an [`Efg`] by
/// [`Efg::from_tree`].
#[derive(Clone, Debug)]
pub enum Tree {
    Leaf(Vec<Payoff>),
    Move {
        player: usize,
        /// Nodes sharing a label form one information set. `None` makes a
        /// singleton set.
        info: Option<String>,
        actions: Vec<(String, Tree)>,
    },
}

impl Tree {
    pub fn node(player: usize, actions: Vec<(String, Tree)>) -> Tree {
        Tree::Move { player, info: None, actions }
    }

    pub fn in_set(player: usize, info: &str, actions: Vec<(String, Tree)>) -> Tree {
        Tree::Move { player, info: Some(info.to_string()), actions }
    }
}

pub type NodeId = usize;

#[derive(Clone, Debug)]
pub enum Node {
    Decision { infoset: usize, children: Vec<NodeId> },
    Terminal { payoff: Vec<Payoff> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InfoSet {
    pub player: usize,
    pub label: String,
    pub actions: Vec<String>,
    pub nodes: Vec<NodeId>,
}

/// A finite extensive-form game. Node 0 is the root (the empty history).
#[derive(Clone, Debug)]
pub struct Efg {
    players: Vec<String>,
    nodes: Vec<Node>,
    parent: Vec<Option<(NodeId, usize)>>,
    infosets: Vec<InfoSet>,
}

/// One action index per information set, so measurability holds by
/// construction.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JointStrategy(pub Vec<usize>);

impl Efg {
    pub fn from_tree(players: &[&str], tree: Tree) -> Result<Efg, GameError> {
        if players.is_empty() {
            return Err(GameError::Malformed("no players".into()));
        }
        let mut g = Efg {
            players: players.iter().map(|s| s.to_string()).collect(),
            nodes: Vec::new(),
            parent: Vec::new(),
            infosets: Vec::new(),
        };
        let mut by_label = BTreeMap::new();
        g.add(tree, None, &mut by_label)?;
        Ok(g)
    }

    fn add(
        &mut self,
        tree: Tree,
        parent: Option<(NodeId, usize)>,
        by_label: &mut BTreeMap<String, usize>,
    ) -> Result<NodeId, GameError> {
        let id = self.nodes.len();
        self.parent.push(parent);
        match tree {
            Tree::Leaf(payoff) => {
                if payoff.len() != self.players.len() {
                    return Err(GameError::Malformed(format!(
                        "leaf has {} payoffs for {} players",
                        payoff.len(),
                        self.players.len()
                    )));
                }
                self.nodes.push(Node::Terminal { payoff });
            }
            Tree::Move { player, info, actions } => {
                if player >= self.players.len() {
                    return Err(GameError::Malformed(format!("unknown player {player}")));
                }
                if actions.is_empty() {
                    return Err(GameError::Malformed("decision node without actions".into()));
                }
                let labels: Vec<String> = actions.iter().map(|(a, _)| a.clone()).collect();
                if (1..labels.len()).any(|i| labels[..i].contains(&labels[i])) {
                    return Err(GameError::Malformed(format!("duplicate action at {labels:?}")));
                }
                let set = match info.as_ref().and_then(|l| by_label.get(l)) {
                    Some(&s) => {
                        let is = &self.infosets[s];
                        if is.player != player || is.actions != labels {
                            return Err(GameError::Malformed(format!(
                                "information set {:?} mixes players or action sets",
                                is.label
                            )));
                        }
                        s
                    }
                    None => {
                        let s = self.infosets.len();
                        let label = info.clone().unwrap_or_else(|| self.history_label(parent));
                        if let Some(l) = &info {
                            by_label.insert(l.clone(), s);
                        }
                        self.infosets.push(InfoSet { player, label, actions: labels, nodes: Vec::new() });
                        s
                    }
                };
                self.infosets[set].nodes.push(id);
                self.nodes.push(Node::Decision { infoset: set, children: Vec::new() });
                let mut children = Vec::with_capacity(actions.len());
                for (i, (_, sub)) in actions.into_iter().enumerate() {
                    children.push(self.add(sub, Some((id, i)), by_label)?);
                }
                if let Node::Decision { children: c, .. } = &mut self.nodes[id] {
                    *c = children;
                }
            }
        }
        Ok(id)
    }

    fn history_label(&self, parent: Option<(NodeId, usize)>) -> String {
        match parent {
            None => "root".into(),
            Some((p, a)) => {
                let mut h = self.history(p);
                h.push(self.action_label(p, a).to_string());
                h.join("/")
            }
        }
    }

    pub fn players(&self) -> &[String] {
        &self.players
    }

    pub fn player_index(&self, name: &str) -> Option<usize> {
        self.players.iter().position(|p| p == name)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn infosets(&self) -> &[InfoSet] {
        &self.infosets
    }

    pub fn infoset_of(&self, n: NodeId) -> Option<&InfoSet> {
        match &self.nodes[n] {
            Node::Decision { infoset, .. } => Some(&self.infosets[*infoset]),
            Node::Terminal { .. } => None,
        }
    }

    pub fn action_label(&self, n: NodeId, a: usize) -> &str {
        &self.infoset_of(n).expect("decision node").actions[a]
    }

    /// Action labels from the root to `n`.
    pub fn history(&self, mut n: NodeId) -> Vec<String> {
        let mut h = Vec::new();
        while let Some((p, a)) = self.parent[n] {
            h.push(self.action_label(p, a).to_string());
            n = p;
        }
        h.reverse();
        h
    }

    pub fn histories(&self) -> Vec<Vec<String>> {
        (0..self.nodes.len()).map(|n| self.history(n)).collect()
    }

    pub fn terminals(&self) -> impl Iterator<Item = (NodeId, &[Payoff])> {
        self.nodes.iter().enumerate().filter_map(|(i, n)| match n {
            Node::Terminal { payoff } => Some((i, payoff.as_slice())),
            Node::Decision { .. } => None,
        })
    }

    pub fn is_perfect_information(&self) -> bool {
        self.infosets.iter().all(|s| s.nodes.len() == 1)
    }

    /// Every proper prefix of a history is itself a history.
    pub fn is_prefix_closed(&self) -> bool {
        let all: std::collections::BTreeSet<Vec<String>> = self.histories().into_iter().collect();
        all.len() == self.nodes.len() && all.iter().all(|h| (0..h.len()).all(|i| all.contains(&h[..i])))
    }

    /// Histories in one information set belong to one player and offer the
    /// same actions.
    pub fn is_measurable(&self) -> bool {
        self.infosets.iter().all(|s| {
            s.nodes.iter().all(|&n| match &self.nodes[n] {
                Node::Decision { infoset, children } => {
                    self.infosets[*infoset] == *s && children.len() == s.actions.len()
                }
                Node::Terminal { .. } => false,
            })
        })
    }

    /// Number of pure joint strategies.
    pub fn joint_strategy_count(&self) -> u128 {
        self.infosets.iter().try_fold(1u128, |acc, s| acc.checked_mul(s.actions.len() as u128)).unwrap_or(u128::MAX)
    }

    pub fn outcome(&self, s: &JointStrategy) -> &[Payoff] {
        self.outcome_from(0, s)
    }

    pub fn outcome_from(&self, mut n: NodeId, s: &JointStrategy) -> &[Payoff] {
        loop {
            match &self.nodes[n] {
                Node::Terminal { payoff } => return payoff,
                Node::Decision { infoset, children } => n = children[s.0[*infoset]],
            }
        }
    }

    /// Terminal history reached by `s`.
    pub fn path(&self, s: &JointStrategy) -> Vec<String> {
        let mut n = 0;
        while let Node::Decision { infoset, children } = &self.nodes[n] {
            n = children[s.0[*infoset]];
        }
        self.history(n)
    }

    /// Nodes of the subtree rooted at `n`, root first.
    pub fn subtree(&self, n: NodeId) -> Vec<NodeId> {
        let mut out = vec![n];
        let mut i = 0;
        while i < out.len() {
            if let Node::Decision { children, .. } = &self.nodes[out[i]] {
                out.extend(children.iter().copied());
            }
            i += 1;
        }
        out
    }

    /// Renders `s` as `set=action` pairs.
    pub fn describe(&self, s: &JointStrategy) -> String {
        self.infosets
            .iter()
            .zip(&s.0)
            .map(|(set, &a)| format!("{}@{}={}", self.players[set.player], set.label, set.actions[a]))
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Action `s` takes at the information set labelled `label`.
    pub fn choice<'a>(&'a self, s: &JointStrategy, label: &str) -> Option<&'a str> {
        let i = self.infosets.iter().position(|x| x.label == label)?;
        Some(&self.infosets[i].actions[s.0[i]])
    }

    /// Indented tree dump, one node per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_node(0, 0, None, &mut out);
        out
    }

    fn render_node(&self, n: NodeId, depth: usize, via: Option<&str>, out: &mut String) {
        let pad = "  ".repeat(depth);
        let via = via.map(|a| format!("{a} -> ")).unwrap_or_default();
        match &self.nodes[n] {
            Node::Terminal { payoff } => {
                let v: Vec<String> = payoff.iter().map(|p| p.to_string()).collect();
                let _ = writeln!(out, "{pad}{via}({})", v.join(", "));
            }
            Node::Decision { infoset, children } => {
                let set = &self.infosets[*infoset];
                let _ = writeln!(out, "{pad}{via}{} [{}]", self.players[set.player], set.label);
                for (a, c) in children.iter().enumerate() {
                    self.render_node(*c, depth + 1, Some(&set.actions[a]), out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(a: i64, b: i64) -> Tree {
        Tree::Leaf(vec![int(a), int(b)])
    }

    fn sample() -> Efg {
        Efg::from_tree(
            &["X", "Y"],
            Tree::node(
                0,
                vec![
                    ("l".into(), Tree::in_set(1, "y", vec![("a".into(), leaf(1, 0)), ("b".into(), leaf(0, 1))])),
                    ("r".into(), Tree::in_set(1, "y", vec![("a".into(), leaf(2, 2)), ("b".into(), leaf(3, 0))])),
                ],
            ),
        )
        .unwrap()
    }

    #[test]
    fn shared_label_forms_one_set() {
        let g = sample();
        assert_eq!(g.infosets().len(), 2);
        assert_eq!(g.infosets()[1].nodes.len(), 2);
        assert!(!g.is_perfect_information());
        assert!(g.is_prefix_closed() && g.is_measurable());
        assert_eq!(g.joint_strategy_count(), 4);
    }

    #[test]
    fn outcome_follows_choices() {
        let g = sample();
        let s = JointStrategy(vec![1, 0]);
        assert_eq!(g.outcome(&s), &[int(2), int(2)]);
        assert_eq!(g.path(&s), vec!["r", "a"]);
        assert_eq!(g.choice(&s, "y"), Some("a"));
    }

    #[test]
    fn mismatched_set_is_rejected() {
        let t = Tree::node(
            0,
            vec![
                ("l".into(), Tree::in_set(1, "y", vec![("a".into(), leaf(0, 0))])),
                ("r".into(), Tree::in_set(1, "y", vec![("b".into(), leaf(0, 0))])),
            ],
        );
        assert!(matches!(Efg::from_tree(&["X", "Y"], t), Err(GameError::Malformed(_))));
    }

    #[test]
    fn bad_leaf_width_is_rejected() {
        assert!(Efg::from_tree(&["X", "Y"], Tree::Leaf(vec![int(1)])).is_err());
        assert!(Efg::from_tree(&["X"], Tree::node(0, vec![])).is_err());
    }

    #[test]
    fn render_lists_every_node() {
        let g = sample();
        assert_eq!(g.render().lines().count(), g.nodes().len());
    }
}
