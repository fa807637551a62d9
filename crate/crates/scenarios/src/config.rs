use serde::{Deserialize, Serialize};
use thiserror::Error;
use thunderdome_actors::{Activation, EngineConfig, PartyBehavior, SplitMode, Stage, Topology, WardenBehavior};
use thunderdome_chainsim::ChainConfig;
use thunderdome_core::{required_collateral, ActorId, Coins, CoreError};
use thunderdome_netsim::{AdversaryPolicy, Censorship, DropRule, DEFAULT_HORIZON};

/// Schema version this build reads and writes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("unsupported schema version {found}, expected {SCHEMA_VERSION}")]
    Version { found: u32 },
    #[error("field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    Core(#[from] CoreError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageName {
    Deploy,
    Open,
    Updates,
    Close,
    PcClose,
}

impl From<StageName> for Stage {
    fn from(s: StageName) -> Stage {
        match s {
            StageName::Deploy => Stage::Deploy,
            StageName::Open => Stage::Open,
            StageName::Updates => Stage::Updates,
            StageName::Close => Stage::Close,
            StageName::PcClose => Stage::PcClose,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    SameSeq,
    SplitSeq,
}

/// A point at which an actor stops. Exactly one of the two fields is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct When {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage: Option<StageName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<u64>,
}

impl When {
    pub fn stage(s: StageName) -> When {
        When { stage: Some(s), step: None }
    }

    fn activation(self, field: &str) -> Result<Activation, ConfigError> {
        match (self.stage, self.step) {
            (Some(s), None) => Ok(Activation::Stage(s.into())),
            (None, Some(n)) => Ok(Activation::Step(n)),
            _ => Err(invalid(field, "set exactly one of `stage` and `step`")),
        }
    }
}

/// Party behaviors refer to other parties by path index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PartySpec {
    Honest,
    Offline { from: When },
    DoubleStateColluder { partner: usize, mode: ModeName },
    OldStateCloser { seq: u64 },
    InconsistentFunder { delta: i64 },
    CollusiveIntermediary { partner: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WardenSpec {
    Honest,
    StalePublisher {
        seq: u64,
    },
    DoubleSigner,
    /// `target` is a party index.
    Withholder {
        target: usize,
    },
    Crash {
        from: When,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActorRef {
    Party(usize),
    /// Committee and position within it.
    Warden(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyEntry {
    pub index: usize,
    pub behavior: PartySpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WardenEntry {
    pub committee: usize,
    pub index: usize,
    pub behavior: WardenSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensorEntry {
    pub target: ActorRef,
    /// Message kind, e.g. `RegisterVC` or `WardenSig`.
    pub kind: String,
    pub delay: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DropEntry {
    /// Must be a non-honest actor; drops from honest senders are ignored.
    pub from: ActorRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

/// One simulated run, as read from a scenario file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    #[serde(default)]
    pub name: String,
    pub seed: u64,
    #[serde(default = "defaults::hops")]
    pub hops: usize,
    #[serde(default = "defaults::f")]
    pub f: u32,
    /// Initial virtual-channel shares of the left and right end party.
    #[serde(default = "defaults::split")]
    pub split: [Coins; 2],
    /// Payment-channel deposit each party keeps outside the virtual lock.
    #[serde(default)]
    pub margin: Coins,
    /// Per-warden incentive `k`; the closing fee is `(2f + 1) k`.
    #[serde(default = "defaults::incentive")]
    pub incentive: Coins,
    /// Index of the leader contract.
    #[serde(default)]
    pub leader: u32,
    #[serde(default = "defaults::updates")]
    pub updates: u32,
    #[serde(default = "defaults::horizon")]
    pub horizon: u64,
    /// Step budget; defaults to a multiple of the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(default = "defaults::start_balance")]
    pub start_balance: Coins,
    #[serde(default = "defaults::yes")]
    pub cross_check: bool,
    #[serde(default)]
    pub force_same_block: bool,
    #[serde(default)]
    pub shuffle_blocks: bool,
    /// Delay every honest message by the full horizon.
    #[serde(default)]
    pub stall_all: bool,
    #[serde(default)]
    pub parties: Vec<PartyEntry>,
    #[serde(default)]
    pub wardens: Vec<WardenEntry>,
    #[serde(default)]
    pub censor: Vec<CensorEntry>,
    #[serde(default)]
    pub drop: Vec<DropEntry>,
}

mod defaults {
    use thunderdome_core::Coins;

    pub fn hops() -> usize {
        2
    }
    pub fn f() -> u32 {
        1
    }
    pub fn split() -> [Coins; 2] {
        [3, 7]
    }
    pub fn incentive() -> Coins {
        1
    }
    pub fn updates() -> u32 {
        3
    }
    pub fn horizon() -> u64 {
        thunderdome_netsim::DEFAULT_HORIZON
    }
    pub fn start_balance() -> Coins {
        1_000
    }
    pub fn yes() -> bool {
        true
    }
}

/// Steps allowed per unit of horizon before a run counts as stuck.
pub const STEPS_PER_HORIZON: u64 = 400;

impl ScenarioConfig {
    pub fn new(name: &str, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            version: SCHEMA_VERSION,
            name: name.to_string(),
            seed,
            hops: defaults::hops(),
            f: defaults::f(),
            split: defaults::split(),
            margin: 0,
            incentive: defaults::incentive(),
            leader: 0,
            updates: defaults::updates(),
            horizon: DEFAULT_HORIZON,
            max_steps: None,
            start_balance: defaults::start_balance(),
            cross_check: true,
            force_same_block: false,
            shuffle_blocks: false,
            stall_all: false,
            parties: Vec::new(),
            wardens: Vec::new(),
            censor: Vec::new(),
            drop: Vec::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<ScenarioConfig, ConfigError> {
        let cfg: ScenarioConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    pub fn v(&self) -> Coins {
        self.split[0] + self.split[1]
    }

    pub fn fee(&self) -> Coins {
        (2 * self.f as Coins + 1) * self.incentive
    }

    pub fn budget(&self) -> u64 {
        self.max_steps.unwrap_or(STEPS_PER_HORIZON * self.horizon)
    }

    pub fn party(&mut self, index: usize, behavior: PartySpec) -> &mut Self {
        self.parties.retain(|p| p.index != index);
        self.parties.push(PartyEntry { index, behavior });
        self
    }

    pub fn warden(&mut self, committee: usize, index: usize, behavior: WardenSpec) -> &mut Self {
        self.wardens.retain(|w| (w.committee, w.index) != (committee, index));
        self.wardens.push(WardenEntry { committee, index, behavior });
        self
    }

    pub fn party_spec(&self, index: usize) -> PartySpec {
        self.parties.iter().find(|p| p.index == index).map_or(PartySpec::Honest, |p| p.behavior)
    }

    pub fn warden_spec(&self, committee: usize, index: usize) -> WardenSpec {
        self.wardens
            .iter()
            .find(|w| (w.committee, w.index) == (committee, index))
            .map_or(WardenSpec::Honest, |w| w.behavior)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != SCHEMA_VERSION {
            return Err(ConfigError::Version { found: self.version });
        }
        if self.seed > i64::MAX as u64 {
            return Err(invalid("seed", "must fit a signed 64-bit integer"));
        }
        if self.hops < 2 {
            return Err(invalid("hops", "a virtual channel needs at least two payment channels"));
        }
        if self.f == 0 {
            return Err(invalid("f", "must be at least 1"));
        }
        if self.v() == 0 {
            return Err(invalid("split", "virtual-channel balance must be positive"));
        }
        if self.leader as usize >= self.hops {
            return Err(invalid("leader", format!("must be below hops = {}", self.hops)));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        let n = 3 * self.f as usize + 1;
        let collateral = required_collateral(self.v(), self.f)?;
        let need = self.v() + self.margin + 2 * self.fee() + collateral;
        if self.start_balance < need {
            return Err(invalid("start_balance", format!("must cover deposits, fees and collateral ({need})")));
        }
        let party_ok = |i: usize| i <= self.hops;
        for (i, p) in self.parties.iter().enumerate() {
            let field = format!("parties[{i}]");
            if !party_ok(p.index) {
                return Err(invalid(field, format!("index {} is not on the path", p.index)));
            }
            match p.behavior {
                PartySpec::Offline { from } => {
                    from.activation(&format!("{field}.behavior.from"))?;
                }
                PartySpec::DoubleStateColluder { partner, .. } => {
                    let ends = [0, self.hops];
                    if !ends.contains(&p.index) || !ends.contains(&partner) || partner == p.index {
                        return Err(invalid(field, "colluders must be the two end parties"));
                    }
                }
                PartySpec::CollusiveIntermediary { partner } => {
                    if p.index == 0 || p.index == self.hops || (partner != 0 && partner != self.hops) {
                        return Err(invalid(field, "an intermediary colludes with an end party"));
                    }
                }
                PartySpec::OldStateCloser { .. } => {
                    if p.index != 0 && p.index != self.hops {
                        return Err(invalid(field, "only end parties hold virtual-channel states"));
                    }
                }
                PartySpec::Honest | PartySpec::InconsistentFunder { .. } => {}
            }
        }
        for (i, w) in self.wardens.iter().enumerate() {
            let field = format!("wardens[{i}]");
            if w.committee >= self.hops || w.index >= n {
                return Err(invalid(field, "no such warden"));
            }
            match w.behavior {
                WardenSpec::Withholder { target } if !party_ok(target) => {
                    return Err(invalid(field, "withholder target is not a party"));
                }
                WardenSpec::Crash { from } => {
                    from.activation(&format!("{field}.behavior.from"))?;
                }
                _ => {}
            }
        }
        let actor_ok = |r: &ActorRef| match *r {
            ActorRef::Party(i) => party_ok(i),
            ActorRef::Warden(c, j) => c < self.hops && j < n,
        };
        for (i, c) in self.censor.iter().enumerate() {
            if !actor_ok(&c.target) {
                return Err(invalid(format!("censor[{i}]"), "no such actor"));
            }
        }
        for (i, d) in self.drop.iter().enumerate() {
            if !actor_ok(&d.from) {
                return Err(invalid(format!("drop[{i}]"), "no such actor"));
            }
        }
        Ok(())
    }

    pub fn topology(&self) -> Result<Topology, ConfigError> {
        self.validate()?;
        Ok(Topology::new(self.hops, self.f, (self.split[0], self.split[1]), self.margin, self.fee(), self.leader)?)
    }

    pub fn resolve(&self, topo: &Topology, r: ActorRef) -> ActorId {
        match r {
            ActorRef::Party(i) => topo.parties[i],
            ActorRef::Warden(c, j) => topo.committees[c][j],
        }
    }

    pub fn engine_config(&self) -> Result<EngineConfig, ConfigError> {
        let topo = self.topology()?;
        let mut policy = AdversaryPolicy::new(self.seed, self.horizon);
        policy.stall_all = self.stall_all;
        let mut cfg = EngineConfig::new(topo.clone(), self.seed);
        for p in &self.parties {
            let b = match p.behavior {
                PartySpec::Honest => PartyBehavior::Honest,
                PartySpec::Offline { from } => PartyBehavior::Offline { from: from.activation("from")? },
                PartySpec::DoubleStateColluder { partner, mode } => PartyBehavior::DoubleStateColluder {
                    partner: topo.parties[partner],
                    mode: match mode {
                        ModeName::SameSeq => SplitMode::SameSeq,
                        ModeName::SplitSeq => SplitMode::SplitSeq,
                    },
                },
                PartySpec::OldStateCloser { seq } => PartyBehavior::OldStateCloser { seq },
                PartySpec::InconsistentFunder { delta } => PartyBehavior::InconsistentFunder { delta },
                PartySpec::CollusiveIntermediary { partner } => {
                    PartyBehavior::CollusiveIntermediary { partner: topo.parties[partner] }
                }
            };
            let id = topo.parties[p.index];
            if !b.is_honest() {
                policy.byzantine.insert(id);
            }
            cfg.party_behaviors.insert(id, b);
        }
        for w in &self.wardens {
            let b = match w.behavior {
                WardenSpec::Honest => WardenBehavior::Honest,
                WardenSpec::StalePublisher { seq } => WardenBehavior::StalePublisher { seq },
                WardenSpec::DoubleSigner => WardenBehavior::DoubleSigner,
                WardenSpec::Withholder { target } => WardenBehavior::Withholder { target: topo.parties[target] },
                WardenSpec::Crash { from } => WardenBehavior::Crash { from: from.activation("from")? },
            };
            let id = topo.committees[w.committee][w.index];
            if !b.is_honest() {
                policy.byzantine.insert(id);
            }
            cfg.warden_behaviors.insert(id, b);
        }
        for c in &self.censor {
            let target = self.resolve(&topo, c.target);
            policy.censorship_targets.push(Censorship { target, kind: c.kind.clone(), delay: c.delay });
        }
        for d in &self.drop {
            let from = self.resolve(&topo, d.from);
            policy.drop_rules.push(DropRule { from, to: None, kind: d.kind.clone() });
        }
        cfg.policy = policy;
        cfg.chain = ChainConfig { cross_check: self.cross_check, force_same_block: self.force_same_block };
        cfg.updates = self.updates;
        cfg.shuffle_blocks = self.shuffle_blocks;
        cfg.max_steps = self.budget();
        cfg.start_balance = self.start_balance;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_uses_defaults() {
        let cfg = ScenarioConfig::from_toml("version = 1\nseed = 4\n").unwrap();
        assert_eq!((cfg.hops, cfg.f, cfg.v(), cfg.fee()), (2, 1, 10, 3));
        assert_eq!(cfg.budget(), STEPS_PER_HORIZON * DEFAULT_HORIZON);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ScenarioConfig::from_toml("version = 1\nseed = 4\nhopz = 3\n").unwrap_err();
        assert!(err.to_string().contains("hopz"), "{err}");
        let nested = "version = 1\nseed = 1\n[[parties]]\nindex = 1\nbehavior = { kind = \"offline\", from = { stage = \"close\" }, extra = 1 }\n";
        assert!(ScenarioConfig::from_toml(nested).is_err());
    }

    #[test]
    fn wrong_version_and_bad_indices() {
        assert!(matches!(ScenarioConfig::from_toml("version = 2\nseed = 1\n"), Err(ConfigError::Version { found: 2 })));
        let mut cfg = ScenarioConfig::new("x", 1);
        cfg.party(5, PartySpec::Honest);
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::new("x", 1);
        cfg.party(1, PartySpec::OldStateCloser { seq: 1 });
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::new("x", 1);
        cfg.party(1, PartySpec::Offline { from: When { stage: None, step: None } });
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let mut cfg = ScenarioConfig::new("rt", 9);
        cfg.party(0, PartySpec::DoubleStateColluder { partner: 2, mode: ModeName::SplitSeq })
            .party(2, PartySpec::DoubleStateColluder { partner: 0, mode: ModeName::SplitSeq })
            .warden(1, 2, WardenSpec::Crash { from: When::stage(StageName::Close) });
        cfg.censor.push(CensorEntry { target: ActorRef::Warden(0, 1), kind: "PublishState".into(), delay: 9 });
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn byzantine_actors_are_marked_for_the_scheduler() {
        let mut cfg = ScenarioConfig::new("x", 1);
        cfg.party(1, PartySpec::Offline { from: When::stage(StageName::Close) }).warden(0, 0, WardenSpec::DoubleSigner);
        let e = cfg.engine_config().unwrap();
        assert_eq!(e.policy.byzantine.len(), 2);
        assert_eq!(e.max_steps, cfg.budget());
    }
}
