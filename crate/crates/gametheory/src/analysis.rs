use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::efg::{int, Payoff};
use crate::games::{
    build_subgame1, closing_game_with, closing_games, subgame1_leaf, subgame1_path, subgame1_values, BLOC,
};
use crate::params::GameParams;
use crate::solve::{backward_induction, brute_force_spne, equilibria, Solution};
use crate::GameError;

/// Expected utility of the bloc's W2 wardens for a split `a` latest / `b`
/// outdated, against a counterparty that can prove fraud with probability
/// `p1`, next to the all-latest utility.
pub fn expected_warden_utility(p: &GameParams, a: u32, b: u32) -> Result<(Payoff, Payoff), GameError> {
    p.validate()?;
    if a + b != p.f + 1 {
        return Err(GameError::InvalidParams(format!("a + b must be {}", p.f + 1)));
    }
    let punished = subgame1_leaf(p, a, b, b).payoff[BLOC];
    let unpunished = subgame1_leaf(p, a, b, 0).payoff[BLOC];
    let honest = subgame1_leaf(p, p.f + 1, 0, 0).payoff[BLOC];
    Ok((p.p1 * punished + p.p2() * unpunished, honest))
}

/// Every equilibrium of the unilateral subgame has the bloc publish only
/// the latest state.
pub fn bloc_publishes_latest(p: &GameParams) -> Result<bool, GameError> {
    let g = build_subgame1(p)?;
    let sol = backward_induction(&g)?;
    Ok(sol.profiles.iter().all(|s| subgame1_path(&g, s).0 == 0))
}

/// Some equilibrium of the unilateral subgame closes in the outdated state.
pub fn cheating_equilibrium(p: &GameParams) -> Result<bool, GameError> {
    let g = build_subgame1(p)?;
    let sol = backward_induction(&g)?;
    Ok(sol.profiles.iter().any(|s| {
        let (b, x) = subgame1_path(&g, s);
        subgame1_leaf(p, p.f + 1 - b, b, x).stale_stands
    }))
}

/// Every main party gets at least `alpha - eps` under every equilibrium of
/// every closing game, for each equilibrium value of the unilateral
/// subgame.
pub fn check_security(p: &GameParams) -> Result<bool, GameError> {
    let floor = int(p.alpha - p.eps);
    let sub_ok = {
        let g = build_subgame1(p)?;
        let sol = backward_induction(&g)?;
        sol.values.iter().all(|v| v[0] - int(p.eps) >= floor && v[1] >= floor)
    };
    if !sub_ok {
        return Ok(false);
    }
    for knows in [false, true] {
        for g in closing_games(p, knows)? {
            if !equilibria(&g)?.values.iter().all(|v| v.iter().all(|x| *x >= floor)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Brute force agrees with the structural solver on the unilateral subgame
/// and on both closing games.
pub fn oracles_agree(p: &GameParams) -> Result<bool, GameError> {
    let sub = build_subgame1(p)?;
    if brute_force_spne(&sub)? != backward_induction(&sub)? {
        return Ok(false);
    }
    for v in subgame1_values(p)? {
        for knows in [false, true] {
            let g = closing_game_with(p, knows, v)?;
            if brute_force_spne(&g)? != equilibria(&g)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Any outdated publication lowers the bloc's expected utility when the
/// counterparty may know the latest state, and costs nothing when it cannot.
pub fn knowledge_deters(p: &GameParams) -> Result<bool, GameError> {
    let f = p.f;
    for b in 1..=f + 1 {
        let (dish, honest) = expected_warden_utility(p, f + 1 - b, b)?;
        let ok = if p.p1 > Rational64::from_integer(0) { dish < honest } else { dish == honest };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Worst-case outcome of an opening where the intermediary locks `d_prime`
/// for Bob on its channel with him instead of `d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OpeningOutcome {
    pub d_prime: i64,
    /// Least of (paid - promised by the signed state) over reachable states.
    pub alice_worst: i64,
    pub ingrid_worst: i64,
}

/// Alice funds `v - d`, Bob `d`. Each payment-channel contract pays a
/// virtual state only if it sums to that contract's lock, and otherwise
/// returns the lock to its funders. The colluders may sign any state that
/// matches either lock.
pub fn opening_outcome(p: &GameParams, d_prime: i64) -> OpeningOutcome {
    let (ca, cb) = (p.v - p.d, p.d);
    let lock_ai = ca + cb;
    let lock_ib = ca + d_prime;
    let mut alice = i64::MAX;
    let mut ingrid = i64::MAX;
    for total in [lock_ai, lock_ib] {
        for x in 0..=total {
            let y = total - x;
            let ai_pays = total == lock_ai;
            let ib_pays = total == lock_ib;
            let alice_got = if ai_pays { x } else { ca } - ca;
            let ingrid_got = (if ai_pays { y } else { cb } - cb) + (if ib_pays { x } else { ca } - ca);
            alice = alice.min(alice_got - (x - ca));
            ingrid = ingrid.min(ingrid_got);
        }
    }
    OpeningOutcome { d_prime, alice_worst: alice, ingrid_worst: ingrid }
}

/// Every inconsistent lock `d' != d` up to `2v` leaves some colluder worse
/// off than an honest opening, which loses nobody anything.
pub fn check_opening_game(p: &GameParams) -> Result<bool, GameError> {
    p.validate()?;
    let honest = opening_outcome(p, p.d);
    if honest.alice_worst != 0 || honest.ingrid_worst != 0 {
        return Ok(false);
    }
    Ok((0..=2 * p.v).filter(|&d| d != p.d).all(|d| {
        let o = opening_outcome(p, d);
        o.alice_worst < 0 || o.ingrid_worst < 0
    }))
}

/// Results of every check on one parameter set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub params: GameParams,
    pub in_regime: bool,
    pub bloc_latest: bool,
    pub cheating: bool,
    pub secure: bool,
    pub oracles_agree: bool,
    pub knowledge_deters: bool,
    pub opening_safe: bool,
}

impl Verdict {
    /// The checks the regime predicts all pass.
    pub fn conforms(&self) -> bool {
        let expected = if self.in_regime {
            self.bloc_latest && !self.cheating && self.secure
        } else if self.params.fraud_pays() {
            self.cheating && !self.secure
        } else {
            true
        };
        expected && self.oracles_agree && self.knowledge_deters && self.opening_safe
    }
}

pub fn verify(p: &GameParams) -> Result<Verdict, GameError> {
    Ok(Verdict {
        params: *p,
        in_regime: p.in_security_regime(),
        bloc_latest: bloc_publishes_latest(p)?,
        cheating: cheating_equilibrium(p)?,
        secure: check_security(p)?,
        oracles_agree: oracles_agree(p)?,
        knowledge_deters: knowledge_deters(p)?,
        opening_safe: check_opening_game(p)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Security,
    FraudPays,
}

/// Verdicts for `n` parameter sets drawn from `region` with the given `f`.
pub fn sweep(region: Region, f: u32, n: usize, seed: u64) -> Result<Vec<Verdict>, GameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let p = match region {
                Region::Security => GameParams::sample_regime(&mut rng, f),
                Region::FraudPays => GameParams::sample_fraud_pays(&mut rng, f),
            };
            verify(&p)
        })
        .collect()
}

/// Equilibria of the unilateral subgame, for reporting.
pub fn subgame1_equilibria(p: &GameParams) -> Result<Solution, GameError> {
    backward_induction(&build_subgame1(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon() -> GameParams {
        GameParams::new(50, 2, 6, 1, 4, 3, 10, Rational64::new(1, 2)).unwrap()
    }

    #[test]
    fn honest_split_has_no_deviation_gain() {
        let (dish, honest) = expected_warden_utility(&canon(), 4, 0).unwrap();
        assert_eq!(dish, honest);
        assert_eq!(honest, int(4));
    }

    #[test]
    fn split_must_cover_the_bloc() {
        assert!(expected_warden_utility(&canon(), 2, 1).is_err());
    }

    #[test]
    fn opening_deviations() {
        let p = canon();
        assert_eq!(opening_outcome(&p, p.d), OpeningOutcome { d_prime: p.d, alice_worst: 0, ingrid_worst: 0 });
        assert!(opening_outcome(&p, p.d + 1).ingrid_worst < 0);
        assert!(opening_outcome(&p, p.d - 1).alice_worst < 0);
        assert!(check_opening_game(&p).unwrap());
    }

    #[test]
    fn canonical_instance_is_secure() {
        let v = verify(&canon()).unwrap();
        assert!(v.in_regime && v.conforms(), "{v:?}");
    }
}
