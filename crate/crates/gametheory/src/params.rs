use num_rational::Rational64;
use rand::Rng;

use crate::GameError;

/// Parameters of the closing games. Coin amounts are integers; only the
/// knowledge probability `p1` is fractional.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameParams {
    /// Profit of closing the channel.
    pub alpha: i64,
    /// Cost of closing unilaterally.
    pub eps: i64,
    /// Profit of closing in an outdated state.
    pub d: i64,
    /// Incentive fee per publishing warden.
    pub k: i64,
    /// Collateral per warden.
    pub c: i64,
    pub f: u32,
    /// Virtual-channel balance.
    pub v: i64,
    /// Probability that the counterparty knows the latest state.
    pub p1: Rational64,
}

impl GameParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        alpha: i64,
        eps: i64,
        d: i64,
        k: i64,
        c: i64,
        f: u32,
        v: i64,
        p1: Rational64,
    ) -> Result<GameParams, GameError> {
        let p = GameParams { alpha, eps, d, k, c, f, v, p1 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GameError> {
        let bad = |m: &str| Err(GameError::InvalidParams(m.to_string()));
        if !(0 < self.eps && self.eps < self.alpha) {
            return bad("need 0 < eps < alpha");
        }
        if !(0 < self.d && self.d <= self.v) {
            return bad("need 0 < d <= v");
        }
        if self.k <= 0 || self.c <= 0 {
            return bad("need k > 0 and c > 0");
        }
        if self.f == 0 || self.f > 16 {
            return bad("need 1 <= f <= 16");
        }
        if self.p1 < Rational64::from_integer(0) || self.p1 > Rational64::from_integer(1) {
            return bad("need p1 in [0, 1]");
        }
        Ok(())
    }

    /// Collateral of `f + 1` wardens exceeds the channel balance.
    pub fn in_security_regime(&self) -> bool {
        (self.f as i64 + 1) * self.c > self.v && self.v >= self.d
    }

    /// Fraud profit exceeds what a full proven quorum forfeits.
    pub fn fraud_pays(&self) -> bool {
        self.d > (self.f as i64 + 1) * self.c
    }

    pub fn p2(&self) -> Rational64 {
        Rational64::from_integer(1) - self.p1
    }

    /// Uniform draw from the security regime.
    pub fn sample_regime<R: Rng>(rng: &mut R, f: u32) -> GameParams {
        let c = rng.gen_range(1..=20);
        let cap = (f as i64 + 1) * c - 1;
        let v = rng.gen_range(1..=cap);
        let d = rng.gen_range(1..=v);
        Self::finish(rng, f, c, v, d)
    }

    /// Draw with `d > (f+1)c` and `eps < d`.
    pub fn sample_fraud_pays<R: Rng>(rng: &mut R, f: u32) -> GameParams {
        let c = rng.gen_range(1..=20);
        let floor = (f as i64 + 1) * c + 1;
        let d = rng.gen_range(floor..=floor + 50);
        let v = rng.gen_range(d..=d + 50);
        // A closing cost above the fraud profit would hide the loss.
        let mut p = Self::finish(rng, f, c, v, d);
        p.eps = p.eps.min(d - 1).max(1);
        p
    }

    fn finish<R: Rng>(rng: &mut R, f: u32, c: i64, v: i64, d: i64) -> GameParams {
        let alpha = rng.gen_range(2..=200);
        let den = rng.gen_range(1..=20);
        let p = GameParams {
            alpha,
            eps: rng.gen_range(1..alpha),
            d,
            k: rng.gen_range(1..=10),
            c,
            f,
            v,
            p1: Rational64::new(rng.gen_range(1..=den), den),
        };
        debug_assert!(p.validate().is_ok());
        p
    }
}
