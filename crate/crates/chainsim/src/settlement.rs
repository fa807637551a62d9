//! Pure settlement arithmetic shared by the contract and the game models.

use thunderdome_core::{quorum_size, Coins};

/// More than `f` proven cheaters means the closing side colluded with the
/// committee beyond the fault bound; the whole virtual balance goes to the
/// closer's counterparty.
pub fn forfeits_vc(f: u32, proven_cheaters: u32) -> bool {
    proven_cheaters > f
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeeSplit {
    pub per_slot: Coins,
    /// Publishers actually paid, at most `2f + 1`.
    pub paid: usize,
    /// Returned to the closer: empty slots plus the rounding remainder.
    pub refund: Coins,
    pub shortfall: usize,
}

/// The fee is cut into `2f + 1` equal slots, one per eligible publisher in
/// arrival order.
pub fn fee_split(fee: Coins, f: u32, eligible: usize) -> FeeSplit {
    let slots = quorum_size(f);
    let per_slot = fee / slots as Coins;
    let paid = eligible.min(slots);
    FeeSplit { per_slot, paid, refund: fee - per_slot * paid as Coins, shortfall: slots - paid }
}

/// Proofs that actually slash: a closer holding `proofs` valid proofs against
/// `cheaters` dishonest publishers can punish at most `cheaters` of them.
pub fn slashed_count(cheaters: u32, proofs: u32) -> u32 {
    cheaters.min(proofs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fee_of_seven_pays_one_each() {
        let s = fee_split(7, 3, 7);
        assert_eq!((s.per_slot, s.paid, s.refund, s.shortfall), (1, 7, 0, 0));
    }

    #[test]
    fn shortfall_is_refunded() {
        let s = fee_split(14, 3, 5);
        assert_eq!((s.per_slot, s.paid, s.refund, s.shortfall), (2, 5, 4, 2));
    }

    #[test]
    fn zero_fee_pays_nothing() {
        assert_eq!(fee_split(0, 3, 7).refund, 0);
    }

    #[test]
    fn forfeiture_threshold() {
        assert!(!forfeits_vc(3, 3));
        assert!(forfeits_vc(3, 4));
    }
}
