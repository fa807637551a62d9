//! What an honest actor is owed, computed from signed states alone and
//! without looking at how the chain settled.

use thunderdome_actors::{Engine, Topology};
use thunderdome_core::{Coins, UpdateAnnouncement};

/// Every virtual-channel announcement carrying both end-party signatures
/// that any actor holds at the end of the run, deduplicated.
pub fn announcement_log(e: &Engine) -> Vec<UpdateAnnouncement> {
    let ends = e.topo.ends();
    let mut log: Vec<UpdateAnnouncement> = Vec::new();
    let held = e
        .parties
        .values()
        .flat_map(|p| p.signed_vc.iter())
        .chain(e.wardens.values().flat_map(|w| w.vc_signed.values().flatten()));
    for a in held {
        if a.signed_by(ends) && e.topo.valid_vc_state(&a.state) && !log.contains(a) {
            log.push(a.clone());
        }
    }
    log.sort_by_key(|a| a.seq());
    log
}

/// On-chain balance the end party on `side` (0 = left) is owed: its start
/// balance with its initial share swapped for its share in the highest
/// state it signed. With several conflicting states at that sequence number
/// (only possible when both ends cheat) the smaller share counts.
pub fn entitled_end(topo: &Topology, start: Coins, side: usize, log: &[UpdateAnnouncement]) -> Coins {
    let me = topo.ends()[side];
    let Some(top) = log.iter().map(UpdateAnnouncement::seq).max() else {
        return start;
    };
    let share = log.iter().filter(|a| a.seq() == top).map(|a| a.state.balance_of(me)).min().unwrap_or(0);
    let initial = if side == 0 { topo.split.0 } else { topo.split.1 };
    start - initial + share
}

#[cfg(test)]
mod tests {
    use thunderdome_actors::VC_ID;
    use thunderdome_core::{ChannelState, SigningKey};

    use super::*;

    fn ann(topo: &Topology, seq: u64, a: Coins) -> UpdateAnnouncement {
        let [ea, eb] = topo.ends();
        let st = ChannelState::new(VC_ID, seq, &[(ea, a), (eb, topo.v - a)]);
        UpdateAnnouncement::new(st.clone(), st.sign_with(&SigningKey::new(ea)), st.sign_with(&SigningKey::new(eb)))
    }

    #[test]
    fn nothing_signed_means_nothing_moves() {
        let topo = Topology::new(2, 1, (3, 7), 0, 3, 0).unwrap();
        assert_eq!(entitled_end(&topo, 1000, 0, &[]), 1000);
    }

    #[test]
    fn highest_state_wins_and_conflicts_take_the_minimum() {
        let topo = Topology::new(2, 1, (3, 7), 0, 3, 0).unwrap();
        let log = vec![ann(&topo, 1, 3), ann(&topo, 2, 6), ann(&topo, 3, 1)];
        assert_eq!(entitled_end(&topo, 1000, 0, &log), 998);
        assert_eq!(entitled_end(&topo, 1000, 1, &log), 1002);
        let split = vec![ann(&topo, 4, 2), ann(&topo, 4, 8)];
        assert_eq!(entitled_end(&topo, 1000, 0, &split), 999);
        assert_eq!(entitled_end(&topo, 1000, 1, &split), 995);
    }
}
