use thunderdome_core::{
    required_collateral, ActorId, ChannelId, ChannelState, Coins, ContractId, ContractInfo, CoreError, RegisterBody,
    VirtualLock,
};

/// Identifier of the virtual channel. Payment channel `k` is `ChannelId(k)`
/// and is backed by contract `ContractId(k)`.
pub const VC_ID: ChannelId = ChannelId(1000);

/// A path of `hops` payment channels between two end parties, each channel
/// guarded by its own committee of `3f + 1` wardens.
#[derive(Clone, Debug)]
pub struct Topology {
    pub f: u32,
    /// Virtual-channel balance.
    pub v: Coins,
    /// Initial shares of the left and right end party; they sum to `v`.
    pub split: (Coins, Coins),
    /// Deposit each party keeps outside the virtual lock.
    pub margin: Coins,
    /// Closing fee paid by whoever registers the virtual channel on-chain.
    pub fee: Coins,
    pub collateral: Coins,
    /// Main parties in path order.
    pub parties: Vec<ActorId>,
    pub committees: Vec<Vec<ActorId>>,
    pub leader: ContractId,
}

impl Topology {
    pub fn new(
        hops: usize,
        f: u32,
        split: (Coins, Coins),
        margin: Coins,
        fee: Coins,
        leader: u32,
    ) -> Result<Topology, CoreError> {
        assert!(hops >= 2, "a virtual channel spans at least two payment channels");
        assert!((leader as usize) < hops, "leader must be one of the contracts");
        let v = split.0 + split.1;
        let collateral = required_collateral(v, f)?;
        let parties = (0..=hops).map(|i| ActorId::party(i as u16, &party_label(i, hops))).collect();
        let n = 3 * f as u16 + 1;
        let committees = (0..hops as u16).map(|k| (0..n).map(|j| ActorId::warden(k * n + j)).collect()).collect();
        Ok(Topology { f, v, split, margin, fee, collateral, parties, committees, leader: ContractId(leader) })
    }

    pub fn hops(&self) -> usize {
        self.committees.len()
    }

    pub fn ends(&self) -> [ActorId; 2] {
        [self.parties[0], self.parties[self.hops()]]
    }

    pub fn is_end(&self, a: ActorId) -> bool {
        self.ends().contains(&a)
    }

    pub fn intermediaries(&self) -> &[ActorId] {
        &self.parties[1..self.hops()]
    }

    pub fn position(&self, a: ActorId) -> Option<usize> {
        self.parties.iter().position(|p| *p == a)
    }

    pub fn pc(k: usize) -> ChannelId {
        ChannelId(k as u32)
    }

    pub fn contract(k: usize) -> ContractId {
        ContractId(k as u32)
    }

    /// Left and right party of payment channel `k`.
    pub fn pc_parties(&self, k: usize) -> [ActorId; 2] {
        [self.parties[k], self.parties[k + 1]]
    }

    /// Every party contributes its end party's initial share to the lock:
    /// left parties lock `split.0`, right parties `split.1`.
    pub fn deposits(&self) -> [Coins; 2] {
        [self.split.0 + self.margin, self.split.1 + self.margin]
    }

    /// Payment channels touching the party at `pos`.
    pub fn adjacent(&self, pos: usize) -> Vec<usize> {
        let mut ks = Vec::new();
        if pos > 0 {
            ks.push(pos - 1);
        }
        if pos < self.hops() {
            ks.push(pos);
        }
        ks
    }

    pub fn committee_of(&self, w: ActorId) -> Option<usize> {
        self.committees.iter().position(|c| c.contains(&w))
    }

    pub fn wardens(&self) -> impl Iterator<Item = ActorId> + '_ {
        self.committees.iter().flatten().copied()
    }

    /// Channel `k` next to `pos` on the side of end party `side` (0 = left).
    pub fn toward(&self, pos: usize, side: usize) -> Option<usize> {
        match side {
            0 if pos > 0 => Some(pos - 1),
            1 if pos < self.hops() => Some(pos),
            _ => None,
        }
    }

    /// The intermediary next to an end party proposes unlocking its channel;
    /// between two intermediaries the left one does.
    pub fn unlock_proposer(&self, k: usize) -> ActorId {
        if k == 0 {
            self.parties[1]
        } else {
            self.parties[k]
        }
    }

    pub fn s1(&self) -> ChannelState {
        let [a, b] = self.ends();
        ChannelState::new(VC_ID, 1, &[(a, self.split.0), (b, self.split.1)])
    }

    pub fn initial_pc_state(&self, k: usize) -> ChannelState {
        let [l, r] = self.pc_parties(k);
        let [dl, dr] = self.deposits();
        ChannelState::new(Self::pc(k), 1, &[(l, dl), (r, dr)])
    }

    /// `prev` with the virtual lock applied. `skew` shifts what the party on
    /// `skew_side` contributes; honest parties use zero.
    pub fn lock_state(&self, k: usize, prev: &ChannelState, skew_side: usize, skew: i64) -> ChannelState {
        let [l, r] = self.pc_parties(k);
        let mut take = [self.split.0 as i64, self.split.1 as i64];
        take[skew_side] += skew;
        let left = prev.balance_of(l) as i64 - take[0];
        let right = prev.balance_of(r) as i64 - take[1];
        let amount = take[0] + take[1];
        ChannelState::new(Self::pc(k), prev.seq + 1, &[(l, left.max(0) as Coins), (r, right.max(0) as Coins)])
            .with_lock(VirtualLock { vc: VC_ID, amount: amount.max(0) as Coins })
    }

    /// Locked state `locked` with the lock released according to the
    /// virtual-channel state `target`.
    pub fn unlock_state(&self, k: usize, locked: &ChannelState, target: &ChannelState) -> ChannelState {
        let [l, r] = self.pc_parties(k);
        let [a, b] = self.ends();
        ChannelState::new(
            Self::pc(k),
            locked.seq + 1,
            &[(l, locked.balance_of(l) + target.balance_of(a)), (r, locked.balance_of(r) + target.balance_of(b))],
        )
    }

    pub fn contract_info(&self) -> ContractInfo {
        ContractInfo { contracts: (0..self.hops()).map(Self::contract).collect(), leader: self.leader }
    }

    pub fn register_body(&self) -> RegisterBody {
        RegisterBody::new(self.parties.clone(), &self.committees, self.s1(), self.v, self.contract_info())
            .expect("topology is consistent")
    }

    /// A well-formed virtual-channel state: both end parties, summing to `v`,
    /// no lock.
    pub fn valid_vc_state(&self, st: &ChannelState) -> bool {
        let [a, b] = self.ends();
        st.channel_id == VC_ID
            && st.lock.is_none()
            && st.balances.len() == 2
            && st.balances.contains_key(&a)
            && st.balances.contains_key(&b)
            && st.total() == self.v
    }
}

/// `A, I, B` for one intermediary; letters in path order otherwise.
fn party_label(i: usize, hops: usize) -> String {
    if hops == 2 {
        ["A", "I", "B"][i].to_string()
    } else {
        char::from(b'A' + i as u8).to_string()
    }
}
