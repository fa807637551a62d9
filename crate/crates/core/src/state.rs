use std::collections::{BTreeMap, BTreeSet};

use crate::codec::{Canonical, Encoder};
use crate::collateral::quorum_size;
use crate::crypto::{digest, verify, Digest, Signature, SigningKey};
use crate::ids::{ActorId, ChannelId, ContractId};
use crate::Coins;

/// Coins of a payment channel reserved for a virtual channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VirtualLock {
    pub vc: ChannelId,
    pub amount: Coins,
}

/// Balances plus sequence number. Payment-channel states may carry a
/// [`VirtualLock`]; virtual-channel states never do.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChannelState {
    pub channel_id: ChannelId,
    pub seq: u64,
    pub balances: BTreeMap<ActorId, Coins>,
    pub lock: Option<VirtualLock>,
}

impl ChannelState {
    pub fn new(channel_id: ChannelId, seq: u64, balances: &[(ActorId, Coins)]) -> ChannelState {
        ChannelState { channel_id, seq, balances: balances.iter().copied().collect(), lock: None }
    }

    pub fn with_lock(mut self, lock: VirtualLock) -> ChannelState {
        self.lock = Some(lock);
        self
    }

    pub fn balance_of(&self, who: ActorId) -> Coins {
        self.balances.get(&who).copied().unwrap_or(0)
    }

    /// Free balances plus any locked amount.
    pub fn total(&self) -> Coins {
        self.balances.values().sum::<Coins>() + self.lock.map_or(0, |l| l.amount)
    }

    pub fn sign_with(&self, key: &SigningKey) -> Signature {
        key.sign(&self.to_bytes())
    }
}

impl Canonical for ChannelState {
    fn encode(&self) -> Encoder {
        let mut enc = Encoder::new("thunderdome/state/v1");
        enc.channel(self.channel_id).u64(self.seq);
        let entries: Vec<_> = self.balances.iter().collect();
        enc.seq(&entries, |e, (who, amt)| {
            e.actor(who).u64(**amt);
        });
        match self.lock {
            None => enc.u8(0),
            Some(l) => enc.u8(1).channel(l.vc).u64(l.amount),
        };
        enc
    }
}

/// A state with the signatures of both channel parties.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UpdateAnnouncement {
    pub state: ChannelState,
    pub sigs: [Signature; 2],
}

impl UpdateAnnouncement {
    pub fn new(state: ChannelState, first: Signature, second: Signature) -> UpdateAnnouncement {
        UpdateAnnouncement { state, sigs: [first, second] }
    }

    pub fn seq(&self) -> u64 {
        self.state.seq
    }

    pub fn channel(&self) -> ChannelId {
        self.state.channel_id
    }

    /// Two distinct signers, both over this state.
    pub fn well_formed(&self) -> bool {
        let bytes = self.state.to_bytes();
        self.sigs[0].signer() != self.sigs[1].signer() && self.sigs.iter().all(|s| verify(s, s.signer(), &bytes))
    }

    /// Well formed and signed by exactly the given pair, in any order.
    pub fn signed_by(&self, pair: [ActorId; 2]) -> bool {
        let signers: BTreeSet<_> = self.sigs.iter().map(|s| s.signer()).collect();
        self.well_formed() && signers == pair.into_iter().collect()
    }

    /// Bytes a warden signs when acknowledging this announcement.
    pub fn warden_payload(&self) -> Vec<u8> {
        let mut enc = Encoder::new("thunderdome/announcement/v1");
        enc.nested(&self.state);
        for s in &self.sigs {
            enc.actor(&s.signer()).bytes(&s.payload_digest().0);
        }
        enc.finish()
    }

    pub fn digest(&self) -> Digest {
        digest(&self.warden_payload())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuorumCert {
    pub announcement_digest: Digest,
    pub warden_sigs: Vec<Signature>,
    pub committee_id: ContractId,
}

/// True iff the certificate holds at least `2f + 1` distinct committee members
/// whose signatures cover the certified announcement. Repeated signers count once.
pub fn verify_quorum(cert: &QuorumCert, committee: &[ActorId], f: u32) -> bool {
    let members: BTreeSet<_> = committee.iter().copied().collect();
    let signers: BTreeSet<_> = cert
        .warden_sigs
        .iter()
        .filter(|s| s.payload_digest() == cert.announcement_digest && members.contains(&s.signer()))
        .map(|s| s.signer())
        .collect();
    signers.len() >= quorum_size(f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedStatePublication {
    pub warden: ActorId,
    pub announcement: UpdateAnnouncement,
    pub warden_sig: Signature,
}

impl SignedStatePublication {
    pub fn new(key: &SigningKey, announcement: UpdateAnnouncement) -> SignedStatePublication {
        let warden_sig = key.sign(&announcement.warden_payload());
        SignedStatePublication { warden: key.owner(), announcement, warden_sig }
    }

    pub fn is_valid(&self) -> bool {
        verify(&self.warden_sig, self.warden, &self.announcement.warden_payload())
    }
}

/// Evidence that a warden published one state while having signed a newer or
/// conflicting one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofOfFraud {
    pub accused: ActorId,
    pub published: SignedStatePublication,
    pub conflicting: UpdateAnnouncement,
    pub conflicting_sig: Signature,
}

/// Decidable from the proof alone. Both announcements must be well formed and
/// belong to the same channel, both warden signatures must verify under the
/// accused, and the conflicting state must have a higher sequence number or
/// the same sequence number with a different value.
pub fn validate_proof_of_fraud(pof: &ProofOfFraud) -> bool {
    let p = &pof.published.announcement;
    let c = &pof.conflicting;
    if pof.published.warden != pof.accused || !pof.published.is_valid() {
        return false;
    }
    if !verify(&pof.conflicting_sig, pof.accused, &c.warden_payload()) {
        return false;
    }
    if !p.well_formed() || !c.well_formed() || p.channel() != c.channel() {
        return false;
    }
    c.seq() > p.seq() || (c.seq() == p.seq() && c.state != p.state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parties() -> (SigningKey, SigningKey) {
        (SigningKey::new(ActorId::party(0, "A")), SigningKey::new(ActorId::party(2, "B")))
    }

    fn ann(seq: u64, a_bal: Coins) -> UpdateAnnouncement {
        let (ka, kb) = parties();
        let st = ChannelState::new(ChannelId(9), seq, &[(ka.owner(), a_bal), (kb.owner(), 10 - a_bal)]);
        let (sa, sb) = (st.sign_with(&ka), st.sign_with(&kb));
        UpdateAnnouncement::new(st, sa, sb)
    }

    fn pof(published: UpdateAnnouncement, conflicting: UpdateAnnouncement) -> ProofOfFraud {
        let w = SigningKey::new(ActorId::warden(1));
        let conflicting_sig = w.sign(&conflicting.warden_payload());
        ProofOfFraud {
            accused: w.owner(),
            published: SignedStatePublication::new(&w, published),
            conflicting,
            conflicting_sig,
        }
    }

    #[test]
    fn higher_seq_is_fraud() {
        assert!(validate_proof_of_fraud(&pof(ann(4, 3), ann(5, 3))));
    }

    #[test]
    fn identical_state_is_not_fraud() {
        assert!(!validate_proof_of_fraud(&pof(ann(5, 3), ann(5, 3))));
    }

    #[test]
    fn same_seq_other_value_is_fraud() {
        assert!(validate_proof_of_fraud(&pof(ann(5, 3), ann(5, 4))));
    }

    #[test]
    fn lower_seq_is_not_fraud() {
        assert!(!validate_proof_of_fraud(&pof(ann(5, 3), ann(4, 3))));
    }

    #[test]
    fn signatures_of_different_wardens_are_not_fraud() {
        let mut p = pof(ann(4, 3), ann(5, 3));
        let other = SigningKey::new(ActorId::warden(2));
        p.conflicting_sig = other.sign(&p.conflicting.warden_payload());
        assert!(!validate_proof_of_fraud(&p));
    }

    #[test]
    fn signed_by_checks_pair() {
        let a = ann(1, 5);
        assert!(a.signed_by([ActorId::party(2, "B"), ActorId::party(0, "A")]));
        assert!(!a.signed_by([ActorId::party(0, "A"), ActorId::party(1, "I")]));
    }

    fn cert(f: u32, signers: &[u16]) -> (QuorumCert, Vec<ActorId>) {
        let committee: Vec<_> = (0..(3 * f + 1) as u16).map(ActorId::warden).collect();
        let a = ann(2, 5);
        let sigs = signers.iter().map(|&i| SigningKey::new(ActorId::warden(i)).sign(&a.warden_payload())).collect();
        (QuorumCert { announcement_digest: a.digest(), warden_sigs: sigs, committee_id: ContractId(0) }, committee)
    }

    #[test]
    fn seven_of_ten_is_a_quorum() {
        let (c, committee) = cert(3, &[0, 1, 2, 3, 4, 5, 6]);
        assert!(verify_quorum(&c, &committee, 3));
    }

    #[test]
    fn six_of_ten_is_not() {
        let (c, committee) = cert(3, &[0, 1, 2, 3, 4, 5]);
        assert!(!verify_quorum(&c, &committee, 3));
    }

    #[test]
    fn duplicate_signers_count_once() {
        let (c, committee) = cert(3, &[0, 1, 2, 3, 4, 5, 5]);
        assert!(!verify_quorum(&c, &committee, 3));
    }

    #[test]
    fn outsiders_do_not_count() {
        let (c, committee) = cert(3, &[0, 1, 2, 3, 4, 5, 40]);
        assert!(!verify_quorum(&c, &committee, 3));
    }

    #[test]
    fn lock_is_part_of_total_and_encoding() {
        let st = ChannelState::new(ChannelId(1), 2, &[(ActorId::party(0, "A"), 4)]);
        let locked = st.clone().with_lock(VirtualLock { vc: ChannelId(7), amount: 6 });
        assert_eq!(locked.total(), 10);
        assert_ne!(st.to_bytes(), locked.to_bytes());
    }
}
