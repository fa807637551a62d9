#![allow(dead_code)]

use std::collections::BTreeMap;

use thunderdome_chainsim::{BlockOutput, ChainConfig, DeployParams, Ledger, Tx, TxBody};
use thunderdome_core::{
    make_register_tx, required_collateral, ActorId, ChannelId, ChannelState, Coins, ContractId, ContractInfo,
    ProofOfFraud, RegisterTx, SignedStatePublication, SigningKey, UpdateAnnouncement, VirtualLock,
};

pub const VC: ChannelId = ChannelId(100);
pub const START: Coins = 1_000;

/// A virtual channel over `hops` payment channels with every contract
/// deployed and funded. Party 0 and party `hops` are the end parties.
pub struct Fixture {
    pub f: u32,
    pub v: Coins,
    /// End-party shares of the initial state.
    pub split: (Coins, Coins),
    pub parties: Vec<SigningKey>,
    pub committees: Vec<Vec<SigningKey>>,
    pub register: RegisterTx,
    pub ledger: Ledger,
    pub step: u64,
}

impl Fixture {
    pub fn new(f: u32, hops: usize, config: ChainConfig) -> Fixture {
        Fixture::with_leader(f, hops, config, 0)
    }

    pub fn with_leader(f: u32, hops: usize, config: ChainConfig, leader: u32) -> Fixture {
        let v = 10;
        let split = (3, 7);
        let n = 3 * f as u16 + 1;
        let labels = ["A", "I", "J", "B"];
        let parties: Vec<SigningKey> = (0..=hops)
            .map(|i| {
                let label = if i == hops { "B" } else { labels[i] };
                SigningKey::new(ActorId::party(i as u16, label))
            })
            .collect();
        let committees: Vec<Vec<SigningKey>> =
            (0..hops).map(|k| (0..n).map(|j| SigningKey::new(ActorId::warden(k as u16 * n + j))).collect()).collect();
        let mut balances = BTreeMap::new();
        for p in &parties {
            balances.insert(p.owner(), START);
        }
        for w in committees.iter().flatten() {
            balances.insert(w.owner(), START);
        }
        let ledger = Ledger::new(config, balances);
        let info = ContractInfo { contracts: (0..hops as u32).map(ContractId).collect(), leader: ContractId(leader) };
        let s1 = ChannelState::new(VC, 1, &[(parties[0].owner(), split.0), (parties[hops].owner(), split.1)]);
        let keys: Vec<&SigningKey> = parties.iter().collect();
        let ids: Vec<Vec<ActorId>> = committees.iter().map(|c| c.iter().map(|k| k.owner()).collect()).collect();
        let register = make_register_tx(&keys, &ids, s1, v, info).unwrap();
        let mut fx = Fixture { f, v, split, parties, committees, register, ledger, step: 0 };
        fx.deploy_all();
        fx
    }

    pub fn hops(&self) -> usize {
        self.committees.len()
    }

    pub fn party(&self, i: usize) -> ActorId {
        self.parties[i].owner()
    }

    pub fn warden(&self, k: usize, j: usize) -> ActorId {
        self.committees[k][j].owner()
    }

    pub fn collateral(&self) -> Coins {
        required_collateral(self.v, self.f).unwrap()
    }

    fn deploy_all(&mut self) {
        for k in 0..self.hops() {
            let params = DeployParams {
                channel: ChannelId(k as u32),
                parties: [self.party(k), self.party(k + 1)],
                deposits: [self.split.0, self.split.1],
                committee: self.committees[k].iter().map(|w| w.owner()).collect(),
                f: self.f,
                collateral: self.collateral(),
            };
            let mut txs = vec![
                Tx::from_actor(self.party(k), TxBody::DeployChannel { contract: ContractId(k as u32), params }),
                Tx::from_actor(self.party(k + 1), TxBody::FundParty { contract: ContractId(k as u32) }),
            ];
            for w in &self.committees[k] {
                txs.push(Tx::from_actor(w.owner(), TxBody::FundWarden { contract: ContractId(k as u32) }));
            }
            self.mine(txs);
        }
    }

    pub fn mine(&mut self, txs: Vec<Tx>) -> BlockOutput {
        self.step += 1;
        let out = self.ledger.mine_block(self.step, "test", txs);
        assert!(self.ledger.violations().is_empty(), "{:?}", self.ledger.violations());
        out
    }

    /// Virtual-channel state with the given left end-party share.
    pub fn vc_ann(&self, seq: u64, a_share: Coins) -> UpdateAnnouncement {
        let (a, b) = (&self.parties[0], &self.parties[self.hops()]);
        let st = ChannelState::new(VC, seq, &[(a.owner(), a_share), (b.owner(), self.v - a_share)]);
        UpdateAnnouncement::new(st.clone(), st.sign_with(a), st.sign_with(b))
    }

    /// Payment-channel state after the virtual lock.
    pub fn pc_locked(&self, k: usize) -> UpdateAnnouncement {
        let (l, r) = (&self.parties[k], &self.parties[k + 1]);
        let st = ChannelState::new(ChannelId(k as u32), 2, &[(l.owner(), 0), (r.owner(), 0)])
            .with_lock(VirtualLock { vc: VC, amount: self.v });
        UpdateAnnouncement::new(st.clone(), st.sign_with(l), st.sign_with(r))
    }

    pub fn pc_plain(&self, k: usize, seq: u64, left: Coins) -> UpdateAnnouncement {
        let (l, r) = (&self.parties[k], &self.parties[k + 1]);
        let st = ChannelState::new(ChannelId(k as u32), seq, &[(l.owner(), left), (r.owner(), self.v - left)]);
        UpdateAnnouncement::new(st.clone(), st.sign_with(l), st.sign_with(r))
    }

    pub fn register_tx(&self, k: usize, closer: usize, fee: Coins) -> Tx {
        Tx::from_actor(
            self.party(closer),
            TxBody::RegisterVC { contract: ContractId(k as u32), register: self.register.clone(), fee },
        )
    }

    pub fn publication(&self, k: usize, j: usize, ann: &UpdateAnnouncement) -> SignedStatePublication {
        SignedStatePublication::new(&self.committees[k][j], ann.clone())
    }

    pub fn publish_tx(&self, k: usize, j: usize, ann: &UpdateAnnouncement) -> Tx {
        Tx::from_actor(
            self.warden(k, j),
            TxBody::PublishState {
                contract: ContractId(k as u32),
                vc: Some(self.publication(k, j, ann)),
                pc: Some(self.publication(k, j, &self.pc_locked(k))),
            },
        )
    }

    pub fn proofs_tx(&self, k: usize, submitter: usize, proofs: Vec<ProofOfFraud>) -> Tx {
        Tx::from_actor(self.party(submitter), TxBody::SubmitProofs { contract: ContractId(k as u32), proofs })
    }

    /// Proof that warden `j` of committee `k` published `published` while
    /// having signed `conflicting`.
    pub fn proof(
        &self,
        k: usize,
        j: usize,
        published: &UpdateAnnouncement,
        conflicting: &UpdateAnnouncement,
    ) -> ProofOfFraud {
        let w = &self.committees[k][j];
        ProofOfFraud {
            accused: w.owner(),
            published: SignedStatePublication::new(w, published.clone()),
            conflicting: conflicting.clone(),
            conflicting_sig: w.sign(&conflicting.warden_payload()),
        }
    }
}
