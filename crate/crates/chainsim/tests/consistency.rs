mod common;

use common::Fixture;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thunderdome_chainsim::{ChainConfig, Phase, Tx};
use thunderdome_core::{ContractId, UpdateAnnouncement};

/// Registers every contract, then mines randomly sized, randomly ordered
/// batches drawn from a pool of pending transactions until the pool drains.
/// Each contract's quorum of publications enters the pool as one batch.
/// Returns the first candidate each contract held: its own decision, or the
/// state it adopted from a peer before its own quorum arrived.
fn run(hops: usize, seqs: &[(u64, u64)], seed: u64, config: ChainConfig) -> (Fixture, Vec<UpdateAnnouncement>) {
    let mut fx = Fixture::new(1, hops, config);
    let anns: Vec<UpdateAnnouncement> = seqs.iter().map(|&(s, a)| fx.vc_ann(s, a)).collect();
    for k in 0..hops {
        fx.mine(vec![fx.register_tx(k, k, 3)]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<Vec<Tx>> = (0..hops).map(|k| (0..3).map(|j| fx.publish_tx(k, j, &anns[k])).collect()).collect();
    let mut prev_seq = vec![0u64; hops];
    let mut first: Vec<Option<UpdateAnnouncement>> = vec![None; hops];
    while !pool.is_empty() {
        pool.shuffle(&mut rng);
        let take = rng.gen_range(1..=pool.len());
        let batch: Vec<Tx> = pool.drain(..take).flatten().collect();
        let out = fx.mine(batch);
        pool.extend(out.cross_checks.into_iter().map(|t| vec![t]));
        if !out.co_delivered.is_empty() {
            pool.push(out.co_delivered);
        }
        if pool.is_empty() {
            let held = fx.ledger.flush_held();
            if !held.is_empty() {
                pool.push(held);
            }
        }
        // A contract's candidate never moves to a lower sequence number.
        for k in 0..hops {
            let ws = fx.ledger.contract(ContractId(k as u32)).unwrap().ws.as_ref().map(|w| w.ann.clone());
            if first[k].is_none() {
                first[k] = ws.clone();
            }
            let seq = ws.map_or(0, |a| a.seq());
            assert!(seq >= prev_seq[k], "candidate of SC{k} went from {} to {seq}", prev_seq[k]);
            prev_seq[k] = seq;
        }
    }
    let first = first.into_iter().map(|a| a.expect("every contract ends with a candidate")).collect();
    (fx, first)
}

fn pick_seqs(hops: usize) -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((1u64..4, 0u64..=10), hops)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn all_contracts_finalize_the_same_state(
        hops in 2usize..=3,
        seqs in pick_seqs(3),
        seed in any::<u64>(),
        same_block in any::<bool>(),
    ) {
        let config = ChainConfig { cross_check: true, force_same_block: same_block };
        let (fx, firsts) = run(hops, &seqs[..hops], seed, config);
        let finals: Vec<_> = (0..hops)
            .map(|k| fx.ledger.contract(ContractId(k as u32)).unwrap())
            .inspect(|c| assert!(c.ws_final && c.phase == Phase::VcCrossChecking))
            .map(|c| c.ws.clone().unwrap().ann)
            .collect();
        prop_assert!(finals.windows(2).all(|w| w[0] == w[1]));
        let top = firsts.iter().map(|a| a.seq()).max().unwrap();
        prop_assert_eq!(finals[0].seq(), top);
        prop_assert!(firsts.contains(&finals[0]));
        prop_assert!(fx.ledger.conserved());
    }

    #[test]
    fn settlement_conserves_coins(
        seqs in pick_seqs(2),
        seed in any::<u64>(),
    ) {
        let (mut fx, _) = run(2, &seqs, seed, ChainConfig::default());
        fx.mine(vec![fx.proofs_tx(0, 0, vec![]), fx.proofs_tx(1, 1, vec![])]);
        prop_assert!(fx.ledger.all_closed());
        let settled = fx.ledger.settled();
        prop_assert_eq!(settled[0].1, settled[1].1);
        prop_assert!(fx.ledger.conserved());
        // The intermediary receives both halves of the virtual balance, so it
        // ends with its deposits minus the fee it paid as closer of SC1.
        let ingrid = fx.ledger.balance(fx.party(1));
        prop_assert_eq!(ingrid, common::START - 7 - 3 - 3 + fx.v);
    }
}

#[test]
fn without_cross_check_the_sides_can_diverge() {
    let cfg = ChainConfig { cross_check: false, force_same_block: false };
    let (fx, _) = run(2, &[(3, 10), (3, 0)], 7, cfg);
    let a = fx.ledger.contract(ContractId(0)).unwrap().ws.clone().unwrap().ann;
    let b = fx.ledger.contract(ContractId(1)).unwrap().ws.clone().unwrap().ann;
    assert_ne!(a, b);
}
