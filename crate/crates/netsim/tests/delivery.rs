use proptest::prelude::*;
use thunderdome_core::ActorId;
use thunderdome_netsim::{AdversaryPolicy, Censorship, DropRule, Endpoint, Network, Payload};

#[derive(Clone, Debug)]
struct Msg {
    kind: &'static str,
    n: u32,
}

impl Payload for Msg {
    fn kind(&self) -> &'static str {
        self.kind
    }
    fn summary(&self) -> String {
        format!("{}:{}", self.kind, self.n)
    }
}

fn actor(i: u16) -> Endpoint {
    Endpoint::Actor(ActorId::party(i, "P"))
}

/// Sends `count` messages from a few actors at interleaved times, then drains.
fn run(policy: AdversaryPolicy, sends: &[(u16, u8)]) -> (Vec<(u64, u64, u32)>, String) {
    let mut net: Network<Msg> = Network::new(policy, true);
    let mut log = Vec::new();
    for (n, &(from, gap)) in sends.iter().enumerate() {
        for _ in 0..gap {
            for env in net.step() {
                log.push((env.sent_at, env.deliver_at, env.payload.n));
            }
        }
        net.send(actor(from), Endpoint::Chain, Msg { kind: "tx", n: n as u32 });
    }
    net.run_until_quiescent(u64::MAX, |_, env| log.push((env.sent_at, env.deliver_at, env.payload.n)));
    (log, net.trace().digest().to_string())
}

proptest! {
    #[test]
    fn same_seed_same_schedule(seed in any::<u64>(), h in 1u64..80, sends in prop::collection::vec((0u16..4, 0u8..5), 1..40)) {
        let a = run(AdversaryPolicy::new(seed, h), &sends);
        let b = run(AdversaryPolicy::new(seed, h), &sends);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn honest_delivery_within_horizon(seed in any::<u64>(), h in 1u64..80, sends in prop::collection::vec((0u16..4, 0u8..5), 1..40)) {
        let (log, _) = run(AdversaryPolicy::new(seed, h), &sends);
        prop_assert_eq!(log.len(), sends.len());
        for (sent, at, _) in log {
            prop_assert!(at > sent && at <= sent + h);
        }
    }

    #[test]
    fn censorship_is_exact_and_clamped(seed in any::<u64>(), h in 1u64..60, delay in 0u64..100) {
        let mut p = AdversaryPolicy::new(seed, h);
        p.censorship_targets.push(Censorship { target: ActorId::party(1, "P"), kind: "tx".into(), delay });
        let mut net = Network::new(p, false);
        let at = net.send(actor(1), Endpoint::Chain, Msg { kind: "tx", n: 0 }).unwrap();
        prop_assert_eq!(at, delay.clamp(1, h));
        // Other kinds are unaffected.
        let other = net.send(actor(1), Endpoint::Chain, Msg { kind: "ack", n: 1 }).unwrap();
        prop_assert!((1..=h).contains(&other));
    }

    #[test]
    fn drops_only_touch_byzantine_senders(seed in any::<u64>(), byz in any::<bool>()) {
        let mut p = AdversaryPolicy::new(seed, 10);
        let target = ActorId::party(2, "P");
        p.drop_rules.push(DropRule { from: target, to: None, kind: None });
        if byz {
            p.byzantine.insert(target);
        }
        let mut net: Network<Msg> = Network::new(p, false);
        let sent = net.send(actor(2), Endpoint::Chain, Msg { kind: "tx", n: 0 });
        prop_assert_eq!(sent.is_none(), byz);
        let out = net.run_until_quiescent(100, |_, _| {});
        prop_assert!(out.quiescent);
        prop_assert_eq!(net.honest_sent(), net.honest_delivered());
    }
}

#[test]
fn different_seeds_usually_differ() {
    let sends: Vec<(u16, u8)> = (0..30).map(|i| (i % 3, 1)).collect();
    let digests: std::collections::BTreeSet<String> =
        (0..8).map(|s| run(AdversaryPolicy::new(s, 50), &sends).1).collect();
    assert!(digests.len() > 1);
}

#[test]
fn delivery_batches_are_in_send_order() {
    let mut net = Network::new(AdversaryPolicy::new(9, 5), false);
    for n in 0..200 {
        net.send(actor((n % 3) as u16), Endpoint::Chain, Msg { kind: "tx", n });
    }
    while !net.is_quiescent() {
        net.fast_forward();
        let batch = net.step();
        assert!(batch.windows(2).all(|w| w[0].id < w[1].id));
    }
}
