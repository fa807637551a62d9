use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thunderdome_core::{digest, ActorId};

use crate::policy::AdversaryPolicy;
use crate::trace::{Trace, TraceRecord};

/// What the network needs to know about a message.
pub trait Payload {
    /// Short message kind, used by censorship and drop rules.
    fn kind(&self) -> &'static str;
    /// One-line human-readable description for the trace.
    fn summary(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Actor(ActorId),
    /// The singleton blockchain.
    Chain,
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Actor(a) => write!(f, "{a}"),
            Endpoint::Chain => f.write_str("chain"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Envelope<P> {
    /// Monotone send counter; breaks ties between equal delivery steps.
    pub id: u64,
    pub from: Endpoint,
    pub to: Endpoint,
    pub payload: P,
    pub sent_at: u64,
    pub deliver_at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub steps: u64,
    pub quiescent: bool,
    /// Step budget ran out while honest-origin envelopes were still pending.
    pub liveness_violation: bool,
}

pub struct Network<P> {
    policy: AdversaryPolicy,
    rng: ChaCha8Rng,
    now: u64,
    counter: u64,
    queue: BTreeMap<(u64, u64), (bool, Envelope<P>)>,
    trace: Trace,
    honest_sent: u64,
    honest_delivered: u64,
    dropped: u64,
}

impl<P: Payload> Network<P> {
    pub fn new(policy: AdversaryPolicy, keep_lines: bool) -> Network<P> {
        let rng = ChaCha8Rng::seed_from_u64(policy.seed);
        Network {
            policy,
            rng,
            now: 0,
            counter: 0,
            queue: BTreeMap::new(),
            trace: Trace::new(keep_lines),
            honest_sent: 0,
            honest_delivered: 0,
            dropped: 0,
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn policy(&self) -> &AdversaryPolicy {
        &self.policy
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Schedules `payload` with a policy-chosen delay. Returns the delivery
    /// step, or `None` if the adversary dropped it.
    pub fn send(&mut self, from: Endpoint, to: Endpoint, payload: P) -> Option<u64> {
        let drawn = self.rng.gen_range(1..=self.policy.horizon);
        let kind = payload.kind();
        if self.policy.drops(&from, &to, kind) {
            self.dropped += 1;
            self.trace.record(record(self.now, "drop", &from, &to, &payload));
            return None;
        }
        let delay = if self.policy.stall_all && !self.policy.is_byzantine(&from) {
            self.policy.horizon
        } else {
            self.policy.censorship_delay(&from, kind).unwrap_or(drawn)
        };
        Some(self.enqueue(from, to, payload, delay))
    }

    /// Schedules with an explicit delay, clamped to `[1, horizon]`. Used to
    /// co-deliver messages at the same step.
    pub fn send_after(&mut self, from: Endpoint, to: Endpoint, payload: P, delay: u64) -> u64 {
        let delay = delay.clamp(1, self.policy.horizon);
        self.enqueue(from, to, payload, delay)
    }

    /// A delay drawn from the adversary's stream, for callers that schedule
    /// several messages together.
    pub fn draw_delay(&mut self) -> u64 {
        if self.policy.stall_all {
            return self.policy.horizon;
        }
        self.rng.gen_range(1..=self.policy.horizon)
    }

    /// Seeded shuffle, for adversarial ordering decisions outside the queue.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.rng.gen_range(0..=i);
            items.swap(i, j);
        }
    }

    fn enqueue(&mut self, from: Endpoint, to: Endpoint, payload: P, delay: u64) -> u64 {
        let id = self.counter;
        self.counter += 1;
        let deliver_at = self.now + delay;
        let honest = !self.policy.is_byzantine(&from);
        if honest {
            self.honest_sent += 1;
        }
        let env = Envelope { id, from, to, payload, sent_at: self.now, deliver_at };
        self.queue.insert((deliver_at, id), (honest, env));
        deliver_at
    }

    /// Advances the clock by one step and returns everything due at the new
    /// step, in send order.
    pub fn step(&mut self) -> Vec<Envelope<P>> {
        self.now += 1;
        let mut batch = Vec::new();
        while let Some(entry) = self.queue.first_entry() {
            if entry.key().0 != self.now {
                break;
            }
            let (honest, env) = entry.remove();
            if honest {
                self.honest_delivered += 1;
            }
            self.trace.record(record(self.now, "deliver", &env.from, &env.to, &env.payload));
            batch.push(env);
        }
        batch
    }

    pub fn next_delivery(&self) -> Option<u64> {
        self.queue.keys().next().map(|k| k.0)
    }

    /// Skips empty steps so the next [`step`](Self::step) delivers something.
    pub fn fast_forward(&mut self) {
        if let Some(next) = self.next_delivery() {
            if next > self.now + 1 {
                self.now = next - 1;
            }
        }
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn pending_honest(&self) -> usize {
        self.queue.values().filter(|(h, _)| *h).count()
    }

    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn honest_sent(&self) -> u64 {
        self.honest_sent
    }

    pub fn honest_delivered(&self) -> u64 {
        self.honest_delivered
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Appends a decision-log record for `actor`.
    pub fn note(&mut self, actor: &str, summary: String) {
        let rec = TraceRecord {
            step: self.now,
            event: "note",
            from: actor.to_string(),
            to: "-".into(),
            digest: digest(summary.as_bytes()).short(),
            summary,
        };
        self.trace.record(rec);
    }

    /// Runs until nothing is pending or `max_steps` clock steps have elapsed.
    pub fn run_until_quiescent<F>(&mut self, max_steps: u64, mut handle: F) -> RunOutcome
    where
        F: FnMut(&mut Network<P>, Envelope<P>),
    {
        let start = self.now;
        loop {
            if self.is_quiescent() {
                return RunOutcome { steps: self.now - start, quiescent: true, liveness_violation: false };
            }
            self.fast_forward();
            if self.now + 1 - start > max_steps {
                return RunOutcome {
                    steps: self.now - start,
                    quiescent: false,
                    liveness_violation: self.pending_honest() > 0,
                };
            }
            for env in self.step() {
                handle(self, env);
            }
        }
    }
}

fn record<P: Payload>(step: u64, event: &'static str, from: &Endpoint, to: &Endpoint, p: &P) -> TraceRecord {
    let summary = p.summary();
    TraceRecord {
        step,
        event,
        from: from.to_string(),
        to: to.to_string(),
        digest: digest(summary.as_bytes()).short(),
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug)]
    struct Msg(&'static str, u32);

    impl Payload for Msg {
        fn kind(&self) -> &'static str {
            self.0
        }
        fn summary(&self) -> String {
            format!("{}#{}", self.0, self.1)
        }
    }

    fn a() -> Endpoint {
        Endpoint::Actor(ActorId::party(0, "A"))
    }

    #[test]
    fn empty_step_advances_clock() {
        let mut net: Network<Msg> = Network::new(AdversaryPolicy::new(1, 50), false);
        assert!(net.step().is_empty());
        assert_eq!(net.now(), 1);
    }

    #[test]
    fn equal_delivery_steps_follow_send_order() {
        let mut net = Network::new(AdversaryPolicy::new(1, 50), false);
        net.send_after(a(), Endpoint::Chain, Msg("x", 1), 3);
        net.send_after(a(), Endpoint::Chain, Msg("x", 2), 3);
        net.fast_forward();
        let batch = net.step();
        assert_eq!(batch.iter().map(|e| e.payload.1).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn stall_all_uses_full_horizon() {
        let mut p = AdversaryPolicy::new(3, 17);
        p.stall_all = true;
        let mut net = Network::new(p, false);
        assert_eq!(net.send(a(), Endpoint::Chain, Msg("tx", 0)), Some(17));
    }

    #[test]
    fn budget_exhaustion_flags_liveness() {
        let mut net = Network::new(AdversaryPolicy::new(3, 10), false);
        let out = net.run_until_quiescent(1_000, |net, env| {
            // Ping-pong forever.
            net.send(env.to, env.from, env.payload);
        });
        assert!(out.quiescent);
        net.send(a(), Endpoint::Chain, Msg("p", 0));
        let out = net.run_until_quiescent(100, |net, env| {
            net.send(env.to, env.from, env.payload);
        });
        assert!(out.liveness_violation);
    }
}
