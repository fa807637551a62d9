//! Single-clock discrete-event network.
//!
//! Every message, including transactions headed for the chain, is an
//! [`Envelope`] scheduled by an [`AdversaryPolicy`]. Honest-origin envelopes
//! are always delivered within the horizon; only envelopes sent by actors the
//! policy marks Byzantine may be dropped. Delivery order is a pure function of
//! the seed and the send order.

mod network;
mod policy;
mod trace;

pub use network::{Endpoint, Envelope, Network, Payload, RunOutcome};
pub use policy::{AdversaryPolicy, Censorship, DropRule, DEFAULT_HORIZON};
pub use trace::{Trace, TraceRecord};
