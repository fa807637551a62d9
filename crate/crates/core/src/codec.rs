//! Canonical byte encoding for signed payloads.
//!
//! Every field is written in declaration order. Variable-length data carries a
//! big-endian `u32` length prefix, integers are big-endian, and each payload
//! starts with a length-prefixed domain tag.

use crate::ids::{ActorId, ActorKind, ChannelId, ContractId};

#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new(domain: &str) -> Encoder {
        let mut enc = Encoder { buf: Vec::with_capacity(128) };
        enc.str(domain);
        enc
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.u32(b.len() as u32);
        self.buf.extend_from_slice(b);
        self
    }

    pub fn str(&mut self, s: &str) -> &mut Self {
        self.bytes(s.as_bytes())
    }

    pub fn actor(&mut self, a: &ActorId) -> &mut Self {
        self.u8(match a.kind {
            ActorKind::MainParty => 0,
            ActorKind::Warden => 1,
        });
        self.u32(a.index as u32);
        self.str(a.label())
    }

    pub fn channel(&mut self, c: ChannelId) -> &mut Self {
        self.u32(c.0)
    }

    pub fn contract(&mut self, c: ContractId) -> &mut Self {
        self.u32(c.0)
    }

    /// Length-prefixed sequence; the closure encodes one element.
    pub fn seq<T>(&mut self, items: &[T], mut each: impl FnMut(&mut Self, &T)) -> &mut Self {
        self.u32(items.len() as u32);
        for item in items {
            each(self, item);
        }
        self
    }

    pub fn nested(&mut self, value: &impl Canonical) -> &mut Self {
        let inner = value.to_bytes();
        self.bytes(&inner)
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub trait Canonical {
    fn encode(&self) -> Encoder;

    fn to_bytes(&self) -> Vec<u8> {
        self.encode().finish()
    }
}
