use std::fmt;

/// Maximum label length in bytes.
const LABEL_CAP: usize = 15;

/// Short inline tag such as `A`, `I` or `W7`. Copyable so ids stay cheap.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    len: u8,
    bytes: [u8; LABEL_CAP],
}

impl Label {
    /// Panics on labels longer than 15 bytes; labels are fixed at setup.
    pub fn new(text: &str) -> Label {
        assert!(text.len() <= LABEL_CAP, "label {text:?} too long");
        let mut bytes = [0u8; LABEL_CAP];
        bytes[..text.len()].copy_from_slice(text.as_bytes());
        Label { len: text.len() as u8, bytes }
    }

    pub fn as_str(&self) -> &str {
        std::str::from_utf8(&self.bytes[..self.len as usize]).expect("labels are utf-8")
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActorKind {
    MainParty,
    Warden,
}

/// Identity of a simulated participant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActorId {
    pub kind: ActorKind,
    pub index: u16,
    label: Label,
}

impl ActorId {
    pub fn party(index: u16, label: &str) -> ActorId {
        ActorId { kind: ActorKind::MainParty, index, label: Label::new(label) }
    }

    /// Wardens are labelled `W<index>`.
    pub fn warden(index: u16) -> ActorId {
        ActorId { kind: ActorKind::Warden, index, label: Label::new(&format!("W{index}")) }
    }

    pub fn label(&self) -> &str {
        self.label.as_str()
    }

    pub fn is_warden(&self) -> bool {
        self.kind == ActorKind::Warden
    }
}

impl fmt::Display for ActorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Identifier of a payment channel or virtual channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelId(pub u32);

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ch{}", self.0)
    }
}

/// Address of a payment-channel contract. Doubles as the committee id of the
/// warden committee attached to that channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContractId(pub u32);

impl fmt::Display for ContractId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SC{}", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        assert_eq!(ActorId::party(0, "A").label(), "A");
        assert_eq!(ActorId::warden(17).label(), "W17");
        assert!(ActorId::warden(3).is_warden());
    }

    #[test]
    fn ids_with_same_index_but_other_kind_differ() {
        assert_ne!(ActorId::party(1, "W1"), ActorId::warden(1));
    }
}
