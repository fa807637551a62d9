use std::fmt;

use sha2::{Digest as _, Sha256};
use thunderdome_core::Digest;

/// One line of the trace: `step  event  from  to  summary  digest`, tab separated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub step: u64,
    pub event: &'static str,
    pub from: String,
    pub to: String,
    pub summary: String,
    pub digest: String,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}\t{}\t{}", self.step, self.event, self.from, self.to, self.summary, self.digest)
    }
}

/// Running digest over every record, plus the records themselves when
/// `keep_lines` is set.
#[derive(Clone)]
pub struct Trace {
    hasher: Sha256,
    lines: Option<Vec<String>>,
    count: u64,
}

impl Trace {
    pub fn new(keep_lines: bool) -> Trace {
        Trace { hasher: Sha256::new(), lines: keep_lines.then(Vec::new), count: 0 }
    }

    pub fn record(&mut self, rec: TraceRecord) {
        let line = rec.to_string();
        self.hasher.update(line.as_bytes());
        self.hasher.update(b"\n");
        self.count += 1;
        if let Some(lines) = &mut self.lines {
            lines.push(line);
        }
    }

    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn lines(&self) -> &[String] {
        self.lines.as_deref().unwrap_or(&[])
    }

    pub fn digest(&self) -> Digest {
        Digest(self.hasher.clone().finalize().into())
    }
}

impl fmt::Debug for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Trace").field("records", &self.count).field("digest", &self.digest()).finish()
    }
}
