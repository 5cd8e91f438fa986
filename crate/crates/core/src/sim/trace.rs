use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::UtilitySpec;

/// First 8 bytes of SHA-256 over the canonical little-endian encoding of
/// every record.
pub type TraceDigest = u64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: u64,
    /// Packets admitted at each flow's source.
    pub admitted: Vec<u64>,
    /// Packets arriving at each flow's destination.
    pub delivered: Vec<u64>,
    /// Packets sent but lost on a link, per flow.
    pub lost: Vec<u64>,
    /// Total end-of-slot backlog.
    pub backlog: u64,
    /// `(sender, receiver, flow)` of every activation.
    pub activations: Vec<(usize, usize, usize)>,
}

impl SlotRecord {
    pub(crate) fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.slot.to_le_bytes());
        out.extend_from_slice(&(self.admitted.len() as u32).to_le_bytes());
        for v in self.admitted.iter().chain(&self.delivered).chain(&self.lost) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&self.backlog.to_le_bytes());
        out.extend_from_slice(&(self.activations.len() as u32).to_le_bytes());
        for &(i, j, s) in &self.activations {
            for v in [i, j, s] {
                out.extend_from_slice(&(v as u32).to_le_bytes());
            }
        }
    }
}

/// Streaming digest shared by both trace kinds.
#[derive(Clone, Default)]
pub(crate) struct Digester {
    hasher: Sha256,
    buf: Vec<u8>,
}

impl Digester {
    pub(crate) fn absorb(&mut self, encode: impl FnOnce(&mut Vec<u8>)) {
        self.buf.clear();
        encode(&mut self.buf);
        self.hasher.update(&self.buf);
    }

    pub(crate) fn finish(self) -> TraceDigest {
        let bytes = self.hasher.finalize();
        let mut head = [0u8; 8];
        head.copy_from_slice(&bytes[..8]);
        u64::from_le_bytes(head)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub records: Vec<SlotRecord>,
    /// End-of-slot backlog before slot 0 (always 0; kept for window sums).
    pub initial_backlog: u64,
    pub utilities: Vec<UtilitySpec<f64>>,
    pub digest: TraceDigest,
}

impl Trace {
    pub fn len(&self) -> u64 {
        self.records.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_flows(&self) -> usize {
        self.utilities.len()
    }

    /// Recomputes the digest from the records.
    pub fn recompute_digest(&self) -> TraceDigest {
        let mut d = Digester::default();
        for r in &self.records {
            d.absorb(|b| r.encode(b));
        }
        d.finish()
    }

    /// One JSON object per line.
    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn total_admitted(&self) -> u64 {
        self.records.iter().flat_map(|r| &r.admitted).sum()
    }

    pub fn total_delivered(&self) -> u64 {
        self.records.iter().flat_map(|r| &r.delivered).sum()
    }

    pub fn total_lost(&self) -> u64 {
        self.records.iter().flat_map(|r| &r.lost).sum()
    }

    pub fn final_backlog(&self) -> u64 {
        self.records.last().map_or(self.initial_backlog, |r| r.backlog)
    }
}
