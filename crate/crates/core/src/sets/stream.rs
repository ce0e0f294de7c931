//! Memoized decision-stream sets.
//!
//! A `StreamSet` is defined by a rule that decides membership of each `n` in
//! order, given the number of members accepted so far. Decisions are cached
//! as a bit vector with cumulative counts, so the stream is computed once and
//! is identical across calls and across segment boundaries. Greedy
//! target-density sets, null-modification outputs and midpoint sets are all
//! stream sets.

use std::sync::Mutex;

use crate::density::Charge;
use crate::error::Error;

/// A rule invoked exactly once per position, in increasing order of `n`.
///
/// `members_so_far` is the number of accepted positions among `1..n`. Rules
/// may keep private forward-only state; the owning `StreamSet` guarantees
/// sequential, single-threaded invocation under its lock.
pub trait SequentialRule: Send {
    fn step(&mut self, n: u64, members_so_far: u64) -> Result<bool, Error>;
}

const CUM_BLOCK: u64 = 4096;

struct StreamInner {
    rule: Box<dyn SequentialRule>,
    bits: Vec<u64>,
    /// `cum[b]` = members among positions `1 ..= b * CUM_BLOCK`.
    cum: Vec<u64>,
    filled: u64,
    members: u64,
}

pub struct StreamSet {
    label: String,
    charge: Option<Charge>,
    inner: Mutex<StreamInner>,
}

impl std::fmt::Debug for StreamSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StreamSet").field("label", &self.label).finish()
    }
}

impl StreamSet {
    pub fn new(label: impl Into<String>, rule: Box<dyn SequentialRule>) -> Self {
        StreamSet {
            label: label.into(),
            charge: None,
            inner: Mutex::new(StreamInner {
                rule,
                bits: Vec::new(),
                cum: Vec::new(),
                filled: 0,
                members: 0,
            }),
        }
    }

    pub fn with_charge(mut self, charge: Charge) -> Self {
        self.charge = Some(charge);
        self
    }

    /// Stable identity: two stream sets with the same label denote the same
    /// (deterministic) construction and therefore the same set.
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn declared_charge(&self) -> Option<&Charge> {
        self.charge.as_ref()
    }

    fn ensure(&self, n: u64) -> Result<(), Error> {
        let mut inner = self.inner.lock().unwrap();
        while inner.filled < n {
            let pos = inner.filled + 1;
            let members = inner.members;
            let take = inner.rule.step(pos, members)?;
            let idx = (pos - 1) as usize;
            if idx / 64 >= inner.bits.len() {
                inner.bits.push(0);
            }
            if take {
                inner.bits[idx / 64] |= 1 << (idx % 64);
                inner.members += 1;
            }
            inner.filled = pos;
            if pos % CUM_BLOCK == 0 {
                let m = inner.members;
                inner.cum.push(m);
            }
        }
        Ok(())
    }

    pub fn contains(&self, n: u64) -> Result<bool, Error> {
        self.ensure(n)?;
        let inner = self.inner.lock().unwrap();
        let idx = (n - 1) as usize;
        Ok(inner.bits[idx / 64] >> (idx % 64) & 1 == 1)
    }

    pub fn count(&self, n: u64) -> Result<u64, Error> {
        self.ensure(n)?;
        let inner = self.inner.lock().unwrap();
        let full_blocks = n / CUM_BLOCK;
        let mut total = if full_blocks == 0 { 0 } else { inner.cum[full_blocks as usize - 1] };
        let start = full_blocks * CUM_BLOCK; // positions 1..=start already counted
        let mut pos = start;
        // pop-count whole words in the partial block
        while pos + 64 <= n {
            total += inner.bits[(pos / 64) as usize].count_ones() as u64;
            pos += 64;
        }
        for p in pos + 1..=n {
            let idx = (p - 1) as usize;
            total += inner.bits[idx / 64] >> (idx % 64) & 1;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct EveryThird;
    impl SequentialRule for EveryThird {
        fn step(&mut self, n: u64, _m: u64) -> Result<bool, Error> {
            Ok(n % 3 == 0)
        }
    }

    #[test]
    fn counts_cross_segments() {
        let s = StreamSet::new("thirds", Box::new(EveryThird));
        assert_eq!(s.count(10_000).unwrap(), 3333);
        assert!(s.contains(9999).unwrap());
        assert!(!s.contains(10_000).unwrap());
        // re-query below the high-water mark
        assert_eq!(s.count(4096).unwrap(), 1365);
        assert_eq!(s.count(4097).unwrap(), 1365);
        assert_eq!(s.count(1).unwrap(), 0);
    }

    struct CountingRule {
        calls: u64,
    }
    impl SequentialRule for CountingRule {
        fn step(&mut self, n: u64, _m: u64) -> Result<bool, Error> {
            self.calls += 1;
            assert_eq!(self.calls, n, "rule must be called exactly once per position");
            Ok(n % 2 == 0)
        }
    }

    #[test]
    fn rule_called_once_per_position() {
        let s = StreamSet::new("evens", Box::new(CountingRule { calls: 0 }));
        assert_eq!(s.count(5000).unwrap(), 2500);
        assert_eq!(s.count(5000).unwrap(), 2500);
        assert!(s.contains(4).unwrap());
    }
}
