//! Centralized TDMA schedules: a transient prefix followed by a cycle.

use alloc::format;
use alloc::vec::Vec;

use crate::contention::LinkSet;
use crate::error::{Error, Result};

/// Slot `u` (1-based) is served by `prefix[u-1]` while `u ≤ prefix.len()`,
/// then by the cycle repeating forever.
///
/// The five-node line schedule `{1,2,3,(1,4),2,3,(1,4),…}` is a one-slot
/// prefix `{1}` followed by the cycle `{2},{3},{1,4}` (zero-based links in
/// code).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    prefix: Vec<LinkSet>,
    cycle: Vec<LinkSet>,
}

impl Schedule {
    pub fn new(prefix: Vec<LinkSet>, cycle: Vec<LinkSet>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::Model("schedule cycle is empty".into()));
        }
        Ok(Schedule { prefix, cycle })
    }

    pub fn periodic(cycle: Vec<LinkSet>) -> Result<Self> {
        Schedule::new(Vec::new(), cycle)
    }

    /// The optimal schedule of the five-node line with contention range 3.
    pub fn five_node_line() -> Self {
        Schedule {
            prefix: alloc::vec![LinkSet::singleton(0)],
            cycle: alloc::vec![
                LinkSet::singleton(1),
                LinkSet::singleton(2),
                LinkSet::new(alloc::vec![0, 3]),
            ],
        }
    }

    pub fn prefix(&self) -> &[LinkSet] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[LinkSet] {
        &self.cycle
    }

    /// Positions in chain order: prefix first, then the cycle.
    pub fn positions(&self) -> impl Iterator<Item = &LinkSet> {
        self.prefix.iter().chain(self.cycle.iter())
    }

    pub fn num_positions(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    /// Position index serving slot `u ≥ 1`.
    pub fn position_of_slot(&self, slot: u64) -> usize {
        assert!(slot >= 1, "slots are numbered from 1");
        let p = self.prefix.len() as u64;
        if slot <= p {
            (slot - 1) as usize
        } else {
            self.prefix.len() + ((slot - 1 - p) % self.cycle.len() as u64) as usize
        }
    }

    pub fn links_in_slot(&self, slot: u64) -> &LinkSet {
        let pos = self.position_of_slot(slot);
        if pos < self.prefix.len() {
            &self.prefix[pos]
        } else {
            &self.cycle[pos - self.prefix.len()]
        }
    }

    pub fn contains_link(&self, link: usize) -> bool {
        self.positions().any(|s| s.contains(link))
    }

    pub fn require_link(&self, link: usize) -> Result<()> {
        if self.contains_link(link) {
            Ok(())
        } else {
            Err(Error::Model(format!("link {link} never appears in the schedule")))
        }
    }

    /// Successor of each position in the deterministic chain.
    pub fn successors(&self) -> Vec<usize> {
        let n = self.num_positions();
        (0..n)
            .map(|i| if i + 1 < n { i + 1 } else { self.prefix.len() })
            .collect()
    }
}
