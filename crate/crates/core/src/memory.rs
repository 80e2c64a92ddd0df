//! Accounting for transient distance-block storage.
//!
//! The pipeline's memory contract is that live block entries never exceed
//! R * b * n (plus one mini-center chunk), and that no n^2 allocation ever
//! happens. The meter tracks entry counts, not bytes; leases are taken
//! before a block is materialized and released when it is dropped.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

#[derive(Debug, Default)]
pub struct MemoryMeter {
    current: AtomicU64,
    peak: AtomicU64,
    largest: AtomicU64,
}

impl MemoryMeter {
    pub fn new() -> Arc<Self> {
        Arc::new(MemoryMeter::default())
    }

    /// Reserves `entries` slots; the returned lease releases them on drop.
    pub fn lease(self: &Arc<Self>, entries: u64) -> BlockLease {
        let now = self.current.fetch_add(entries, Ordering::SeqCst) + entries;
        self.peak.fetch_max(now, Ordering::SeqCst);
        self.largest.fetch_max(entries, Ordering::SeqCst);
        BlockLease {
            meter: Arc::clone(self),
            entries,
        }
    }

    /// Highest simultaneous number of tracked entries.
    pub fn peak_entries(&self) -> u64 {
        self.peak.load(Ordering::SeqCst)
    }

    /// Largest single tracked allocation.
    pub fn largest_entries(&self) -> u64 {
        self.largest.load(Ordering::SeqCst)
    }

    pub fn current_entries(&self) -> u64 {
        self.current.load(Ordering::SeqCst)
    }
}

pub struct BlockLease {
    meter: Arc<MemoryMeter>,
    entries: u64,
}

impl Drop for BlockLease {
    fn drop(&mut self) {
        self.meter.current.fetch_sub(self.entries, Ordering::SeqCst);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_tracks_overlapping_leases() {
        let meter = MemoryMeter::new();
        let a = meter.lease(100);
        {
            let _b = meter.lease(50);
            assert_eq!(meter.current_entries(), 150);
        }
        assert_eq!(meter.current_entries(), 100);
        drop(a);
        assert_eq!(meter.current_entries(), 0);
        assert_eq!(meter.peak_entries(), 150);
        assert_eq!(meter.largest_entries(), 100);
    }
}
