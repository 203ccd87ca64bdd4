use std::sync::atomic::{AtomicU64, Ordering};

/// Cumulative counter of real floating point operations.
///
/// Counts are charged coarsely, once per kernel or loop, so the totals are
/// deterministic and independent of thread scheduling.
#[derive(Debug, Default)]
pub struct OpCounter(AtomicU64);

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&self, flops: u64) {
        self.0.fetch_add(flops, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.0.store(0, Ordering::Relaxed);
    }
}
