//! Work counters used to observe what the engine computed.

use core::sync::atomic::{AtomicU64, Ordering};

#[derive(Debug, Default)]
pub struct Counters {
    metadata_computations: AtomicU64,
    dashboard_computations: AtomicU64,
    scoring_operations: AtomicU64,
    vis_processed: AtomicU64,
    pass1_scores: AtomicU64,
    pass1_max_rows: AtomicU64,
}

/// Plain copy of [`Counters`] at one instant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct CounterSnapshot {
    pub metadata_computations: u64,
    pub dashboard_computations: u64,
    pub scoring_operations: u64,
    pub vis_processed: u64,
    pub pass1_scores: u64,
    pub pass1_max_rows: u64,
}

impl Counters {
    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            metadata_computations: self.metadata_computations.load(Ordering::Relaxed),
            dashboard_computations: self.dashboard_computations.load(Ordering::Relaxed),
            scoring_operations: self.scoring_operations.load(Ordering::Relaxed),
            vis_processed: self.vis_processed.load(Ordering::Relaxed),
            pass1_scores: self.pass1_scores.load(Ordering::Relaxed),
            pass1_max_rows: self.pass1_max_rows.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        for c in [
            &self.metadata_computations,
            &self.dashboard_computations,
            &self.scoring_operations,
            &self.vis_processed,
            &self.pass1_scores,
            &self.pass1_max_rows,
        ] {
            c.store(0, Ordering::Relaxed);
        }
    }

    pub(crate) fn metadata(&self) {
        self.metadata_computations.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn dashboard(&self) {
        self.dashboard_computations.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn scored(&self) {
        self.scoring_operations.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn processed(&self) {
        self.vis_processed.fetch_add(1, Ordering::Relaxed);
    }

    pub(crate) fn pass1(&self, rows: usize) {
        self.pass1_scores.fetch_add(1, Ordering::Relaxed);
        self.pass1_max_rows.fetch_max(rows as u64, Ordering::Relaxed);
    }
}
