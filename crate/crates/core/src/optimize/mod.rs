//! The three performance mechanisms: lazy memoized recomputation (wflow),
//! approximate two-pass top-k (prune) and cost-ordered scheduling.

pub mod prune;
pub mod sample;
pub mod schedule;

pub use prune::{approx_topk, compare_entries, exact_topk, rank_entries, score_all, should_prune, PruneDecision, RankEntry, DEFAULT_PRUNE_MARGIN};
pub use sample::{make_sample, SampleCache, DEFAULT_SAMPLE_CAP, DEFAULT_SEED};
pub use schedule::{plan_schedule, ScheduleEntry};
