//! Approximate top-k: rank every candidate on a sample, then rescore only
//! the k survivors on the full data.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::counters::Counters;
use crate::error::Result;
use crate::frame::Frame;
use crate::vis::{RowView, ScoreOutcome, ScorePlan};

pub const DEFAULT_PRUNE_MARGIN: f64 = 2.0;

/// Inputs and outcome of the prune cost test.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PruneDecision {
    pub n: usize,
    pub k: usize,
    pub t_exact: f64,
    pub t_approx: f64,
    pub margin: f64,
    pub apply: bool,
}

impl PruneDecision {
    pub fn exact(n: usize, k: usize) -> PruneDecision {
        PruneDecision { n, k, t_exact: 0.0, t_approx: 0.0, margin: 0.0, apply: false }
    }
}

/// Prune when `n > k` and scoring everything exactly costs at least `margin`
/// times the two-pass alternative `n * t_approx + k * t_exact`.
pub fn should_prune(n: usize, k: usize, t_exact: f64, t_approx: f64, margin: f64) -> PruneDecision {
    let exact = n as f64 * t_exact;
    let approx = n as f64 * t_approx + k as f64 * t_exact;
    let apply = n > k && exact >= margin * approx && approx > 0.0;
    PruneDecision { n, k, t_exact, t_approx, margin, apply }
}

/// One scored candidate, by position in the candidate list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankEntry {
    pub index: usize,
    pub score: Option<f64>,
    pub secondary: u64,
    pub rows: usize,
}

/// Score descending with missing scores last, then the secondary key
/// ascending, then the candidate's tie key.
pub fn compare_entries(a: &RankEntry, b: &RankEntry, tie_keys: &[String]) -> Ordering {
    let by_score = match (a.score, b.score) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    };
    by_score.then(a.secondary.cmp(&b.secondary)).then_with(|| tie_keys[a.index].cmp(&tie_keys[b.index]))
}

pub fn rank_entries(entries: &mut [RankEntry], tie_keys: &[String]) {
    entries.sort_by(|a, b| compare_entries(a, b, tie_keys));
}

/// Evaluates every plan on `view`, counting each as one scoring operation.
pub fn score_all(plans: &[ScorePlan], view: &RowView<'_>, counters: &Counters) -> Result<Vec<ScoreOutcome>> {
    plans
        .iter()
        .map(|p| {
            counters.scored();
            p.evaluate(view)
        })
        .collect()
}

fn entries(outcomes: &[ScoreOutcome], secondary: &[u64], only: Option<&[usize]>) -> Vec<RankEntry> {
    let make = |i: usize, o: &ScoreOutcome| RankEntry { index: i, score: o.score, secondary: secondary[i], rows: o.rows };
    match only {
        None => outcomes.iter().enumerate().filter(|(_, o)| o.rows > 0).map(|(i, o)| make(i, o)).collect(),
        Some(idx) => idx.iter().zip(outcomes).filter(|(_, o)| o.rows > 0).map(|(&i, o)| make(i, o)).collect(),
    }
}

/// Exact ranking of every candidate on the full frame. Candidates with no
/// rows are dropped.
pub fn exact_topk(
    plans: &[ScorePlan],
    secondary: &[u64],
    tie_keys: &[String],
    frame: &Frame,
    k: usize,
    counters: &Counters,
) -> Result<Vec<RankEntry>> {
    let outcomes = score_all(plans, &RowView::full(frame), counters)?;
    let mut ranked = entries(&outcomes, secondary, None);
    rank_entries(&mut ranked, tie_keys);
    ranked.truncate(k);
    Ok(ranked)
}

/// Pass 1 ranks all candidates on the rows in `sample`; pass 2 rescores the
/// best `k` on the full frame and reranks them. Returned scores are exact.
pub fn approx_topk(
    plans: &[ScorePlan],
    secondary: &[u64],
    tie_keys: &[String],
    frame: &Frame,
    sample: &[usize],
    k: usize,
    counters: &Counters,
) -> Result<Vec<RankEntry>> {
    let view = RowView::sample(frame, sample);
    let first: Vec<ScoreOutcome> = plans
        .iter()
        .map(|p| {
            counters.pass1(view.len());
            p.evaluate(&view)
        })
        .collect::<Result<_>>()?;
    let mut ranked = entries(&first, secondary, None);
    rank_entries(&mut ranked, tie_keys);
    ranked.truncate(k);
    let survivors: Vec<usize> = ranked.iter().map(|e| e.index).collect();
    let chosen: Vec<ScorePlan> = survivors.iter().map(|&i| plans[i].clone()).collect();
    let second = score_all(&chosen, &RowView::full(frame), counters)?;
    let mut ranked = entries(&second, secondary, Some(&survivors));
    rank_entries(&mut ranked, tie_keys);
    Ok(ranked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{Column, ColumnData};
    use alloc::format;
    use alloc::vec;

    #[test]
    fn prune_rule() {
        assert!(!should_prune(10, 15, 1.0, 0.1, 2.0).apply);
        assert!(should_prune(100, 15, 1.0, 0.1, 2.0).apply);
        // 100 >= 2 * (100 * 0.45 + 15) fails
        assert!(!should_prune(100, 15, 1.0, 0.45, 2.0).apply);
        assert!(!should_prune(100, 15, 0.0, 0.0, 2.0).apply);
    }

    #[test]
    fn full_sample_matches_exact() {
        let n = 300;
        let cols: Vec<Column> = (0..6)
            .map(|c| {
                let data = (0..n).map(|r| Some(((r * (c + 1)) % 97) as f64 + (r as f64) * c as f64 * 0.01)).collect();
                Column::new(format!("c{c}"), ColumnData::Float(data))
            })
            .collect();
        let f = Frame::new(cols, "t").unwrap();
        let mut plans = Vec::new();
        let mut ties = Vec::new();
        for a in 0..6 {
            for b in a + 1..6 {
                plans.push(ScorePlan::Pearson { x: format!("c{a}"), y: format!("c{b}"), filters: vec![] });
                ties.push(format!("c{a}\u{1}c{b}"));
            }
        }
        let sec = vec![0; plans.len()];
        let counters = Counters::default();
        let exact = exact_topk(&plans, &sec, &ties, &f, 5, &counters).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let approx = approx_topk(&plans, &sec, &ties, &f, &all, 5, &counters).unwrap();
        assert_eq!(exact, approx);
    }
}
