use alloc::string::String;
use alloc::vec::Vec;

/// One action's place in the execution order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScheduleEntry {
    pub action: String,
    pub estimated_cost: f64,
    pub position: usize,
}

/// Orders actions by ascending cost; equal costs keep registration order.
/// Input order is registration order.
pub fn plan_schedule(entries: &[(String, f64)]) -> Vec<ScheduleEntry> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[a].1.total_cmp(&entries[b].1).then(a.cmp(&b)));
    order
        .into_iter()
        .enumerate()
        .map(|(position, i)| ScheduleEntry { action: entries[i].0.clone(), estimated_cost: entries[i].1, position })
        .collect()
}
