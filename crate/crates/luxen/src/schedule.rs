//! Runs a prepared dashboard's actions on a small worker pool, cheapest
//! first, handing each result to a sink the moment it is ready.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use luxen_core::engine::{PreparedAction, PreparedDashboard};
use luxen_core::{Dashboard, Engine, Recommendation};

/// One finished action as seen by a sink.
#[derive(Debug, Clone)]
pub struct Delivery {
    pub recommendation: Recommendation,
    /// Display position of the action.
    pub position: usize,
    /// Ordinal at which the action was started.
    pub started: usize,
}

fn failed(a: &PreparedAction, message: String) -> Recommendation {
    Recommendation {
        action: a.name.clone(),
        vises: Vec::new(),
        candidates: a.output.candidates.len(),
        truncated: false,
        prune: Some(a.prune),
        estimated_cost: a.estimated_cost,
        from_parent: a.input.from_parent,
        diagnostics: vec![format!("action failed: {message}")],
    }
}

fn run_guarded(engine: &Engine, a: &PreparedAction) -> Recommendation {
    catch_unwind(AssertUnwindSafe(|| engine.run_action(a))).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panicked".to_string());
        failed(a, message)
    })
}

/// Runs every action of `prepared` with up to `workers` threads. Actions are
/// started in `prepared.actions` order (ascending cost); completion order is
/// whatever it is. A panicking action yields an empty recommendation with a
/// diagnostic and does not disturb the rest.
pub fn run_dashboard(
    engine: &Engine,
    prepared: &PreparedDashboard,
    workers: usize,
    sink: &(dyn Fn(Delivery) + Sync),
) -> Dashboard {
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(prepared.actions.len()));
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(a) = prepared.actions.get(i) else { break };
        let rec = run_guarded(engine, a);
        sink(Delivery { recommendation: rec.clone(), position: a.position, started: i });
        done.lock().unwrap().push(rec);
    };
    let workers = workers.clamp(1, prepared.actions.len().max(1));
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(work);
            }
        });
    }
    engine.assemble(prepared, done.into_inner().unwrap())
}

/// Cached dashboard for `frame`, or a fresh one computed on the pool and
/// stored back. Returns whether it was a cache hit.
pub fn lookup_or_compute(
    engine: &Engine,
    frame: &mut luxen_core::Frame,
    k: usize,
    workers: usize,
    sink: &(dyn Fn(Delivery) + Sync),
) -> (std::sync::Arc<Dashboard>, bool) {
    if let Some(d) = frame.fresh_dashboard(k) {
        return (d.clone(), true);
    }
    let meta = engine.ensure_metadata(frame);
    let sample = engine.ensure_sample(frame);
    let prepared = engine.prepare(frame, meta, sample, k);
    let dashboard = std::sync::Arc::new(run_dashboard(engine, &prepared, workers, sink));
    frame.store_dashboard(prepared.stamp, k, dashboard.clone());
    (dashboard, false)
}
