//! Ties the pieces together: dashboard preparation, per-action execution
//! and assembly, with the cached (lazy) and uncached (eager) entry points.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::counters::Counters;
use crate::error::Result;
use crate::frame::{CacheStamp, Frame};
use crate::intent::{validate_intent, IntentSpec, ValidatedIntent};
use crate::metadata::{compute_metadata, MetadataSet};
use crate::optimize::{
    approx_topk, make_sample, rank_entries, should_prune, PruneDecision, RankEntry, SampleCache, DEFAULT_PRUNE_MARGIN,
    DEFAULT_SAMPLE_CAP, DEFAULT_SEED,
};
use crate::recommend::{
    dispatch_mode, ActionContext, ActionOutput, ActionRegistry, Dashboard, DashboardMode, IntentView, Recommendation, Scorer,
};
use crate::vis::{estimate_vis_cost, plan_for, process_vis, RowView, ScoreKind, ScorePlan, Vis};

pub const DEFAULT_K: usize = 15;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EngineConfig {
    /// Visualizations kept per action.
    pub k: usize,
    pub sample_cap: usize,
    pub seed: u64,
    pub prune_margin: f64,
    /// Allow the two-pass approximate top-k.
    pub prune: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            k: DEFAULT_K,
            sample_cap: DEFAULT_SAMPLE_CAP,
            seed: DEFAULT_SEED,
            prune_margin: DEFAULT_PRUNE_MARGIN,
            prune: true,
        }
    }
}

/// Immutable inputs shared by every action of one dashboard.
#[derive(Debug)]
pub struct ActionInput {
    pub frame: Frame,
    pub meta: Arc<MetadataSet>,
    pub sample: Option<Arc<SampleCache>>,
    pub from_parent: bool,
}

/// A triggered action with its candidates, ready to run on any thread.
#[derive(Debug, Clone)]
pub struct PreparedAction {
    pub name: String,
    /// Index in the registry, which is display order.
    pub position: usize,
    pub input: Arc<ActionInput>,
    pub output: ActionOutput,
    pub scorer: Scorer,
    pub estimated_cost: f64,
    pub prune: PruneDecision,
    pub k: usize,
}

/// Everything decided before any candidate is scored. `actions` is in
/// execution order: ascending estimated cost, registry order on ties.
#[derive(Debug, Clone)]
pub struct PreparedDashboard {
    pub mode: DashboardMode,
    pub stamp: CacheStamp,
    pub k: usize,
    pub current_vis: Option<Vis>,
    pub actions: Vec<PreparedAction>,
    pub diagnostics: Vec<String>,
}

#[derive(Debug)]
pub struct Engine {
    pub config: EngineConfig,
    registry: ActionRegistry,
    counters: Counters,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(EngineConfig::default())
    }
}

impl Engine {
    pub fn new(config: EngineConfig) -> Engine {
        Engine::with_registry(config, ActionRegistry::with_defaults())
    }

    pub fn with_registry(config: EngineConfig, registry: ActionRegistry) -> Engine {
        Engine { config, registry, counters: Counters::default() }
    }

    pub fn registry(&self) -> &ActionRegistry {
        &self.registry
    }

    pub fn registry_mut(&mut self) -> &mut ActionRegistry {
        &mut self.registry
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    /// Profiles `frame` unconditionally.
    pub fn compute_metadata(&self, frame: &Frame) -> MetadataSet {
        self.counters.metadata();
        compute_metadata(frame)
    }

    /// Cached metadata, computed and stored on a miss.
    pub fn ensure_metadata(&self, frame: &mut Frame) -> Arc<MetadataSet> {
        if let Some(m) = frame.fresh_metadata() {
            return m.clone();
        }
        let meta = Arc::new(self.compute_metadata(frame));
        frame.store_metadata(frame.version(), meta.clone());
        meta
    }

    fn needs_sample(&self, frame: &Frame) -> bool {
        self.config.prune && frame.row_count() > self.config.sample_cap
    }

    /// The frame's sample if pruning could use one, without storing it.
    pub fn sample_for(&self, frame: &Frame) -> Option<Arc<SampleCache>> {
        if !self.needs_sample(frame) {
            return None;
        }
        let (cap, seed) = (self.config.sample_cap, self.config.seed);
        Some(frame.fresh_sample(cap, seed).cloned().unwrap_or_else(|| Arc::new(make_sample(frame, cap, seed))))
    }

    /// Like [`Engine::sample_for`] but caches the sample on the frame.
    pub fn ensure_sample(&self, frame: &mut Frame) -> Option<Arc<SampleCache>> {
        let s = self.sample_for(frame)?;
        frame.store_sample(s.clone());
        Some(s)
    }

    pub fn validate(&self, frame: &mut Frame, intent: &IntentSpec) -> Result<ValidatedIntent> {
        let meta = self.ensure_metadata(frame);
        validate_intent(intent, &meta)
    }

    /// Parses, validates and installs an intent. Nothing is rewritten.
    pub fn set_intent<S: AsRef<str>>(&self, frame: &mut Frame, clauses: &[S]) -> Result<ValidatedIntent> {
        let intent = IntentSpec::parse(clauses)?;
        let validated = self.validate(frame, &intent)?;
        frame.set_intent(Some(intent));
        Ok(validated)
    }

    /// Dispatches the mode, compiles the intent, triggers and generates every
    /// action and orders them by estimated cost.
    pub fn prepare(&self, frame: &Frame, meta: Arc<MetadataSet>, sample: Option<Arc<SampleCache>>, k: usize) -> PreparedDashboard {
        self.counters.dashboard();
        let mode = dispatch_mode(frame);
        let mut prepared = PreparedDashboard {
            mode,
            stamp: frame.stamp(),
            k,
            current_vis: None,
            actions: Vec::new(),
            diagnostics: Vec::new(),
        };
        if mode == DashboardMode::History {
            if let Some(parent) = frame.parent() {
                let parent_meta = parent.fresh_metadata().cloned().unwrap_or_else(|| Arc::new(self.compute_metadata(parent)));
                let parent_sample = self.sample_for(parent);
                prepared.diagnostics.push(alloc::format!(
                    "only {} rows remain; showing recommendations for the frame before the last {}",
                    frame.row_count(),
                    frame.history().last().map_or("step", |e| kind_name(e.kind))
                ));
                self.prepare_in(parent, dispatch_mode(parent), parent_meta, parent_sample, true, &mut prepared);
                return prepared;
            }
        }
        self.prepare_in(frame, mode, meta, sample, false, &mut prepared);
        prepared
    }

    fn prepare_in(
        &self,
        frame: &Frame,
        mode: DashboardMode,
        meta: Arc<MetadataSet>,
        sample: Option<Arc<SampleCache>>,
        from_parent: bool,
        out: &mut PreparedDashboard,
    ) {
        let mut intent_view = None;
        if let (DashboardMode::Intent, Some(intent)) = (mode, frame.intent()) {
            match IntentView::build(intent, &meta) {
                Ok(view) => {
                    out.diagnostics.extend(view.diagnostics.iter().cloned());
                    if view.specs.is_empty() {
                        out.diagnostics.push("the intent does not produce any valid visualization".into());
                    }
                    intent_view = Some(view);
                }
                Err(e) => out.diagnostics.push(e.to_string()),
            }
        }
        if !from_parent {
            if let Some((_, spec)) = intent_view.as_ref().and_then(IntentView::base) {
                self.counters.processed();
                match process_vis(spec, frame, &meta) {
                    Ok(data) => {
                        let mut vis = Vis::new(spec.clone(), frame.version());
                        vis.data = Some(data);
                        out.current_vis = Some(vis);
                    }
                    Err(e) => out.diagnostics.push(e.to_string()),
                }
            }
        }
        let ctx = ActionContext { frame, meta: &meta, mode, intent: intent_view.as_ref() };
        let n_rows = frame.row_count();
        let sampled_rows = sample.as_ref().map_or(n_rows, |s| s.len());
        let mut triggered = Vec::new();
        for (position, action) in self.registry.iter().enumerate() {
            if !(action.trigger)(&ctx) {
                continue;
            }
            let output = (action.generator)(&ctx);
            let n = output.candidates.len();
            let exact: f64 = output.candidates.iter().map(|c| estimate_vis_cost(&c.spec, n_rows)).sum();
            let prunable = matches!(action.scorer, Scorer::Builtin(kind) if kind != ScoreKind::Unscored);
            let prune = if self.config.prune && prunable && sampled_rows < n_rows && n > 0 {
                let approx: f64 = output.candidates.iter().map(|c| estimate_vis_cost(&c.spec, sampled_rows)).sum();
                should_prune(n, out.k, exact / n as f64, approx / n as f64, self.config.prune_margin)
            } else {
                PruneDecision::exact(n, out.k)
            };
            triggered.push((position, action, output, exact, prune));
        }
        if triggered.is_empty() && out.current_vis.is_none() {
            out.diagnostics.push("no column supports a recommendation".into());
        }
        triggered.sort_by(|a, b| a.3.total_cmp(&b.3).then(a.0.cmp(&b.0)));
        let input = Arc::new(ActionInput { frame: frame.snapshot(), meta, sample, from_parent });
        out.actions = triggered
            .into_iter()
            .map(|(position, action, output, estimated_cost, prune)| PreparedAction {
                name: action.name.clone(),
                position,
                input: input.clone(),
                output,
                scorer: action.scorer.clone(),
                estimated_cost,
                prune,
                k: out.k,
            })
            .collect();
    }

    fn materialize(&self, a: &PreparedAction, index: usize, score: Option<f64>) -> Option<Vis> {
        let spec = &a.output.candidates[index].spec;
        self.counters.processed();
        let data = process_vis(spec, &a.input.frame, &a.input.meta).ok()?;
        if data.is_empty() {
            return None;
        }
        let mut vis = Vis::new(spec.clone(), a.input.frame.version());
        vis.data = Some(data);
        vis.score = score;
        Some(vis)
    }

    /// Scores, ranks and processes one action's candidates.
    pub fn run_action(&self, a: &PreparedAction) -> Recommendation {
        let cands = &a.output.candidates;
        let frame = &a.input.frame;
        let meta = &a.input.meta;
        let mut diagnostics = a.output.diagnostics.clone();
        let tie: Vec<String> = cands.iter().map(|c| c.spec.tie_key()).collect();
        let secondary: Vec<u64> = cands.iter().map(|c| c.secondary).collect();
        let truncated;
        let vises = match &a.scorer {
            Scorer::Builtin(kind) if a.prune.apply => {
                let plans: Vec<ScorePlan> = cands.iter().map(|c| plan_for(*kind, &c.spec, a.output.base.as_ref(), meta)).collect();
                let rows = a.input.sample.as_ref().map(|s| s.rows.clone()).unwrap_or_default();
                truncated = cands.len() > a.k;
                match approx_topk(&plans, &secondary, &tie, frame, &rows, a.k, &self.counters) {
                    Ok(ranked) => ranked.iter().filter_map(|e| self.materialize(a, e.index, e.score)).collect(),
                    Err(e) => {
                        diagnostics.push(e.to_string());
                        Vec::new()
                    }
                }
            }
            scorer => {
                let view = RowView::full(frame);
                let mut entries = Vec::new();
                let mut processed = Vec::new();
                for (i, c) in cands.iter().enumerate() {
                    self.counters.scored();
                    let (score, rows) = match scorer {
                        Scorer::Builtin(kind) => match plan_for(*kind, &c.spec, a.output.base.as_ref(), meta).evaluate(&view) {
                            Ok(o) => (o.score, o.rows),
                            Err(e) => {
                                diagnostics.push(e.to_string());
                                continue;
                            }
                        },
                        Scorer::Custom(f) => (f(frame, meta, &c.spec), 1),
                    };
                    if rows == 0 {
                        continue;
                    }
                    let Some(vis) = self.materialize(a, i, score) else { continue };
                    entries.push(RankEntry { index: i, score, secondary: secondary[i], rows });
                    processed.push(Some(vis));
                }
                let slot: Vec<usize> = entries.iter().map(|e| e.index).collect();
                rank_entries(&mut entries, &tie);
                truncated = entries.len() > a.k;
                entries.truncate(a.k);
                entries
                    .iter()
                    .filter_map(|e| {
                        let at = slot.iter().position(|&i| i == e.index)?;
                        processed[at].take()
                    })
                    .collect()
            }
        };
        Recommendation {
            action: a.name.clone(),
            vises,
            candidates: cands.len(),
            truncated,
            prune: Some(a.prune),
            estimated_cost: a.estimated_cost,
            from_parent: a.input.from_parent,
            diagnostics,
        }
    }

    /// Orders finished recommendations for display.
    pub fn assemble(&self, prepared: &PreparedDashboard, mut recs: Vec<Recommendation>) -> Dashboard {
        let position = |name: &str| prepared.actions.iter().find(|a| a.name == name).map_or(usize::MAX, |a| a.position);
        recs.sort_by_key(|r| position(&r.action));
        Dashboard {
            mode: prepared.mode,
            frame_version: prepared.stamp.version,
            intent_version: prepared.stamp.intent_version,
            k: prepared.k,
            current_vis: prepared.current_vis.clone(),
            recommendations: recs,
            diagnostics: prepared.diagnostics.clone(),
        }
    }

    /// Computes a dashboard from scratch without reading or writing the
    /// recommendation cache. `sink` sees each recommendation as it finishes,
    /// cheapest action first.
    pub fn generate_dashboard(&self, frame: &Frame, k: usize, mut sink: impl FnMut(&Recommendation)) -> Dashboard {
        let meta = frame.fresh_metadata().cloned().unwrap_or_else(|| Arc::new(self.compute_metadata(frame)));
        let prepared = self.prepare(frame, meta, self.sample_for(frame), k);
        let recs = prepared
            .actions
            .iter()
            .map(|a| {
                let r = self.run_action(a);
                sink(&r);
                r
            })
            .collect();
        self.assemble(&prepared, recs)
    }

    /// The cached dashboard for the frame's current stamp and `k`, computing
    /// and storing it on a miss.
    pub fn lookup_or_compute(&self, frame: &mut Frame, k: usize) -> Arc<Dashboard> {
        if let Some(d) = frame.fresh_dashboard(k) {
            return d.clone();
        }
        let meta = self.ensure_metadata(frame);
        let sample = self.ensure_sample(frame);
        let prepared = self.prepare(frame, meta, sample, k);
        let recs = prepared.actions.iter().map(|a| self.run_action(a)).collect();
        let dashboard = Arc::new(self.assemble(&prepared, recs));
        frame.store_dashboard(prepared.stamp, k, dashboard.clone());
        dashboard
    }
}

fn kind_name(kind: crate::frame::HistoryKind) -> &'static str {
    use crate::frame::HistoryKind::*;
    match kind {
        Filter => "filter",
        HeadTail => "head/tail",
        _ => "step",
    }
}
