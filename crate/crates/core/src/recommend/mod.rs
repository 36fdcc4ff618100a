//! Actions, the dashboard they produce and the mode dispatch that picks them.

mod actions;
mod registry;

pub use registry::{Action, ActionOutput, ActionRegistry, Candidate, CustomScorer, GeneratorFn, Scorer, TriggerFn};

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::Result;
use crate::frame::{Frame, HistoryKind};
use crate::intent::{expand_intent, infer_encoding, lookup_defaults, IntentSpec, PartialVisSpec};
use crate::metadata::MetadataSet;
use crate::optimize::PruneDecision;
use crate::vis::{CompiledVisSpec, Vis};

/// Frames with fewer rows than this, produced by a filter or head/tail,
/// show their parent's recommendations.
pub const HISTORY_ROW_THRESHOLD: usize = 5;

/// Which family of actions a dashboard shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DashboardMode {
    Intent,
    Structure,
    Series,
    History,
    Overview,
}

/// Picks the dashboard mode. Checked in order: intent, pre-aggregated,
/// single column, tiny filtered result, overview.
pub fn dispatch_mode(frame: &Frame) -> DashboardMode {
    if frame.intent().is_some() {
        DashboardMode::Intent
    } else if frame.is_pre_aggregated() {
        DashboardMode::Structure
    } else if frame.width() == 1 {
        DashboardMode::Series
    } else if frame.row_count() < HISTORY_ROW_THRESHOLD
        && frame.parent().is_some()
        && frame.history().last().is_some_and(|e| matches!(e.kind, HistoryKind::Filter | HistoryKind::HeadTail))
    {
        DashboardMode::History
    } else {
        DashboardMode::Overview
    }
}

/// The compiled user intent, keeping the looked-up partial spec of every
/// surviving vis so actions can extend it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntentView {
    pub partials: Vec<PartialVisSpec>,
    pub specs: Vec<CompiledVisSpec>,
    pub diagnostics: Vec<String>,
}

impl IntentView {
    pub fn build(intent: &IntentSpec, meta: &MetadataSet) -> Result<IntentView> {
        let mut view = IntentView::default();
        for partial in expand_intent(intent, meta)? {
            match lookup_defaults(&partial, meta) {
                Ok(p) => {
                    if let Some(spec) = infer_encoding(&p, meta, meta.row_count) {
                        view.partials.push(p);
                        view.specs.push(spec);
                    }
                }
                Err(why) => view.diagnostics.push(why),
            }
        }
        Ok(view)
    }

    /// The single vis an intent denotes, if it denotes exactly one.
    pub fn base(&self) -> Option<(&PartialVisSpec, &CompiledVisSpec)> {
        match (self.partials.as_slice(), self.specs.as_slice()) {
            ([p], [s]) => Some((p, s)),
            _ => None,
        }
    }
}

/// What an action's trigger and generator see.
#[derive(Debug, Clone, Copy)]
pub struct ActionContext<'a> {
    pub frame: &'a Frame,
    pub meta: &'a MetadataSet,
    pub mode: DashboardMode,
    pub intent: Option<&'a IntentView>,
}

/// The ranked output of one action.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Recommendation {
    pub action: String,
    pub vises: Vec<Vis>,
    /// Candidates generated before ranking.
    pub candidates: usize,
    /// More than k candidates survived.
    pub truncated: bool,
    pub prune: Option<PruneDecision>,
    pub estimated_cost: f64,
    /// Computed on the parent frame (history mode).
    pub from_parent: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Dashboard {
    pub mode: DashboardMode,
    pub frame_version: u64,
    pub intent_version: u64,
    pub k: usize,
    pub current_vis: Option<Vis>,
    /// In display order.
    pub recommendations: Vec<Recommendation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl Dashboard {
    pub fn recommendation(&self, action: &str) -> Option<&Recommendation> {
        self.recommendations.iter().find(|r| r.action == action)
    }

    pub fn action_names(&self) -> Vec<&str> {
        self.recommendations.iter().map(|r| r.action.as_str()).collect()
    }
}
