//! JSON shapes exchanged over HTTP and written by the CLI.

use luxen_core::aggregate::Aggregation;
use luxen_core::frame::ColumnValues;
use luxen_core::intent::Warning;
use luxen_core::predicate::{FilterOp, Predicate};
use luxen_core::vis::{to_spec_doc, VisSpecDoc};
use luxen_core::{Dashboard, Recommendation, Transform, Value, Vis};
use serde::{Deserialize, Serialize};

/// Largest k a request may ask for. Vis ids reserve three digits for rank.
pub const MAX_K: usize = 999;
const SLOT: u64 = 1000;
pub const CURRENT_ACTION: &str = "Current";

/// Stable id of the `rank`-th vis of the action at display `position`.
/// The current vis is slot 0; registered actions follow.
pub fn vis_id(position: Option<usize>, rank: usize) -> u64 {
    position.map_or(0, |p| p as u64 + 1) * SLOT + rank as u64
}

/// Finds a vis in `dashboard` by id. `positions` maps action names to their
/// display positions.
pub fn find_vis<'a>(dashboard: &'a Dashboard, positions: &dyn Fn(&str) -> Option<usize>, id: u64) -> Option<&'a Vis> {
    let (slot, rank) = (id / SLOT, (id % SLOT) as usize);
    if slot == 0 {
        return dashboard.current_vis.as_ref().filter(|_| rank == 0);
    }
    dashboard
        .recommendations
        .iter()
        .find(|r| positions(&r.action).map(|p| p as u64 + 1) == Some(slot))
        .and_then(|r| r.vises.get(rank))
}

#[derive(Debug, Clone, Serialize)]
pub struct VisEntry {
    pub id: u64,
    pub rank: usize,
    pub score: Option<f64>,
    pub spec: VisSpecDoc,
}

#[derive(Debug, Clone, Serialize)]
pub struct RecommendationEvent {
    pub action: String,
    pub position: Option<usize>,
    /// Ordinal at which the action was started.
    pub started: usize,
    pub estimated_cost: f64,
    pub candidates: usize,
    pub truncated: bool,
    pub from_parent: bool,
    pub pruned: bool,
    pub diagnostics: Vec<String>,
    pub vises: Vec<VisEntry>,
}

impl RecommendationEvent {
    pub fn new(rec: &Recommendation, position: usize, started: usize) -> Self {
        RecommendationEvent {
            action: rec.action.clone(),
            position: Some(position),
            started,
            estimated_cost: rec.estimated_cost,
            candidates: rec.candidates,
            truncated: rec.truncated,
            from_parent: rec.from_parent,
            pruned: rec.prune.is_some_and(|p| p.apply),
            diagnostics: rec.diagnostics.clone(),
            vises: rec
                .vises
                .iter()
                .enumerate()
                .map(|(rank, v)| VisEntry { id: vis_id(Some(position), rank), rank, score: v.score, spec: to_spec_doc(v) })
                .collect(),
        }
    }

    pub fn current(vis: &Vis) -> Self {
        RecommendationEvent {
            action: CURRENT_ACTION.into(),
            position: None,
            started: 0,
            estimated_cost: 0.0,
            candidates: 1,
            truncated: false,
            from_parent: false,
            pruned: false,
            diagnostics: Vec::new(),
            vises: vec![VisEntry { id: vis_id(None, 0), rank: 0, score: vis.score, spec: to_spec_doc(vis) }],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DoneEvent {
    pub frame_id: u64,
    pub frame_version: u64,
    pub intent_version: u64,
    pub mode: luxen_core::recommend::DashboardMode,
    pub k: usize,
    /// Display order, including the current vis when present.
    pub actions: Vec<String>,
    pub diagnostics: Vec<String>,
    pub cached: bool,
}

impl DoneEvent {
    pub fn new(frame_id: u64, d: &Dashboard, cached: bool) -> Self {
        let mut actions: Vec<String> = d.current_vis.iter().map(|_| CURRENT_ACTION.to_string()).collect();
        actions.extend(d.recommendations.iter().map(|r| r.action.clone()));
        DoneEvent {
            frame_id,
            frame_version: d.frame_version,
            intent_version: d.intent_version,
            mode: d.mode,
            k: d.k,
            actions,
            diagnostics: d.diagnostics.clone(),
            cached,
        }
    }
}

/// Events replayed from a finished dashboard, in the order the scheduler
/// would have started them.
pub fn replay(d: &Dashboard, positions: &dyn Fn(&str) -> Option<usize>) -> Vec<RecommendationEvent> {
    let mut recs: Vec<(&Recommendation, usize)> =
        d.recommendations.iter().map(|r| (r, positions(&r.action).unwrap_or(usize::MAX))).collect();
    recs.sort_by(|a, b| a.0.estimated_cost.total_cmp(&b.0.estimated_cost).then(a.1.cmp(&b.1)));
    let mut out: Vec<RecommendationEvent> = d.current_vis.iter().map(RecommendationEvent::current).collect();
    out.extend(recs.into_iter().enumerate().map(|(i, (r, p))| RecommendationEvent::new(r, p, i)));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct WarningOut {
    pub clause: usize,
    pub message: String,
    pub suggestion: Option<String>,
}

impl From<&Warning> for WarningOut {
    fn from(w: &Warning) -> Self {
        WarningOut { clause: w.clause, message: w.message.clone(), suggestion: w.suggestion.clone() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<Scalar> for Value {
    fn from(s: Scalar) -> Value {
        match s {
            Scalar::Bool(b) => Value::Bool(b),
            Scalar::Int(i) => Value::Int(i),
            Scalar::Float(f) => Value::Float(f),
            Scalar::Text(t) => Value::Str(t),
        }
    }
}

/// A transform as sent by clients.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformRequest {
    Filter { column: String, op: FilterOp, value: Scalar },
    Project { columns: Vec<String> },
    Rename { mapping: Vec<(String, String)> },
    SetColumn {
        name: String,
        #[serde(default)]
        values: Option<Vec<Option<Scalar>>>,
        #[serde(default)]
        source: Option<String>,
        #[serde(default = "one")]
        factor: f64,
        #[serde(default)]
        offset: f64,
    },
    GroupAggregate { keys: Vec<String>, aggregations: Vec<(String, Aggregation)> },
    Pivot {
        index: String,
        columns: String,
        values: String,
        #[serde(default)]
        aggregation: Option<Aggregation>,
    },
    Head { n: usize },
    Tail { n: usize },
    InplaceModify { marker: String },
}

fn one() -> f64 {
    1.0
}

/// Envelope for POST /frames/{f}/transform.
#[derive(Debug, Clone, Deserialize)]
pub struct TransformBody {
    #[serde(flatten)]
    pub transform: TransformRequest,
    /// Mutate the frame itself instead of deriving a new one.
    #[serde(default)]
    pub in_place: bool,
}

impl TryFrom<TransformRequest> for Transform {
    type Error = String;

    fn try_from(t: TransformRequest) -> Result<Transform, String> {
        Ok(match t {
            TransformRequest::Filter { column, op, value } => Transform::Filter(Predicate::new(column, op, value.into())),
            TransformRequest::Project { columns } => Transform::Project(columns),
            TransformRequest::Rename { mapping } => Transform::Rename(mapping),
            TransformRequest::SetColumn { name, values, source, factor, offset } => {
                let values = match (values, source) {
                    (Some(v), None) => ColumnValues::Values(v.into_iter().map(|c| c.map(Value::from)).collect()),
                    (None, Some(source)) => ColumnValues::Affine { source, factor, offset },
                    _ => return Err("set_column needs exactly one of `values` or `source`".into()),
                };
                Transform::SetColumn { name, values }
            }
            TransformRequest::GroupAggregate { keys, aggregations } => Transform::GroupAggregate { keys, aggregations },
            TransformRequest::Pivot { index, columns, values, aggregation } => {
                Transform::Pivot { index, columns, values, aggregation }
            }
            TransformRequest::Head { n } => Transform::HeadTail { n, tail: false },
            TransformRequest::Tail { n } => Transform::HeadTail { n, tail: true },
            TransformRequest::InplaceModify { marker } => Transform::InplaceModify { marker },
        })
    }
}
