//! Visualizations: data extraction, scoring, cost estimates and chart documents.

mod cost;
mod doc;
mod process;
mod score;
mod spec;

pub use cost::{estimate_vis_cost, mark_weight, FILTER_WEIGHT};
pub use doc::{to_spec_doc, DocChannel, DocEncoding, DocMark, DocRow, VisSpecDoc, SCHEMA_URL};
pub use process::{filtered_rows, process_vis, Bins, KeyColumn};
pub use score::{
    group_deviation, normalized_distance, pearson, plan_for, skewness, ScoreKind, ScoreOutcome, ScorePlan, RowView,
};
pub use spec::{Channel, CompiledVisSpec, Encoding, Family, Mark, VisSource};

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::value::Value;

/// Plot-ready rows: bin edges and midpoints, group labels, aggregates, counts.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VisData {
    pub fields: Arc<[String]>,
    pub rows: Vec<Vec<Value>>,
    /// Non-null source rows consumed after filtering.
    pub source_rows: usize,
}

impl VisData {
    pub fn is_empty(&self) -> bool {
        self.source_rows == 0
    }

    pub fn column(&self, field: &str) -> Option<impl Iterator<Item = &Value>> {
        let i = self.fields.iter().position(|f| f == field)?;
        Some(self.rows.iter().map(move |r| &r[i]))
    }
}

/// One visualization computed against a specific frame version.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Vis {
    pub spec: CompiledVisSpec,
    pub frame_version: u64,
    pub data: Option<VisData>,
    pub score: Option<f64>,
    /// True only while a score comes from a sample; never for returned results.
    pub approximate: bool,
}

impl Vis {
    pub fn new(spec: CompiledVisSpec, frame_version: u64) -> Vis {
        Vis { spec, frame_version, data: None, score: None, approximate: false }
    }
}
