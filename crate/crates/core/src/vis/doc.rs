//! Declarative chart documents in a Vega-Lite compatible subset.
//!
//! Documents carry their data inline and already aggregated or binned, so a
//! renderer never recomputes anything. Binned axes use `bin: {binned: true}`
//! with explicit `x`/`x2` (or `y`/`y2`) start and end fields. Struct field
//! order fixes the key order of the serialized document.

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::ser::SerializeMap;

use super::spec::{CompiledVisSpec, Encoding, Mark};
use super::Vis;
use crate::aggregate::Aggregation;
use crate::metadata::SemanticType;
use crate::value::Value;

pub const SCHEMA_URL: &str = "https://vega.github.io/schema/vega-lite/v5.json";

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DocMark {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub tooltip: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Binned {
    pub binned: bool,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DocChannel {
    pub field: String,
    #[serde(rename = "type", skip_serializing_if = "Option::is_none")]
    pub kind: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin: Option<Binned>,
    #[serde(rename = "timeUnit", skip_serializing_if = "Option::is_none")]
    pub time_unit: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sort: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
}

impl DocChannel {
    fn plain(field: impl Into<String>, kind: &'static str) -> DocChannel {
        DocChannel { field: field.into(), kind: Some(kind), aggregate: None, bin: None, time_unit: None, sort: None, title: None }
    }

    fn end(field: String) -> DocChannel {
        DocChannel { kind: None, ..DocChannel::plain(field, "") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize)]
pub struct DocEncoding {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<DocChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2: Option<DocChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<DocChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y2: Option<DocChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<DocChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opacity: Option<DocChannel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key: Option<DocChannel>,
}

/// One inline data row, serialized as an object in field order.
#[derive(Debug, Clone, PartialEq)]
pub struct DocRow {
    pub fields: Arc<[String]>,
    pub values: Vec<Value>,
}

impl serde::Serialize for DocRow {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.values.len()))?;
        for (k, v) in self.fields.iter().zip(&self.values) {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DocData {
    pub values: Vec<DocRow>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct VisSpecDoc {
    #[serde(rename = "$schema")]
    pub schema: &'static str,
    pub title: String,
    pub mark: DocMark,
    pub encoding: DocEncoding,
    pub data: DocData,
}

fn vl_type(t: SemanticType) -> &'static str {
    match t {
        SemanticType::Quantitative => "quantitative",
        SemanticType::Temporal => "temporal",
        SemanticType::Nominal | SemanticType::Geographic => "nominal",
    }
}

/// Aggregates a renderer may re-apply to one pre-aggregated row without change.
fn idempotent(agg: Option<Aggregation>) -> Option<&'static str> {
    match agg {
        Some(a @ (Aggregation::Mean | Aggregation::Sum | Aggregation::Min | Aggregation::Max)) => Some(a.as_str()),
        _ => None,
    }
}

fn title_of(e: &Encoding) -> Option<String> {
    match (&e.field, e.aggregate) {
        (Some(f), Some(a)) if idempotent(Some(a)).is_none() && a != Aggregation::None => Some(alloc::format!("{a}({f})")),
        _ => None,
    }
}

fn channel(e: &Encoding) -> DocChannel {
    let mut c = DocChannel::plain(e.name(), vl_type(e.semantic_type));
    if !e.is_count() {
        c.aggregate = idempotent(e.aggregate);
        c.title = title_of(e);
    }
    c.time_unit = e.time_unit.map(|u| u.as_str());
    c
}

fn binned_pair(e: &Encoding) -> (DocChannel, DocChannel) {
    let name = e.name();
    let mut start = DocChannel::plain(alloc::format!("{name}_start"), "quantitative");
    start.bin = Some(Binned { binned: true });
    start.title = Some(name.to_string());
    (start, DocChannel::end(alloc::format!("{name}_end")))
}

/// Builds the chart document for a processed vis. Deterministic: equal
/// visualizations give equal documents.
pub fn to_spec_doc(vis: &Vis) -> VisSpecDoc {
    let spec: &CompiledVisSpec = &vis.spec;
    let mut enc = DocEncoding::default();
    let kind = match spec.mark {
        Mark::Scatter | Mark::ColorScatter => "point",
        Mark::Bar | Mark::ColorBar | Mark::Histogram => "bar",
        Mark::Line | Mark::ColorLine => "line",
        Mark::Heatmap | Mark::ColorHeatmap => "rect",
        Mark::Map => "geoshape",
    };
    match spec.mark {
        Mark::Histogram => {
            let (x, x2) = binned_pair(&spec.x);
            enc.x = Some(x);
            enc.x2 = Some(x2);
            enc.y = Some(channel(&spec.y));
        }
        Mark::Heatmap | Mark::ColorHeatmap => {
            let (x, x2) = binned_pair(&spec.x);
            let (y, y2) = binned_pair(&spec.y);
            enc.x = Some(x);
            enc.x2 = Some(x2);
            enc.y = Some(y);
            enc.y2 = Some(y2);
            let count = DocChannel::plain("count", "quantitative");
            match &spec.color {
                Some(c) if c.semantic_type != SemanticType::Quantitative => {
                    enc.color = Some(channel(c));
                    enc.opacity = Some(count);
                }
                Some(c) => {
                    let mut ch = DocChannel::plain(c.name(), "quantitative");
                    ch.title = Some(alloc::format!("{}({})", c.aggregate.unwrap_or(Aggregation::Mean), c.name()));
                    enc.color = Some(ch);
                }
                None => enc.color = Some(count),
            }
        }
        Mark::Map => {
            enc.key = Some(channel(&spec.x));
            enc.color = Some(channel(&spec.y));
        }
        _ => {
            let mut x = channel(&spec.x);
            if spec.sort_descending {
                x.sort = Some("-y");
            }
            enc.x = Some(x);
            enc.y = Some(channel(&spec.y));
            enc.color = spec.color.as_ref().map(channel);
        }
    }
    let values = match &vis.data {
        Some(d) => d.rows.iter().map(|r| DocRow { fields: d.fields.clone(), values: r.clone() }).collect(),
        None => Vec::new(),
    };
    let mut title = spec.title();
    if let super::VisSource::IndexRow { label, .. } = &spec.source {
        title = alloc::format!("{label}: {title}");
    }
    VisSpecDoc {
        schema: SCHEMA_URL,
        title,
        mark: DocMark { kind, tooltip: true },
        encoding: enc,
        data: DocData { values },
    }
}
