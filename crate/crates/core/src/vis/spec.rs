use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::aggregate::Aggregation;
use crate::datetime::TimeUnit;
use crate::metadata::SemanticType;
use crate::predicate::Predicate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Color,
}

impl Channel {
    pub fn as_str(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Color => "color",
        }
    }
}

impl FromStr for Channel {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim() {
            "x" => Ok(Channel::X),
            "y" => Ok(Channel::Y),
            "color" => Ok(Channel::Color),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mark {
    Scatter,
    ColorScatter,
    Bar,
    ColorBar,
    Line,
    ColorLine,
    Histogram,
    Heatmap,
    ColorHeatmap,
    Map,
}

/// How a mark's data is extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Selection of raw columns.
    Project,
    /// Group-by over dimensions, aggregate of the measure.
    Aggregate,
    /// Equal-width binning plus count.
    Bin,
}

impl Mark {
    pub fn as_str(self) -> &'static str {
        match self {
            Mark::Scatter => "scatter",
            Mark::ColorScatter => "color-scatter",
            Mark::Bar => "bar",
            Mark::ColorBar => "color-bar",
            Mark::Line => "line",
            Mark::ColorLine => "color-line",
            Mark::Histogram => "histogram",
            Mark::Heatmap => "heatmap",
            Mark::ColorHeatmap => "color-heatmap",
            Mark::Map => "map",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Mark::Scatter | Mark::ColorScatter => Family::Project,
            Mark::Histogram | Mark::Heatmap | Mark::ColorHeatmap => Family::Bin,
            Mark::Bar | Mark::ColorBar | Mark::Line | Mark::ColorLine | Mark::Map => Family::Aggregate,
        }
    }

    pub fn has_color(self) -> bool {
        matches!(self, Mark::ColorScatter | Mark::ColorBar | Mark::ColorLine | Mark::ColorHeatmap)
    }
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One channel assignment. `field == None` is the row count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct Encoding {
    pub field: Option<String>,
    pub semantic_type: SemanticType,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aggregate: Option<Aggregation>,
    /// Number of equal-width bins.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bin: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_unit: Option<TimeUnit>,
}

impl Encoding {
    pub fn field(name: &str, semantic_type: SemanticType) -> Encoding {
        Encoding { field: Some(name.into()), semantic_type, aggregate: None, bin: None, time_unit: None }
    }

    pub fn count() -> Encoding {
        Encoding {
            field: None,
            semantic_type: SemanticType::Quantitative,
            aggregate: Some(Aggregation::Count),
            bin: None,
            time_unit: None,
        }
    }

    pub fn is_count(&self) -> bool {
        self.field.is_none()
    }

    pub fn name(&self) -> &str {
        self.field.as_deref().unwrap_or("count")
    }
}

/// Where the rows of a visualization come from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum VisSource {
    /// The frame's columns, as named by the encodings.
    Frame,
    /// One row of a pre-aggregated frame read across its columns.
    IndexRow { row: usize, label: String },
    /// One column of a pre-aggregated frame against the row labels.
    IndexColumn,
}

/// A complete visualization: mark, channels and filters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct CompiledVisSpec {
    pub mark: Mark,
    pub x: Encoding,
    pub y: Encoding,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub color: Option<Encoding>,
    pub filters: Vec<Predicate>,
    pub sort_descending: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub top_n: Option<usize>,
    pub source: VisSource,
}

impl CompiledVisSpec {
    pub fn new(mark: Mark, x: Encoding, y: Encoding, color: Option<Encoding>) -> Self {
        Self { mark, x, y, color, filters: Vec::new(), sort_descending: false, top_n: None, source: VisSource::Frame }
    }

    pub fn encodings(&self) -> impl Iterator<Item = &Encoding> {
        [Some(&self.x), Some(&self.y), self.color.as_ref()].into_iter().flatten()
    }

    pub fn encoding(&self, channel: Channel) -> Option<&Encoding> {
        match channel {
            Channel::X => Some(&self.x),
            Channel::Y => Some(&self.y),
            Channel::Color => self.color.as_ref(),
        }
    }

    /// Named fields in channel order x, y, color.
    pub fn fields(&self) -> Vec<&str> {
        self.encodings().filter_map(|e| e.field.as_deref()).collect()
    }

    /// Stable ranking tie-break: field names, then filters.
    pub fn tie_key(&self) -> String {
        let mut key = self.fields().join("\u{1}");
        if let VisSource::IndexRow { row, .. } = &self.source {
            key.push_str(&alloc::format!("\u{3}{row:020}"));
        }
        for f in &self.filters {
            key.push('\u{2}');
            key.push_str(&alloc::format!("{f}"));
        }
        key
    }

    /// Short human-readable title.
    pub fn title(&self) -> String {
        let mut title = String::new();
        for (i, e) in self.encodings().enumerate() {
            if i > 0 {
                title.push_str(" / ");
            }
            match (e.field.as_deref(), e.aggregate) {
                (None, _) => title.push_str("count"),
                (Some(f), Some(agg)) if agg != Aggregation::None => {
                    title.push_str(&alloc::format!("{agg}({f})"));
                }
                (Some(f), _) => title.push_str(f),
            }
        }
        for f in &self.filters {
            title.push_str(&alloc::format!(" [{f}]"));
        }
        title
    }
}
