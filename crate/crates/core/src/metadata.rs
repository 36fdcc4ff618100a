//! Per-column profiling: distinct values, cardinality, extremes, semantic type.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use hashbrown::HashSet;

use crate::datetime;
use crate::frame::{Column, ColumnData, Frame, StorageType};
use crate::geo;
use crate::value::Value;

/// At most this many distinct values are kept per column.
pub const UNIQUE_VALUES_CAP: usize = 1000;
/// Integer columns with at most this many distinct values are nominal.
pub const NOMINAL_CARDINALITY_MAX: usize = 40;
/// Fraction of string cells that must parse as ISO-8601 for a temporal column.
pub const TEMPORAL_PARSE_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SemanticType {
    Nominal,
    Quantitative,
    Temporal,
    Geographic,
}

impl SemanticType {
    pub fn as_str(self) -> &'static str {
        match self {
            SemanticType::Nominal => "nominal",
            SemanticType::Quantitative => "quantitative",
            SemanticType::Temporal => "temporal",
            SemanticType::Geographic => "geographic",
        }
    }

    /// Nominal and geographic attributes both act as categorical dimensions.
    pub fn is_categorical(self) -> bool {
        matches!(self, SemanticType::Nominal | SemanticType::Geographic)
    }
}

impl fmt::Display for SemanticType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SemanticType {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "nominal" => SemanticType::Nominal,
            "quantitative" => SemanticType::Quantitative,
            "temporal" => SemanticType::Temporal,
            "geographic" => SemanticType::Geographic,
            _ => return Err(()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ColumnMetadata {
    pub name: String,
    pub storage_type: StorageType,
    /// Sorted distinct non-null values, truncated to [`UNIQUE_VALUES_CAP`].
    pub unique_values: Vec<Value>,
    /// True when `unique_values` was truncated.
    pub capped: bool,
    /// Exact distinct non-null count.
    pub cardinality: usize,
    pub null_count: usize,
    pub min: Option<Value>,
    pub max: Option<Value>,
    pub semantic_type: SemanticType,
    pub overridden: bool,
}

impl ColumnMetadata {
    pub fn min_f64(&self) -> Option<f64> {
        self.min.as_ref().and_then(Value::as_f64)
    }

    pub fn max_f64(&self) -> Option<f64> {
        self.max.as_ref().and_then(Value::as_f64)
    }

    /// True when min/max are undefined because every cell is null.
    pub fn all_null(&self) -> bool {
        self.cardinality == 0
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize)]
pub struct MetadataSet {
    pub row_count: usize,
    pub columns: Vec<ColumnMetadata>,
}

impl MetadataSet {
    pub fn get(&self, name: &str) -> Option<&ColumnMetadata> {
        self.columns.iter().find(|m| m.name == name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut ColumnMetadata> {
        self.columns.iter_mut().find(|m| m.name == name)
    }

    pub fn of_type(&self, t: SemanticType) -> impl Iterator<Item = &ColumnMetadata> {
        self.columns.iter().filter(move |m| m.semantic_type == t)
    }

    pub fn semantic_type(&self, name: &str) -> Option<SemanticType> {
        self.get(name).map(|m| m.semantic_type)
    }
}

/// Profiles every column of `frame`, applying the frame's type overrides.
pub fn compute_metadata(frame: &Frame) -> MetadataSet {
    let columns = frame
        .columns()
        .map(|col| {
            let mut meta = profile_column(col);
            match frame.overrides().get(&col.name) {
                Some(&t) => {
                    meta.semantic_type = t;
                    meta.overridden = true;
                }
                None => meta.semantic_type = infer_semantic_type(col, &meta),
            }
            meta
        })
        .collect();
    MetadataSet { row_count: frame.row_count(), columns }
}

fn finish<T: Ord>(distinct: impl IntoIterator<Item = T>, to_value: impl Fn(T) -> Value) -> (Vec<Value>, bool, usize, Option<Value>, Option<Value>) {
    let mut all: Vec<T> = distinct.into_iter().collect();
    all.sort_unstable();
    let cardinality = all.len();
    let capped = cardinality > UNIQUE_VALUES_CAP;
    let mut values: Vec<Value> = all.into_iter().map(to_value).collect();
    let min = values.first().cloned();
    let max = values.last().cloned();
    values.truncate(UNIQUE_VALUES_CAP);
    (values, capped, cardinality, min, max)
}

struct OrdF64(f64);
impl PartialEq for OrdF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}
impl Eq for OrdF64 {}
impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Distinct values and extremes for one column; semantic type left nominal.
pub fn profile_column(col: &Column) -> ColumnMetadata {
    let mut null_count = 0;
    let (unique_values, capped, cardinality, min, max) = match &col.data {
        ColumnData::Integer(v) | ColumnData::Datetime(v) => {
            let set: HashSet<i64> = v.iter().filter_map(|x| x.or_else(|| { null_count += 1; None })).collect();
            let dt = matches!(col.data, ColumnData::Datetime(_));
            finish(set, |x| if dt { Value::Datetime(x) } else { Value::Int(x) })
        }
        ColumnData::Float(v) => {
            let set: HashSet<u64> = v
                .iter()
                .filter_map(|x| x.or_else(|| { null_count += 1; None }))
                .map(|f| if f == 0.0 { 0.0f64.to_bits() } else { f.to_bits() })
                .collect();
            finish(set.into_iter().map(|b| OrdF64(f64::from_bits(b))), |x| Value::Float(x.0))
        }
        ColumnData::Boolean(v) => {
            let set: HashSet<bool> = v.iter().filter_map(|x| x.or_else(|| { null_count += 1; None })).collect();
            finish(set, Value::Bool)
        }
        ColumnData::String(s) => {
            let mut used = alloc::vec![false; s.dict.len()];
            for c in &s.codes {
                match c {
                    Some(c) => used[*c as usize] = true,
                    None => null_count += 1,
                }
            }
            let distinct = s.dict.iter().zip(&used).filter(|(_, u)| **u).map(|(d, _)| d.as_str());
            let (values, capped, cardinality, _, _) = finish(distinct, Value::from);
            (values, capped, cardinality, None, None)
        }
    };
    ColumnMetadata {
        name: col.name.clone(),
        storage_type: col.data.storage_type(),
        unique_values,
        capped,
        cardinality,
        null_count,
        min,
        max,
        semantic_type: SemanticType::Nominal,
        overridden: false,
    }
}

/// Deterministic semantic-type ladder over storage type, name and cardinality.
/// Overrides are applied by the caller before this is consulted.
pub fn infer_semantic_type(col: &Column, meta: &ColumnMetadata) -> SemanticType {
    match &col.data {
        ColumnData::Datetime(_) => SemanticType::Temporal,
        ColumnData::String(s) => {
            if mostly_iso8601(s) {
                SemanticType::Temporal
            } else if geo::is_geo_column_name(&col.name)
                || (meta.cardinality > 0
                    && !meta.capped
                    && meta.unique_values.iter().all(|v| v.as_str().is_some_and(geo::is_region_name)))
            {
                SemanticType::Geographic
            } else {
                SemanticType::Nominal
            }
        }
        ColumnData::Float(_) => SemanticType::Quantitative,
        ColumnData::Integer(_) if meta.cardinality <= NOMINAL_CARDINALITY_MAX => SemanticType::Nominal,
        ColumnData::Integer(_) => SemanticType::Quantitative,
        ColumnData::Boolean(_) => SemanticType::Nominal,
    }
}

fn mostly_iso8601(s: &crate::frame::StrColumn) -> bool {
    let mut counts = alloc::vec![0usize; s.dict.len()];
    let mut total = 0usize;
    for c in s.codes.iter().flatten() {
        counts[*c as usize] += 1;
        total += 1;
    }
    if total == 0 {
        return false;
    }
    let parsed: usize = s
        .dict
        .iter()
        .zip(&counts)
        .filter(|(d, n)| **n > 0 && datetime::parse_iso8601(d).is_some())
        .map(|(_, n)| *n)
        .sum();
    parsed as f64 >= TEMPORAL_PARSE_FRACTION * total as f64
}
