//! Versioned columnar frames, their transforms, and cache-freshness stamps.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::aggregate::{Accumulator, Aggregation};
use crate::error::{Error, Result};
use crate::intent::IntentSpec;
use crate::metadata::{MetadataSet, SemanticType};
use crate::optimize::sample::SampleCache;
use crate::predicate::{BoundPredicate, Predicate};
use crate::recommend::Dashboard;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageType {
    Integer,
    Float,
    String,
    Boolean,
    Datetime,
}

/// Dictionary-encoded strings. Unused dictionary entries are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct StrColumn {
    pub dict: Arc<[String]>,
    pub codes: Vec<Option<u32>>,
}

impl StrColumn {
    pub fn from_cells<I, S>(cells: I) -> Self
    where
        I: IntoIterator<Item = Option<S>>,
        S: AsRef<str>,
    {
        let mut lookup: HashMap<String, u32> = HashMap::new();
        let mut dict = Vec::new();
        let codes = cells
            .into_iter()
            .map(|cell| {
                cell.map(|s| {
                    let s = s.as_ref();
                    if let Some(&c) = lookup.get(s) {
                        return c;
                    }
                    let c = dict.len() as u32;
                    dict.push(s.to_string());
                    lookup.insert(s.to_string(), c);
                    c
                })
            })
            .collect();
        Self { dict: dict.into(), codes }
    }

    pub fn code_of(&self, s: &str) -> Option<u32> {
        self.dict.iter().position(|d| d == s).map(|p| p as u32)
    }

    pub fn get(&self, row: usize) -> Option<&str> {
        self.codes[row].map(|c| self.dict[c as usize].as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Integer(Vec<Option<i64>>),
    Float(Vec<Option<f64>>),
    String(StrColumn),
    Boolean(Vec<Option<bool>>),
    /// Seconds since the Unix epoch.
    Datetime(Vec<Option<i64>>),
}

impl ColumnData {
    pub fn len(&self) -> usize {
        match self {
            ColumnData::Integer(v) | ColumnData::Datetime(v) => v.len(),
            ColumnData::Float(v) => v.len(),
            ColumnData::String(s) => s.codes.len(),
            ColumnData::Boolean(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn storage_type(&self) -> StorageType {
        match self {
            ColumnData::Integer(_) => StorageType::Integer,
            ColumnData::Float(_) => StorageType::Float,
            ColumnData::String(_) => StorageType::String,
            ColumnData::Boolean(_) => StorageType::Boolean,
            ColumnData::Datetime(_) => StorageType::Datetime,
        }
    }

    pub fn is_null(&self, row: usize) -> bool {
        match self {
            ColumnData::Integer(v) | ColumnData::Datetime(v) => v[row].is_none(),
            ColumnData::Float(v) => v[row].is_none(),
            ColumnData::String(s) => s.codes[row].is_none(),
            ColumnData::Boolean(v) => v[row].is_none(),
        }
    }

    pub fn value(&self, row: usize) -> Option<Value> {
        match self {
            ColumnData::Integer(v) => v[row].map(Value::Int),
            ColumnData::Float(v) => v[row].map(Value::Float),
            ColumnData::String(s) => s.get(row).map(Value::from),
            ColumnData::Boolean(v) => v[row].map(Value::Bool),
            ColumnData::Datetime(v) => v[row].map(Value::Datetime),
        }
    }

    /// Numeric view of a cell; `None` for nulls and strings.
    #[inline]
    pub fn numeric(&self, row: usize) -> Option<f64> {
        match self {
            ColumnData::Integer(v) | ColumnData::Datetime(v) => v[row].map(|x| x as f64),
            ColumnData::Float(v) => v[row],
            ColumnData::Boolean(v) => v[row].map(|b| if b { 1.0 } else { 0.0 }),
            ColumnData::String(_) => None,
        }
    }

    pub fn take(&self, rows: &[usize]) -> ColumnData {
        match self {
            ColumnData::Integer(v) => ColumnData::Integer(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Datetime(v) => ColumnData::Datetime(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Float(v) => ColumnData::Float(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::Boolean(v) => ColumnData::Boolean(rows.iter().map(|&r| v[r]).collect()),
            ColumnData::String(s) => ColumnData::String(StrColumn {
                dict: s.dict.clone(),
                codes: rows.iter().map(|&r| s.codes[r]).collect(),
            }),
        }
    }

    /// Builds a column from loose values. Ints and floats mix into floats;
    /// any other mix is rejected. An all-null input becomes a string column.
    pub fn from_values(values: Vec<Option<Value>>) -> Result<ColumnData> {
        let mut kind: Option<StorageType> = None;
        for v in values.iter().flatten() {
            let k = match v {
                Value::Int(_) => StorageType::Integer,
                Value::Float(_) => StorageType::Float,
                Value::Str(_) => StorageType::String,
                Value::Bool(_) => StorageType::Boolean,
                Value::Datetime(_) => StorageType::Datetime,
            };
            kind = Some(match (kind, k) {
                (None, k) => k,
                (Some(a), b) if a == b => a,
                (Some(StorageType::Integer), StorageType::Float) | (Some(StorageType::Float), StorageType::Integer) => {
                    StorageType::Float
                }
                (Some(a), b) => {
                    return Err(Error::InvalidTransform(format!("mixed cell types {a:?} and {b:?}")));
                }
            });
        }
        Ok(match kind.unwrap_or(StorageType::String) {
            StorageType::Integer => {
                ColumnData::Integer(values.into_iter().map(|v| v.and_then(|v| if let Value::Int(i) = v { Some(i) } else { None })).collect())
            }
            StorageType::Float => ColumnData::Float(values.into_iter().map(|v| v.and_then(|v| v.as_f64())).collect()),
            StorageType::Boolean => {
                ColumnData::Boolean(values.into_iter().map(|v| v.and_then(|v| if let Value::Bool(b) = v { Some(b) } else { None })).collect())
            }
            StorageType::Datetime => ColumnData::Datetime(
                values.into_iter().map(|v| v.and_then(|v| if let Value::Datetime(t) = v { Some(t) } else { None })).collect(),
            ),
            StorageType::String => {
                ColumnData::String(StrColumn::from_cells(values.into_iter().map(|v| v.map(|v| v.to_label()))))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Self { name: name.into(), data }
    }

    pub fn from_strings<I, S>(name: impl Into<String>, cells: I) -> Self
    where
        I: IntoIterator<Item = Option<S>>,
        S: AsRef<str>,
    {
        Self::new(name, ColumnData::String(StrColumn::from_cells(cells)))
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Row labels. Only single-level label indexes are recommendable.
#[derive(Debug, Clone, PartialEq)]
pub enum RowIndex {
    /// `0..n`
    Range(usize),
    /// Positions taken from an originally range-indexed frame.
    Positions(Vec<usize>),
    /// One key tuple per row; `names.len()` is the number of levels.
    Labels { names: Vec<String>, keys: Vec<Vec<Value>> },
}

impl RowIndex {
    pub fn len(&self) -> usize {
        match self {
            RowIndex::Range(n) => *n,
            RowIndex::Positions(p) => p.len(),
            RowIndex::Labels { keys, .. } => keys.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn levels(&self) -> usize {
        match self {
            RowIndex::Labels { names, .. } => names.len(),
            _ => 1,
        }
    }

    pub fn name(&self) -> Option<String> {
        match self {
            RowIndex::Labels { names, .. } => Some(names.join(", ")),
            _ => None,
        }
    }

    pub fn label(&self, row: usize) -> Value {
        match self {
            RowIndex::Range(_) => Value::Int(row as i64),
            RowIndex::Positions(p) => Value::Int(p[row] as i64),
            RowIndex::Labels { keys, .. } => {
                let key = &keys[row];
                if key.len() == 1 {
                    key[0].clone()
                } else {
                    Value::Str(key.iter().map(Value::to_label).collect::<Vec<_>>().join(", "))
                }
            }
        }
    }

    fn take(&self, rows: &[usize]) -> RowIndex {
        match self {
            RowIndex::Range(_) => RowIndex::Positions(rows.to_vec()),
            RowIndex::Positions(p) => RowIndex::Positions(rows.iter().map(|&r| p[r]).collect()),
            RowIndex::Labels { names, keys } => {
                RowIndex::Labels { names: names.clone(), keys: rows.iter().map(|&r| keys[r].clone()).collect() }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HistoryKind {
    Load,
    Filter,
    Project,
    Rename,
    SetColumn,
    GroupAggregate,
    Pivot,
    InplaceModify,
    HeadTail,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct HistoryEvent {
    pub kind: HistoryKind,
    pub params: String,
    pub seq: u64,
}

/// Source for a set-column transform.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnValues {
    Values(Vec<Option<Value>>),
    /// `source * factor + offset`, element-wise over a numeric column.
    Affine { source: String, factor: f64, offset: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Transform {
    Filter(Predicate),
    Project(Vec<String>),
    Rename(Vec<(String, String)>),
    SetColumn { name: String, values: ColumnValues },
    GroupAggregate { keys: Vec<String>, aggregations: Vec<(String, Aggregation)> },
    Pivot { index: String, columns: String, values: String, aggregation: Option<Aggregation> },
    HeadTail { n: usize, tail: bool },
    InplaceModify { marker: String },
}

impl Transform {
    pub fn kind(&self) -> HistoryKind {
        match self {
            Transform::Filter(_) => HistoryKind::Filter,
            Transform::Project(_) => HistoryKind::Project,
            Transform::Rename(_) => HistoryKind::Rename,
            Transform::SetColumn { .. } => HistoryKind::SetColumn,
            Transform::GroupAggregate { .. } => HistoryKind::GroupAggregate,
            Transform::Pivot { .. } => HistoryKind::Pivot,
            Transform::HeadTail { .. } => HistoryKind::HeadTail,
            Transform::InplaceModify { .. } => HistoryKind::InplaceModify,
        }
    }

    fn describe(&self) -> String {
        match self {
            Transform::Filter(p) => p.to_string(),
            Transform::Project(cols) => cols.join(","),
            Transform::Rename(map) => map.iter().map(|(a, b)| format!("{a}->{b}")).collect::<Vec<_>>().join(","),
            Transform::SetColumn { name, .. } => name.clone(),
            Transform::GroupAggregate { keys, aggregations } => format!(
                "by {} agg {}",
                keys.join(","),
                aggregations.iter().map(|(c, a)| format!("{a}({c})")).collect::<Vec<_>>().join(",")
            ),
            Transform::Pivot { index, columns, values, aggregation } => {
                let agg = aggregation.map_or("none", Aggregation::as_str);
                format!("index {index} columns {columns} values {agg}({values})")
            }
            Transform::HeadTail { n, tail } => format!("{} {n}", if *tail { "tail" } else { "head" }),
            Transform::InplaceModify { marker } => marker.clone(),
        }
    }

    /// The expiry trigger this transform fires when applied in place.
    pub fn trigger(&self) -> ExpiryTrigger {
        match self {
            Transform::Rename(_) => ExpiryTrigger::LabelChange,
            Transform::SetColumn { .. } => ExpiryTrigger::ColumnUpdate,
            _ => ExpiryTrigger::InplaceModify,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpiryTrigger {
    InplaceModify,
    ColumnUpdate,
    LabelChange,
    IntentChange,
}

/// The (version, intent-version) pair a cached dashboard was computed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheStamp {
    pub version: u64,
    pub intent_version: u64,
}

#[derive(Debug, Clone)]
struct RecCache {
    stamp: CacheStamp,
    k: usize,
    dashboard: Arc<Dashboard>,
}

/// A versioned, ordered columnar table plus its history, intent and caches.
#[derive(Debug, Clone)]
pub struct Frame {
    columns: Vec<Arc<Column>>,
    index: RowIndex,
    version: u64,
    pre_aggregated: bool,
    /// (columns attribute, values attribute) when produced by a pivot.
    pivot: Option<(String, String)>,
    intent: Option<IntentSpec>,
    intent_version: u64,
    history: Vec<HistoryEvent>,
    overrides: BTreeMap<String, SemanticType>,
    metadata_cache: Option<(u64, Arc<MetadataSet>)>,
    rec_cache: Option<RecCache>,
    sample_cache: Option<Arc<SampleCache>>,
    parent: Option<Arc<Frame>>,
}

impl Frame {
    /// A freshly loaded frame at version 1 with a single `load` event.
    pub fn new(columns: Vec<Column>, source: &str) -> Result<Frame> {
        let rows = columns.first().map_or(0, Column::len);
        Self::with_index(columns, RowIndex::Range(rows), source)
    }

    pub fn with_index(columns: Vec<Column>, index: RowIndex, source: &str) -> Result<Frame> {
        validate_columns(&columns, index.len())?;
        Ok(Frame {
            columns: columns.into_iter().map(Arc::new).collect(),
            index,
            version: 1,
            pre_aggregated: false,
            pivot: None,
            intent: None,
            intent_version: 0,
            history: alloc::vec![HistoryEvent { kind: HistoryKind::Load, params: source.to_string(), seq: 1 }],
            overrides: BTreeMap::new(),
            metadata_cache: None,
            rec_cache: None,
            sample_cache: None,
            parent: None,
        })
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &Column> {
        self.columns.iter().map(|c| &**c)
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name).map(|c| &**c)
    }

    pub fn column_at(&self, i: usize) -> &Column {
        &self.columns[i]
    }

    pub fn require(&self, name: &str) -> Result<&Column> {
        self.column(name).ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn row_count(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &RowIndex {
        &self.index
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn intent_version(&self) -> u64 {
        self.intent_version
    }

    pub fn stamp(&self) -> CacheStamp {
        CacheStamp { version: self.version, intent_version: self.intent_version }
    }

    pub fn is_pre_aggregated(&self) -> bool {
        self.pre_aggregated
    }

    /// Produced by a pivot: rows are series over the column labels.
    pub fn is_pivoted(&self) -> bool {
        self.pivot.is_some()
    }

    /// Names of the pivot's columns and values attributes.
    pub fn pivot_labels(&self) -> Option<(&str, &str)> {
        self.pivot.as_ref().map(|(c, v)| (c.as_str(), v.as_str()))
    }

    pub fn intent(&self) -> Option<&IntentSpec> {
        self.intent.as_ref()
    }

    pub fn history(&self) -> &[HistoryEvent] {
        &self.history
    }

    pub fn parent(&self) -> Option<&Arc<Frame>> {
        self.parent.as_ref()
    }

    pub fn overrides(&self) -> &BTreeMap<String, SemanticType> {
        &self.overrides
    }

    /// Replaces the intent. Bumps the intent version and expires recommendations only.
    pub fn set_intent(&mut self, intent: Option<IntentSpec>) {
        self.intent = intent;
        self.intent_version += 1;
        self.expire(ExpiryTrigger::IntentChange);
    }

    /// Cache invalidation for a mutation. Never recomputes anything.
    pub fn expire(&mut self, trigger: ExpiryTrigger) {
        self.rec_cache = None;
        if trigger != ExpiryTrigger::IntentChange {
            self.metadata_cache = None;
            self.sample_cache = None;
        }
    }

    pub fn set_type_override(&mut self, column: &str, semantic_type: SemanticType) -> Result<()> {
        self.require(column)?;
        self.overrides.insert(column.to_string(), semantic_type);
        if let Some((_, meta)) = &mut self.metadata_cache {
            if let Some(m) = Arc::make_mut(meta).get_mut(column) {
                m.semantic_type = semantic_type;
                m.overridden = true;
            }
        }
        self.rec_cache = None;
        Ok(())
    }

    pub fn fresh_metadata(&self) -> Option<&Arc<MetadataSet>> {
        match &self.metadata_cache {
            Some((v, meta)) if *v == self.version => Some(meta),
            _ => None,
        }
    }

    /// Stores metadata computed for `version`; ignored if the frame moved on.
    pub fn store_metadata(&mut self, version: u64, meta: Arc<MetadataSet>) {
        if version == self.version {
            self.metadata_cache = Some((version, meta));
        }
    }

    pub fn fresh_dashboard(&self, k: usize) -> Option<&Arc<Dashboard>> {
        match &self.rec_cache {
            Some(c) if c.stamp == self.stamp() && c.k == k => Some(&c.dashboard),
            _ => None,
        }
    }

    /// Stores a dashboard computed for `stamp`; last writer wins.
    pub fn store_dashboard(&mut self, stamp: CacheStamp, k: usize, dashboard: Arc<Dashboard>) {
        if stamp == self.stamp() {
            self.rec_cache = Some(RecCache { stamp, k, dashboard });
        }
    }

    pub fn fresh_sample(&self, cap: usize, seed: u64) -> Option<&Arc<SampleCache>> {
        self.sample_cache.as_ref().filter(|s| s.version == self.version && s.cap == cap && s.seed == seed)
    }

    pub fn store_sample(&mut self, sample: Arc<SampleCache>) {
        if sample.version == self.version {
            self.sample_cache = Some(sample);
        }
    }

    /// Copy sharing column storage with every cache dropped.
    pub fn uncached(&self) -> Frame {
        let mut f = self.clone();
        f.rec_cache = None;
        f.metadata_cache = None;
        f.sample_cache = None;
        f
    }

    /// Read-only copy sharing column storage, without caches or parent link.
    pub fn snapshot(&self) -> Frame {
        let mut f = self.clone();
        f.rec_cache = None;
        f.parent = None;
        f
    }

    /// Applies `transform`, returning a derived frame one version ahead.
    /// The input frame is untouched. Derived frames start with empty caches.
    pub fn transform(&self, transform: &Transform) -> Result<Frame> {
        let (columns, index) = match transform {
            Transform::Filter(p) => {
                let col = self.require(&p.column)?;
                let bound = BoundPredicate::bind(col, p.op, &p.value);
                let rows: Vec<usize> = (0..self.row_count()).filter(|&r| bound.matches(r)).collect();
                self.take_rows(&rows)
            }
            Transform::HeadTail { n, tail } => {
                let len = self.row_count();
                let n = (*n).min(len);
                let rows: Vec<usize> = if *tail { (len - n..len).collect() } else { (0..n).collect() };
                self.take_rows(&rows)
            }
            Transform::Project(names) => {
                let mut cols = Vec::with_capacity(names.len());
                for name in names {
                    let col = self.columns.iter().find(|c| &c.name == name);
                    cols.push(col.cloned().ok_or_else(|| Error::UnknownColumn(name.clone()))?);
                }
                (cols, self.index.clone())
            }
            Transform::Rename(map) => {
                for (from, _) in map {
                    self.require(from)?;
                }
                let cols = self
                    .columns
                    .iter()
                    .map(|c| match map.iter().find(|(from, _)| *from == c.name) {
                        Some((_, to)) => Arc::new(Column::new(to.clone(), c.data.clone())),
                        None => c.clone(),
                    })
                    .collect();
                (cols, self.index.clone())
            }
            Transform::SetColumn { name, values } => {
                let data = match values {
                    ColumnValues::Values(v) => ColumnData::from_values(v.clone())?,
                    ColumnValues::Affine { source, factor, offset } => {
                        let src = self.require(source)?;
                        if src.data.storage_type() == StorageType::String {
                            return Err(Error::InvalidTransform(format!("{source} is not numeric")));
                        }
                        ColumnData::Float((0..src.len()).map(|r| src.data.numeric(r).map(|x| x * factor + offset)).collect())
                    }
                };
                let column = Arc::new(Column::new(name.clone(), data));
                let mut cols = self.columns.clone();
                match cols.iter().position(|c| &c.name == name) {
                    Some(i) => cols[i] = column,
                    None => cols.push(column),
                }
                (cols, self.index.clone())
            }
            Transform::GroupAggregate { keys, aggregations } => self.group_aggregate(keys, aggregations)?,
            Transform::Pivot { index, columns, values, aggregation } => self.pivot(index, columns, values, *aggregation)?,
            Transform::InplaceModify { .. } => (self.columns.clone(), self.index.clone()),
        };
        let plain: Vec<&Column> = columns.iter().map(|c| &**c).collect();
        validate_column_refs(&plain, index.len())?;

        let kind = transform.kind();
        let mut history = self.history.clone();
        let seq = history.last().map_or(1, |e| e.seq + 1);
        history.push(HistoryEvent { kind, params: transform.describe(), seq });

        let mut overrides = self.overrides.clone();
        if let Transform::Rename(map) = transform {
            for (from, to) in map {
                if let Some(t) = overrides.remove(from) {
                    overrides.insert(to.clone(), t);
                }
            }
        }
        overrides.retain(|name, _| columns.iter().any(|c| &c.name == name));

        let grouped = matches!(kind, HistoryKind::GroupAggregate | HistoryKind::Pivot);
        let parent = matches!(kind, HistoryKind::Filter | HistoryKind::HeadTail).then(|| Arc::new(self.snapshot()));
        Ok(Frame {
            columns,
            index,
            version: self.version + 1,
            pre_aggregated: self.pre_aggregated || grouped,
            pivot: match transform {
                Transform::Pivot { columns, values, .. } => Some((columns.clone(), values.clone())),
                Transform::GroupAggregate { .. } => None,
                _ => self.pivot.clone(),
            },
            intent: self.intent.clone(),
            intent_version: self.intent_version,
            history,
            overrides,
            metadata_cache: None,
            rec_cache: None,
            sample_cache: None,
            parent,
        })
    }

    /// Applies `transform` to this frame itself, firing its expiry trigger.
    pub fn apply_in_place(&mut self, transform: &Transform) -> Result<()> {
        let next = self.transform(transform)?;
        self.columns = next.columns;
        self.index = next.index;
        self.version = next.version;
        self.pre_aggregated = next.pre_aggregated;
        self.pivot = next.pivot;
        self.history = next.history;
        self.overrides = next.overrides;
        if next.parent.is_some() {
            self.parent = next.parent;
        }
        self.expire(transform.trigger());
        Ok(())
    }

    fn take_rows(&self, rows: &[usize]) -> (Vec<Arc<Column>>, RowIndex) {
        let cols = self.columns.iter().map(|c| Arc::new(Column::new(c.name.clone(), c.data.take(rows)))).collect();
        (cols, self.index.take(rows))
    }

    fn group_aggregate(
        &self,
        keys: &[String],
        aggregations: &[(String, Aggregation)],
    ) -> Result<(Vec<Arc<Column>>, RowIndex)> {
        if keys.is_empty() {
            return Err(Error::EmptyGroupKeys);
        }
        let key_cols = keys.iter().map(|k| self.require(k)).collect::<Result<Vec<_>>>()?;
        let agg_cols = aggregations.iter().map(|(c, _)| self.require(c)).collect::<Result<Vec<_>>>()?;
        for ((name, agg), col) in aggregations.iter().zip(&agg_cols) {
            let numeric = col.data.storage_type() != StorageType::String;
            if !numeric && !matches!(agg, Aggregation::Count) {
                return Err(Error::InvalidTransform(format!("cannot take {agg} of non-numeric column {name}")));
            }
        }
        let mut groups: BTreeMap<Vec<Value>, Vec<Accumulator>> = BTreeMap::new();
        let mut sizes: BTreeMap<Vec<Value>, u64> = BTreeMap::new();
        'rows: for r in 0..self.row_count() {
            let mut key = Vec::with_capacity(key_cols.len());
            for c in &key_cols {
                match c.data.value(r) {
                    Some(v) => key.push(v),
                    None => continue 'rows,
                }
            }
            *sizes.entry(key.clone()).or_default() += 1;
            let accs = groups.entry(key).or_insert_with(|| alloc::vec![Accumulator::default(); agg_cols.len()]);
            for (acc, col) in accs.iter_mut().zip(&agg_cols) {
                if col.data.storage_type() == StorageType::String {
                    if !col.data.is_null(r) {
                        acc.push(0.0);
                    }
                } else if let Some(v) = col.data.numeric(r) {
                    acc.push(v);
                }
            }
        }
        let mut out = Vec::new();
        if aggregations.is_empty() {
            out.push(Column::new("count", ColumnData::Integer(sizes.values().map(|&n| Some(n as i64)).collect())));
        }
        for (i, ((name, agg), col)) in aggregations.iter().zip(&agg_cols).enumerate() {
            let repeated = aggregations.iter().filter(|(c, _)| c == name).count() > 1;
            let out_name = if repeated { format!("{name}_{agg}") } else { name.clone() };
            let finished = groups.values().map(|accs| accs[i].finish(*agg));
            out.push(Column::new(out_name, aggregate_column(finished, *agg, col.data.storage_type())));
        }
        let index = RowIndex::Labels { names: keys.to_vec(), keys: groups.into_keys().collect() };
        Ok((out.into_iter().map(Arc::new).collect(), index))
    }

    fn pivot(
        &self,
        index: &str,
        columns: &str,
        values: &str,
        aggregation: Option<Aggregation>,
    ) -> Result<(Vec<Arc<Column>>, RowIndex)> {
        let index_col = self.require(index)?;
        let columns_col = self.require(columns)?;
        let values_col = self.require(values)?;
        if values_col.data.storage_type() == StorageType::String && !matches!(aggregation, None | Some(Aggregation::Count)) {
            return Err(Error::InvalidTransform(format!("cannot aggregate non-numeric column {values}")));
        }
        let mut cells: BTreeMap<(Value, Value), (Accumulator, Option<Value>)> = BTreeMap::new();
        for r in 0..self.row_count() {
            let (Some(i), Some(c)) = (index_col.data.value(r), columns_col.data.value(r)) else {
                continue;
            };
            let entry = cells.entry((i.clone(), c.clone())).or_insert((Accumulator::default(), None));
            if aggregation.is_none() && (entry.0.count > 0 || entry.1.is_some()) {
                return Err(Error::PivotDuplicate { index: i.to_label(), column: c.to_label() });
            }
            let cell = values_col.data.value(r);
            if let Some(v) = values_col.data.numeric(r) {
                entry.0.push(v);
            } else if cell.is_some() {
                entry.0.push(0.0);
            }
            if aggregation.is_none() {
                entry.1 = cell;
            }
        }
        let row_keys: Vec<Value> = {
            let mut v: Vec<Value> = cells.keys().map(|(i, _)| i.clone()).collect();
            v.dedup();
            v
        };
        let col_keys: Vec<Value> = {
            let mut v: Vec<Value> = cells.keys().map(|(_, c)| c.clone()).collect();
            v.sort();
            v.dedup();
            v
        };
        let mut out = Vec::with_capacity(col_keys.len());
        for ck in &col_keys {
            let data = match aggregation {
                None => ColumnData::from_values(
                    row_keys.iter().map(|rk| cells.get(&(rk.clone(), ck.clone())).and_then(|e| e.1.clone())).collect(),
                )?,
                Some(agg) => aggregate_column(
                    row_keys.iter().map(|rk| cells.get(&(rk.clone(), ck.clone())).and_then(|e| e.0.finish(agg))),
                    agg,
                    values_col.data.storage_type(),
                ),
            };
            out.push(Arc::new(Column::new(ck.to_label(), data)));
        }
        let index = RowIndex::Labels {
            names: alloc::vec![index.to_string()],
            keys: row_keys.into_iter().map(|k| alloc::vec![k]).collect(),
        };
        Ok((out, index))
    }
}

fn aggregate_column(values: impl Iterator<Item = Option<f64>>, agg: Aggregation, source: StorageType) -> ColumnData {
    let integral = agg == Aggregation::Count
        || (source == StorageType::Integer && matches!(agg, Aggregation::Sum | Aggregation::Min | Aggregation::Max | Aggregation::None));
    if integral {
        ColumnData::Integer(values.map(|v| v.map(|x| x as i64)).collect())
    } else {
        ColumnData::Float(values.collect())
    }
}

fn validate_columns(columns: &[Column], rows: usize) -> Result<()> {
    validate_column_refs(&columns.iter().collect::<Vec<_>>(), rows)
}

fn validate_column_refs(columns: &[&Column], rows: usize) -> Result<()> {
    for (i, c) in columns.iter().enumerate() {
        if columns[..i].iter().any(|o| o.name == c.name) {
            return Err(Error::DuplicateColumn(c.name.clone()));
        }
        if c.len() != rows {
            return Err(Error::LengthMismatch { column: c.name.clone(), expected: rows, actual: c.len() });
        }
    }
    Ok(())
}
