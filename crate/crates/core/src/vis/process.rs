use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::spec::{CompiledVisSpec, Encoding, Family, VisSource};
use super::VisData;
use crate::aggregate::{Accumulator, Aggregation};
use crate::datetime::{self, TimeUnit};
use crate::error::{Error, Result};
use crate::frame::{ColumnData, Frame, StrColumn};
use crate::metadata::{MetadataSet, SemanticType};
use crate::predicate::{BoundPredicate, Predicate};
use crate::value::Value;

/// Equal-width bins over `[lo, hi]`: right-open except the last, which is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bins {
    pub lo: f64,
    pub hi: f64,
    pub n: u32,
}

impl Bins {
    pub fn new(lo: f64, hi: f64, n: u32) -> Bins {
        Bins { lo, hi, n: n.max(1) }
    }

    pub fn edge(&self, i: u32) -> f64 {
        if i >= self.n {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * (i as f64) / (self.n as f64)
        }
    }

    /// Bin holding `v`; values outside the range clamp to the end bins.
    #[inline]
    pub fn index(&self, v: f64) -> u32 {
        let last = self.n - 1;
        if self.hi <= self.lo || v <= self.lo {
            return 0;
        }
        if v >= self.hi {
            return last;
        }
        let guess = ((v - self.lo) / (self.hi - self.lo) * self.n as f64) as u32;
        let mut i = guess.min(last);
        while i > 0 && v < self.edge(i) {
            i -= 1;
        }
        while i < last && v >= self.edge(i + 1) {
            i += 1;
        }
        i
    }

    pub fn midpoint(&self, i: u32) -> f64 {
        (self.edge(i) + self.edge(i + 1)) / 2.0
    }
}

/// Rows passing every filter, drawn from `base` (all rows when `None`).
pub fn filtered_rows(frame: &Frame, filters: &[Predicate], base: Option<&[usize]>) -> Result<Vec<usize>> {
    let bound = filters
        .iter()
        .map(|p| Ok(BoundPredicate::bind(frame.require(&p.column)?, p.op, &p.value)))
        .collect::<Result<Vec<_>>>()?;
    let keep = |r: &usize| bound.iter().all(|b| b.matches(*r));
    Ok(match base {
        Some(rows) => rows.iter().copied().filter(keep).collect(),
        None => (0..frame.row_count()).filter(keep).collect(),
    })
}

/// A column read as discrete group keys packed into `u64`.
pub enum KeyColumn<'a> {
    Str(&'a StrColumn),
    /// Dictionary strings parsed as ISO-8601 and truncated, per code.
    StrTime(&'a StrColumn, Vec<Option<i64>>),
    Int(&'a [Option<i64>]),
    Datetime(&'a [Option<i64>], Option<TimeUnit>),
    Float(&'a [Option<f64>]),
    Bool(&'a [Option<bool>]),
}

impl<'a> KeyColumn<'a> {
    pub fn new(data: &'a ColumnData, time_unit: Option<TimeUnit>) -> KeyColumn<'a> {
        match data {
            ColumnData::String(s) => match time_unit {
                Some(unit) => {
                    let parsed = s.dict.iter().map(|d| datetime::parse_iso8601(d).map(|t| unit.truncate(t))).collect();
                    KeyColumn::StrTime(s, parsed)
                }
                None => KeyColumn::Str(s),
            },
            ColumnData::Integer(v) => KeyColumn::Int(v),
            ColumnData::Datetime(v) => KeyColumn::Datetime(v, time_unit),
            ColumnData::Float(v) => KeyColumn::Float(v),
            ColumnData::Boolean(v) => KeyColumn::Bool(v),
        }
    }

    #[inline]
    pub fn key(&self, row: usize) -> Option<u64> {
        match self {
            KeyColumn::Str(s) => s.codes[row].map(u64::from),
            KeyColumn::StrTime(s, parsed) => s.codes[row].and_then(|c| parsed[c as usize]).map(|t| t as u64),
            KeyColumn::Int(v) => v[row].map(|x| x as u64),
            KeyColumn::Datetime(v, unit) => v[row].map(|t| unit.map_or(t, |u| u.truncate(t)) as u64),
            KeyColumn::Float(v) => v[row].map(|f| if f == 0.0 { 0 } else { f.to_bits() }),
            KeyColumn::Bool(v) => v[row].map(u64::from),
        }
    }

    pub fn value(&self, key: u64) -> Value {
        match self {
            KeyColumn::Str(s) => Value::Str(s.dict[key as usize].clone()),
            KeyColumn::StrTime(..) | KeyColumn::Datetime(..) => Value::Datetime(key as i64),
            KeyColumn::Int(_) => Value::Int(key as i64),
            KeyColumn::Float(_) => Value::Float(f64::from_bits(key)),
            KeyColumn::Bool(_) => Value::Bool(key != 0),
        }
    }
}

fn numeric_column<'a>(frame: &'a Frame, enc: &Encoding) -> Result<&'a ColumnData> {
    let name = enc.field.as_deref().ok_or_else(|| Error::InvalidTransform("count has no column".into()))?;
    Ok(&frame.require(name)?.data)
}

fn bins_for(enc: &Encoding, meta: &MetadataSet) -> Bins {
    let m = enc.field.as_deref().and_then(|f| meta.get(f));
    let lo = m.and_then(|m| m.min_f64()).unwrap_or(0.0);
    let hi = m.and_then(|m| m.max_f64()).unwrap_or(0.0);
    Bins::new(lo, hi, enc.bin.unwrap_or(1))
}

fn fields(names: impl IntoIterator<Item = String>) -> Arc<[String]> {
    names.into_iter().collect::<Vec<_>>().into()
}

fn measure_value(acc: &Accumulator, agg: Aggregation) -> Value {
    match (agg, acc.finish(agg)) {
        (Aggregation::Count, Some(c)) => Value::Int(c as i64),
        (_, Some(v)) => Value::Float(v),
        (_, None) => Value::Float(f64::NAN),
    }
}

/// Extracts the plot data of `spec` from `frame`. Filters are applied first,
/// then rows with a null in any referenced column are dropped.
pub fn process_vis(spec: &CompiledVisSpec, frame: &Frame, meta: &MetadataSet) -> Result<VisData> {
    match &spec.source {
        VisSource::Frame => {}
        VisSource::IndexRow { row, .. } => return Ok(index_row(spec, frame, *row)),
        VisSource::IndexColumn => return index_column(spec, frame),
    }
    let rows = filtered_rows(frame, &spec.filters, None)?;
    match spec.mark.family() {
        Family::Project => project(spec, frame, &rows),
        Family::Aggregate => aggregate(spec, frame, &rows),
        Family::Bin => bin(spec, frame, meta, &rows),
    }
}

fn project(spec: &CompiledVisSpec, frame: &Frame, rows: &[usize]) -> Result<VisData> {
    let cols = spec
        .encodings()
        .map(|e| numeric_column(frame, e))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &r in rows {
        let cells: Option<Vec<Value>> = cols.iter().map(|c| c.value(r)).collect();
        if let Some(cells) = cells {
            out.push(cells);
        }
    }
    Ok(VisData {
        fields: fields(spec.encodings().map(|e| e.name().to_string())),
        source_rows: out.len(),
        rows: out,
    })
}

fn is_dimension(e: &Encoding) -> bool {
    !e.is_count() && e.semantic_type != SemanticType::Quantitative
}

fn aggregate(spec: &CompiledVisSpec, frame: &Frame, rows: &[usize]) -> Result<VisData> {
    let encs: Vec<&Encoding> = spec.encodings().collect();
    let dims: Vec<usize> = (0..encs.len()).filter(|&i| is_dimension(encs[i])).collect();
    let measure = (0..encs.len()).find(|&i| !is_dimension(encs[i])).ok_or_else(|| {
        Error::InvalidTransform(alloc::format!("{} has no measure", spec.mark))
    })?;
    let keys = dims
        .iter()
        .map(|&i| Ok(KeyColumn::new(numeric_column(frame, encs[i])?, encs[i].time_unit)))
        .collect::<Result<Vec<_>>>()?;
    let agg = encs[measure].aggregate.unwrap_or(Aggregation::Mean);
    let agg = if encs[measure].is_count() { Aggregation::Count } else { agg };
    let values = match encs[measure].field {
        Some(_) => Some(numeric_column(frame, encs[measure])?),
        None => None,
    };

    let mut groups: HashMap<[u64; 2], Accumulator> = HashMap::new();
    let mut used = 0;
    'rows: for &r in rows {
        let mut key = [0u64; 2];
        for (slot, k) in key.iter_mut().zip(&keys) {
            match k.key(r) {
                Some(v) => *slot = v,
                None => continue 'rows,
            }
        }
        let v = match values {
            Some(col) => match col.numeric(r) {
                Some(v) => v,
                None => continue,
            },
            None => 0.0,
        };
        used += 1;
        groups.entry(key).or_default().push(v);
    }

    let mut out: Vec<(Vec<Value>, Value, f64)> = groups
        .into_iter()
        .map(|(key, acc)| {
            let labels: Vec<Value> = keys.iter().zip(key).map(|(k, v)| k.value(v)).collect();
            let m = measure_value(&acc, agg);
            let sort = m.as_f64().unwrap_or(f64::NEG_INFINITY);
            (labels, m, sort)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    if spec.sort_descending {
        out.sort_by(|a, b| b.2.total_cmp(&a.2));
    }
    if let Some(n) = spec.top_n {
        out.truncate(n);
    }
    let rows = out
        .into_iter()
        .map(|(labels, m, _)| {
            let mut labels = labels.into_iter();
            (0..encs.len()).map(|i| if i == measure { m.clone() } else { labels.next().unwrap() }).collect()
        })
        .collect();
    Ok(VisData { fields: fields(encs.iter().map(|e| e.name().to_string())), rows, source_rows: used })
}

fn bin_fields(e: &Encoding) -> [String; 3] {
    let n = e.name();
    [n.to_string(), alloc::format!("{n}_start"), alloc::format!("{n}_end")]
}

fn bin(spec: &CompiledVisSpec, frame: &Frame, meta: &MetadataSet, rows: &[usize]) -> Result<VisData> {
    let x = numeric_column(frame, &spec.x)?;
    let xb = bins_for(&spec.x, meta);
    let bin_row = |b: &Bins, i: u32| [Value::Float(b.midpoint(i)), Value::Float(b.edge(i)), Value::Float(b.edge(i + 1))];

    if spec.y.is_count() || spec.y.bin.is_none() {
        // histogram: x binned, y counted
        let mut counts = alloc::vec![0i64; xb.n as usize];
        let mut used = 0;
        for &r in rows {
            if let Some(v) = x.numeric(r).filter(|v| !v.is_nan()) {
                counts[xb.index(v) as usize] += 1;
                used += 1;
            }
        }
        let rows = if used == 0 {
            Vec::new()
        } else {
            (0..xb.n).map(|i| {
                let mut row = bin_row(&xb, i).to_vec();
                row.push(Value::Int(counts[i as usize]));
                row
            })
            .collect()
        };
        let mut names = bin_fields(&spec.x).to_vec();
        names.push("count".to_string());
        return Ok(VisData { fields: fields(names), rows, source_rows: used });
    }

    let y = numeric_column(frame, &spec.y)?;
    let yb = bins_for(&spec.y, meta);
    let color = spec.color.as_ref();
    let color_key = match color {
        Some(c) if is_dimension(c) => Some(KeyColumn::new(numeric_column(frame, c)?, c.time_unit)),
        _ => None,
    };
    let color_measure = match color {
        Some(c) if !is_dimension(c) => Some((numeric_column(frame, c)?, c.aggregate.unwrap_or(Aggregation::Mean))),
        _ => None,
    };

    // Dense grid unless a categorical color splits cells.
    let mut grid: Vec<Accumulator> = Vec::new();
    let mut cells: HashMap<(u32, u32, u64), Accumulator> = HashMap::new();
    if color_key.is_none() {
        grid = alloc::vec![Accumulator::default(); xb.n as usize * yb.n as usize];
    }
    let mut used = 0;
    for &r in rows {
        let (Some(xv), Some(yv)) = (x.numeric(r), y.numeric(r)) else { continue };
        if xv.is_nan() || yv.is_nan() {
            continue;
        }
        let (xi, yi) = (xb.index(xv), yb.index(yv));
        let mut v = 0.0;
        if let Some((col, _)) = color_measure {
            match col.numeric(r) {
                Some(c) => v = c,
                None => continue,
            }
        }
        match &color_key {
            Some(k) => {
                let Some(c) = k.key(r) else { continue };
                cells.entry((xi, yi, c)).or_default().push(v);
            }
            None => grid[xi as usize * yb.n as usize + yi as usize].push(v),
        }
        used += 1;
    }
    for (i, acc) in grid.into_iter().enumerate() {
        if acc.count > 0 {
            let (xi, yi) = (i / yb.n as usize, i % yb.n as usize);
            cells.insert((xi as u32, yi as u32, 0), acc);
        }
    }
    let mut names: Vec<String> = bin_fields(&spec.x).into_iter().chain(bin_fields(&spec.y)).collect();
    names.push("count".to_string());
    if let Some(c) = color {
        names.push(c.name().to_string());
    }
    let mut entries: Vec<((u32, u32, Value), Accumulator)> = cells
        .into_iter()
        .map(|((xi, yi, c), acc)| {
            let label = color_key.as_ref().map_or(Value::Int(0), |k| k.value(c));
            ((xi, yi, label), acc)
        })
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let rows = entries
        .into_iter()
        .map(|((xi, yi, label), acc)| {
            let mut row: Vec<Value> = bin_row(&xb, xi).into_iter().chain(bin_row(&yb, yi)).collect();
            row.push(Value::Int(acc.count as i64));
            if color_key.is_some() {
                row.push(label);
            } else if let Some((_, agg)) = color_measure {
                row.push(measure_value(&acc, agg));
            }
            row
        })
        .collect();
    Ok(VisData { fields: fields(names), rows, source_rows: used })
}

fn index_row(spec: &CompiledVisSpec, frame: &Frame, row: usize) -> VisData {
    let temporal = spec.x.semantic_type == SemanticType::Temporal;
    let mut rows = Vec::new();
    for col in frame.columns() {
        let Some(v) = col.data.numeric(row) else { continue };
        let label = match (temporal, datetime::parse_iso8601(&col.name)) {
            (true, Some(t)) => Value::Datetime(t),
            _ => Value::Str(col.name.clone()),
        };
        rows.push(alloc::vec![label, Value::Float(v)]);
    }
    VisData { fields: fields([spec.x.name().to_string(), spec.y.name().to_string()]), source_rows: rows.len(), rows }
}

fn index_column(spec: &CompiledVisSpec, frame: &Frame) -> Result<VisData> {
    let col = numeric_column(frame, &spec.y)?;
    let mut rows = Vec::new();
    for r in 0..frame.row_count() {
        if let Some(v) = col.value(r) {
            rows.push(alloc::vec![frame.index().label(r), v]);
        }
    }
    Ok(VisData { fields: fields([spec.x.name().to_string(), spec.y.name().to_string()]), source_rows: rows.len(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Column;
    use crate::metadata::compute_metadata;
    use crate::vis::{Encoding, Mark};
    use alloc::vec;

    #[test]
    fn bin_edges_are_right_open_last_closed() {
        let b = Bins::new(0.0, 10.0, 2);
        assert_eq!((b.index(0.0), b.index(4.999), b.index(5.0), b.index(10.0)), (0, 0, 1, 1));
        let b = Bins::new(0.0, 1.0, 3);
        for i in 0..3 {
            assert_eq!(b.index(b.edge(i)), i);
        }
        assert_eq!(Bins::new(3.0, 3.0, 10).index(3.0), 0);
    }

    #[test]
    fn bar_mean_by_group() {
        let f = Frame::new(
            vec![
                Column::from_strings("Dept", ["A", "A", "B"].map(Some)),
                Column::new("Sal", ColumnData::Integer(vec![Some(10), Some(20), Some(30)])),
            ],
            "t",
        )
        .unwrap();
        let meta = compute_metadata(&f);
        let mut y = Encoding::field("Sal", SemanticType::Quantitative);
        y.aggregate = Some(Aggregation::Mean);
        let spec = CompiledVisSpec::new(Mark::Bar, Encoding::field("Dept", SemanticType::Nominal), y, None);
        let data = process_vis(&spec, &f, &meta).unwrap();
        assert_eq!(data.rows, vec![vec![Value::from("A"), Value::Float(15.0)], vec![Value::from("B"), Value::Float(30.0)]]);
    }

    #[test]
    fn histogram_counts_and_nulls() {
        let f = Frame::new(vec![Column::new("v", ColumnData::Float((0..10).map(|i| Some(i as f64)).collect()))], "t").unwrap();
        let mut meta = compute_metadata(&f);
        meta.columns[0].min = Some(Value::Float(0.0));
        meta.columns[0].max = Some(Value::Float(10.0));
        let mut x = Encoding::field("v", SemanticType::Quantitative);
        x.bin = Some(2);
        let spec = CompiledVisSpec::new(Mark::Histogram, x, Encoding::count(), None);
        let data = process_vis(&spec, &f, &meta).unwrap();
        let counts: Vec<&Value> = data.column("count").unwrap().collect();
        assert_eq!(counts, [&Value::Int(5), &Value::Int(5)]);

        let f = Frame::new(vec![Column::new("v", ColumnData::Float(vec![Some(1.0), Some(2.0), None, Some(3.0)]))], "t").unwrap();
        let meta = compute_metadata(&f);
        let mut x = Encoding::field("v", SemanticType::Quantitative);
        x.bin = Some(1);
        let spec = CompiledVisSpec::new(Mark::Histogram, x, Encoding::count(), None);
        let data = process_vis(&spec, &f, &meta).unwrap();
        assert_eq!(data.rows[0][3], Value::Int(3));
        assert_eq!(data.source_rows, 3);
    }
}
