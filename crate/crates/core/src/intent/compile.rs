//! Expand, Lookup, Infer: intent clauses to complete visualization specs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::{AttributeSelector, Clause, IntentSpec, ValueSelector};
use crate::aggregate::Aggregation;
use crate::datetime::{self, TimeUnit};
use crate::error::{Error, Result};
use crate::metadata::{ColumnMetadata, MetadataSet, SemanticType, NOMINAL_CARDINALITY_MAX};
use crate::predicate::{coerce_to, Predicate};
use crate::value::Value;
use crate::vis::{Channel, CompiledVisSpec, Encoding, Mark};

pub const MAX_AXES: usize = 3;
/// Above this many rows two quantitative axes become a heatmap.
pub const SCATTER_ROW_LIMIT: usize = 5000;
pub const DEFAULT_HISTOGRAM_BINS: u32 = 10;
pub const DEFAULT_HEATMAP_BINS: u32 = 40;
/// Single-attribute bar charts keep this many categories.
pub const TOP_CATEGORIES: usize = 15;

/// One fully enumerated axis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AxisSpec {
    pub attribute: String,
    pub channel: Option<Channel>,
    pub aggregation: Option<Aggregation>,
    pub bin_size: Option<u32>,
    /// Filled in by [`lookup_defaults`].
    pub semantic_type: Option<SemanticType>,
}

impl AxisSpec {
    pub fn new(attribute: &str) -> AxisSpec {
        AxisSpec { attribute: attribute.into(), channel: None, aggregation: None, bin_size: None, semantic_type: None }
    }
}

/// A vis with every union and wildcard resolved, but no encoding yet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialVisSpec {
    pub axes: Vec<AxisSpec>,
    pub filters: Vec<Predicate>,
}

/// Result of compiling an intent: surviving specs plus why others were dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub specs: Vec<CompiledVisSpec>,
    pub diagnostics: Vec<String>,
}

enum Alternatives {
    Axes(Vec<AxisSpec>),
    Filters(Vec<Predicate>),
}

fn clause_alternatives(clause: &Clause, meta: &MetadataSet) -> Result<Alternatives> {
    Ok(match clause {
        Clause::Axis(a) => {
            let names: Vec<&str> = match &a.attribute {
                AttributeSelector::Named(names) => {
                    names.iter().map(String::as_str).filter(|n| meta.get(n).is_some()).collect()
                }
                AttributeSelector::Wildcard(constraint) => meta
                    .columns
                    .iter()
                    .filter(|m| constraint.is_none_or(|t| m.semantic_type == t))
                    .map(|m| m.name.as_str())
                    .collect(),
            };
            Alternatives::Axes(
                names
                    .into_iter()
                    .map(|n| AxisSpec {
                        attribute: n.to_string(),
                        channel: a.channel,
                        aggregation: a.aggregation,
                        bin_size: a.bin_size,
                        semantic_type: None,
                    })
                    .collect(),
            )
        }
        Clause::Filter(f) => {
            let mut out = Vec::new();
            for attr in &f.attributes {
                let Some(m) = meta.get(attr) else { continue };
                match &f.value {
                    ValueSelector::Named(values) => {
                        for v in values {
                            let raw = Value::Str(v.clone());
                            let value = coerce_to(&raw, m.storage_type).unwrap_or(raw);
                            out.push(Predicate::new(attr.clone(), f.op, value));
                        }
                    }
                    ValueSelector::Wildcard => {
                        if m.capped {
                            return Err(Error::WildcardOverCappedColumn(attr.clone()));
                        }
                        out.extend(m.unique_values.iter().map(|v| Predicate::new(attr.clone(), f.op, v.clone())));
                    }
                }
            }
            Alternatives::Filters(out)
        }
    })
}

/// Enumerates every combination the intent describes, in clause order.
///
/// Unknown names are skipped (the validator reports them). Specs with a
/// repeated attribute or more than [`MAX_AXES`] axes are dropped, and specs
/// that differ only in axis order are merged, keeping the ordering whose
/// attribute sequence sorts first.
pub fn expand_intent(intent: &IntentSpec, meta: &MetadataSet) -> Result<Vec<PartialVisSpec>> {
    let mut combos = vec![PartialVisSpec { axes: Vec::new(), filters: Vec::new() }];
    for clause in intent.clauses() {
        let alternatives = clause_alternatives(clause, meta)?;
        let len = match &alternatives {
            Alternatives::Axes(a) => a.len(),
            Alternatives::Filters(f) => f.len(),
        };
        if len == 0 {
            continue;
        }
        let mut next = Vec::with_capacity(combos.len() * len);
        for base in &combos {
            match &alternatives {
                Alternatives::Axes(axes) => {
                    for axis in axes {
                        let mut p = base.clone();
                        p.axes.push(axis.clone());
                        next.push(p);
                    }
                }
                Alternatives::Filters(filters) => {
                    for filter in filters {
                        let mut p = base.clone();
                        p.filters.push(filter.clone());
                        next.push(p);
                    }
                }
            }
        }
        combos = next;
    }

    let mut out: Vec<PartialVisSpec> = Vec::new();
    let mut seen: HashMap<(Vec<AxisSpec>, Vec<Predicate>), usize> = HashMap::new();
    for p in combos {
        if p.axes.len() > MAX_AXES {
            continue;
        }
        let repeated = p.axes.iter().enumerate().any(|(i, a)| p.axes[..i].iter().any(|b| b.attribute == a.attribute));
        if repeated {
            continue;
        }
        let mut sorted = p.axes.clone();
        sorted.sort();
        match seen.entry((sorted, p.filters.clone())) {
            hashbrown::hash_map::Entry::Occupied(e) => {
                let kept = &mut out[*e.get()];
                let order = |s: &PartialVisSpec| s.axes.iter().map(|a| a.attribute.clone()).collect::<Vec<_>>();
                if order(&p) < order(kept) {
                    *kept = p;
                }
            }
            hashbrown::hash_map::Entry::Vacant(e) => {
                e.insert(out.len());
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Counts of (quantitative, categorical, temporal) axes.
fn type_counts(types: &[SemanticType]) -> (usize, usize, usize) {
    let q = types.iter().filter(|t| **t == SemanticType::Quantitative).count();
    let t = types.iter().filter(|t| **t == SemanticType::Temporal).count();
    (q, types.len() - q - t, t)
}

/// The mark for a combination of axis types, or `None` when no template fits.
/// `binned` forces the heatmap variant of scatter templates.
pub fn encoding_template(types: &[SemanticType], row_count: usize, binned: bool) -> Option<Mark> {
    let geo = types.contains(&SemanticType::Geographic);
    let dense = binned || row_count > SCATTER_ROW_LIMIT;
    Some(match type_counts(types) {
        (1, 0, 0) => Mark::Histogram,
        (0, 1, 0) | (1, 1, 0) if geo => Mark::Map,
        (0, 1, 0) | (1, 1, 0) => Mark::Bar,
        (0, 0, 1) | (1, 0, 1) => Mark::Line,
        (2, 0, 0) if dense => Mark::Heatmap,
        (2, 0, 0) => Mark::Scatter,
        (0, 2, 0) | (1, 2, 0) => Mark::ColorBar,
        (0, 1, 1) | (1, 1, 1) => Mark::ColorLine,
        (2, 1, 0) if dense => Mark::ColorHeatmap,
        (2, 1, 0) => Mark::ColorScatter,
        (3, 0, 0) => Mark::ColorHeatmap,
        _ => return None,
    })
}

fn explicit_bin(partial: &PartialVisSpec) -> bool {
    partial.axes.iter().any(|a| a.semantic_type == Some(SemanticType::Quantitative) && a.bin_size.is_some())
}

/// Attaches semantic types and rejects specs that cannot be drawn.
/// The error carries a diagnostic explaining the rejection.
pub fn lookup_defaults(partial: &PartialVisSpec, meta: &MetadataSet) -> core::result::Result<PartialVisSpec, String> {
    let mut out = partial.clone();
    for axis in &mut out.axes {
        let m = meta.get(&axis.attribute).ok_or_else(|| format!("unknown attribute {}", axis.attribute))?;
        if m.cardinality == 0 {
            return Err(format!("{} has no non-null values", axis.attribute));
        }
        axis.semantic_type = Some(m.semantic_type);
        if axis.channel == Some(Channel::Color) && m.semantic_type == SemanticType::Temporal {
            return Err(format!("temporal attribute {} cannot be encoded as color", axis.attribute));
        }
    }
    for f in &out.filters {
        if meta.get(&f.column).is_none() {
            return Err(format!("unknown filter attribute {}", f.column));
        }
    }
    let wide: Vec<&ColumnMetadata> = out
        .axes
        .iter()
        .filter_map(|a| meta.get(&a.attribute))
        .filter(|m| m.semantic_type.is_categorical() && m.cardinality > NOMINAL_CARDINALITY_MAX)
        .collect();
    if wide.len() >= 2 {
        return Err(format!("{} and {} both have too many categories", wide[0].name, wide[1].name));
    }
    let types: Vec<SemanticType> = out.axes.iter().filter_map(|a| a.semantic_type).collect();
    let Some(mark) = encoding_template(&types, meta.row_count, explicit_bin(&out)) else {
        let names: Vec<&str> = out.axes.iter().map(|a| a.attribute.as_str()).collect();
        return Err(format!("no visualization for axes [{}]", names.join(", ")));
    };
    for (i, axis) in out.axes.iter().enumerate() {
        let Some(ch) = axis.channel else { continue };
        if ch == Channel::Color && !mark.has_color() {
            return Err(format!("{} on color, but a {mark} has no color channel", axis.attribute));
        }
        if out.axes[..i].iter().any(|b| b.channel == Some(ch)) {
            return Err(format!("two attributes requested channel {}", ch.as_str()));
        }
    }
    Ok(out)
}

fn time_unit_for(m: &ColumnMetadata) -> Option<TimeUnit> {
    let bounds = match (&m.min, &m.max) {
        (Some(Value::Datetime(lo)), Some(Value::Datetime(hi))) => Some((*lo, *hi)),
        _ => {
            let parsed = m.unique_values.iter().filter_map(|v| v.as_str().and_then(datetime::parse_iso8601));
            parsed.fold(None, |acc: Option<(i64, i64)>, t| Some(acc.map_or((t, t), |(lo, hi)| (lo.min(t), hi.max(t)))))
        }
    };
    bounds.map(|(lo, hi)| TimeUnit::coarsest_distinguishing(lo, hi))
}

fn dimension(axis: &AxisSpec, meta: &MetadataSet) -> Encoding {
    let t = axis.semantic_type.unwrap_or(SemanticType::Nominal);
    let mut e = Encoding::field(&axis.attribute, t);
    e.aggregate = axis.aggregation;
    e.bin = axis.bin_size;
    if t == SemanticType::Temporal {
        e.time_unit = meta.get(&axis.attribute).and_then(time_unit_for);
    }
    e
}

fn measure(axis: &AxisSpec) -> Encoding {
    let mut e = Encoding::field(&axis.attribute, SemanticType::Quantitative);
    e.aggregate = Some(axis.aggregation.unwrap_or(Aggregation::Mean));
    e.bin = axis.bin_size;
    e
}

fn binned(axis: &AxisSpec, default: u32) -> Encoding {
    let mut e = Encoding::field(&axis.attribute, SemanticType::Quantitative);
    e.aggregate = axis.aggregation;
    e.bin = Some(axis.bin_size.unwrap_or(default));
    e
}

fn raw(axis: &AxisSpec) -> Encoding {
    let mut e = Encoding::field(&axis.attribute, SemanticType::Quantitative);
    e.aggregate = axis.aggregation;
    e.bin = axis.bin_size;
    e
}

fn cardinality(axis: &AxisSpec, meta: &MetadataSet) -> usize {
    meta.get(&axis.attribute).map_or(0, |m| m.cardinality)
}

/// Assigns mark and channels to a partial that survived [`lookup_defaults`].
pub fn infer_encoding(partial: &PartialVisSpec, meta: &MetadataSet, row_count: usize) -> Option<CompiledVisSpec> {
    let types: Vec<SemanticType> = partial.axes.iter().map(|a| a.semantic_type.unwrap_or(SemanticType::Nominal)).collect();
    let mark = encoding_template(&types, row_count, explicit_bin(partial))?;
    let of = |pred: fn(SemanticType) -> bool| -> Vec<(usize, &AxisSpec)> {
        partial.axes.iter().enumerate().filter(|(i, _)| pred(types[*i])).collect()
    };
    let quant = of(|t| t == SemanticType::Quantitative);
    let cats = of(SemanticType::is_categorical);
    let temps = of(|t| t == SemanticType::Temporal);

    // (axis index or None for count) per channel, in x, y, color order
    let mut slots: [(Option<usize>, Option<Encoding>); 3] = [(None, None), (None, None), (None, None)];
    let mut set = |ch: Channel, idx: Option<usize>, e: Encoding| slots[ch as usize] = (idx, Some(e));
    let mut spec_sort = false;
    let mut top_n = None;

    let count_or_measure = |q: &[(usize, &AxisSpec)]| match q.first() {
        Some((i, a)) => (Some(*i), measure(a)),
        None => (None, Encoding::count()),
    };
    // Higher cardinality on x, lower on color; clause order breaks ties.
    fn split_cats<'s>(cats: &[(usize, &'s AxisSpec)], meta: &MetadataSet) -> ((usize, &'s AxisSpec), (usize, &'s AxisSpec)) {
        let (a, b) = (cats[0], cats[1]);
        if cardinality(b.1, meta) > cardinality(a.1, meta) {
            (b, a)
        } else {
            (a, b)
        }
    }

    match mark {
        Mark::Histogram => {
            let (i, a) = quant[0];
            set(Channel::X, Some(i), binned(a, DEFAULT_HISTOGRAM_BINS));
            set(Channel::Y, None, Encoding::count());
        }
        Mark::Bar | Mark::Map => {
            let (i, a) = cats[0];
            set(Channel::X, Some(i), dimension(a, meta));
            let (mi, me) = count_or_measure(&quant);
            if mark == Mark::Bar && mi.is_none() {
                spec_sort = true;
                if cardinality(a, meta) > TOP_CATEGORIES {
                    top_n = Some(TOP_CATEGORIES);
                }
            }
            set(Channel::Y, mi, me);
        }
        Mark::Line => {
            let (i, a) = temps[0];
            set(Channel::X, Some(i), dimension(a, meta));
            let (mi, me) = count_or_measure(&quant);
            set(Channel::Y, mi, me);
        }
        Mark::Scatter | Mark::ColorScatter => {
            set(Channel::X, Some(quant[0].0), raw(quant[0].1));
            set(Channel::Y, Some(quant[1].0), raw(quant[1].1));
            if let Some((i, a)) = cats.first() {
                set(Channel::Color, Some(*i), dimension(a, meta));
            }
        }
        Mark::Heatmap | Mark::ColorHeatmap => {
            set(Channel::X, Some(quant[0].0), binned(quant[0].1, DEFAULT_HEATMAP_BINS));
            set(Channel::Y, Some(quant[1].0), binned(quant[1].1, DEFAULT_HEATMAP_BINS));
            if let Some((i, a)) = cats.first() {
                set(Channel::Color, Some(*i), dimension(a, meta));
            } else if let Some((i, a)) = quant.get(2) {
                set(Channel::Color, Some(*i), measure(a));
            }
        }
        Mark::ColorBar => {
            let ((xi, xa), (ci, ca)) = split_cats(&cats, meta);
            set(Channel::X, Some(xi), dimension(xa, meta));
            set(Channel::Color, Some(ci), dimension(ca, meta));
            let (mi, me) = count_or_measure(&quant);
            set(Channel::Y, mi, me);
        }
        Mark::ColorLine => {
            let (ti, ta) = temps[0];
            let (ci, ca) = cats[0];
            set(Channel::X, Some(ti), dimension(ta, meta));
            set(Channel::Color, Some(ci), dimension(ca, meta));
            let (mi, me) = count_or_measure(&quant);
            set(Channel::Y, mi, me);
        }
    }

    // Explicit channels win: swap the requested axis into place.
    for (i, axis) in partial.axes.iter().enumerate() {
        let Some(want) = axis.channel else { continue };
        let Some(have) = slots.iter().position(|(idx, _)| *idx == Some(i)) else { continue };
        if have != want as usize && slots[want as usize].1.is_some() {
            slots.swap(have, want as usize);
        }
    }

    let [(_, x), (_, y), (_, color)] = slots;
    let mut spec = CompiledVisSpec::new(mark, x?, y?, color);
    spec.filters = partial.filters.clone();
    spec.sort_descending = spec_sort;
    spec.top_n = top_n;
    Some(spec)
}

/// Expand, Lookup, Infer.
pub fn compile_intent(intent: &IntentSpec, meta: &MetadataSet) -> Result<Compiled> {
    let mut specs = Vec::new();
    let mut diagnostics = Vec::new();
    for partial in expand_intent(intent, meta)? {
        match lookup_defaults(&partial, meta) {
            Ok(p) => specs.extend(infer_encoding(&p, meta, meta.row_count)),
            Err(why) => diagnostics.push(why),
        }
    }
    Ok(Compiled { specs, diagnostics })
}
