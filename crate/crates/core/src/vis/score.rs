//! Interestingness scores, computed from raw rows so they can run on a sample.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::cell::RefCell;

use hashbrown::HashMap;

use super::process::{Bins, KeyColumn};
use super::spec::CompiledVisSpec;
use crate::aggregate::Accumulator;
use crate::datetime::TimeUnit;
use crate::error::Result;
use crate::frame::Frame;
use crate::metadata::{MetadataSet, SemanticType};
use crate::predicate::{BoundPredicate, Predicate};

/// Bins used when the Filter score compares quantitative distributions.
pub const FILTER_SCORE_BINS: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    /// |Pearson r| of the two quantitative axes.
    Correlation,
    /// |skewness| of the single quantitative axis.
    Distribution,
    /// Every vis scores 0; order comes from metadata.
    Unscored,
    /// Scores the attribute added to a base vis.
    Enhance,
    /// Scores the filter added to a base vis.
    Filter,
    /// Picks a formula from the spec's shape (used for expanded intents).
    General,
}

/// Pearson r over pairwise-complete entries. NaN marks a null.
/// `None` when fewer than 2 pairs remain or either side is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson_masked(x, y, None).0
}

fn pearson_masked(x: &[f64], y: &[f64], mask: Option<&[bool]>) -> (Option<f64>, usize) {
    let keep = |i: usize| mask.is_none_or(|m| m[i]) && !x[i].is_nan() && !y[i].is_nan();
    let (mut n, mut sx, mut sy) = (0usize, 0.0, 0.0);
    for i in 0..x.len() {
        if keep(i) {
            n += 1;
            sx += x[i];
            sy += y[i];
        }
    }
    if n < 2 {
        return (None, n);
    }
    let (mx, my) = (sx / n as f64, sy / n as f64);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        if keep(i) {
            let (dx, dy) = (x[i] - mx, y[i] - my);
            sxx += dx * dx;
            syy += dy * dy;
            sxy += dx * dy;
        }
    }
    if sxx == 0.0 || syy == 0.0 {
        return (None, n);
    }
    (Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0)), n)
}

/// Biased sample skewness g1 = m3 / m2^1.5. NaN marks a null.
pub fn skewness(x: &[f64]) -> Option<f64> {
    skewness_masked(x, None).0
}

fn skewness_masked(x: &[f64], mask: Option<&[bool]>) -> (Option<f64>, usize) {
    let keep = |i: usize| mask.is_none_or(|m| m[i]) && !x[i].is_nan();
    let (mut n, mut s) = (0usize, 0.0);
    for (i, &v) in x.iter().enumerate() {
        if keep(i) {
            n += 1;
            s += v;
        }
    }
    if n < 2 {
        return (None, n);
    }
    let mean = s / n as f64;
    let (mut m2, mut m3) = (0.0, 0.0);
    for (i, &v) in x.iter().enumerate() {
        if keep(i) {
            let d = v - mean;
            m2 += d * d;
            m3 += d * d * d;
        }
    }
    let (m2, m3) = (m2 / n as f64, m3 / n as f64);
    if m2 == 0.0 {
        return (None, n);
    }
    (Some(m3 / (m2 * libm::sqrt(m2))), n)
}

/// Euclidean distance between two distributions after normalizing each to sum 1.
pub fn normalized_distance(a: &[f64], b: &[f64]) -> Option<f64> {
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if sa == 0.0 || sb == 0.0 {
        return None;
    }
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x / sa - y / sb) * (x / sa - y / sb)).sum();
    Some(libm::sqrt(d2))
}

/// Distance from uniform of per-group values normalized by their absolute sum.
pub fn group_deviation(values: &[f64]) -> Option<f64> {
    let total: f64 = values.iter().map(|v| v.abs()).sum();
    if values.is_empty() || total == 0.0 {
        return None;
    }
    let uniform = 1.0 / values.len() as f64;
    let d2: f64 = values.iter().map(|v| (v / total - uniform) * (v / total - uniform)).sum();
    Some(libm::sqrt(d2))
}

/// Rows a score reads: the whole frame or a sample of row positions.
/// Numeric columns are gathered once per view into contiguous arrays.
pub struct RowView<'a> {
    frame: &'a Frame,
    rows: Option<&'a [usize]>,
    numeric: RefCell<BTreeMap<String, Arc<[f64]>>>,
}

impl<'a> RowView<'a> {
    pub fn full(frame: &'a Frame) -> Self {
        Self { frame, rows: None, numeric: RefCell::new(BTreeMap::new()) }
    }

    pub fn sample(frame: &'a Frame, rows: &'a [usize]) -> Self {
        Self { frame, rows: Some(rows), numeric: RefCell::new(BTreeMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.rows.map_or(self.frame.row_count(), <[usize]>::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn row(&self, i: usize) -> usize {
        self.rows.map_or(i, |r| r[i])
    }

    /// Column values over the view; NaN for nulls and non-numeric cells.
    pub fn numeric(&self, name: &str) -> Result<Arc<[f64]>> {
        if let Some(v) = self.numeric.borrow().get(name) {
            return Ok(v.clone());
        }
        let data = &self.frame.require(name)?.data;
        let values: Arc<[f64]> = (0..self.len()).map(|i| data.numeric(self.row(i)).unwrap_or(f64::NAN)).collect();
        self.numeric.borrow_mut().insert(name.into(), values.clone());
        Ok(values)
    }

    /// Per-position filter result; `None` when there are no filters.
    pub fn mask(&self, filters: &[Predicate]) -> Result<Option<Vec<bool>>> {
        if filters.is_empty() {
            return Ok(None);
        }
        let bound = filters
            .iter()
            .map(|p| Ok(BoundPredicate::bind(self.frame.require(&p.column)?, p.op, &p.value)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some((0..self.len()).map(|i| bound.iter().all(|b| b.matches(self.row(i)))).collect()))
    }

    fn keys(&self, name: &str, time_unit: Option<TimeUnit>) -> Result<Vec<Option<u64>>> {
        let col = KeyColumn::new(&self.frame.require(name)?.data, time_unit);
        Ok((0..self.len()).map(|i| col.key(self.row(i))).collect())
    }
}

/// A score formula bound to concrete columns.
#[derive(Debug, Clone, PartialEq)]
pub enum ScorePlan {
    Pearson { x: String, y: String, filters: Vec<Predicate> },
    Skew { column: String, filters: Vec<Predicate> },
    /// Largest |r| between `added` and any of `against`.
    MaxPearson { added: String, against: Vec<String>, filters: Vec<Predicate> },
    /// Deviation from uniform of per-group means of `measure` (counts if none).
    GroupDeviation { group: String, time_unit: Option<TimeUnit>, measure: Option<String>, filters: Vec<Predicate> },
    /// Distance between the distributions of `attribute` under `base` and under `base` + `extra`.
    FilterShift { attribute: String, time_unit: Option<TimeUnit>, bins: Option<Bins>, base: Vec<Predicate>, extra: Vec<Predicate> },
    Constant(f64),
}

/// A score plus the number of rows it was computed from (0 means empty).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreOutcome {
    pub score: Option<f64>,
    pub rows: usize,
}

impl ScorePlan {
    pub fn evaluate(&self, view: &RowView<'_>) -> Result<ScoreOutcome> {
        Ok(match self {
            ScorePlan::Pearson { x, y, filters } => {
                let mask = view.mask(filters)?;
                let (r, n) = pearson_masked(&view.numeric(x)?, &view.numeric(y)?, mask.as_deref());
                ScoreOutcome { score: r.map(f64::abs), rows: n }
            }
            ScorePlan::Skew { column, filters } => {
                let mask = view.mask(filters)?;
                let (g, n) = skewness_masked(&view.numeric(column)?, mask.as_deref());
                ScoreOutcome { score: g.map(f64::abs), rows: n }
            }
            ScorePlan::MaxPearson { added, against, filters } => {
                let mask = view.mask(filters)?;
                let a = view.numeric(added)?;
                let mut best: Option<f64> = None;
                let mut rows = 0;
                for other in against {
                    let (r, n) = pearson_masked(&a, &view.numeric(other)?, mask.as_deref());
                    rows = rows.max(n);
                    if let Some(r) = r {
                        best = Some(best.map_or(r.abs(), |b| b.max(r.abs())));
                    }
                }
                ScoreOutcome { score: best, rows }
            }
            ScorePlan::GroupDeviation { group, time_unit, measure, filters } => {
                let mask = view.mask(filters)?;
                let keys = view.keys(group, *time_unit)?;
                let values = measure.as_deref().map(|m| view.numeric(m)).transpose()?;
                let mut groups: HashMap<u64, Accumulator> = HashMap::new();
                let mut rows = 0;
                for (i, key) in keys.iter().enumerate() {
                    if mask.as_ref().is_some_and(|m| !m[i]) {
                        continue;
                    }
                    let Some(key) = key else { continue };
                    let v = match &values {
                        Some(vals) if vals[i].is_nan() => continue,
                        Some(vals) => vals[i],
                        None => 0.0,
                    };
                    rows += 1;
                    groups.entry(*key).or_default().push(v);
                }
                let mut ordered: Vec<(u64, Accumulator)> = groups.into_iter().collect();
                ordered.sort_by_key(|(k, _)| *k);
                let per_group: Vec<f64> = ordered
                    .iter()
                    .map(|(_, acc)| if values.is_some() { acc.sum / acc.count as f64 } else { acc.count as f64 })
                    .collect();
                ScoreOutcome { score: group_deviation(&per_group), rows }
            }
            ScorePlan::FilterShift { attribute, time_unit, bins, base, extra } => {
                let base_mask = view.mask(base)?;
                let all: Vec<Predicate> = base.iter().chain(extra).cloned().collect();
                let narrow_mask = view.mask(&all)?;
                let passes = |m: &Option<Vec<bool>>, i: usize| m.as_ref().is_none_or(|m| m[i]);
                let (wide, narrow, rows) = match bins {
                    Some(b) => {
                        let vals = view.numeric(attribute)?;
                        let mut wide = alloc::vec![0.0; b.n as usize];
                        let mut narrow = wide.clone();
                        let mut rows = 0;
                        for (i, v) in vals.iter().enumerate() {
                            if v.is_nan() || !passes(&base_mask, i) {
                                continue;
                            }
                            let bin = b.index(*v) as usize;
                            wide[bin] += 1.0;
                            if passes(&narrow_mask, i) {
                                narrow[bin] += 1.0;
                                rows += 1;
                            }
                        }
                        (wide, narrow, rows)
                    }
                    None => {
                        let keys = view.keys(attribute, *time_unit)?;
                        let mut counts: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
                        let mut rows = 0;
                        for (i, key) in keys.iter().enumerate() {
                            let Some(key) = key else { continue };
                            if !passes(&base_mask, i) {
                                continue;
                            }
                            let e = counts.entry(*key).or_default();
                            e.0 += 1.0;
                            if passes(&narrow_mask, i) {
                                e.1 += 1.0;
                                rows += 1;
                            }
                        }
                        let (w, n): (Vec<f64>, Vec<f64>) = counts.into_values().unzip();
                        (w, n, rows)
                    }
                };
                ScoreOutcome { score: normalized_distance(&wide, &narrow), rows }
            }
            ScorePlan::Constant(c) => ScoreOutcome { score: Some(*c), rows: view.len() },
        })
    }
}

fn quant_fields<'s>(spec: &'s CompiledVisSpec, meta: &MetadataSet) -> Vec<&'s str> {
    spec.fields()
        .into_iter()
        .filter(|f| meta.semantic_type(f) == Some(SemanticType::Quantitative))
        .collect()
}

fn time_unit_of(spec: &CompiledVisSpec, field: &str) -> Option<TimeUnit> {
    spec.encodings().find(|e| e.field.as_deref() == Some(field)).and_then(|e| e.time_unit)
}

/// Binds a score kind to the columns of `spec`. `base` is the vis that an
/// Enhance or Filter candidate extends.
pub fn plan_for(kind: ScoreKind, spec: &CompiledVisSpec, base: Option<&CompiledVisSpec>, meta: &MetadataSet) -> ScorePlan {
    let filters = spec.filters.clone();
    let fields = spec.fields();
    let quant = quant_fields(spec, meta);
    match kind {
        ScoreKind::Correlation if fields.len() >= 2 => {
            ScorePlan::Pearson { x: fields[0].into(), y: fields[1].into(), filters }
        }
        ScoreKind::Distribution if !fields.is_empty() => ScorePlan::Skew { column: fields[0].into(), filters },
        ScoreKind::Enhance => {
            let Some(base) = base else { return ScorePlan::Constant(0.0) };
            let base_fields = base.fields();
            let Some(added) = fields.iter().find(|f| !base_fields.contains(f)) else {
                return ScorePlan::Constant(0.0);
            };
            let base_quant = quant_fields(base, meta);
            let added_quant = meta.semantic_type(added) == Some(SemanticType::Quantitative);
            match (added_quant, base_quant.is_empty(), base_fields.first()) {
                (true, false, _) => ScorePlan::MaxPearson {
                    added: (*added).into(),
                    against: base_quant.iter().map(|s| (*s).into()).collect(),
                    filters,
                },
                (true, true, Some(group)) => ScorePlan::GroupDeviation {
                    group: (*group).into(),
                    time_unit: time_unit_of(base, group),
                    measure: Some((*added).into()),
                    filters,
                },
                _ => ScorePlan::GroupDeviation {
                    group: (*added).into(),
                    time_unit: time_unit_of(spec, added),
                    measure: base_quant.first().map(|s| (*s).into()),
                    filters,
                },
            }
        }
        ScoreKind::Filter => {
            let Some(base) = base else { return ScorePlan::Constant(0.0) };
            let Some(attribute) = base.fields().first().map(|s| String::from(*s)) else {
                return ScorePlan::Constant(0.0);
            };
            let bins = match meta.get(&attribute) {
                Some(m) if m.semantic_type == SemanticType::Quantitative => {
                    let n = base.encodings().find(|e| e.field.as_deref() == Some(&attribute)).and_then(|e| e.bin);
                    Some(Bins::new(m.min_f64().unwrap_or(0.0), m.max_f64().unwrap_or(0.0), n.unwrap_or(FILTER_SCORE_BINS)))
                }
                _ => None,
            };
            let extra = spec.filters.iter().filter(|f| !base.filters.contains(f)).cloned().collect();
            ScorePlan::FilterShift {
                time_unit: time_unit_of(base, &attribute),
                attribute,
                bins,
                base: base.filters.clone(),
                extra,
            }
        }
        ScoreKind::General => {
            let dims: Vec<&str> = fields.iter().copied().filter(|f| !quant.contains(f)).collect();
            match (quant.len(), dims.first()) {
                (q, _) if q >= 2 => ScorePlan::Pearson { x: quant[0].into(), y: quant[1].into(), filters },
                (1, None) => ScorePlan::Skew { column: quant[0].into(), filters },
                (_, Some(group)) => ScorePlan::GroupDeviation {
                    group: (*group).into(),
                    time_unit: time_unit_of(spec, group),
                    measure: quant.first().map(|s| (*s).into()),
                    filters,
                },
                _ => ScorePlan::Constant(0.0),
            }
        }
        _ => ScorePlan::Constant(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct_pearson(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
        let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        let vy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
        cov / libm::sqrt(vx) / libm::sqrt(vy)
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(1.0));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]), Some(-1.0));
        let r = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((r - 0.8).abs() < 1e-12);
        assert!((r - direct_pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0])).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
        assert_eq!(pearson(&[1.0, f64::NAN, 2.0, 3.0], &[2.0, 9.0, 4.0, 6.0]), Some(1.0));
    }

    #[test]
    fn skewness_of_symmetric_and_skewed() {
        assert_eq!(skewness(&[1.0, 2.0, 3.0]), Some(0.0));
        assert!(skewness(&[1.0, 1.0, 1.0, 10.0]).unwrap() > 1.0);
        assert_eq!(skewness(&[2.0, 2.0]), None);
    }

    #[test]
    fn filter_distance_example() {
        let d = normalized_distance(&[5.0, 5.0], &[3.0, 0.0]).unwrap();
        assert!((d - libm::sqrt(0.5)).abs() < 1e-15);
    }

    #[test]
    fn deviation_from_uniform() {
        assert_eq!(group_deviation(&[1.0, 1.0, 1.0]), Some(0.0));
        assert!(group_deviation(&[1.0, 0.0]).unwrap() > 0.7);
    }
}
