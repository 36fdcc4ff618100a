//! Nested-loop references for binning and grouping, shared by the property
//! tests and the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;

use super::random_frame;
use luxen_core::aggregate::Aggregation;
use luxen_core::metadata::compute_metadata;
use luxen_core::predicate::{FilterOp, Predicate};
use luxen_core::vis::{process_vis, Encoding, Mark};
use luxen_core::{CompiledVisSpec, Frame, SemanticType, StorageType, Value};
use proptest::{prop_assert, prop_assert_eq};
use proptest::test_runner::TestCaseError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const OPS: [FilterOp; 6] = [FilterOp::Eq, FilterOp::Ne, FilterOp::Lt, FilterOp::Le, FilterOp::Gt, FilterOp::Ge];

pub fn numeric_columns(f: &Frame) -> Vec<String> {
    f.columns()
        .filter(|c| matches!(c.data.storage_type(), StorageType::Integer | StorageType::Float | StorageType::Datetime))
        .map(|c| c.name.clone())
        .collect()
}

pub fn random_filters(f: &Frame, rng: &mut ChaCha8Rng) -> Vec<Predicate> {
    let mut out = Vec::new();
    for _ in 0..rng.random_range(0..3) {
        let col = f.column_at(rng.random_range(0..f.width()));
        let Some(v) = col.data.value(rng.random_range(0..col.len())) else { continue };
        out.push(Predicate::new(col.name.clone(), OPS[rng.random_range(0..OPS.len())], v));
    }
    out
}

pub fn passes(f: &Frame, filters: &[Predicate], r: usize) -> bool {
    filters.iter().all(|p| match f.column(&p.column).unwrap().data.value(r) {
        Some(v) => p.op.holds(v.cmp(&p.value)),
        None => false,
    })
}

pub fn binned(name: &str, n: u32) -> Encoding {
    let mut e = Encoding::field(name, SemanticType::Quantitative);
    e.bin = Some(n);
    e
}

/// Random histogram or heatmap over the numeric columns of `f`.
pub fn random_bin_spec(f: &Frame, rng: &mut ChaCha8Rng) -> Option<CompiledVisSpec> {
    let nums = numeric_columns(f);
    if nums.is_empty() {
        return None;
    }
    let x = &nums[rng.random_range(0..nums.len())];
    let mut spec = if nums.len() >= 2 && rng.random_bool(0.5) {
        let y = &nums[rng.random_range(0..nums.len())];
        CompiledVisSpec::new(Mark::Heatmap, binned(x, rng.random_range(1..12)), binned(y, rng.random_range(1..12)), None)
    } else {
        CompiledVisSpec::new(Mark::Histogram, binned(x, rng.random_range(1..15)), Encoding::count(), None)
    };
    spec.filters = random_filters(f, rng);
    Some(spec)
}

pub fn edges(lo: f64, hi: f64, n: u32) -> Vec<f64> {
    (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
}

pub fn in_bin(v: f64, e: &[f64], i: usize) -> bool {
    let last = e.len() - 2;
    if e[last + 1] <= e[0] {
        return i == 0;
    }
    (i == 0 || v >= e[i]) && (i == last || v < e[i + 1])
}

pub fn as_i64(v: &Value) -> i64 {
    match v {
        Value::Int(i) => *i,
        other => panic!("count should be an integer, got {other:?}"),
    }
}

/// Checks one random histogram or heatmap against the nested-loop count.
/// `Ok(false)` means the frame had nothing to bin.
pub fn check_bins(seed: u64) -> Result<bool, TestCaseError> {
    let f = random_frame(seed, 120, 7);
    let meta = compute_metadata(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
    let Some(spec) = random_bin_spec(&f, &mut rng) else { return Ok(false) };
    let data = process_vis(&spec, &f, &meta).unwrap();
    let fields: Vec<String> = spec.encodings().filter_map(|e| e.field.clone()).collect();
    let eligible: Vec<usize> = (0..f.row_count())
        .filter(|&r| passes(&f, &spec.filters, r))
        .filter(|&r| fields.iter().all(|c| f.column(c).unwrap().data.numeric(r).is_some()))
        .collect();
    let counts: i64 = data.column("count").unwrap().map(as_i64).sum();
    prop_assert_eq!(counts as usize, eligible.len());
    prop_assert_eq!(data.source_rows, eligible.len());

    let edges_of = |e: &Encoding| {
        let m = meta.get(e.field.as_deref().unwrap()).unwrap();
        edges(m.min_f64().unwrap_or(0.0), m.max_f64().unwrap_or(0.0), e.bin.unwrap())
    };
    let ex = edges_of(&spec.x);
    let value = |c: &str, r: usize| f.column(c).unwrap().data.numeric(r).unwrap();
    if spec.mark == Mark::Histogram {
        if eligible.is_empty() {
            prop_assert!(data.rows.is_empty());
        } else {
            prop_assert_eq!(data.rows.len(), ex.len() - 1);
            for (i, row) in data.rows.iter().enumerate() {
                let expected = eligible.iter().filter(|&&r| in_bin(value(&fields[0], r), &ex, i)).count();
                prop_assert_eq!(as_i64(&row[3]) as usize, expected);
                prop_assert_eq!(&row[1], &Value::Float(ex[i]));
            }
        }
    } else {
        let ey = edges_of(&spec.y);
        let mut expected = Vec::new();
        for i in 0..ex.len() - 1 {
            for j in 0..ey.len() - 1 {
                let n = eligible
                    .iter()
                    .filter(|&&r| in_bin(value(&fields[0], r), &ex, i) && in_bin(value(&fields[1], r), &ey, j))
                    .count();
                if n > 0 {
                    expected.push((ex[i], ey[j], n));
                }
            }
        }
        let got: Vec<(f64, f64, usize)> = data
            .rows
            .iter()
            .map(|r| (r[1].as_f64().unwrap(), r[4].as_f64().unwrap(), as_i64(&r[6]) as usize))
            .collect();
        prop_assert_eq!(got, expected);
    }
    Ok(true)
}

/// Checks one random bar chart against a nested-loop group-by.
/// `Ok(false)` means the frame had no dimension or measure.
pub fn check_group_by(seed: u64, agg: Aggregation) -> Result<bool, TestCaseError> {
    let f = random_frame(seed, 150, 7);
    let meta = compute_metadata(&f);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<String> = meta
        .columns
        .iter()
        .filter(|m| m.semantic_type == SemanticType::Nominal)
        .map(|m| m.name.clone())
        .collect();
    let nums = numeric_columns(&f);
    if dims.is_empty() || nums.is_empty() {
        return Ok(false);
    }
    let dim = &dims[rng.random_range(0..dims.len())];
    let measure = &nums[rng.random_range(0..nums.len())];
    let mut y = Encoding::field(measure, SemanticType::Quantitative);
    y.aggregate = Some(agg);
    let y = if agg == Aggregation::Count { Encoding::count() } else { y };
    let mut spec = CompiledVisSpec::new(Mark::Bar, Encoding::field(dim, SemanticType::Nominal), y.clone(), None);
    spec.filters = random_filters(&f, &mut rng);
    let data = process_vis(&spec, &f, &meta).unwrap();

    let dcol = &f.column(dim).unwrap().data;
    let mcol = &f.column(measure).unwrap().data;
    let keep = |r: usize| {
        passes(&f, &spec.filters, r) && dcol.value(r).is_some() && (y.is_count() || mcol.numeric(r).is_some())
    };
    let mut keys: Vec<Value> = (0..f.row_count()).filter(|&r| keep(r)).map(|r| dcol.value(r).unwrap()).collect();
    keys.sort();
    keys.dedup();
    let mut expected: BTreeMap<Value, Value> = BTreeMap::new();
    for k in &keys {
        let vals: Vec<f64> = (0..f.row_count())
            .filter(|&r| keep(r) && dcol.value(r).as_ref() == Some(k))
            .map(|r| if y.is_count() { 0.0 } else { mcol.numeric(r).unwrap() })
            .collect();
        let n = vals.len() as f64;
        let sum = vals.iter().fold(0.0, |a, b| a + b);
        let v = match if y.is_count() { Aggregation::Count } else { agg } {
            Aggregation::Count => Value::Int(vals.len() as i64),
            Aggregation::Mean => Value::Float(sum / n),
            Aggregation::Sum | Aggregation::None => Value::Float(sum),
            Aggregation::Min => Value::Float(vals.iter().cloned().fold(f64::INFINITY, f64::min)),
            Aggregation::Max => Value::Float(vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
            Aggregation::Variance => {
                let mean = sum / n;
                Value::Float(vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n)
            }
        };
        expected.insert(k.clone(), v);
    }
    prop_assert_eq!(data.rows.len(), expected.len());
    for (row, (k, v)) in data.rows.iter().zip(&expected) {
        prop_assert_eq!(&row[0], k);
        match (agg, &row[1], v) {
            (Aggregation::Variance, Value::Float(a), Value::Float(b)) if !y.is_count() => {
                prop_assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{} vs {}", a, b);
            }
            _ => prop_assert_eq!(&row[1], v),
        }
    }
    Ok(true)
}
