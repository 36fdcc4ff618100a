//! Brute-force intent expansion used as an oracle.

use std::collections::BTreeSet;

use luxen_core::intent::PartialVisSpec;
use luxen_core::{Column, ColumnData, Frame, MetadataSet, SemanticType};
use proptest::prelude::*;

/// Axis fields and (filter column, value) pairs of each expanded spec.
pub type Keys = BTreeSet<(Vec<String>, Vec<(String, String)>)>;

pub fn hr_frame() -> Frame {
    let n = 60;
    let f = |k: f64| ColumnData::Float((0..n).map(|r| Some((r as f64 * k) % 97.0)).collect());
    Frame::new(
        vec![
            Column::new("Age", ColumnData::Integer((0..n).map(|r| Some(20 + (r * 7) % 45)).collect())),
            Column::new("HourlyRate", f(1.5)),
            Column::new("DailyRate", f(3.7)),
            Column::new("MonthlyRate", f(11.1)),
            Column::from_strings("Education", (0..n).map(|r| Some(["HS", "BA", "MA", "PhD", "Other"][r as usize % 5]))),
            Column::from_strings("EducationField", (0..n).map(|r| Some(["Science", "Arts", "Medical"][r as usize % 3]))),
            Column::from_strings("Department", (0..n).map(|r| Some(["Sales", "HR", "R&D"][(r as usize / 2) % 3]))),
            Column::from_strings("Country", (0..n).map(|r| Some(["France", "Japan", "Brazil", "Kenya"][r as usize % 4]))),
            Column::new("JoinDate", ColumnData::Datetime((0..n).map(|r| Some(1_500_000_000 + r * 86_400 * 30)).collect())),
            Column::new("Remote", ColumnData::Boolean((0..n).map(|r| Some(r % 3 == 0)).collect())),
        ],
        "hr",
    )
    .unwrap()
}

pub const NAMES: [&str; 11] = [
    "Age", "HourlyRate", "DailyRate", "MonthlyRate", "Education", "EducationField", "Department", "Country", "JoinDate",
    "Remote", "Missing",
];
pub const FILTERABLE: [&str; 3] = ["Education", "Department", "Remote"];

/// Test-side clause description, rendered to text and enumerated directly.
#[derive(Debug, Clone)]
pub enum Gen {
    Names(Vec<usize>),
    Wild(Option<SemanticType>),
    Filter { attr: usize, values: Option<Vec<usize>> },
}

pub fn gen_clause() -> impl Strategy<Value = Gen> {
    let types = prop_oneof![
        Just(None),
        Just(Some(SemanticType::Quantitative)),
        Just(Some(SemanticType::Nominal)),
        Just(Some(SemanticType::Temporal)),
        Just(Some(SemanticType::Geographic)),
    ];
    prop_oneof![
        3 => prop::collection::vec(0..NAMES.len(), 1..4).prop_map(Gen::Names),
        1 => types.prop_map(Gen::Wild),
        1 => (0..FILTERABLE.len(), prop::option::of(prop::collection::vec(0..6usize, 1..3)))
            .prop_map(|(attr, values)| Gen::Filter { attr, values }),
    ]
}

pub fn labels(meta: &MetadataSet, attr: &str) -> Vec<String> {
    meta.get(attr).unwrap().unique_values.iter().map(|v| v.to_label()).collect()
}

pub fn render(g: &Gen, meta: &MetadataSet) -> String {
    match g {
        Gen::Names(ix) => ix.iter().map(|&i| NAMES[i]).collect::<Vec<_>>().join("|"),
        Gen::Wild(None) => "?".into(),
        Gen::Wild(Some(t)) => format!("?{{data_type={t}}}"),
        Gen::Filter { attr, values: None } => format!("{}=?", FILTERABLE[*attr]),
        Gen::Filter { attr, values: Some(v) } => {
            let l = labels(meta, FILTERABLE[*attr]);
            let vals: Vec<&str> = v.iter().map(|&i| l[i % l.len()].as_str()).collect();
            format!("{}={}", FILTERABLE[*attr], vals.join("|"))
        }
    }
}

#[derive(Clone)]
pub enum Alt {
    Axis(String),
    Filter(String, String),
}

/// Plain cross product with the documented drop and dedupe rules, keyed by
/// (sorted axis names, filters in clause order).
pub fn brute_force(clauses: &[Gen], meta: &MetadataSet) -> Keys {
    let mut lists: Vec<Vec<Alt>> = Vec::new();
    for g in clauses {
        let alts: Vec<Alt> = match g {
            Gen::Names(ix) => {
                ix.iter().map(|&i| NAMES[i]).filter(|n| meta.get(n).is_some()).map(|n| Alt::Axis(n.into())).collect()
            }
            Gen::Wild(t) => meta
                .columns
                .iter()
                .filter(|m| t.is_none_or(|t| m.semantic_type == t))
                .map(|m| Alt::Axis(m.name.clone()))
                .collect(),
            Gen::Filter { attr, values } => {
                let a = FILTERABLE[*attr];
                let l = labels(meta, a);
                match values {
                    None => l.iter().map(|v| Alt::Filter(a.into(), v.clone())).collect(),
                    Some(v) => v.iter().map(|&i| Alt::Filter(a.into(), l[i % l.len()].clone())).collect(),
                }
            }
        };
        if !alts.is_empty() {
            lists.push(alts);
        }
    }
    let mut combos: Vec<Vec<Alt>> = vec![vec![]];
    for list in &lists {
        combos = combos.iter().flat_map(|c| list.iter().map(move |a| [c.clone(), vec![a.clone()]].concat())).collect();
    }
    let mut keys = BTreeSet::new();
    for c in combos {
        let mut axes = Vec::new();
        let mut filters = Vec::new();
        for a in c {
            match a {
                Alt::Axis(n) => axes.push(n),
                Alt::Filter(n, v) => filters.push((n, v)),
            }
        }
        let distinct: BTreeSet<&String> = axes.iter().collect();
        if axes.len() > 3 || distinct.len() != axes.len() {
            continue;
        }
        axes.sort();
        keys.insert((axes, filters));
    }
    keys
}

/// Smallest axis ordering the cross product produces for one axis set.
pub fn brute_force_orders(clauses: &[Gen], meta: &MetadataSet, set: &[&str], filter_values: &[String]) -> Option<Vec<String>> {
    let mut lists: Vec<Vec<Alt>> = Vec::new();
    for g in clauses {
        let alts: Vec<Alt> = match g {
            Gen::Names(ix) => {
                ix.iter().map(|&i| NAMES[i]).filter(|n| meta.get(n).is_some()).map(|n| Alt::Axis(n.into())).collect()
            }
            Gen::Wild(t) => meta
                .columns
                .iter()
                .filter(|m| t.is_none_or(|t| m.semantic_type == t))
                .map(|m| Alt::Axis(m.name.clone()))
                .collect(),
            Gen::Filter { attr, values } => {
                let a = FILTERABLE[*attr];
                let l = labels(meta, a);
                match values {
                    None => l.iter().map(|v| Alt::Filter(a.into(), v.clone())).collect(),
                    Some(v) => v.iter().map(|&i| Alt::Filter(a.into(), l[i % l.len()].clone())).collect(),
                }
            }
        };
        if !alts.is_empty() {
            lists.push(alts);
        }
    }
    let mut combos: Vec<Vec<Alt>> = vec![vec![]];
    for list in &lists {
        combos = combos.iter().flat_map(|c| list.iter().map(move |a| [c.clone(), vec![a.clone()]].concat())).collect();
    }
    combos
        .into_iter()
        .filter_map(|c| {
            let mut axes = Vec::new();
            let mut values = Vec::new();
            for a in c {
                match a {
                    Alt::Axis(n) => axes.push(n),
                    Alt::Filter(_, v) => values.push(v),
                }
            }
            let mut sorted: Vec<&str> = axes.iter().map(String::as_str).collect();
            sorted.sort();
            (sorted == set && values == filter_values).then_some(axes)
        })
        .min()
}

/// The key [`brute_force`] uses, computed from an engine expansion.
pub fn expansion_keys(expanded: &[PartialVisSpec]) -> Keys {
    expanded
        .iter()
        .map(|p| {
            let mut axes: Vec<String> = p.axes.iter().map(|a| a.attribute.clone()).collect();
            axes.sort();
            (axes, p.filters.iter().map(|f| (f.column.clone(), f.value.to_label())).collect::<Vec<_>>())
        })
        .collect()
}
