//! Exhaustive reference rankings for the overview actions, written without
//! the engine's candidate generation, ranking or scheduling code.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use luxen_core::engine::DEFAULT_K;
use luxen_core::metadata::compute_metadata;
use luxen_core::recommend::{ActionContext, DashboardMode, IntentView, Scorer};
use luxen_core::vis::{pearson, plan_for, skewness, RowView};
use luxen_core::{CompiledVisSpec, Engine, EngineConfig, Frame, MetadataSet, SemanticType};
use proptest::test_runner::TestCaseError;
use proptest::{prop_assert, prop_assert_eq};

use super::random_frame;

/// Fields and score of one ranked entry.
pub type Entry = (Vec<String>, Option<f64>);

/// Textbook two-pass Pearson over pairwise-complete rows.
pub fn direct_pearson(x: &[Option<f64>], y: &[Option<f64>]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
    if pairs.len() < 2 {
        return None;
    }
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pairs.iter().map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = pairs.iter().map(|(a, _)| (a - mx).powi(2)).sum();
    let vy: f64 = pairs.iter().map(|(_, b)| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx.sqrt() * vy.sqrt()))
}

pub fn column_values(frame: &Frame, name: &str) -> Vec<Option<f64>> {
    let c = &frame.column(name).unwrap().data;
    (0..frame.row_count()).map(|r| c.numeric(r)).collect()
}

fn nan_filled(v: &[Option<f64>]) -> Vec<f64> {
    v.iter().map(|x| x.unwrap_or(f64::NAN)).collect()
}

fn by_score(a: &Entry, b: &Entry) -> Ordering {
    match (a.1, b.1) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
    .then_with(|| a.0.cmp(&b.0))
}

fn names_of(meta: &MetadataSet, t: SemanticType) -> Vec<String> {
    meta.columns.iter().filter(|m| m.semantic_type == t && m.cardinality > 0).map(|m| m.name.clone()).collect()
}

/// Expected overview recommendations, keyed by action name, each truncated to `k`.
pub fn overview(frame: &Frame, meta: &MetadataSet, k: usize) -> BTreeMap<String, Vec<Entry>> {
    let mut out = BTreeMap::new();
    let quant = names_of(meta, SemanticType::Quantitative);

    if quant.len() >= 2 {
        let mut entries = Vec::new();
        for (i, a) in quant.iter().enumerate() {
            for b in &quant[i + 1..] {
                let (x, y) = if a < b { (a, b) } else { (b, a) };
                let (xv, yv) = (column_values(frame, x), column_values(frame, y));
                if !xv.iter().zip(&yv).any(|(p, q)| p.is_some() && q.is_some()) {
                    continue;
                }
                let r = pearson(&nan_filled(&xv), &nan_filled(&yv)).map(f64::abs);
                entries.push((vec![x.clone(), y.clone()], r));
            }
        }
        entries.sort_by(by_score);
        entries.truncate(k);
        out.insert("Correlation".to_string(), entries);
    }
    if !quant.is_empty() {
        let mut entries: Vec<Entry> = quant
            .iter()
            .map(|q| (vec![q.clone()], skewness(&nan_filled(&column_values(frame, q))).map(f64::abs)))
            .collect();
        entries.sort_by(by_score);
        entries.truncate(k);
        out.insert("Distribution".to_string(), entries);
    }
    for (action, t) in [("Occurrence", SemanticType::Nominal), ("Temporal", SemanticType::Temporal), ("Geographic", SemanticType::Geographic)] {
        let mut names = names_of(meta, t);
        if names.is_empty() {
            continue;
        }
        names.sort_by_key(|n| (meta.get(n).unwrap().cardinality, n.clone()));
        names.truncate(k);
        out.insert(action.to_string(), names.into_iter().map(|n| (vec![n], Some(0.0))).collect());
    }
    out
}

fn exact() -> EngineConfig {
    EngineConfig { prune: false, ..EngineConfig::default() }
}

/// Runs the engine with pruning off on one random frame and compares every
/// overview action against the exhaustive ranking, plus Pearson against the
/// direct formula.
pub fn check_overview(seed: u64) -> Result<(), TestCaseError> {
    let f = random_frame(seed, 1000, 12);
    let meta = compute_metadata(&f);
    let d = Engine::new(exact()).generate_dashboard(&f, DEFAULT_K, |_| {});
    let expected = overview(&f, &meta, DEFAULT_K);
    prop_assert_eq!(d.mode, DashboardMode::Overview);
    let got_names: BTreeSet<&str> = d.recommendations.iter().map(|r| r.action.as_str()).collect();
    let want_names: BTreeSet<&str> = expected.keys().map(String::as_str).collect();
    prop_assert_eq!(got_names, want_names);
    for rec in &d.recommendations {
        let got: Vec<(Vec<String>, Option<f64>)> = rec
            .vises
            .iter()
            .map(|v| (v.spec.fields().into_iter().map(String::from).collect(), v.score))
            .collect();
        prop_assert_eq!(&got, &expected[&rec.action], "action {}", rec.action);
        if rec.action == "Correlation" {
            for v in &rec.vises {
                let fields = v.spec.fields();
                let direct = direct_pearson(&column_values(&f, fields[0]), &column_values(&f, fields[1]));
                match (v.score, direct) {
                    (Some(s), Some(r)) => prop_assert!((s - r.abs()).abs() <= 1e-12),
                    (None, None) => {}
                    other => prop_assert!(false, "definedness differs: {:?}", other),
                }
            }
        }
    }
    Ok(())
}

/// Sets a one-column intent and checks Enhance and Filter against scoring
/// every generated candidate.
pub fn check_intent(seed: u64, pick: usize) -> Result<(), TestCaseError> {
    let mut f = random_frame(seed, 400, 8);
    let engine = Engine::new(exact());
    let name = f.column_at(pick % f.width()).name.clone();
    engine.set_intent(&mut f, &[name]).unwrap();
    let d = engine.generate_dashboard(&f, DEFAULT_K, |_| {});
    let meta = compute_metadata(&f);
    let Some(current) = d.current_vis.as_ref() else { return Ok(()) };
    for rec in &d.recommendations {
        prop_assert!(rec.action == "Enhance" || rec.action == "Filter");
        let action = engine.registry().get(&rec.action).unwrap();
        let view = RowView::full(&f);
        let intent = IntentView::build(f.intent().unwrap(), &meta).unwrap();
        let ctx = ActionContext { frame: &f, meta: &meta, mode: DashboardMode::Intent, intent: Some(&intent) };
        let out = (action.generator)(&ctx);
        let Scorer::Builtin(kind) = action.scorer else { unreachable!() };
        let mut scored: Vec<(Option<f64>, String, CompiledVisSpec)> = Vec::new();
        for c in out.candidates {
            let o = plan_for(kind, &c.spec, Some(&current.spec), &meta).evaluate(&view).unwrap();
            if o.rows > 0 {
                scored.push((o.score, c.spec.tie_key(), c.spec));
            }
        }
        scored.sort_by(|a, b| match (a.0, b.0) {
            (Some(x), Some(y)) => y.total_cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        }.then_with(|| a.1.cmp(&b.1)));
        scored.truncate(DEFAULT_K);
        let want: Vec<&CompiledVisSpec> = scored.iter().map(|s| &s.2).collect();
        let got: Vec<&CompiledVisSpec> = rec.vises.iter().map(|v| &v.spec).collect();
        prop_assert_eq!(got, want, "action {}", rec.action);
    }
    Ok(())
}
