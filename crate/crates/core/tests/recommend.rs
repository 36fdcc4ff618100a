mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::random_frame;
use luxen_core::aggregate::Aggregation;
use luxen_core::engine::DEFAULT_K;
use luxen_core::metadata::compute_metadata;
use luxen_core::recommend::{Action, ActionOutput, ActionRegistry, Candidate, DashboardMode, Scorer};
use luxen_core::vis::{plan_for, Encoding, Mark, RowView, ScoreKind};
use luxen_core::{Column, ColumnData, CompiledVisSpec, Engine, EngineConfig, Error, Frame, SemanticType, Transform};
use proptest::prelude::*;

fn hr(rows: usize) -> Frame {
    Frame::new(
        vec![
            Column::new("Age", ColumnData::Integer((0..rows as i64).map(|r| Some(20 + (r * 7) % 45)).collect())),
            Column::new("Salary", ColumnData::Float((0..rows).map(|r| Some(1000.0 + ((r * 37) % 101) as f64 * 13.0)).collect())),
            Column::new("Rate", ColumnData::Float((0..rows).map(|r| Some((r as f64).sqrt())).collect())),
            Column::from_strings("Department", (0..rows).map(|r| Some(["Sales", "HR", "R&D"][r % 3]))),
            Column::from_strings("Education", (0..rows).map(|r| Some(["HS", "BA", "MA", "PhD"][(r / 2) % 4]))),
            Column::new("Joined", ColumnData::Datetime((0..rows as i64).map(|r| Some(1_500_000_000 + r * 86_400 * 20)).collect())),
        ],
        "hr",
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn overview_rankings_match_exhaustive_oracle(seed in any::<u64>()) {
        common::oracle::check_overview(seed)?;
    }

    #[test]
    fn intent_rankings_match_exhaustive_scoring(seed in any::<u64>(), pick in 0usize..12) {
        common::oracle::check_intent(seed, pick)?;
    }

    #[test]
    fn recommendations_respect_k(seed in any::<u64>(), k in 1usize..20) {
        let f = random_frame(seed, 200, 12);
        let d = Engine::default().generate_dashboard(&f, k, |_| {});
        for r in &d.recommendations {
            prop_assert!(r.vises.len() <= k);
        }
    }

    #[test]
    fn triggered_actions_are_exactly_those_whose_trigger_holds(seed in any::<u64>()) {
        let f = random_frame(seed, 100, 8);
        let engine = Engine::default();
        let meta = compute_metadata(&f);
        let d = engine.generate_dashboard(&f, DEFAULT_K, |_| {});
        let ctx = luxen_core::recommend::ActionContext { frame: &f, meta: &meta, mode: d.mode, intent: None };
        let expected: Vec<&str> = engine.registry().iter().filter(|a| (a.trigger)(&ctx)).map(|a| a.name.as_str()).collect();
        prop_assert_eq!(d.action_names(), expected);
    }
}

#[test]
fn correlation_never_lists_both_orders() {
    let f = hr(200);
    let d = Engine::default().generate_dashboard(&f, 50, |_| {});
    let corr = d.recommendation("Correlation").unwrap();
    let mut seen = BTreeSet::new();
    for v in &corr.vises {
        let mut pair = v.spec.fields();
        pair.sort();
        assert!(seen.insert(pair), "duplicate pair in {:?}", corr.vises.iter().map(|v| v.spec.fields()).collect::<Vec<_>>());
    }
    assert_eq!(seen.len(), 3);
}

#[test]
fn overview_display_order_is_fixed() {
    let d = Engine::default().generate_dashboard(&hr(100), DEFAULT_K, |_| {});
    assert_eq!(d.action_names(), ["Correlation", "Distribution", "Occurrence", "Temporal"]);
    assert!(d.current_vis.is_none());
}

#[test]
fn intent_steers_without_touching_the_frame() {
    let engine = Engine::default();
    let mut f = hr(100);
    let overview = engine.lookup_or_compute(&mut f, DEFAULT_K);
    let version = f.version();
    let warnings = engine.set_intent(&mut f, &["Age", "Department"]).unwrap().warnings;
    assert!(warnings.is_empty());
    let d = engine.lookup_or_compute(&mut f, DEFAULT_K);
    assert_eq!(f.version(), version);
    assert_eq!(d.mode, DashboardMode::Intent);
    assert_eq!(d.action_names(), ["Enhance", "Filter"]);
    let current = d.current_vis.as_ref().unwrap();
    assert_eq!(current.spec.mark, Mark::Bar);
    // 45 distinct ages, so Age is a measure
    assert_eq!(current.spec.fields(), ["Department", "Age"]);
    let filter = d.recommendation("Filter").unwrap();
    assert!(filter.vises.iter().all(|v| v.spec.filters.len() == 1 && v.spec.filters[0].column == "Education"));
    assert_eq!(filter.candidates, 4);

    f.set_intent(None);
    let back = engine.lookup_or_compute(&mut f, DEFAULT_K);
    assert_eq!(back.action_names(), overview.action_names());
    assert_eq!(f.version(), version);
}

#[test]
fn unknown_attribute_gets_a_suggestion() {
    let engine = Engine::default();
    let mut f = hr(20);
    let w = engine.set_intent(&mut f, &["Agee", "Department"]).unwrap().warnings;
    assert_eq!(w.len(), 1);
    assert_eq!(w[0].suggestion.as_deref(), Some("Age"));
    let err = engine.set_intent(&mut f, &["Agee"]).unwrap_err();
    assert!(matches!(&err, Error::UnresolvableIntent(m) if m.contains("did you mean Age")), "{err}");
}

#[test]
fn wildcard_intent_shows_vis_list_first() {
    let engine = Engine::default();
    let mut f = hr(100);
    engine.set_intent(&mut f, &["Department", "?{data_type=quantitative}"]).unwrap();
    let d = engine.lookup_or_compute(&mut f, DEFAULT_K);
    assert!(d.current_vis.is_none());
    assert_eq!(d.action_names(), ["Vis List"]);
    assert_eq!(d.recommendations[0].vises.len(), 3);
}

#[test]
fn enhance_is_empty_for_three_axes() {
    let engine = Engine::default();
    let mut f = hr(100);
    engine.set_intent(&mut f, &["Salary", "Rate", "Department"]).unwrap();
    let d = engine.lookup_or_compute(&mut f, DEFAULT_K);
    assert!(d.current_vis.is_some());
    assert!(d.recommendation("Enhance").unwrap().vises.is_empty());
}

#[test]
fn tiny_filtered_frames_show_the_parent_dashboard() {
    let engine = Engine::default();
    let f = hr(100);
    let tiny = f.transform(&Transform::HeadTail { n: 3, tail: false }).unwrap();
    let d = engine.generate_dashboard(&tiny, DEFAULT_K, |_| {});
    assert_eq!(d.mode, DashboardMode::History);
    assert!(!d.diagnostics.is_empty());
    assert_eq!(d.action_names(), ["Correlation", "Distribution", "Occurrence", "Temporal"]);
    assert!(d.recommendations.iter().all(|r| r.from_parent));
    // a projection is not a history trigger
    let narrow = tiny.transform(&Transform::Project(vec!["Age".into(), "Salary".into()])).unwrap();
    assert_ne!(engine.generate_dashboard(&narrow, DEFAULT_K, |_| {}).mode, DashboardMode::History);
}

#[test]
fn grouped_frames_get_structure_recommendations() {
    let engine = Engine::default();
    let f = hr(90);
    let g = f
        .transform(&Transform::GroupAggregate {
            keys: vec!["Department".into()],
            aggregations: vec![("Salary".into(), Aggregation::Mean), ("Rate".into(), Aggregation::Max)],
        })
        .unwrap();
    let d = engine.generate_dashboard(&g, DEFAULT_K, |_| {});
    assert_eq!(d.mode, DashboardMode::Structure);
    let s = d.recommendation("Structure").unwrap();
    assert_eq!(s.vises.len(), 2);
    for v in &s.vises {
        assert_eq!(v.spec.mark, Mark::Bar);
        assert_eq!(v.data.as_ref().unwrap().rows.len(), 3);
    }

    let dated = Frame::new(
        vec![
            Column::from_strings("State", ["CA", "CA", "NY", "NY"].map(Some)),
            Column::from_strings("Date", ["2020-01-01", "2020-01-02", "2020-01-01", "2020-01-02"].map(Some)),
            Column::new("Cases", ColumnData::Integer(vec![Some(1), Some(3), Some(2), Some(5)])),
        ],
        "covid",
    )
    .unwrap();
    let p = dated
        .transform(&Transform::Pivot { index: "State".into(), columns: "Date".into(), values: "Cases".into(), aggregation: None })
        .unwrap();
    let d = engine.generate_dashboard(&p, DEFAULT_K, |_| {});
    let s = d.recommendation("Structure").unwrap();
    assert_eq!(s.vises.len(), 2);
    assert!(s.vises.iter().all(|v| v.spec.mark == Mark::Line));
    assert_eq!(s.vises[1].data.as_ref().unwrap().rows.len(), 2);
}

#[test]
fn single_column_frames_get_series_recommendations() {
    let f = hr(50).transform(&Transform::Project(vec!["Salary".into()])).unwrap();
    let d = Engine::default().generate_dashboard(&f, DEFAULT_K, |_| {});
    assert_eq!(d.mode, DashboardMode::Series);
    assert_eq!(d.recommendation("Series").unwrap().vises[0].spec.mark, Mark::Histogram);
}

#[test]
fn frames_without_usable_columns_report_why() {
    let f = Frame::new(vec![Column::new("a", ColumnData::Float(vec![None; 4])), Column::new("b", ColumnData::Float(vec![None; 4]))], "x").unwrap();
    let d = Engine::default().generate_dashboard(&f, DEFAULT_K, |_| {});
    assert!(d.recommendations.is_empty());
    assert!(!d.diagnostics.is_empty());
}

fn custom_action(name: &str) -> Action {
    Action::new(
        name,
        |c: &luxen_core::recommend::ActionContext<'_>| c.mode == DashboardMode::Overview,
        |c: &luxen_core::recommend::ActionContext<'_>| {
            let specs = c
                .meta
                .of_type(SemanticType::Quantitative)
                .map(|m| {
                    CompiledVisSpec::new(
                        Mark::Histogram,
                        Encoding { bin: Some(5), ..Encoding::field(&m.name, SemanticType::Quantitative) },
                        Encoding::count(),
                        None,
                    )
                })
                .map(Candidate::new)
                .collect();
            ActionOutput::of(specs)
        },
        Scorer::Custom(Arc::new(|_, meta, spec| meta.get(spec.fields()[0]).and_then(|m| m.max_f64()))),
    )
}

#[test]
fn custom_actions_follow_the_built_ins() {
    let mut registry = ActionRegistry::with_defaults();
    registry.register(custom_action("Widest")).unwrap();
    assert!(matches!(registry.register(custom_action("Widest")), Err(Error::DuplicateAction(_))));
    let engine = Engine::with_registry(EngineConfig::default(), registry);
    let d = engine.generate_dashboard(&hr(60), DEFAULT_K, |_| {});
    assert_eq!(d.action_names().last(), Some(&"Widest"));
    let w = d.recommendation("Widest").unwrap();
    assert_eq!(w.vises[0].spec.fields(), ["Salary"]);
    assert!(w.vises.windows(2).all(|p| p[0].score >= p[1].score));
}

#[test]
fn cheapest_action_is_delivered_first() {
    let engine = Engine::default();
    let mut order = Vec::new();
    let d = engine.generate_dashboard(&hr(300), DEFAULT_K, |r| order.push((r.action.clone(), r.estimated_cost)));
    assert!(order.windows(2).all(|w| w[0].1 <= w[1].1), "{order:?}");
    let delivered: BTreeSet<String> = order.iter().map(|o| o.0.clone()).collect();
    let assembled: BTreeSet<String> = d.action_names().into_iter().map(String::from).collect();
    assert_eq!(delivered, assembled);
}

fn wide_frame(rows: usize, seed: u64) -> Frame {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let latent: Vec<f64> = (0..rows).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cols = (0..20)
        .map(|c| {
            let w = c as f64 / 20.0;
            let data = latent.iter().map(|l| Some(w * l + (1.0 - w) * rng.random_range(-1.0..1.0) + w * l * l)).collect();
            Column::new(format!("q{c:02}"), ColumnData::Float(data))
        })
        .collect();
    Frame::new(cols, "wide").unwrap()
}

#[test]
fn pruned_survivors_carry_exact_scores() {
    let cap = 5_000;
    let f = wide_frame(20_000, 3);
    let engine = Engine::new(EngineConfig { sample_cap: cap, ..EngineConfig::default() });
    let d = engine.generate_dashboard(&f, DEFAULT_K, |_| {});
    let corr = d.recommendation("Correlation").unwrap();
    assert!(corr.prune.unwrap().apply);
    assert_eq!(corr.vises.len(), DEFAULT_K);
    let meta = compute_metadata(&f);
    let view = RowView::full(&f);
    for v in &corr.vises {
        let exact = plan_for(ScoreKind::Correlation, &v.spec, None, &meta).evaluate(&view).unwrap().score;
        assert_eq!(v.score.map(f64::to_bits), exact.map(f64::to_bits));
        assert!(!v.approximate);
    }
    let counters = engine.counters().snapshot();
    assert!(counters.pass1_max_rows <= cap as u64);
    assert!(counters.pass1_scores >= 190);

    // same seed, same output
    let again = Engine::new(EngineConfig { sample_cap: cap, ..EngineConfig::default() }).generate_dashboard(&f, DEFAULT_K, |_| {});
    assert_eq!(serde_json::to_string(&d).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn replaced_actions_keep_their_slot() {
    let mut registry = ActionRegistry::with_defaults();
    let mut slow = custom_action("Correlation");
    slow.trigger = registry.get("Correlation").unwrap().trigger.clone();
    registry.replace(slow).unwrap();
    assert!(matches!(registry.replace(custom_action("Nope")), Err(Error::UnknownAction(_))));
    assert_eq!(registry.names()[3], "Correlation");
}
