//! The built-in actions.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::registry::{Action, ActionOutput, Candidate, Scorer};
use super::{ActionContext, DashboardMode};
use crate::datetime::parse_iso8601;
use crate::intent::{compile_intent, infer_encoding, lookup_defaults, AxisSpec, Clause, IntentSpec, MAX_AXES};
use crate::metadata::{MetadataSet, SemanticType, NOMINAL_CARDINALITY_MAX};
use crate::predicate::{FilterOp, Predicate};
use crate::vis::{CompiledVisSpec, Encoding, Mark, ScoreKind, VisSource};

fn usable(meta: &MetadataSet, t: SemanticType) -> usize {
    meta.of_type(t).filter(|m| m.cardinality > 0).count()
}

fn compile_clauses(ctx: &ActionContext<'_>, clauses: Vec<Clause>) -> Vec<CompiledVisSpec> {
    IntentSpec::new(clauses)
        .and_then(|i| compile_intent(&i, ctx.meta))
        .map(|c| c.specs)
        .unwrap_or_default()
}

fn wildcard_specs(ctx: &ActionContext<'_>, t: SemanticType, arity: usize) -> ActionOutput {
    let specs = compile_clauses(ctx, vec![Clause::wildcard(Some(t)); arity]);
    ActionOutput::of(specs.into_iter().map(Candidate::new).collect())
}

/// Unscored: fewer distinct values rank first.
fn by_cardinality(ctx: &ActionContext<'_>, t: SemanticType) -> ActionOutput {
    let mut out = wildcard_specs(ctx, t, 1);
    for c in &mut out.candidates {
        c.secondary = c.spec.fields().first().and_then(|f| ctx.meta.get(f)).map_or(u64::MAX, |m| m.cardinality as u64);
    }
    out
}

fn in_overview(ctx: &ActionContext<'_>) -> bool {
    ctx.mode == DashboardMode::Overview || ctx.mode == DashboardMode::History
}

fn single_base(ctx: &ActionContext<'_>) -> bool {
    ctx.mode == DashboardMode::Intent && ctx.intent.is_some_and(|i| i.base().is_some())
}

fn vis_list(ctx: &ActionContext<'_>) -> ActionOutput {
    let specs = ctx.intent.map(|i| i.specs.clone()).unwrap_or_default();
    ActionOutput::of(specs.into_iter().map(Candidate::new).collect())
}

fn enhance(ctx: &ActionContext<'_>) -> ActionOutput {
    let Some((partial, spec)) = ctx.intent.and_then(|i| i.base()) else { return ActionOutput::default() };
    let mut out = ActionOutput { base: Some(spec.clone()), ..ActionOutput::default() };
    if partial.axes.len() >= MAX_AXES {
        out.diagnostics.push(format!("the current vis already has {MAX_AXES} axes"));
        return out;
    }
    for m in &ctx.meta.columns {
        if m.cardinality == 0 || partial.axes.iter().any(|a| a.attribute == m.name) {
            continue;
        }
        let mut p = partial.clone();
        p.axes.push(AxisSpec::new(&m.name));
        let Ok(p) = lookup_defaults(&p, ctx.meta) else { continue };
        out.candidates.extend(infer_encoding(&p, ctx.meta, ctx.meta.row_count).map(Candidate::new));
    }
    out
}

fn filter(ctx: &ActionContext<'_>) -> ActionOutput {
    let Some((partial, spec)) = ctx.intent.and_then(|i| i.base()) else { return ActionOutput::default() };
    let mut out = ActionOutput { base: Some(spec.clone()), ..ActionOutput::default() };
    for m in &ctx.meta.columns {
        let used = partial.axes.iter().any(|a| a.attribute == m.name) || partial.filters.iter().any(|f| f.column == m.name);
        if used || m.capped || m.cardinality == 0 || m.cardinality > NOMINAL_CARDINALITY_MAX {
            continue;
        }
        for v in &m.unique_values {
            let mut p = partial.clone();
            p.filters.push(Predicate::new(&m.name, FilterOp::Eq, v.clone()));
            out.candidates.extend(infer_encoding(&p, ctx.meta, ctx.meta.row_count).map(Candidate::new));
        }
    }
    out
}

/// Pre-aggregated frames: one vis per row of a pivot, one per value column
/// of a group-aggregate.
fn structure(ctx: &ActionContext<'_>) -> ActionOutput {
    let frame = ctx.frame;
    let index = frame.index();
    if index.levels() != 1 {
        let mut out = ActionOutput::default();
        out.diagnostics.push(format!("row index has {} levels; only single-level indexes are visualized", index.levels()));
        return out;
    }
    let index_name = index.name().unwrap_or_else(|| "index".to_string());
    // pre-aggregated cells are measures whatever their cardinality
    let numeric: Vec<&str> = frame
        .columns()
        .filter(|c| matches!(c.data, crate::ColumnData::Integer(_) | crate::ColumnData::Float(_)))
        .map(|c| c.name.as_str())
        .collect();
    let mut candidates = Vec::new();
    if let Some((columns_name, values_name)) = frame.pivot_labels() {
        if numeric.len() != frame.width() {
            return ActionOutput::default();
        }
        let temporal = frame.width() > 0 && frame.columns().all(|c| parse_iso8601(&c.name).is_some());
        let (mark, t) = if temporal { (Mark::Line, SemanticType::Temporal) } else { (Mark::Bar, SemanticType::Nominal) };
        for row in 0..frame.row_count() {
            let mut spec =
                CompiledVisSpec::new(mark, Encoding::field(columns_name, t), Encoding::field(values_name, SemanticType::Quantitative), None);
            spec.source = VisSource::IndexRow { row, label: index.label(row).to_label() };
            candidates.push(Candidate { spec, secondary: row as u64 });
        }
    } else {
        let temporal = (0..frame.row_count()).all(|r| matches!(index.label(r), crate::value::Value::Datetime(_)))
            && frame.row_count() > 0;
        let (mark, t) = if temporal { (Mark::Line, SemanticType::Temporal) } else { (Mark::Bar, SemanticType::Nominal) };
        for (i, name) in numeric.iter().enumerate() {
            let mut spec =
                CompiledVisSpec::new(mark, Encoding::field(&index_name, t), Encoding::field(name, SemanticType::Quantitative), None);
            spec.source = VisSource::IndexColumn;
            candidates.push(Candidate { spec, secondary: i as u64 });
        }
    }
    ActionOutput::of(candidates)
}

fn series(ctx: &ActionContext<'_>) -> ActionOutput {
    let Some(col) = ctx.frame.columns().next() else { return ActionOutput::default() };
    let specs = compile_clauses(ctx, vec![Clause::axis(&col.name)]);
    ActionOutput::of(specs.into_iter().map(Candidate::new).collect())
}

pub(super) fn defaults() -> Vec<Action> {
    use ScoreKind::*;
    vec![
        Action::new(
            "Vis List",
            |c: &ActionContext<'_>| c.mode == DashboardMode::Intent && c.intent.is_some_and(|i| i.specs.len() > 1),
            vis_list,
            Scorer::Builtin(General),
        ),
        Action::new("Enhance", single_base, enhance, Scorer::Builtin(Enhance)),
        Action::new("Filter", single_base, filter, Scorer::Builtin(Filter)),
        Action::new(
            "Correlation",
            |c: &ActionContext<'_>| in_overview(c) && usable(c.meta, SemanticType::Quantitative) >= 2,
            |c: &ActionContext<'_>| wildcard_specs(c, SemanticType::Quantitative, 2),
            Scorer::Builtin(Correlation),
        ),
        Action::new(
            "Distribution",
            |c: &ActionContext<'_>| in_overview(c) && usable(c.meta, SemanticType::Quantitative) >= 1,
            |c: &ActionContext<'_>| wildcard_specs(c, SemanticType::Quantitative, 1),
            Scorer::Builtin(Distribution),
        ),
        Action::new(
            "Occurrence",
            |c: &ActionContext<'_>| in_overview(c) && usable(c.meta, SemanticType::Nominal) >= 1,
            |c: &ActionContext<'_>| by_cardinality(c, SemanticType::Nominal),
            Scorer::Builtin(Unscored),
        ),
        Action::new(
            "Temporal",
            |c: &ActionContext<'_>| in_overview(c) && usable(c.meta, SemanticType::Temporal) >= 1,
            |c: &ActionContext<'_>| by_cardinality(c, SemanticType::Temporal),
            Scorer::Builtin(Unscored),
        ),
        Action::new(
            "Geographic",
            |c: &ActionContext<'_>| in_overview(c) && usable(c.meta, SemanticType::Geographic) >= 1,
            |c: &ActionContext<'_>| by_cardinality(c, SemanticType::Geographic),
            Scorer::Builtin(Unscored),
        ),
        Action::new("Structure", |c: &ActionContext<'_>| c.mode == DashboardMode::Structure, structure, Scorer::Builtin(Unscored)),
        Action::new("Series", |c: &ActionContext<'_>| c.mode == DashboardMode::Series, series, Scorer::Builtin(Unscored)),
    ]
}
