//! Workload replay across optimization levels, prune recall, and width
//! scaling on seeded synthetic frames.

use std::fmt::Write as _;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use luxen_core::aggregate::Aggregation;
use luxen_core::frame::ColumnValues;
use luxen_core::optimize::{approx_topk, exact_topk, make_sample};
use luxen_core::predicate::{FilterOp, Predicate};
use luxen_core::recommend::Scorer;
use luxen_core::vis::{plan_for, ScorePlan};
use luxen_core::{Column, ColumnData, Engine, EngineConfig, Frame, Transform, Value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::schedule::run_dashboard;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OptLevel {
    /// Eager metadata and recommendations after every cell, no cache, exact scoring.
    NoOpt,
    /// Lazy computation on print plus memoization.
    Wflow,
    /// Wflow plus approximate top-k pruning.
    WflowPrune,
    /// Wflow plus pruning plus cost-ordered streaming; cells finish at the first result.
    AllOpt,
}

impl OptLevel {
    pub const ALL: [OptLevel; 4] = [OptLevel::NoOpt, OptLevel::Wflow, OptLevel::WflowPrune, OptLevel::AllOpt];

    pub fn name(self) -> &'static str {
        match self {
            OptLevel::NoOpt => "no-opt",
            OptLevel::Wflow => "wflow",
            OptLevel::WflowPrune => "wflow+prune",
            OptLevel::AllOpt => "all-opt",
        }
    }

    fn prunes(self) -> bool {
        matches!(self, OptLevel::WflowPrune | OptLevel::AllOpt)
    }
}

/// Fractions of synthetic columns per semantic type.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TypeMix {
    pub quantitative: f64,
    pub nominal: f64,
    pub temporal: f64,
}

impl Default for TypeMix {
    fn default() -> Self {
        TypeMix { quantitative: 0.78, nominal: 0.20, temporal: 0.02 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "cell", rename_all = "snake_case")]
pub enum Cell {
    /// Print of a frame variable.
    Print { var: String },
    /// Print of one column as a series.
    PrintSeries { var: String, column: String },
    /// `target = var.transform(...)`, or in place when `target` is None.
    Transform {
        var: String,
        target: Option<String>,
        #[serde(skip)]
        transform: Transform,
        describe: String,
    },
    SetIntent { var: String, clauses: Vec<String> },
}

impl Cell {
    pub fn kind(&self) -> CellKind {
        match self {
            Cell::Print { .. } => CellKind::FramePrint,
            Cell::PrintSeries { .. } => CellKind::SeriesPrint,
            _ => CellKind::NonPrint,
        }
    }

    fn transform(var: &str, target: Option<&str>, transform: Transform) -> Cell {
        Cell::Transform { var: var.into(), target: target.map(Into::into), describe: format!("{transform:?}"), transform }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellKind {
    FramePrint,
    SeriesPrint,
    NonPrint,
}

impl CellKind {
    pub const ALL: [CellKind; 3] = [CellKind::FramePrint, CellKind::SeriesPrint, CellKind::NonPrint];

    pub fn name(self) -> &'static str {
        match self {
            CellKind::FramePrint => "print frame",
            CellKind::SeriesPrint => "print series",
            CellKind::NonPrint => "neither",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchConfig {
    pub rows: usize,
    pub cols: usize,
    pub mix: TypeMix,
    pub levels: Vec<OptLevel>,
    pub repetitions: usize,
    pub seed: u64,
    pub engine: EngineConfig,
    pub workers: usize,
    /// Compute Recall@k on the base frame for the pruning levels.
    pub recall: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid benchmark config: {0}")]
    Config(String),
    #[error("workload cell {cell}: {source}")]
    Cell { cell: usize, source: luxen_core::Error },
    #[error("workload cell {0} names an unknown frame variable")]
    UnknownVar(usize),
}

impl BenchConfig {
    pub fn new(rows: usize, cols: usize) -> BenchConfig {
        BenchConfig {
            rows,
            cols,
            mix: TypeMix::default(),
            levels: OptLevel::ALL.to_vec(),
            repetitions: 1,
            seed: 7,
            engine: EngineConfig::default(),
            workers: 1,
            recall: true,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let m = self.mix;
        if [m.quantitative, m.nominal, m.temporal].iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(BenchError::Config("type-mix fractions must lie in [0, 1]".into()));
        }
        if ((m.quantitative + m.nominal + m.temporal) - 1.0).abs() > 1e-9 {
            return Err(BenchError::Config("type-mix fractions must sum to 1".into()));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be at least 1".into()));
        }
        if self.rows == 0 || self.cols < 6 {
            return Err(BenchError::Config("need at least one row and six columns".into()));
        }
        Ok(())
    }
}

/// Columns per type for `cols` columns: rounded fractions, remainder to nominal.
pub fn type_counts(cols: usize, mix: TypeMix) -> (usize, usize, usize) {
    let q = (cols as f64 * mix.quantitative).round() as usize;
    let t = ((cols as f64 * mix.temporal).round() as usize).min(cols - q.min(cols));
    (q.min(cols), cols - q.min(cols) - t, t)
}

/// Cardinalities on a geometric series from 1 to 10000.
pub fn geometric_cardinalities(n: usize) -> Vec<usize> {
    match n {
        0 => Vec::new(),
        1 => vec![1],
        _ => (0..n).map(|i| 10f64.powf(4.0 * i as f64 / (n - 1) as f64).round() as usize).collect(),
    }
}

/// Seeded synthetic frame. Quantitative columns `q00..` load on three latent
/// factors with random weights and a random log-normal skew; nominal columns
/// `n00..` draw uniformly from geometric cardinalities; temporal columns
/// `t00..` are daily dates over ten years.
pub fn synthetic_frame(rows: usize, cols: usize, mix: TypeMix, seed: u64) -> Frame {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nq, nn, nt) = type_counts(cols, mix);
    let latent: Vec<Vec<f64>> = (0..3).map(|_| (0..rows).map(|_| StandardNormal.sample(&mut rng)).collect()).collect();
    let mut columns = Vec::with_capacity(cols);
    for j in 0..nq {
        let factor = &latent[j % 3];
        let w: f64 = rng.random_range(0.0..0.95);
        let skew: f64 = rng.random_range(0.0..1.0);
        let noise = (1.0 - w * w).sqrt();
        let data = factor
            .iter()
            .map(|l| {
                let z: f64 = StandardNormal.sample(&mut rng);
                let x = w * l + noise * z;
                Some(if skew > 0.05 { (skew * x).exp() } else { x })
            })
            .collect();
        columns.push(Column::new(format!("q{j:02}"), ColumnData::Float(data)));
    }
    for (j, card) in geometric_cardinalities(nn).into_iter().enumerate() {
        let cells: Vec<Option<String>> = (0..rows).map(|_| Some(format!("v{}", rng.random_range(0..card)))).collect();
        columns.push(Column::from_strings(format!("n{j:02}"), cells));
    }
    for j in 0..nt {
        let start = 1_262_304_000i64;
        let data = (0..rows).map(|_| Some(start + rng.random_range(0..3650i64) * 86_400)).collect();
        columns.push(Column::new(format!("t{j:02}"), ColumnData::Datetime(data)));
    }
    Frame::new(columns, "synthetic").expect("synthetic columns are consistent")
}

/// The standard 36-cell script: 14 frame prints, 7 series prints and 15
/// other cells, over the columns of a [`synthetic_frame`].
pub fn standard_workload(frame: &Frame) -> Vec<Cell> {
    let q: Vec<String> = frame.column_names().into_iter().filter(|c| c.starts_with('q')).map(String::from).collect();
    let n: Vec<String> = frame.column_names().into_iter().filter(|c| c.starts_with('n')).map(String::from).collect();
    let (q0, q1, q2, q3, q4) = (&q[0], &q[1], &q[2], &q[3], &q[4]);
    let n0 = &n[0];
    let n1 = &n[1 % n.len()];
    let n2 = &n[2 % n.len()];
    let print = |v: &str| Cell::Print { var: v.into() };
    let series = |v: &str, c: &str| Cell::PrintSeries { var: v.into(), column: c.into() };
    let gt = |c: &str, x: f64| Transform::Filter(Predicate::new(c, FilterOp::Gt, Value::Float(x)));
    vec![
        print("df"),
        series("df", q0),
        Cell::transform(
            "df",
            Some("g"),
            Transform::GroupAggregate {
                keys: vec![n1.clone()],
                aggregations: vec![(q0.clone(), Aggregation::Mean), (q1.clone(), Aggregation::Sum)],
            },
        ),
        print("g"),
        print("df"),
        Cell::transform("df", Some("f"), gt(q0, 1.0)),
        print("f"),
        series("f", q1),
        Cell::transform(
            "df",
            None,
            Transform::SetColumn {
                name: "ratio".into(),
                values: ColumnValues::Affine { source: q2.clone(), factor: 0.5, offset: 1.0 },
            },
        ),
        print("df"),
        series("df", "ratio"),
        Cell::transform("df", None, Transform::Rename(vec![(q3.clone(), "renamed".into())])),
        print("df"),
        Cell::SetIntent { var: "df".into(), clauses: vec![q0.clone(), n1.clone()] },
        print("df"),
        Cell::transform("f", Some("h"), Transform::HeadTail { n: 3, tail: false }),
        print("h"),
        Cell::SetIntent { var: "df".into(), clauses: Vec::new() },
        print("df"),
        Cell::transform("df", Some("p"), Transform::Project(vec![q0.clone(), q1.clone(), q2.clone(), n0.clone()])),
        print("p"),
        series("p", n0),
        Cell::transform("p", None, Transform::InplaceModify { marker: "fillna".into() }),
        Cell::transform("p", None, Transform::Rename(vec![(q0.clone(), "a0".into())])),
        Cell::transform("f", Some("f2"), Transform::Filter(Predicate::new(q1, FilterOp::Lt, Value::Float(1.0)))),
        print("f2"),
        series("f2", q0),
        Cell::transform(
            "f",
            Some("g2"),
            Transform::GroupAggregate { keys: vec![n2.clone()], aggregations: vec![(q4.clone(), Aggregation::Max)] },
        ),
        print("g2"),
        Cell::transform("df", None, Transform::Rename(vec![("renamed".into(), q3.clone())])),
        Cell::transform("df", Some("t"), Transform::HeadTail { n: 100, tail: true }),
        print("t"),
        series("t", q2),
        Cell::transform("df", None, Transform::InplaceModify { marker: "dropna".into() }),
        print("df"),
        series("df", q0),
    ]
}

#[derive(Debug, Clone, Serialize)]
pub struct CellTiming {
    pub index: usize,
    pub kind: CellKind,
    /// Seconds until the user sees a result.
    pub latency: f64,
    /// Seconds until the cell's work is complete.
    pub complete: f64,
    pub metadata_computations: u64,
    pub dashboard_computations: u64,
    pub scoring_operations: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KindStats {
    pub kind: CellKind,
    pub cells: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Recall {
    pub action: String,
    pub k: usize,
    pub recall: f64,
    pub candidates: usize,
    pub pass1_max_rows: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: OptLevel,
    pub cells: Vec<CellTiming>,
    pub per_kind: Vec<KindStats>,
    pub mean_latency: f64,
    pub mean_complete: f64,
    /// Metadata plus dashboard computations started by non-print cells.
    pub non_print_computations: u64,
    pub recall: Vec<Recall>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: usize,
    pub cols: usize,
    pub repetitions: usize,
    pub levels: Vec<LevelReport>,
}

impl BenchReport {
    pub fn level(&self, level: OptLevel) -> Option<&LevelReport> {
        self.levels.iter().find(|l| l.level == level)
    }

    /// Aligned text table of per-kind latencies.
    pub fn table(&self) -> String {
        let mut out = format!("{} rows x {} columns, {} repetition(s)\n", self.rows, self.cols, self.repetitions);
        let _ = writeln!(out, "{:<12} {:<13} {:>5} {:>11} {:>11} {:>9}", "level", "cell", "n", "mean s", "median s", "non-print");
        for l in &self.levels {
            for k in &l.per_kind {
                let _ = writeln!(
                    out,
                    "{:<12} {:<13} {:>5} {:>11.5} {:>11.5} {:>9}",
                    l.level.name(),
                    k.kind.name(),
                    k.cells,
                    k.mean,
                    k.median,
                    l.non_print_computations
                );
            }
            let _ = writeln!(out, "{:<12} {:<13} {:>5} {:>11.5}", l.level.name(), "all", l.cells.len(), l.mean_latency);
            for r in &l.recall {
                let _ = writeln!(out, "{:<12} recall@{} {:<12} {:.3}", l.level.name(), r.k, r.action, r.recall);
            }
        }
        out
    }
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

struct Replay<'a> {
    level: OptLevel,
    engine: &'a Engine,
    k: usize,
    workers: usize,
    vars: std::collections::HashMap<String, Frame>,
}

impl Replay<'_> {
    /// One print. Returns (latency, complete) seconds.
    fn print(&self, frame: &mut Frame) -> (f64, f64) {
        let start = Instant::now();
        match self.level {
            OptLevel::NoOpt => {
                let fresh = frame.uncached();
                self.engine.generate_dashboard(&fresh, self.k, |_| {});
                let t = start.elapsed().as_secs_f64();
                (t, t)
            }
            OptLevel::Wflow | OptLevel::WflowPrune => {
                self.engine.lookup_or_compute(frame, self.k);
                let t = start.elapsed().as_secs_f64();
                (t, t)
            }
            OptLevel::AllOpt => {
                let first = Mutex::new(None);
                let mark = || {
                    first.lock().unwrap().get_or_insert_with(|| start.elapsed().as_secs_f64());
                };
                if frame.fresh_dashboard(self.k).is_none() {
                    let meta = self.engine.ensure_metadata(frame);
                    let sample = self.engine.ensure_sample(frame);
                    let prepared = self.engine.prepare(frame, meta, sample, self.k);
                    if prepared.current_vis.is_some() {
                        mark();
                    }
                    let d = run_dashboard(self.engine, &prepared, self.workers, &|_| mark());
                    frame.store_dashboard(prepared.stamp, self.k, Arc::new(d));
                }
                let complete = start.elapsed().as_secs_f64();
                (first.into_inner().unwrap().unwrap_or(complete), complete)
            }
        }
    }

    fn var(&mut self, cell: usize, name: &str) -> Result<&mut Frame, BenchError> {
        self.vars.get_mut(name).ok_or(BenchError::UnknownVar(cell))
    }

    fn run(&mut self, i: usize, cell: &Cell) -> Result<(f64, f64), BenchError> {
        let err = |source| BenchError::Cell { cell: i, source };
        match cell {
            Cell::Print { var } => {
                let mut f = std::mem::replace(self.var(i, var)?, placeholder());
                let t = self.print(&mut f);
                self.vars.insert(var.clone(), f);
                Ok(t)
            }
            Cell::PrintSeries { var, column } => {
                let mut s = self.var(i, var)?.transform(&Transform::Project(vec![column.clone()])).map_err(err)?;
                Ok(self.print(&mut s))
            }
            Cell::Transform { var, target, transform, .. } => {
                let start = Instant::now();
                let eager = self.level == OptLevel::NoOpt;
                let name = match target {
                    Some(t) => {
                        let derived = self.var(i, var)?.transform(transform).map_err(err)?;
                        self.vars.insert(t.clone(), derived);
                        t.clone()
                    }
                    None => {
                        self.var(i, var)?.apply_in_place(transform).map_err(err)?;
                        var.clone()
                    }
                };
                if eager {
                    let fresh = self.var(i, &name)?.uncached();
                    self.engine.generate_dashboard(&fresh, self.k, |_| {});
                }
                let t = start.elapsed().as_secs_f64();
                Ok((t, t))
            }
            Cell::SetIntent { var, clauses } => {
                let start = Instant::now();
                let engine = self.engine;
                let eager = self.level == OptLevel::NoOpt;
                let f = self.var(i, var)?;
                if clauses.is_empty() {
                    f.set_intent(None);
                } else {
                    engine.set_intent(f, clauses).map_err(err)?;
                }
                if eager {
                    let fresh = f.uncached();
                    engine.generate_dashboard(&fresh, self.k, |_| {});
                }
                let t = start.elapsed().as_secs_f64();
                Ok((t, t))
            }
        }
    }
}

fn placeholder() -> Frame {
    Frame::new(Vec::new(), "placeholder").expect("empty frame")
}

/// Recall@k of the two-pass selection against exact ranking for each pruned
/// action of a fresh overview dashboard. Pass 1 always runs here, even when
/// the cost rule would have skipped it.
pub fn prune_recall(frame: &Frame, config: &EngineConfig, k: usize, actions: &[&str]) -> Vec<Recall> {
    let engine = Engine::new(EngineConfig { prune: true, ..config.clone() });
    let meta = Arc::new(engine.compute_metadata(frame));
    let prepared = engine.prepare(frame, meta.clone(), None, k);
    let sample = make_sample(frame, config.sample_cap, config.seed);
    let mut out = Vec::new();
    for a in prepared.actions.iter().filter(|a| actions.contains(&a.name.as_str())) {
        let Scorer::Builtin(kind) = a.scorer else { continue };
        let cands = &a.output.candidates;
        let plans: Vec<ScorePlan> = cands.iter().map(|c| plan_for(kind, &c.spec, a.output.base.as_ref(), &meta)).collect();
        let tie: Vec<String> = cands.iter().map(|c| c.spec.tie_key()).collect();
        let secondary: Vec<u64> = cands.iter().map(|c| c.secondary).collect();
        let counters = luxen_core::Counters::default();
        let (Ok(exact), Ok(approx)) = (
            exact_topk(&plans, &secondary, &tie, frame, k, &counters),
            approx_topk(&plans, &secondary, &tie, frame, &sample.rows, k, &counters),
        ) else {
            continue;
        };
        let truth: std::collections::HashSet<usize> = exact.iter().map(|e| e.index).collect();
        let hits = approx.iter().filter(|e| truth.contains(&e.index)).count();
        out.push(Recall {
            action: a.name.clone(),
            k,
            recall: if truth.is_empty() { 1.0 } else { hits as f64 / truth.len() as f64 },
            candidates: cands.len(),
            pass1_max_rows: counters.snapshot().pass1_max_rows,
        });
    }
    out
}

pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let base = synthetic_frame(config.rows, config.cols, config.mix, config.seed);
    let workload = standard_workload(&base);
    let mut levels = Vec::new();
    for &level in &config.levels {
        let engine_config = EngineConfig { prune: level.prunes(), ..config.engine.clone() };
        let mut cells: Vec<CellTiming> = Vec::new();
        let mut non_print = 0;
        for rep in 0..config.repetitions {
            let engine = Engine::new(engine_config.clone());
            let mut replay = Replay {
                level,
                engine: &engine,
                k: engine_config.k,
                workers: config.workers,
                vars: [("df".to_string(), base.uncached())].into_iter().collect(),
            };
            for (i, cell) in workload.iter().enumerate() {
                let before = engine.counters().snapshot();
                let (latency, complete) = replay.run(i, cell)?;
                let after = engine.counters().snapshot();
                let timing = CellTiming {
                    index: i,
                    kind: cell.kind(),
                    latency,
                    complete,
                    metadata_computations: after.metadata_computations - before.metadata_computations,
                    dashboard_computations: after.dashboard_computations - before.dashboard_computations,
                    scoring_operations: after.scoring_operations - before.scoring_operations,
                };
                if cell.kind() == CellKind::NonPrint && rep == 0 {
                    non_print += timing.metadata_computations + timing.dashboard_computations;
                }
                if rep == 0 {
                    cells.push(timing);
                } else {
                    cells[i].latency += timing.latency;
                    cells[i].complete += timing.complete;
                }
            }
        }
        for c in &mut cells {
            c.latency /= config.repetitions as f64;
            c.complete /= config.repetitions as f64;
        }
        let per_kind = CellKind::ALL
            .iter()
            .map(|&kind| {
                let mut v: Vec<f64> = cells.iter().filter(|c| c.kind == kind).map(|c| c.latency).collect();
                KindStats { kind, cells: v.len(), mean: mean(&v), median: median(&mut v) }
            })
            .collect();
        let latencies: Vec<f64> = cells.iter().map(|c| c.latency).collect();
        let completes: Vec<f64> = cells.iter().map(|c| c.complete).collect();
        let recall = if config.recall && level.prunes() {
            prune_recall(&base, &engine_config, engine_config.k, &["Correlation", "Distribution"])
        } else {
            Vec::new()
        };
        levels.push(LevelReport {
            level,
            mean_latency: mean(&latencies),
            mean_complete: mean(&completes),
            cells,
            per_kind,
            non_print_computations: non_print,
            recall,
        });
    }
    Ok(BenchReport { rows: config.rows, cols: config.cols, repetitions: config.repetitions, levels })
}

/// Seconds for one print of a fresh `rows` x `width` frame at `level`,
/// median over `repetitions`.
pub fn time_single_print(rows: usize, width: usize, level: OptLevel, config: &EngineConfig, repetitions: usize, seed: u64) -> f64 {
    let base = synthetic_frame(rows, width, TypeMix::default(), seed);
    let mut times: Vec<f64> = (0..repetitions.max(1))
        .map(|_| {
            let engine = Engine::new(EngineConfig { prune: level.prunes(), ..config.clone() });
            let replay = Replay { level, engine: &engine, k: config.k, workers: 1, vars: Default::default() };
            let mut f = base.uncached();
            replay.print(&mut f).0
        })
        .collect();
    median(&mut times)
}

/// Least-squares fit of `t = a + b * w^c`, with `c` found by grid search
/// over [0.05, 4] in steps of 0.001 and `a`, `b` solved exactly for each `c`.
pub fn fit_power(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    for step in 50..=4000 {
        let c = step as f64 / 1000.0;
        let xs: Vec<f64> = points.iter().map(|(w, _)| w.powf(c)).collect();
        let n = points.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = points.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        if sxx == 0.0 {
            continue;
        }
        let sxy: f64 = xs.iter().zip(points).map(|(x, p)| (x - mx) * (p.1 - my)).sum();
        let b = sxy / sxx;
        let a = my - b * mx;
        let sse: f64 = xs.iter().zip(points).map(|(x, p)| (p.1 - a - b * x).powi(2)).sum();
        if sse < best.0 {
            best = (sse, a, b, c);
        }
    }
    (best.1, best.2, best.3)
}
