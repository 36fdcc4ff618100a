//! Command-line entry points.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use luxen_core::Engine;
use serde_json::json;

use crate::bench::{fit_power, run_benchmark, time_single_print, BenchConfig, OptLevel};
use crate::config::EngineArgs;
use crate::load::{load_csv, CsvOptions};
use crate::schedule::lookup_or_compute;
use crate::server::{serve, AppState};
use crate::session::DEFAULT_FRAMES_PER_SESSION;
use crate::wire::CURRENT_ACTION;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "luxen", version, about = "Always-on visualization recommendations for tabular data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Write the recommendation dashboard of a CSV file as chart documents.
    Recommend(RecommendArgs),
    /// Replay the synthetic workload at each optimization level.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "LUXEN_ADDR", default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    #[arg(long, default_value_t = DEFAULT_FRAMES_PER_SESSION)]
    pub frames_per_session: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct RecommendArgs {
    pub input: PathBuf,
    /// Intent clauses, comma separated. May be repeated.
    #[arg(long)]
    pub intent: Vec<String>,
    #[arg(long, default_value = "specs")]
    pub out: PathBuf,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long)]
    pub no_header: bool,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    pub rows: usize,
    #[arg(long, default_value_t = 50)]
    pub cols: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = OptLevel::ALL)]
    pub levels: Vec<OptLevel>,
    #[arg(long, default_value_t = 1)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 7)]
    pub data_seed: u64,
    /// Also time single prints over widths 10..160 and fit t = a + b*w^c.
    #[arg(long)]
    pub width_scaling: bool,
    /// Write the JSON report here as well as printing the table.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

/// Splits comma separated clause lists. Commas inside brackets or braces stay.
pub fn split_clauses(raw: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    for text in raw {
        let mut depth = 0i32;
        let mut cur = String::new();
        for ch in text.chars() {
            match ch {
                '[' | '{' | '(' => depth += 1,
                ']' | '}' | ')' => depth -= 1,
                ',' if depth == 0 => {
                    out.push(std::mem::take(&mut cur));
                    continue;
                }
                _ => {}
            }
            cur.push(ch);
        }
        out.push(cur);
    }
    out.into_iter().map(|c| c.trim().to_string()).filter(|c| !c.is_empty()).collect()
}

fn slug(action: &str) -> String {
    action.to_ascii_lowercase().split_whitespace().collect::<Vec<_>>().join("-")
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> std::io::Result<()> {
    let bytes = serde_json::to_vec_pretty(value).map_err(std::io::Error::other)?;
    std::fs::write(path, bytes)
}

pub fn run_recommend(args: &RecommendArgs) -> i32 {
    if let Err(e) = args.engine.validate() {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    let file = match std::fs::File::open(&args.input) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.input.display());
            return EXIT_IO;
        }
    };
    if !args.delimiter.is_ascii() {
        eprintln!("error: delimiter must be ASCII");
        return EXIT_INVALID;
    }
    let options = CsvOptions { delimiter: args.delimiter as u8, has_header: !args.no_header };
    let name = args.input.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned());
    let mut frame = match load_csv(std::io::BufReader::new(file), options, &name) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return if e.is_io() { EXIT_IO } else { EXIT_INVALID };
        }
    };
    let engine = Engine::new(args.engine.engine_config());
    let clauses = split_clauses(&args.intent);
    if !clauses.is_empty() {
        match engine.set_intent(&mut frame, &clauses) {
            Ok(v) => {
                for w in &v.warnings {
                    eprintln!("warning: {}", w.message);
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_INVALID;
            }
        }
    }
    let (dashboard, _) = lookup_or_compute(&engine, &mut frame, args.engine.k, args.engine.workers(), &|_| {});
    if let Err(e) = std::fs::create_dir_all(&args.out) {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        return EXIT_IO;
    }
    let mut files = Vec::new();
    let current = dashboard.current_vis.iter().map(|v| (CURRENT_ACTION.to_string(), 0, v));
    let ranked = dashboard
        .recommendations
        .iter()
        .flat_map(|r| r.vises.iter().enumerate().map(move |(i, v)| (r.action.clone(), i, v)));
    for (action, rank, vis) in current.chain(ranked) {
        let file = format!("{}-{rank}.json", slug(&action));
        if let Err(e) = write_json(&args.out.join(&file), &luxen_core::vis::to_spec_doc(vis)) {
            eprintln!("error: cannot write {file}: {e}");
            return EXIT_IO;
        }
        files.push(json!({ "file": file, "action": action, "rank": rank, "score": vis.score, "title": vis.spec.title() }));
    }
    let manifest = json!({
        "source": args.input.display().to_string(),
        "frame_version": dashboard.frame_version,
        "mode": dashboard.mode,
        "k": dashboard.k,
        "vises": files,
        "diagnostics": dashboard.diagnostics,
    });
    if let Err(e) = write_json(&args.out.join("manifest.json"), &manifest) {
        eprintln!("error: cannot write manifest: {e}");
        return EXIT_IO;
    }
    EXIT_OK
}

pub const SCALING_WIDTHS: [usize; 5] = [10, 20, 40, 80, 160];

pub fn run_bench(args: &BenchArgs) -> i32 {
    if let Err(e) = args.engine.validate() {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    let config = BenchConfig {
        levels: args.levels.clone(),
        repetitions: args.repetitions,
        seed: args.data_seed,
        engine: args.engine.engine_config(),
        workers: args.engine.workers(),
        ..BenchConfig::new(args.rows, args.cols)
    };
    let report = match run_benchmark(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    print!("{}", report.table());
    let mut scaling = Vec::new();
    if args.width_scaling {
        for &level in &args.levels {
            let points: Vec<(f64, f64)> = SCALING_WIDTHS
                .iter()
                .map(|&w| (w as f64, time_single_print(args.rows, w, level, &config.engine, args.repetitions, args.data_seed)))
                .collect();
            let (a, b, c) = fit_power(&points);
            println!("{:<12} width fit: t = {a:.4} + {b:.6} * w^{c:.3}", level.name());
            scaling.push(json!({ "level": level, "points": points, "a": a, "b": b, "c": c }));
        }
    }
    if let Some(path) = &args.json {
        let value = json!({ "report": report, "width_scaling": scaling });
        if let Err(e) = write_json(path, &value) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_IO;
        }
    }
    EXIT_OK
}

pub fn run_serve(args: &ServeArgs) -> i32 {
    if let Err(e) = args.engine.validate() {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    let state = AppState::new(Engine::new(args.engine.engine_config()), args.engine.workers(), args.frames_per_session);
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    match runtime.block_on(serve(args.addr, state, |a| eprintln!("listening on http://{a}"))) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_IO
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    match &cli.command {
        Command::Serve(a) => run_serve(a),
        Command::Recommend(a) => run_recommend(a),
        Command::Bench(a) => run_bench(a),
    }
}
