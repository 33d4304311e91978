use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use folda::alignment::{AlignError, AlignedMove, PoAlignment};
use folda::baseline::{astar_align, dijkstra_align, SearchOptions};
use folda::bench::{parse_manifest, run_bench, BenchConfig};
use folda::generator::{generate_model, inject_deviation, simulate_traces, Construct, ModelSpec, Placement};
use folda::heuristic::HeuristicCache;
use folda::io::{self, ResultRow};
use folda::metrics::{RunMetrics, Variant};
use folda::sync_product::{product_for_trace, MoveSummary, SyncProduct};
use folda::unfolding::{unfold_align, UnfoldOptions, UnfoldVariant};

/// Optimal partial-order alignments by cost-directed unfolding.
#[derive(Parser)]
#[command(name = "folda", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Align every trace of a trace file against a PNML model.
    Align(AlignArgs),
    /// Generate a model and simulated traces.
    Gen(GenArgs),
    /// Run a manifest of generated experiments and write a CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct AlignArgs {
    model: PathBuf,
    traces: PathBuf,
    #[arg(long, default_value = "foldh")]
    variant: Variant,
    /// Seconds per trace.
    #[arg(long, default_value_t = 100.0)]
    timeout: f64,
    /// Write the alignment as DOT (one file per trace when there are several).
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the branching process of trace i to `<prefix><i>.dot` (unfolding variants).
    #[arg(long)]
    dot_prefix: Option<String>,
    /// Append result rows to this CSV file.
    #[arg(long)]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    construct: Construct,
    /// Branch count; defaults to 1 for L and 2 otherwise.
    #[arg(long)]
    breadth: Option<u32>,
    #[arg(long)]
    depth: u32,
    #[arg(long, default_value_t = 1)]
    nesting_factor: u32,
    #[arg(long, default_value_t = 1)]
    nesting_breadth: u32,
    #[arg(long, default_value_t = 1)]
    nesting_depth: u32,
    #[arg(long, default_value_t = 10)]
    traces: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "none")]
    deviation: Placement,
    #[arg(long, default_value_t = 50)]
    max_len: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "foldn,foldh,dijkstra,astar")]
    variants: Vec<Variant>,
    #[arg(long, value_delimiter = ',', default_value = "none,start,middle,end")]
    placements: Vec<Placement>,
    /// Seconds per trace.
    #[arg(long, default_value_t = 100.0)]
    timeout: f64,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "FOLDA_JOBS", default_value_t = 0)]
    jobs: usize,
    #[arg(long)]
    out: PathBuf,
}

fn timeout(secs: f64) -> Result<Duration> {
    Duration::try_from_secs_f64(secs).with_context(|| format!("invalid timeout {secs}"))
}

fn numbered(path: &Path, i: usize, many: bool) -> PathBuf {
    if !many {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "dot".into());
    path.with_file_name(format!("{stem}.{i}.{ext}"))
}

struct Outcome {
    metrics: RunMetrics,
    alignment: Result<PoAlignment, AlignError>,
}

fn run_one(sp: &SyncProduct, variant: Variant, limit: Duration, dot_prefix: Option<(&str, usize)>) -> Result<Outcome> {
    match variant {
        Variant::FoldN | Variant::FoldH => {
            let v = if variant == Variant::FoldN { UnfoldVariant::Naive } else { UnfoldVariant::Heuristic };
            let mut opts = UnfoldOptions::new(v);
            opts.timeout = Some(limit);
            let run = unfold_align(sp, &opts);
            if let Some((prefix, i)) = dot_prefix {
                let path = format!("{prefix}{i}.dot");
                fs::write(&path, io::process_dot(sp, &run.process, run.final_event))
                    .with_context(|| format!("writing {path}"))?;
            }
            Ok(Outcome {
                metrics: run.metrics,
                alignment: run.outcome,
            })
        }
        Variant::Dijkstra | Variant::AStar => {
            let opts = SearchOptions {
                timeout: Some(limit),
                ..SearchOptions::default()
            };
            let run = if variant == Variant::Dijkstra {
                dijkstra_align(sp, &opts)
            } else {
                astar_align(sp, &HeuristicCache::new(sp), &opts)
            };
            // a total order, drawn as a chain
            let alignment = run.outcome.map(|a| {
                let n = a.transitions.len();
                let moves = a
                    .transitions
                    .iter()
                    .zip(&a.moves)
                    .enumerate()
                    .map(|(i, (&t, k))| AlignedMove {
                        event: i as u32,
                        transition: t,
                        kind: k.clone(),
                    })
                    .collect();
                let before = (0..n).map(|i| (0..n).map(|j| i < j).collect()).collect();
                PoAlignment::new(moves, before, a.cost)
            });
            Ok(Outcome {
                metrics: run.metrics,
                alignment,
            })
        }
    }
}

fn describe(s: &MoveSummary) -> String {
    format!("sync {} log {} model {} silent {}", s.sync, s.log, s.model, s.silent)
}

fn append_metrics(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let text = io::rows_to_string(rows);
    let body = if fresh { text.as_str() } else { text.split_once('\n').map_or("", |(_, rest)| rest) };
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("opening {}", path.display()))?;
    f.write_all(body.as_bytes())?;
    Ok(())
}

fn cmd_align(args: AlignArgs) -> Result<ExitCode> {
    let limit = timeout(args.timeout)?;
    let model = io::read_pnml(&args.model).with_context(|| format!("reading model {}", args.model.display()))?;
    let text = fs::read_to_string(&args.traces).with_context(|| format!("reading {}", args.traces.display()))?;
    let traces = io::parse_traces(&text).with_context(|| format!("parsing {}", args.traces.display()))?;
    let model_id = args.model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut rows = Vec::new();
    let (mut timed_out, mut failed) = (false, false);
    for (i, trace) in traces.iter().enumerate() {
        let sp = product_for_trace(&model, trace);
        let prefix = args.dot_prefix.as_deref().map(|p| (p, i));
        let out = run_one(&sp, args.variant, limit, prefix)?;
        match &out.alignment {
            Ok(a) => {
                println!("trace {i}: cost {} {}", a.cost(), describe(&a.summary(&sp)));
                if let Some(path) = &args.dot {
                    let path = numbered(path, i, traces.len() > 1);
                    fs::write(&path, io::alignment_dot(a)).with_context(|| format!("writing {}", path.display()))?;
                }
            }
            Err(AlignError::Timeout) => {
                timed_out = true;
                println!("trace {i}: timed out after {:.3}s", out.metrics.elapsed.as_secs_f64());
            }
            Err(e) => {
                failed = true;
                eprintln!("error: trace {i}: {e}");
            }
        }
        rows.push(ResultRow {
            model_id: model_id.clone(),
            trace_id: i.to_string(),
            placement: "none".into(),
            metrics: out.metrics,
        });
    }
    if let Some(path) = &args.metrics {
        append_metrics(path, &rows)?;
    }
    Ok(if failed {
        ExitCode::from(1)
    } else if timed_out {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    let breadth = args.breadth.unwrap_or(if args.construct == Construct::L { 1 } else { 2 });
    let spec = if args.construct.is_nested() {
        ModelSpec {
            breadth,
            ..ModelSpec::nested(args.construct, args.depth, args.nesting_factor, args.nesting_breadth, args.nesting_depth, args.seed)
        }
    } else {
        ModelSpec::simple(args.construct, breadth, args.depth, args.seed)
    };
    let net = generate_model(&spec)?;
    let traces = simulate_traces(&net, args.traces, args.seed, args.max_len)?;
    let traces = traces
        .iter()
        .map(|t| inject_deviation(t, args.deviation))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    fs::write(args.out.join("model.pnml"), io::write_pnml(&net, &spec.model_id()))?;
    fs::write(args.out.join("traces.txt"), io::write_traces(&traces))?;
    println!(
        "{}: {} places, {} transitions, {} traces",
        spec.model_id(),
        net.place_count(),
        net.transition_count(),
        traces.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode> {
    if args.variants.is_empty() || args.placements.is_empty() {
        bail!("need at least one variant and one placement");
    }
    let text = fs::read_to_string(&args.manifest).with_context(|| format!("reading {}", args.manifest.display()))?;
    let entries = parse_manifest(&text)?;
    let config = BenchConfig {
        variants: args.variants,
        placements: args.placements,
        timeout: Some(timeout(args.timeout)?),
        jobs: args.jobs,
    };
    let rows = run_bench(&entries, &config)?;
    let f = fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    io::write_rows(f, &rows)?;
    let timeouts = rows.iter().filter(|r| r.metrics.timed_out).count();
    println!("{} rows, {timeouts} timed out", rows.len());
    Ok(if timeouts > 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Align(a) => cmd_align(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Bench(a) => cmd_bench(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
