//! Batch experiments over generated models.
//!
//! A manifest holds one model spec per line as whitespace-separated
//! `key=value` pairs; blank lines and `#` comments are ignored. Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `construct` | `C`, `E`, `L`, `CN` or `EN` | required |
//! | `breadth` | branch count | 1 for `L`, else 2 |
//! | `depth` | sequence length | required |
//! | `nesting_factor`, `nesting_breadth`, `nesting_depth` | nested constructs only | 1 |
//! | `seed` | generator and simulation seed | 0 |
//! | `traces` | simulated traces per model | 10 |
//! | `max_len` | soft trace length cap | 50 |
//!
//! Jobs are the cross product spec × placement × trace × variant, numbered in
//! that nesting order. Rows come back in job order regardless of scheduling.

use std::time::Duration;

use rayon::prelude::*;

use crate::baseline::{astar_align, dijkstra_align, SearchOptions};
use crate::generator::{generate_model, inject_deviation, simulate_traces, Construct, GenError, ModelSpec, Placement};
use crate::heuristic::HeuristicCache;
use crate::io::ResultRow;
use crate::metrics::{RunMetrics, Variant};
use crate::sync_product::{product_for_trace, SyncProduct};
use crate::trace::Trace;
use crate::unfolding::{unfold_align, UnfoldOptions, UnfoldVariant};

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(100);

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("model {model}: {source}")]
    Generate { model: String, source: GenError },
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub spec: ModelSpec,
    pub traces: usize,
    pub max_len: usize,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, BenchError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| BenchError::Manifest { line: i + 1, message };
        let mut construct = None;
        let mut depth = None;
        let mut breadth = None;
        let (mut nf, mut nb, mut nd) = (1, 1, 1);
        let (mut seed, mut traces, mut max_len) = (0u64, 10usize, 50usize);
        for pair in line.split_whitespace() {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{pair}`")))?;
            let num = |v: &str| v.parse::<u64>().map_err(|_| err(format!("`{k}` needs a non-negative integer, got `{v}`")));
            match k {
                "construct" => construct = Some(v.parse::<Construct>().map_err(|e| err(e.to_string()))?),
                "breadth" => breadth = Some(num(v)? as u32),
                "depth" => depth = Some(num(v)? as u32),
                "nesting_factor" => nf = num(v)? as u32,
                "nesting_breadth" => nb = num(v)? as u32,
                "nesting_depth" => nd = num(v)? as u32,
                "seed" => seed = num(v)?,
                "traces" => traces = num(v)? as usize,
                "max_len" => max_len = num(v)? as usize,
                _ => return Err(err(format!("unknown key `{k}`"))),
            }
        }
        let construct = construct.ok_or_else(|| err("missing `construct`".into()))?;
        let depth = depth.ok_or_else(|| err("missing `depth`".into()))?;
        let breadth = breadth.unwrap_or(if construct == Construct::L { 1 } else { 2 });
        let spec = if construct.is_nested() {
            ModelSpec {
                breadth,
                ..ModelSpec::nested(construct, depth, nf, nb, nd, seed)
            }
        } else {
            ModelSpec::simple(construct, breadth, depth, seed)
        };
        spec.validate().map_err(|e| err(e.to_string()))?;
        out.push(ManifestEntry { spec, traces, max_len });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub variants: Vec<Variant>,
    pub placements: Vec<Placement>,
    pub timeout: Option<Duration>,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            variants: Variant::ALL.to_vec(),
            placements: Placement::ALL.to_vec(),
            timeout: Some(DEFAULT_TIMEOUT),
            jobs: 0,
        }
    }
}

/// Runs one aligner and returns its metrics.
pub fn run_variant(sp: &SyncProduct, variant: Variant, timeout: Option<Duration>) -> RunMetrics {
    match variant {
        Variant::FoldN | Variant::FoldH => {
            let v = if variant == Variant::FoldN { UnfoldVariant::Naive } else { UnfoldVariant::Heuristic };
            let mut opts = UnfoldOptions::new(v);
            opts.timeout = timeout;
            unfold_align(sp, &opts).metrics
        }
        Variant::Dijkstra | Variant::AStar => {
            let opts = SearchOptions {
                timeout,
                ..SearchOptions::default()
            };
            if variant == Variant::Dijkstra {
                dijkstra_align(sp, &opts).metrics
            } else {
                astar_align(sp, &HeuristicCache::new(sp), &opts).metrics
            }
        }
    }
}

struct Job<'a> {
    model: usize,
    trace_id: usize,
    placement: Placement,
    trace: &'a Trace,
    variant: Variant,
}

/// Generates every model and its traces, then runs all jobs on a pool of
/// `config.jobs` threads. A deviation cannot be applied to an empty trace;
/// such jobs align the trace unchanged.
pub fn run_bench(entries: &[ManifestEntry], config: &BenchConfig) -> Result<Vec<ResultRow>, BenchError> {
    let mut models = Vec::with_capacity(entries.len());
    let mut deviated: Vec<Vec<Vec<Trace>>> = Vec::with_capacity(entries.len());
    for e in entries {
        let gen_err = |source| BenchError::Generate {
            model: e.spec.model_id(),
            source,
        };
        let net = generate_model(&e.spec).map_err(gen_err)?;
        let traces = simulate_traces(&net, e.traces, e.spec.seed, e.max_len).map_err(gen_err)?;
        deviated.push(
            config
                .placements
                .iter()
                .map(|&p| traces.iter().map(|t| inject_deviation(t, p).unwrap_or_else(|_| t.clone())).collect())
                .collect(),
        );
        models.push((e.spec.model_id(), net));
    }
    let mut jobs = Vec::new();
    for (m, by_placement) in deviated.iter().enumerate() {
        for (p, traces) in by_placement.iter().enumerate() {
            for (trace_id, trace) in traces.iter().enumerate() {
                for &variant in &config.variants {
                    jobs.push(Job {
                        model: m,
                        trace_id,
                        placement: config.placements[p],
                        trace,
                        variant,
                    });
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let (model_id, net) = &models[job.model];
                let sp = product_for_trace(net, job.trace);
                ResultRow {
                    model_id: model_id.clone(),
                    trace_id: job.trace_id.to_string(),
                    placement: job.placement.as_str().to_string(),
                    metrics: run_variant(&sp, job.variant, config.timeout),
                }
            })
            .collect()
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Cost;

    #[test]
    fn manifest_grammar() {
        let text = "# two specs\nconstruct=C breadth=3 depth=2 seed=4 traces=5\n\nconstruct=CN depth=2 nesting_factor=2 nesting_breadth=2 nesting_depth=1 # nested\n";
        let m = parse_manifest(text).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].spec, ModelSpec::simple(Construct::C, 3, 2, 4));
        assert_eq!(m[0].traces, 5);
        assert_eq!(m[1].spec, ModelSpec::nested(Construct::CN, 2, 2, 2, 1, 0));
        assert_eq!(m[1].max_len, 50);
        assert_eq!(parse_manifest("construct=L depth=3").unwrap()[0].spec.breadth, 1);
    }

    #[test]
    fn manifest_errors_name_the_line() {
        for bad in ["\nconstruct=C", "\ndepth=2", "\nconstruct=Q depth=2", "\nconstruct=C depth=x", "\nconstruct=C depth=2 colour=red", "\nconstruct=L breadth=2 depth=2", "\nconstruct=C breadth=0 depth=2"] {
            assert!(matches!(parse_manifest(bad), Err(BenchError::Manifest { line: 2, .. })), "{bad}");
        }
    }

    #[test]
    fn row_count_and_order() {
        let m = parse_manifest("construct=C breadth=2 depth=2 seed=1 traces=3\nconstruct=E breadth=2 depth=1 seed=2 traces=3").unwrap();
        let cfg = BenchConfig {
            variants: vec![Variant::FoldH, Variant::Dijkstra],
            jobs: 2,
            ..BenchConfig::default()
        };
        let rows = run_bench(&m, &cfg).unwrap();
        assert_eq!(rows.len(), 2 * 4 * 3 * 2);
        assert_eq!(rows[0].metrics.variant, Variant::FoldH);
        assert_eq!(rows[1].metrics.variant, Variant::Dijkstra);
        assert_eq!(rows[2].trace_id, "1");
        assert_eq!(rows[6].placement, "start");
        assert_eq!(rows[24].model_id, "E_b2_d1_s2");
        for pair in rows.chunks(2) {
            assert_eq!(pair[0].metrics.cost, pair[1].metrics.cost);
            assert!(!pair[0].metrics.timed_out);
        }
        for r in rows.iter().filter(|r| r.placement != "none") {
            assert!(r.metrics.cost.unwrap() >= Cost::ONE);
        }
    }
}
