//! Wall-clock scaling benchmark.
//!
//! Each configuration times a full eval-mode forward pass on one synthetic
//! document of `M` sentences × `K` words and divides by the layer count; the
//! embedding, pooling and head are linear in length and small next to the
//! layers. Timed regions run on the calling thread only.

use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use hit_core::bench::{flop_estimate, loglog_slope, median_and_stddev, CostReport, ModelKind, COST_CSV_HEADER};
use hit_core::data::TokenizedDoc;
use hit_core::model::{Model, ModelConfig, Network};
use hit_core::numerics::{Dropout, ParamStore, Tape};

use crate::config::BenchGrid;
use crate::error::{Error, Result, WithPath};

/// Smallest observable step of the monotonic clock.
pub fn clock_tick() -> Duration {
    let mut best = Duration::MAX;
    for _ in 0..50 {
        let a = Instant::now();
        let mut b = Instant::now();
        while b == a {
            b = Instant::now();
        }
        best = best.min(b - a);
    }
    best
}

fn bench_config(grid: &BenchGrid, m: usize, k: usize) -> ModelConfig {
    ModelConfig {
        d: grid.d,
        heads: grid.heads,
        layers: grid.layers,
        k_max: k,
        m_max: m,
        d_ff: 4 * grid.d,
        vocab_size: 64,
        num_classes: 2,
        dropout: 0.0,
        flat_max_len: m * k,
        use_context_propagation: true,
        seed: 0,
        embed_dim: None,
    }
}

fn bench_document(m: usize, k: usize) -> TokenizedDoc {
    TokenizedDoc {
        label: 0,
        sentences: (0..m)
            .map(|s| (0..k).map(|w| 3 + ((s * 31 + w * 7) % 61) as u32).collect())
            .collect(),
    }
}

fn forward_once(model: &Model, params: &ParamStore<f32>, doc: &TokenizedDoc) -> Result<Duration> {
    let start = Instant::now();
    let mut tape = Tape::new();
    let out = model.logits(&mut tape, params, &[doc], &mut Dropout::eval())?;
    std::hint::black_box(tape.value(out));
    Ok(start.elapsed())
}

/// Times one shape: a discarded warm-up followed by `repeats` forward passes.
pub fn time_forward(kind: ModelKind, m: usize, grid: &BenchGrid, tick: Duration) -> Result<CostReport> {
    if grid.repeats < 5 {
        return Err(Error::Bench(format!("need at least 5 repeats, got {}", grid.repeats)));
    }
    let k = grid.k;
    let model = Model::new(bench_config(grid, m, k), kind == ModelKind::Flat)?;
    let params = model.init_params::<f32>()?;
    let doc = bench_document(m, k);
    forward_once(&model, &params, &doc)?;
    let mut samples = Vec::with_capacity(grid.repeats);
    for _ in 0..grid.repeats {
        samples.push(forward_once(&model, &params, &doc)?.as_secs_f64() / grid.layers as f64);
    }
    let (median_s, stddev_s) = median_and_stddev(&samples)?;
    if median_s < 50.0 * tick.as_secs_f64() {
        return Err(Error::Bench(format!(
            "{kind} forward at M={m}, K={k} took {median_s:.3e} s, under 50 clock ticks ({:.3e} s); use larger shapes",
            tick.as_secs_f64()
        )));
    }
    let (mu, ku, du) = (m as u64, k as u64, grid.d as u64);
    Ok(CostReport {
        kind,
        m,
        k,
        d: grid.d,
        layers: grid.layers,
        analytic_units: flop_estimate(kind, mu, ku, du),
        median_s,
        stddev_s,
        repeats: grid.repeats,
    })
}

/// The full grid: hierarchical shapes at `M ∈ hi_m`, flat shapes at every
/// total length in `flat_lengths` (as `L/K` sentences of `K` words).
pub fn scaling_benchmark(grid: &BenchGrid) -> Result<Vec<CostReport>> {
    let tick = clock_tick();
    let mut out = Vec::new();
    for &m in &grid.hi_m {
        out.push(time_forward(ModelKind::Hi, m, grid, tick)?);
    }
    for &len in &grid.flat_lengths {
        if len % grid.k != 0 {
            return Err(Error::Bench(format!("flat length {len} is not a multiple of K = {}", grid.k)));
        }
        out.push(time_forward(ModelKind::Flat, len / grid.k, grid, tick)?);
    }
    Ok(out)
}

/// Least-squares slope of log median time against log length for one kind.
pub fn time_slope(reports: &[CostReport], kind: ModelKind) -> Result<f64> {
    let pts: Vec<(f64, f64)> = reports
        .iter()
        .filter(|r| r.kind == kind)
        .map(|r| (r.length() as f64, r.median_s))
        .collect();
    Ok(loglog_slope(&pts)?)
}

/// Appends rows to a CSV, writing the header only when the file is new or
/// empty. Existing rows are never touched.
pub fn append_csv(path: &Path, reports: &[CostReport]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).at(dir)?;
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path).at(path)?;
    let fresh = f.metadata().at(path)?.len() == 0;
    let mut text = String::new();
    if fresh {
        text.push_str(COST_CSV_HEADER);
        text.push('\n');
    }
    for r in reports {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    f.write_all(text.as_bytes()).at(path)
}

/// Bytes held by one layer's attention-probability tensor for a flat model
/// over `len` tokens (f32, all heads).
pub fn flat_attention_bytes(len: usize, heads: usize) -> usize {
    heads * len * len * std::mem::size_of::<f32>()
}
