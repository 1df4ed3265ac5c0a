//! `hit` command line: train, eval, bench, gradcheck and synth over a
//! [`RunConfig`]. Flags override `--set` pairs, which override the config file.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use hit_core::bench::ModelKind;
use hit_core::data::{build_vocab, gen_synthetic_task, tokenize_document, Document, TokenizedDoc, Vocab, GLOVE_DIM};
use hit_core::model::{install_word_table, Model, ModelConfig, Network};
use hit_core::numerics::{finite_diff_gradcheck, rng_from_seed, Dropout, GradcheckOptions, GradcheckReport, ParamStore};
use hit_core::train_eval::{evaluate_metrics, predict, train_epochs_with, History, Metrics, TrainConfig};

use crate::config::RunConfig;
use crate::error::{Error, Result, WithPath};
use crate::io::{load_checkpoint, load_embedding_file, load_jsonl_dataset, save_checkpoint, to_jsonl, Checkpoint};
use crate::timing;

#[derive(Debug, Parser)]
#[command(name = "hit", about = "Hierarchical interactive Transformer for long-document classification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long = "batch-size", global = true)]
    pub batch_size: Option<usize>,
    /// Skip the second sentence encoder (no document context in word states).
    #[arg(long = "ablate-propagation", global = true)]
    pub ablate_propagation: bool,
    /// Use the flat Transformer baseline.
    #[arg(long, global = true)]
    pub flat: bool,
    /// Synthetic task kind: keyword or xor.
    #[arg(long, global = true)]
    pub kind: Option<String>,
    /// Use the built-in tiny model configuration.
    #[arg(long, global = true)]
    pub tiny: bool,
}

#[derive(Debug, Subcommand, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Train a model; writes history.csv, a checkpoint and resolved.cfg.
    Train,
    /// Evaluate a checkpoint; prints metrics and writes metrics.txt.
    Eval,
    /// Time forward passes over the benchmark grid; appends to bench.csv.
    Bench,
    /// Compare tape gradients with finite differences (in f64).
    Gradcheck,
    /// Write a synthetic corpus as JSONL.
    Synth,
}

impl Cli {
    /// Defaults, then the config file, then `--set`, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if self.tiny {
            let seed = cfg.seed;
            cfg.model = ModelConfig { seed, ..ModelConfig::tiny() };
        }
        for pair in &self.set {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::Usage(format!("--set expects KEY=VALUE, got {pair:?}")))?;
            cfg.set(k.trim(), v)?;
        }
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        let flags = [
            ("dataset", path(&self.dataset)),
            ("embeddings", path(&self.embeddings)),
            ("checkpoint", path(&self.checkpoint)),
            ("out", path(&self.out)),
            ("seed", self.seed.map(|s| s.to_string())),
            ("epochs", self.epochs.map(|s| s.to_string())),
            ("batch_size", self.batch_size.map(|s| s.to_string())),
            ("synth_kind", self.kind.clone()),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        if self.ablate_propagation {
            cfg.model.use_context_propagation = false;
        }
        if self.flat {
            cfg.flat = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code: 0 success, 1 bad input, 2 internal failure.
pub fn run_cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.resolve().and_then(|cfg| run(cli.command, &cfg)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs one command on a resolved configuration.
pub fn run(command: Command, cfg: &RunConfig) -> Result<i32> {
    match command {
        Command::Train => train(cfg).map(|_| 0),
        Command::Eval => eval(cfg).map(|_| 0),
        Command::Bench => bench(cfg).map(|_| 0),
        Command::Gradcheck => {
            let report = gradcheck(cfg)?;
            print_gradcheck(&report);
            Ok(if report.passed() { 0 } else { 2 })
        }
        Command::Synth => synth(cfg).map(|_| 0),
    }
}

fn require<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::Usage(format!("{what} is required (flag --{what} or key {what})")))
}

fn checkpoint_path(cfg: &RunConfig) -> PathBuf {
    cfg.checkpoint.clone().unwrap_or_else(|| cfg.out.join("model.ckpt"))
}

fn tokenize_all(docs: &[Document], vocab: &Vocab, path: &Path) -> Result<Vec<TokenizedDoc>> {
    docs.iter()
        .enumerate()
        .map(|(i, d)| {
            tokenize_document(d, vocab)
                .map_err(|e| hit_core::Error::Data(format!("record {}: {e}", i + 1)))
                .at(path)
        })
        .collect()
}

/// Holds out every n-th record, n = round(1 / fraction).
fn stride_split(docs: Vec<Document>, fraction: f64) -> Result<(Vec<Document>, Vec<Document>)> {
    if fraction <= 0.0 {
        return Err(hit_core::Error::Config("no val_dataset given and val_fraction is 0".into()).into());
    }
    let n = ((1.0 / fraction).round() as usize).max(2);
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for (i, d) in docs.into_iter().enumerate() {
        if i % n == n - 1 {
            val.push(d);
        } else {
            train.push(d);
        }
    }
    if train.is_empty() || val.is_empty() {
        return Err(hit_core::Error::Data("dataset too small to hold out a validation split".into()).into());
    }
    Ok((train, val))
}

/// Artifacts of a training run.
#[derive(Debug)]
pub struct TrainOutcome {
    pub history: History,
    pub checkpoint: PathBuf,
    pub history_path: PathBuf,
    pub resolved: RunConfig,
}

pub fn train(cfg: &RunConfig) -> Result<TrainOutcome> {
    let path = require(&cfg.dataset, "dataset")?;
    let docs = load_jsonl_dataset(path)?;
    let (train_docs, val_docs, val_path) = match &cfg.val_dataset {
        Some(vp) => (docs, load_jsonl_dataset(vp)?, vp.as_path()),
        None => {
            let (t, v) = stride_split(docs, cfg.val_fraction)?;
            (t, v, path)
        }
    };
    let vocab = build_vocab(&train_docs, cfg.min_count).at(path)?;

    let mut resolved = cfg.clone();
    let max_label = train_docs.iter().chain(&val_docs).map(|d| d.label).max().unwrap_or(0);
    let classes = cfg.num_classes.unwrap_or(max_label + 1);
    resolved.num_classes = Some(classes);
    resolved.model.num_classes = classes;
    resolved.model.vocab_size = vocab.len();
    if cfg.embeddings.is_some() && resolved.model.embed_dim.is_none() {
        resolved.model.embed_dim = Some(GLOVE_DIM);
    }

    let model = Model::new(resolved.model.clone(), resolved.flat)?;
    let mut params: ParamStore<f32> = model.init_params()?;
    if let Some(ep) = &cfg.embeddings {
        let width = resolved.model.word_dim();
        let mut rng = rng_from_seed(resolved.seed ^ 0x5eed_e3b);
        let (table, coverage) = load_embedding_file(ep, &vocab, width, &mut rng)?;
        install_word_table(&mut params, table)?;
        println!(
            "embeddings: {} of {} vocabulary entries found ({:.1}%)",
            coverage.matched,
            coverage.total,
            100.0 * coverage.fraction()
        );
    }

    let train_tok = tokenize_all(&train_docs, &vocab, path)?;
    let val_tok = tokenize_all(&val_docs, &vocab, val_path)?;
    let tc = TrainConfig {
        epochs: resolved.epochs,
        batch_size: resolved.batch_size,
        lr: resolved.lr,
        seed: resolved.seed,
    };
    let history = train_epochs_with(&model, &mut params, &train_tok, &val_tok, &tc, |r| {
        println!(
            "epoch {} train_loss {:.4} val_accuracy {:.4} val_macro_f {:.4}",
            r.epoch, r.train_loss, r.val.accuracy, r.val.macro_f
        );
    })?;

    fs::create_dir_all(&resolved.out).at(&resolved.out)?;
    let history_path = resolved.out.join("history.csv");
    fs::write(&history_path, history.to_csv()).at(&history_path)?;
    let ckpt = checkpoint_path(&resolved);
    save_checkpoint(
        &ckpt,
        &Checkpoint {
            flat: resolved.flat,
            config: resolved.model.clone(),
            params,
            vocab,
        },
    )?;
    resolved.write_resolved()?;
    Ok(TrainOutcome {
        history,
        checkpoint: ckpt,
        history_path,
        resolved,
    })
}

/// Worker threads for evaluation: `HIT_THREADS`, else the available cores.
pub fn worker_threads() -> usize {
    std::env::var("HIT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// [`predict`] split over up to `threads` scoped workers; the result does not
/// depend on the thread count.
pub fn predict_parallel(
    model: &Model,
    params: &ParamStore<f32>,
    docs: &[TokenizedDoc],
    batch_size: usize,
    threads: usize,
) -> hit_core::Result<Vec<usize>> {
    let threads = threads.clamp(1, docs.len().max(1));
    if threads == 1 {
        return predict(model, params, docs, batch_size);
    }
    let per = docs.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = docs
            .chunks(per)
            .map(|chunk| s.spawn(move || predict(model, params, chunk, batch_size)))
            .collect();
        let mut out = Vec::with_capacity(docs.len());
        for h in handles {
            out.extend(h.join().expect("evaluation worker panicked")?);
        }
        Ok(out)
    })
}

/// Key-value rendering of metrics, as written to `metrics.txt`.
pub fn metrics_text(m: &Metrics) -> String {
    let mut s = format!("n = {}\naccuracy = {}\nmacro_f = {}\n", m.n, m.accuracy, m.macro_f);
    for (c, p) in m.per_class.iter().enumerate() {
        s.push_str(&format!(
            "class{c}.precision = {}\nclass{c}.recall = {}\nclass{c}.f1 = {}\nclass{c}.support = {}\n",
            p.precision, p.recall, p.f1, p.support
        ));
    }
    s
}

pub fn eval(cfg: &RunConfig) -> Result<Metrics> {
    let path = require(&cfg.dataset, "dataset")?;
    let ckpt_path = checkpoint_path(cfg);
    let ckpt = load_checkpoint(&ckpt_path)?;
    let docs = load_jsonl_dataset(path)?;
    let classes = ckpt.config.num_classes;
    if let Some((i, d)) = docs.iter().enumerate().find(|(_, d)| d.label >= classes) {
        return Err(Error::file(
            path,
            hit_core::Error::Data(format!("record {}: label {} outside {classes} classes", i + 1, d.label)),
        ));
    }
    let toks = tokenize_all(&docs, &ckpt.vocab, path)?;
    let model = Model::new(ckpt.config.clone(), ckpt.flat)?;
    let preds = predict_parallel(&model, &ckpt.params, &toks, cfg.batch_size, worker_threads())?;
    let labels: Vec<usize> = toks.iter().map(|d| d.label).collect();
    let metrics = evaluate_metrics(&preds, &labels, classes)?;
    let text = metrics_text(&metrics);
    print!("{text}");
    fs::create_dir_all(&cfg.out).at(&cfg.out)?;
    let out = cfg.out.join("metrics.txt");
    fs::write(&out, &text).at(&out)?;
    let mut resolved = cfg.clone();
    resolved.checkpoint = Some(ckpt_path);
    resolved.write_resolved()?;
    Ok(metrics)
}

pub fn bench(cfg: &RunConfig) -> Result<Vec<hit_core::bench::CostReport>> {
    let reports = timing::scaling_benchmark(&cfg.bench)?;
    let csv = cfg.out.join("bench.csv");
    timing::append_csv(&csv, &reports)?;
    for r in &reports {
        println!("{}", r.csv_row());
    }
    for kind in [ModelKind::Hi, ModelKind::Flat] {
        if reports.iter().filter(|r| r.kind == kind).count() >= 2 {
            println!("{kind} log-log slope {:.3}", timing::time_slope(&reports, kind)?);
        }
    }
    cfg.write_resolved()?;
    Ok(reports)
}

/// Documents of assorted lengths that fit the model's `K_max`, `M_max`.
pub fn gradcheck_docs(cfg: &ModelConfig) -> Vec<TokenizedDoc> {
    let v = cfg.vocab_size as u32;
    let id = |i: usize| 3 + (i as u32 * 7) % v.saturating_sub(3).max(1);
    let shapes: [&[usize]; 3] = [&[5, 2, 3], &[3, 4], &[1]];
    shapes
        .iter()
        .enumerate()
        .map(|(di, lens)| TokenizedDoc {
            label: di % cfg.num_classes,
            sentences: lens
                .iter()
                .take(cfg.m_max)
                .enumerate()
                .map(|(si, &n)| (0..n.min(cfg.k_max)).map(|w| id(di * 31 + si * 11 + w)).collect())
                .collect(),
        })
        .collect()
}

/// Full gradient check of the configured model in f64, dropout off.
pub fn gradcheck(cfg: &RunConfig) -> Result<GradcheckReport> {
    let model = Model::new(cfg.model.clone(), cfg.flat)?;
    let mut params: ParamStore<f64> = model.init_params()?;
    let docs = gradcheck_docs(&cfg.model);
    let refs: Vec<&TokenizedDoc> = docs.iter().collect();
    let labels: Vec<usize> = docs.iter().map(|d| d.label).collect();
    Ok(finite_diff_gradcheck(
        &mut params,
        |tape, p| {
            let l = model.logits(tape, p, &refs, &mut Dropout::eval())?;
            tape.cross_entropy(l, &labels)
        },
        &GradcheckOptions::default(),
    )?)
}

fn print_gradcheck(report: &GradcheckReport) {
    let coords: usize = report.params.iter().map(|p| p.coords_checked).sum();
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    let cmp = if report.passed() { "≤" } else { ">" };
    println!(
        "gradcheck {verdict}: max rel err {:.3e} {cmp} {:e} over {coords} coordinates in {} parameters",
        report.max_rel_err(),
        report.tol,
        report.params.len()
    );
    if let Some(w) = report.worst() {
        println!(
            "worst parameter {} [{}]: analytic {:.6e}, numeric {:.6e}",
            w.name, w.worst_index, w.analytic, w.numeric
        );
    }
    for f in report.failures() {
        println!("  failed {} (max rel err {:.3e})", f.name, f.max_rel_err);
    }
}

pub fn synth(cfg: &RunConfig) -> Result<PathBuf> {
    let docs = gen_synthetic_task(&cfg.synth)?;
    fs::create_dir_all(&cfg.out).at(&cfg.out)?;
    let path = cfg.out.join(format!("{}.jsonl", cfg.synth.kind));
    fs::write(&path, to_jsonl(&docs)).at(&path)?;
    cfg.write_resolved()?;
    println!("wrote {} documents to {}", docs.len(), path.display());
    Ok(path)
}
