//! Subcommand front-end.
//!
//! Every subcommand reads and writes the text formats defined by the
//! library modules, stamps each artifact with a provenance comment
//! recording the full invocation, and writes atomically. Identical
//! inputs, seed, and a single thread reproduce artifacts bit for bit.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::corpus::{build_vocab, parse_conllu, ParsedSentence, Vocabulary};
use crate::deptree::DepPath;
use crate::embed::{
    load_model, nearest_neighbors, train_with_stats, write_model, ModelParams, Query, TrainConfig,
};
use crate::error::{Error, Result};
use crate::eval::{approx_randomization, bio_to_spans, span_f1, spans_to_bio, BioMode, SpanSet};
use crate::features::{
    assemble_features, fit_block_tables, read_feature_file, write_feature_file, BlockTables,
    FeatureConfig, FeatureSets,
};
use crate::io::{atomic_write, open_text, write_provenance};
use crate::tagger::{train_crf, viterbi_decode, CRFModel, Label, TaggerConfig};

/// Environment variable supplying the default worker count.
pub const THREADS_ENV: &str = "PATHVEC_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "pathvec",
    version,
    about = "Word and dependency-path embeddings with a CRF aspect tagger"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train embeddings from CoNLL-U text
    TrainEmb(TrainEmbArgs),
    /// Fit per-block discretization tables over a corpus
    Discretize(DiscretizeArgs),
    /// Assemble a discrete CRF feature file
    Features(FeaturesArgs),
    /// Train the CRF tagger from a labeled feature file
    TrainTagger(TrainTaggerArgs),
    /// Tag a feature file and emit predicted spans
    Tag(TagArgs),
    /// Score predicted spans against gold (optionally compare two systems)
    Eval(EvalArgs),
    /// Nearest-neighbor queries over trained embeddings
    Query(QueryArgs),
    /// Sweep bin count and dimension over a train/dev split
    Sweep(SweepArgs),
}

#[derive(Args, Debug)]
struct TrainEmbArgs {
    /// CoNLL-U input file(s)
    #[arg(long, required = true, num_args = 1..)]
    conllu: Vec<PathBuf>,
    /// Embedding dimension d
    #[arg(long, default_value_t = 100)]
    dim: usize,
    /// Linear-context window (positions each side)
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Negative words per context pair
    #[arg(long = "neg-w", default_value_t = 5)]
    neg_w: usize,
    /// Negative paths per triple, one count per hop bucket
    #[arg(long = "neg-r", default_value = "5,3,2", value_parser = parse_counts)]
    neg_r: std::vec::Vec<usize>,
    /// Initial learning rate
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Worker threads (default: $PATHVEC_THREADS, else 1)
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Drop words seen fewer times than this
    #[arg(long = "min-count", default_value_t = 10)]
    min_count: u32,
    /// Longest dependency path to train on
    #[arg(long = "max-hops", default_value_t = 3)]
    max_hops: usize,
    /// Output path prefix for the model files
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DiscretizeArgs {
    #[arg(long, required = true, num_args = 1..)]
    conllu: Vec<PathBuf>,
    /// Model path prefix from train-emb
    #[arg(long)]
    emb: PathBuf,
    /// Number of discrete intervals per dimension
    #[arg(long, visible_alias = "l", default_value_t = 15)]
    bins: u32,
    /// Feature blocks to fit (subset of W,L,D)
    #[arg(long, default_value = "W,L,D")]
    sets: String,
    /// Linear-context window size (len)
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long = "max-hops", default_value_t = 3)]
    max_hops: usize,
    /// Output path prefix for the per-block tables
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct FeaturesArgs {
    #[arg(long, required = true, num_args = 1..)]
    conllu: Vec<PathBuf>,
    #[arg(long)]
    emb: PathBuf,
    /// Discretizer path prefix from `discretize`
    #[arg(long)]
    disc: PathBuf,
    #[arg(long, default_value = "W,L,D")]
    sets: String,
    /// Also emit the lexical baseline templates
    #[arg(long, default_value_t = false)]
    baseline: bool,
    /// Gold span file; when given, rows carry gold BIO labels
    #[arg(long)]
    spans: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long = "max-hops", default_value_t = 3)]
    max_hops: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TrainTaggerArgs {
    /// Labeled feature file
    #[arg(long)]
    feat: PathBuf,
    /// L1 regularization strength
    #[arg(long, default_value_t = 1.0)]
    l1: f64,
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct TagArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    feat: PathBuf,
    /// Treat an orphan I as outside instead of opening a span
    #[arg(long = "strict-bio", default_value_t = false)]
    strict_bio: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Second system's predictions for a paired significance test
    #[arg(long)]
    compare: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    emb: PathBuf,
    #[arg(long)]
    word: String,
    /// Optional dependency path, e.g. `amod:u` or `acomp:u/nsubj:d`
    #[arg(long)]
    path: Option<String>,
    #[arg(long, default_value_t = 6)]
    k: usize,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Optional TOML config supplying defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    conllu: Vec<PathBuf>,
    /// Gold span file for the labeled corpus
    #[arg(long)]
    spans: Option<PathBuf>,
    /// Bin-count grid, `start:end:step` or comma list
    #[arg(long)]
    l: Option<String>,
    /// Dimension grid, `start:end:step` or comma list
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long = "neg-w")]
    neg_w: Option<usize>,
    #[arg(long = "neg-r", value_parser = parse_counts)]
    neg_r: Option<std::vec::Vec<usize>>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long = "min-count")]
    min_count: Option<u32>,
    #[arg(long = "max-hops")]
    max_hops: Option<usize>,
    #[arg(long)]
    sets: Option<String>,
    #[arg(long)]
    baseline: bool,
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long = "tagger-epochs")]
    tagger_epochs: Option<usize>,
    #[arg(long = "tagger-lr")]
    tagger_lr: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Sweep defaults loadable from a TOML file; explicit flags win.
#[derive(Debug, Clone, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub conllu: Vec<PathBuf>,
    pub spans: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub l: Option<String>,
    pub d: Option<String>,
    pub window: Option<usize>,
    pub neg_w: Option<usize>,
    pub neg_r: Option<Vec<usize>>,
    pub lr: Option<f64>,
    pub epochs: Option<usize>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub min_count: Option<u32>,
    pub max_hops: Option<usize>,
    pub sets: Option<String>,
    pub baseline: Option<bool>,
    pub l1: Option<f64>,
    pub tagger_epochs: Option<usize>,
    pub tagger_lr: Option<f64>,
}

impl PipelineConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::format(path.display().to_string(), e.to_string()))?;
        toml::from_str(&text).map_err(|e| Error::format(path.display().to_string(), e.to_string()))
    }
}

fn parse_counts(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad count {p:?}")))
        .collect()
}

/// Parse a sweep grid: `start:end:step` (inclusive), a comma list, or a
/// single value.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("bad grid {s:?}, want start:end:step")));
        }
        let nums: Vec<u64> = parts
            .iter()
            .map(|p| p.parse().map_err(|_| Error::invalid(format!("bad grid bound {p:?}"))))
            .collect::<Result<_>>()?;
        let (start, end, step) = (nums[0], nums[1], nums[2]);
        if step == 0 || end < start {
            return Err(Error::invalid(format!("bad grid {s:?}")));
        }
        Ok((start..=end).step_by(step as usize).collect())
    } else {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| Error::invalid(format!("bad grid value {p:?}")))
            })
            .collect()
    }
}

fn default_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&t| t >= 1)
        .unwrap_or(1)
}

/// Entry point for `main`: parses, dispatches, prints errors, and maps
/// them to exit codes (2 for usage problems, 1 for runtime failures).
pub fn exec<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    match Cli::try_parse_from(argv.iter().cloned()) {
        Ok(cli) => match dispatch(cli, &provenance_of(&argv)) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("pathvec: {e}");
                1
            }
        },
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            code
        }
    }
}

/// Parse and run, surfacing failures as errors (used by tests and
/// library callers; usage problems become [`Error::Invalid`]).
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(argv.iter().cloned())
        .map_err(|e| Error::invalid(e.to_string()))?;
    dispatch(cli, &provenance_of(&argv))
}

fn provenance_of(argv: &[OsString]) -> String {
    let rendered: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    format!("pathvec {}", rendered.join(" "))
}

fn dispatch(cli: Cli, provenance: &str) -> Result<()> {
    match cli.command {
        Command::TrainEmb(args) => cmd_train_emb(args, provenance),
        Command::Discretize(args) => cmd_discretize(args, provenance),
        Command::Features(args) => cmd_features(args, provenance),
        Command::TrainTagger(args) => cmd_train_tagger(args, provenance),
        Command::Tag(args) => cmd_tag(args, provenance),
        Command::Eval(args) => cmd_eval(args, provenance),
        Command::Query(args) => cmd_query(args),
        Command::Sweep(args) => cmd_sweep(args, provenance),
    }
}

fn read_corpus(paths: &[PathBuf]) -> Result<Vec<ParsedSentence>> {
    let mut sentences = Vec::new();
    for path in paths {
        let outcome = parse_conllu(open_text(path)?)?;
        for issue in &outcome.issues {
            eprintln!("pathvec: {}: {issue} (sentence skipped)", path.display());
        }
        sentences.extend(outcome.sentences);
    }
    if sentences.is_empty() {
        return Err(Error::invalid("no parseable sentences in the input"));
    }
    Ok(sentences)
}

fn cmd_train_emb(args: TrainEmbArgs, provenance: &str) -> Result<()> {
    let sentences = read_corpus(&args.conllu)?;
    let mut vocab = build_vocab(&sentences, args.min_count)?;
    let config = TrainConfig {
        dim: args.dim,
        neg_words: args.neg_w,
        neg_paths: args.neg_r.clone(),
        initial_lr: args.lr,
        window: args.window,
        max_hops: args.max_hops,
        epochs: args.epochs,
        threads: args.threads.unwrap_or_else(default_threads),
        seed: args.seed,
    };
    let (params, stats) = train_with_stats(&sentences, &mut vocab, &config)?;
    write_model(&params, &vocab, &args.out, Some(provenance))?;
    println!(
        "trained {} words, {} relation labels over {} instances ({} sentences)",
        vocab.n_retained(),
        vocab.n_relations(),
        stats.instances,
        sentences.len()
    );
    if let (Some(first), Some(last)) =
        (stats.loss_checkpoints.first(), stats.loss_checkpoints.last())
    {
        println!("mean instance loss: {first:.4} -> {last:.4}");
    }
    Ok(())
}

fn feature_config(sets: &str, window: usize, max_hops: usize, baseline: bool) -> Result<FeatureConfig> {
    let config = FeatureConfig {
        sets: FeatureSets::parse(sets)?,
        ctx_len: window,
        max_hops,
        baseline,
    };
    config.validate()?;
    Ok(config)
}

fn cmd_discretize(args: DiscretizeArgs, provenance: &str) -> Result<()> {
    let (vocab, params) = load_model(&args.emb)?;
    let sentences = read_corpus(&args.conllu)?;
    let config = feature_config(&args.sets, args.window, args.max_hops, false)?;
    let tables = fit_block_tables(&sentences, &vocab, &params, &config, args.bins)?;
    tables.write(&args.out, Some(provenance))?;
    println!("fitted {} bins for sets {}", args.bins, config.sets);
    Ok(())
}

/// Gold labels for a sentence from a span file (absent ids mean no spans).
fn labels_from_spans(gold: &SpanSet, sentence: &ParsedSentence) -> Result<Vec<Label>> {
    match gold.spans(&sentence.id) {
        Some(spans) => spans_to_bio(spans, sentence.len()),
        None => Ok(vec![Label::O; sentence.len()]),
    }
}

fn cmd_features(args: FeaturesArgs, provenance: &str) -> Result<()> {
    let (vocab, params) = load_model(&args.emb)?;
    let sentences = read_corpus(&args.conllu)?;
    let config = feature_config(&args.sets, args.window, args.max_hops, args.baseline)?;
    let tables = BlockTables::read(&args.disc, config.sets)?;
    let gold = match &args.spans {
        Some(path) => Some(SpanSet::read_from(open_text(path)?)?),
        None => None,
    };
    let mut out = Vec::with_capacity(sentences.len());
    for sentence in &sentences {
        let labels = match &gold {
            Some(gold) => Some(labels_from_spans(gold, sentence)?),
            None => None,
        };
        let rows = assemble_features(
            sentence,
            labels.as_deref(),
            &vocab,
            &params,
            &tables,
            &config,
        )?;
        out.push((sentence.id.clone(), rows));
    }
    atomic_write(&args.out, |w| write_feature_file(w, &out, Some(provenance)))?;
    println!("wrote features for {} sentences to {}", out.len(), args.out.display());
    Ok(())
}

fn cmd_train_tagger(args: TrainTaggerArgs, provenance: &str) -> Result<()> {
    let sentences = read_feature_file(open_text(&args.feat)?)?;
    let rows: Vec<_> = sentences.into_iter().map(|(_, rows)| rows).collect();
    let config = TaggerConfig {
        l1_lambda: args.l1,
        epochs: args.epochs,
        initial_lr: args.lr,
        seed: args.seed,
    };
    let model = train_crf(&rows, &config)?;
    atomic_write(&args.out, |w| {
        write_provenance(w, Some(provenance))?;
        model.write_to(w)
    })?;
    println!(
        "trained tagger on {} sentences ({} features, final objective {:.4})",
        rows.len(),
        model.n_features(),
        model.final_objective
    );
    Ok(())
}

fn cmd_tag(args: TagArgs, provenance: &str) -> Result<()> {
    let model = CRFModel::read_from(open_text(&args.model)?)?;
    let sentences = read_feature_file(open_text(&args.feat)?)?;
    let mode = if args.strict_bio { BioMode::Strict } else { BioMode::Lenient };
    let mut spans = SpanSet::new();
    for (id, rows) in &sentences {
        spans.touch(id);
        let labels = viterbi_decode(&model, rows);
        for (start, end) in bio_to_spans(&labels, mode) {
            spans.insert(id, start, end)?;
        }
    }
    atomic_write(&args.out, |w| spans.write_to(w, Some(provenance)))?;
    println!(
        "tagged {} sentences, {} spans -> {}",
        sentences.len(),
        spans.total_spans(),
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs, provenance: &str) -> Result<()> {
    let pred = SpanSet::read_from(open_text(&args.pred)?)?;
    let gold = SpanSet::read_from(open_text(&args.gold)?)?;
    let scores = span_f1(&pred, &gold);
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    writeln!(w, "# {provenance}")?;
    match &args.compare {
        None => {
            writeln!(w, "precision\trecall\tf1")?;
            writeln!(w, "{}\t{}\t{}", scores.precision, scores.recall, scores.f1)?;
        }
        Some(path) => {
            let other = SpanSet::read_from(open_text(path)?)?;
            let scores_b = span_f1(&other, &gold);
            let p = approx_randomization(&pred, &other, &gold, args.iters, args.seed)?;
            writeln!(w, "precision\trecall\tf1\tf1_compare\tp_value")?;
            writeln!(
                w,
                "{}\t{}\t{}\t{}\t{}",
                scores.precision, scores.recall, scores.f1, scores_b.f1, p
            )?;
        }
    }
    Ok(())
}

fn cmd_query(args: QueryArgs) -> Result<()> {
    let (vocab, params) = load_model(&args.emb)?;
    let word = vocab
        .word_id(&args.word.to_lowercase())
        .ok_or_else(|| Error::invalid(format!("word {:?} is not in the vocabulary", args.word)))?;
    let query = match &args.path {
        None => Query::Word(word),
        Some(path) => Query::WordPath(word, DepPath::parse(path, &vocab)?),
    };
    let hits = nearest_neighbors(&query, args.k, &params)?;
    let stdout = std::io::stdout();
    let mut w = stdout.lock();
    for (id, cosine) in hits {
        writeln!(w, "{}\t{cosine:.6}", vocab.word(id))?;
    }
    Ok(())
}

struct SweepSettings {
    conllu: Vec<PathBuf>,
    spans: PathBuf,
    out: Option<PathBuf>,
    l_grid: Vec<u64>,
    d_grid: Vec<u64>,
    train: TrainConfig,
    min_count: u32,
    sets: String,
    baseline: bool,
    tagger: TaggerConfig,
}

fn sweep_settings(args: SweepArgs) -> Result<SweepSettings> {
    let file = match &args.config {
        Some(path) => PipelineConfig::from_file(path)?,
        None => PipelineConfig::default(),
    };
    let conllu = if args.conllu.is_empty() { file.conllu.clone() } else { args.conllu };
    if conllu.is_empty() {
        return Err(Error::invalid("sweep needs at least one --conllu input"));
    }
    let spans = args
        .spans
        .or(file.spans)
        .ok_or_else(|| Error::invalid("sweep needs --spans with gold aspect spans"))?;
    let l_grid = parse_grid(&args.l.or(file.l).unwrap_or_else(|| "15".to_string()))?;
    let d_grid = parse_grid(&args.d.or(file.d).unwrap_or_else(|| "100".to_string()))?;
    if l_grid.is_empty() || d_grid.is_empty() || l_grid.iter().any(|&l| l < 2) {
        return Err(Error::invalid("sweep grids must be non-empty (and bins at least 2)"));
    }
    let defaults = TrainConfig::default();
    let train = TrainConfig {
        dim: 0, // set per grid point
        neg_words: args.neg_w.or(file.neg_w).unwrap_or(defaults.neg_words),
        neg_paths: args.neg_r.or(file.neg_r).unwrap_or(defaults.neg_paths),
        initial_lr: args.lr.or(file.lr).unwrap_or(defaults.initial_lr),
        window: args.window.or(file.window).unwrap_or(defaults.window),
        max_hops: args.max_hops.or(file.max_hops).unwrap_or(defaults.max_hops),
        epochs: args.epochs.or(file.epochs).unwrap_or(defaults.epochs),
        threads: args.threads.or(file.threads).unwrap_or_else(default_threads),
        seed: args.seed.or(file.seed).unwrap_or(defaults.seed),
    };
    let tagger_defaults = TaggerConfig::default();
    let tagger = TaggerConfig {
        l1_lambda: args.l1.or(file.l1).unwrap_or(tagger_defaults.l1_lambda),
        epochs: args
            .tagger_epochs
            .or(file.tagger_epochs)
            .unwrap_or(tagger_defaults.epochs),
        initial_lr: args.tagger_lr.or(file.tagger_lr).unwrap_or(tagger_defaults.initial_lr),
        seed: train.seed,
    };
    Ok(SweepSettings {
        conllu,
        spans,
        out: args.out.or(file.out),
        l_grid,
        d_grid,
        train,
        min_count: args.min_count.or(file.min_count).unwrap_or(10),
        sets: args.sets.or(file.sets).unwrap_or_else(|| "W,L,D".to_string()),
        baseline: args.baseline || file.baseline.unwrap_or(false),
        tagger,
    })
}

/// Seeded 80/20 sentence split: first 80% of a shuffled order trains.
fn split_corpus(
    sentences: Vec<ParsedSentence>,
    seed: u64,
) -> (Vec<ParsedSentence>, Vec<ParsedSentence>) {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let cut = (sentences.len() * 4).div_ceil(5);
    let mut map: BTreeMap<usize, bool> = BTreeMap::new();
    for (rank, &idx) in order.iter().enumerate() {
        map.insert(idx, rank < cut);
    }
    let mut train = Vec::new();
    let mut dev = Vec::new();
    for (idx, sentence) in sentences.into_iter().enumerate() {
        if map[&idx] {
            train.push(sentence);
        } else {
            dev.push(sentence);
        }
    }
    (train, dev)
}

/// One full train/feature/tag/score pass at a fixed (bins, dim).
#[allow(clippy::too_many_arguments)]
fn sweep_point(
    train_sents: &[ParsedSentence],
    dev_sents: &[ParsedSentence],
    gold: &SpanSet,
    params: &ModelParams,
    vocab: &Vocabulary,
    config: &FeatureConfig,
    bins: u32,
    tagger: &TaggerConfig,
) -> Result<f64> {
    let tables = fit_block_tables(train_sents, vocab, params, config, bins)?;
    let mut train_rows = Vec::new();
    for sentence in train_sents {
        let labels = labels_from_spans(gold, sentence)?;
        train_rows.push(assemble_features(sentence, Some(&labels), vocab, params, &tables, config)?);
    }
    let model = train_crf(&train_rows, tagger)?;
    let mut pred = SpanSet::new();
    let mut dev_gold = SpanSet::new();
    for sentence in dev_sents {
        pred.touch(&sentence.id);
        dev_gold.touch(&sentence.id);
        if let Some(spans) = gold.spans(&sentence.id) {
            for &(a, b) in spans {
                dev_gold.insert(&sentence.id, a, b)?;
            }
        }
        let rows = assemble_features(sentence, None, vocab, params, &tables, config)?;
        let labels = viterbi_decode(&model, &rows);
        for (a, b) in bio_to_spans(&labels, BioMode::Lenient) {
            pred.insert(&sentence.id, a, b)?;
        }
    }
    Ok(span_f1(&pred, &dev_gold).f1)
}

fn cmd_sweep(args: SweepArgs, provenance: &str) -> Result<()> {
    let settings = sweep_settings(args)?;
    let sentences = read_corpus(&settings.conllu)?;
    let gold = SpanSet::read_from(open_text(&settings.spans)?)?;
    let (train_sents, dev_sents) = split_corpus(sentences, settings.train.seed);
    if dev_sents.is_empty() {
        return Err(Error::invalid("corpus too small for an 80/20 split"));
    }
    let base_config = feature_config(
        &settings.sets,
        settings.train.window,
        settings.train.max_hops,
        settings.baseline,
    )?;
    let mut lines = vec!["l\td\tf1".to_string()];
    for &d in &settings.d_grid {
        let mut vocab = build_vocab(&train_sents, settings.min_count)?;
        let train_config = TrainConfig { dim: d as usize, ..settings.train.clone() };
        let (params, _) = train_with_stats(&train_sents, &mut vocab, &train_config)?;
        for &l in &settings.l_grid {
            let f1 = sweep_point(
                &train_sents,
                &dev_sents,
                &gold,
                &params,
                &vocab,
                &base_config,
                l as u32,
                &settings.tagger,
            )?;
            lines.push(format!("{l}\t{d}\t{f1}"));
        }
    }
    let report = lines.join("\n");
    println!("{report}");
    if let Some(out) = &settings.out {
        atomic_write(out, |w| {
            writeln!(w, "# {provenance}")?;
            writeln!(w, "{report}")?;
            Ok(())
        })?;
    }
    Ok(())
}
