//! Exact-span scoring and paired significance testing.
//!
//! Spans are 1-based inclusive token ranges. Scoring is micro-averaged
//! exact match: a predicted span counts only if the same sentence has a
//! gold span with identical boundaries. The significance test randomly
//! swaps the two systems' predictions per sentence and counts how often
//! the swapped F1 gap reaches the observed one.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::{is_comment, write_provenance};
use crate::tagger::Label;

/// Predicted or gold spans per sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanSet {
    map: BTreeMap<String, BTreeSet<(usize, usize)>>,
}

impl SpanSet {
    pub fn new() -> Self {
        SpanSet::default()
    }

    /// Register a sentence (possibly with no spans) so it participates in
    /// the universe.
    pub fn touch(&mut self, sentence: &str) {
        self.map.entry(sentence.to_string()).or_default();
    }

    pub fn insert(&mut self, sentence: &str, start: usize, end: usize) -> Result<()> {
        if start < 1 || end < start {
            return Err(Error::invalid(format!("bad span ({start}, {end})")));
        }
        self.map
            .entry(sentence.to_string())
            .or_default()
            .insert((start, end));
        Ok(())
    }

    pub fn sentences(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn spans(&self, sentence: &str) -> Option<&BTreeSet<(usize, usize)>> {
        self.map.get(sentence)
    }

    pub fn total_spans(&self) -> usize {
        self.map.values().map(BTreeSet::len).sum()
    }

    /// Build from labeled sentences.
    pub fn from_labels<'a, I>(labeled: I, mode: BioMode) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a [Label])>,
    {
        let mut set = SpanSet::new();
        for (id, labels) in labeled {
            set.touch(id);
            for (start, end) in bio_to_spans(labels, mode) {
                set.insert(id, start, end).expect("decoded spans are valid");
            }
        }
        set
    }

    /// One `sentence_id<TAB>start<TAB>end` line per span.
    pub fn write_to(&self, w: &mut dyn Write, provenance: Option<&str>) -> Result<()> {
        write_provenance(w, provenance)?;
        for (id, spans) in &self.map {
            if spans.is_empty() {
                // Keep empty sentences in the universe.
                writeln!(w, "{id}\t-\t-")?;
            }
            for (start, end) in spans {
                writeln!(w, "{id}\t{start}\t{end}")?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut set = SpanSet::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || is_comment(&line) {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected 3 tab-separated fields, found {}", parts.len()),
                });
            }
            if parts[1] == "-" && parts[2] == "-" {
                set.touch(parts[0]);
                continue;
            }
            let parse = |s: &str| -> Result<usize> {
                s.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad span bound {s:?}"),
                })
            };
            set.insert(parts[0], parse(parts[1])?, parse(parts[2])?)
                .map_err(|e| Error::Parse { line: lineno + 1, msg: e.to_string() })?;
        }
        Ok(set)
    }
}

/// How to treat an I with no live span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BioMode {
    /// An orphan I starts a new span.
    Lenient,
    /// An orphan I is ignored.
    Strict,
}

/// Decode a BIO sequence into 1-based inclusive spans.
pub fn bio_to_spans(labels: &[Label], mode: BioMode) -> BTreeSet<(usize, usize)> {
    let mut spans = BTreeSet::new();
    let mut open: Option<usize> = None;
    for (i, &label) in labels.iter().enumerate() {
        let pos = i + 1;
        match label {
            Label::B => {
                if let Some(start) = open.take() {
                    spans.insert((start, pos - 1));
                }
                open = Some(pos);
            }
            Label::I => {
                if open.is_none() && mode == BioMode::Lenient {
                    open = Some(pos);
                }
                // Inside a live span: extend; strict orphan: ignore.
            }
            Label::O => {
                if let Some(start) = open.take() {
                    spans.insert((start, pos - 1));
                }
            }
        }
    }
    if let Some(start) = open {
        spans.insert((start, labels.len()));
    }
    spans
}

/// Encode spans of one sentence back into a BIO sequence.
pub fn spans_to_bio(spans: &BTreeSet<(usize, usize)>, len: usize) -> Result<Vec<Label>> {
    let mut labels = vec![Label::O; len];
    for &(start, end) in spans {
        if start < 1 || end < start || end > len {
            return Err(Error::invalid(format!(
                "span ({start}, {end}) outside a sentence of {len} tokens"
            )));
        }
        if labels[start - 1..end].iter().any(|&l| l != Label::O) {
            return Err(Error::invalid(format!("overlapping span ({start}, {end})")));
        }
        labels[start - 1] = Label::B;
        for l in &mut labels[start..end] {
            *l = Label::I;
        }
    }
    Ok(labels)
}

/// Micro precision/recall/F1 over exact span matches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn counts(pred: &SpanSet, gold: &SpanSet) -> (usize, usize, usize) {
    let mut tp = 0usize;
    for (id, spans) in &pred.map {
        if let Some(gold_spans) = gold.spans(id) {
            tp += spans.intersection(gold_spans).count();
        }
    }
    (tp, pred.total_spans(), gold.total_spans())
}

fn scores_from_counts(tp: usize, n_pred: usize, n_gold: usize) -> Scores {
    let ratio = |num: usize, den: usize| -> f64 {
        if den == 0 {
            // Empty denominator: perfect only when the other side is empty too.
            if n_pred == 0 && n_gold == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            num as f64 / den as f64
        }
    };
    let precision = ratio(tp, n_pred);
    let recall = ratio(tp, n_gold);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Scores { precision, recall, f1 }
}

/// Exact-match span F1 of predictions against gold.
pub fn span_f1(pred: &SpanSet, gold: &SpanSet) -> Scores {
    let (tp, n_pred, n_gold) = counts(pred, gold);
    scores_from_counts(tp, n_pred, n_gold)
}

/// Per-sentence counts keyed over the union universe, for fast swapped
/// rescoring.
struct PairedCounts {
    /// (tp_a, n_a, tp_b, n_b) per sentence; gold count is global.
    rows: Vec<(usize, usize, usize, usize)>,
    n_gold: usize,
}

fn paired_counts(pred_a: &SpanSet, pred_b: &SpanSet, gold: &SpanSet) -> PairedCounts {
    let mut ids: BTreeSet<&str> = BTreeSet::new();
    ids.extend(pred_a.sentences());
    ids.extend(pred_b.sentences());
    ids.extend(gold.sentences());
    let empty = BTreeSet::new();
    let rows = ids
        .iter()
        .map(|id| {
            let g = gold.spans(id).unwrap_or(&empty);
            let a = pred_a.spans(id).unwrap_or(&empty);
            let b = pred_b.spans(id).unwrap_or(&empty);
            (
                a.intersection(g).count(),
                a.len(),
                b.intersection(g).count(),
                b.len(),
            )
        })
        .collect();
    PairedCounts { rows, n_gold: gold.total_spans() }
}

impl PairedCounts {
    /// |F1(a') - F1(b')| where `swap[s]` exchanges the systems on sentence s.
    fn gap(&self, swap: impl Fn(usize) -> bool) -> f64 {
        let (mut tp_a, mut n_a, mut tp_b, mut n_b) = (0usize, 0usize, 0usize, 0usize);
        for (s, &(ta, na, tb, nb)) in self.rows.iter().enumerate() {
            if swap(s) {
                tp_a += tb;
                n_a += nb;
                tp_b += ta;
                n_b += na;
            } else {
                tp_a += ta;
                n_a += na;
                tp_b += tb;
                n_b += nb;
            }
        }
        let fa = scores_from_counts(tp_a, n_a, self.n_gold).f1;
        let fb = scores_from_counts(tp_b, n_b, self.n_gold).f1;
        (fa - fb).abs()
    }

    fn len(&self) -> usize {
        self.rows.len()
    }
}

/// Approximate-randomization p-value for the F1 difference of two systems.
///
/// Each iteration swaps the systems' predictions per sentence with
/// probability 1/2; the p-value is `(hits + 1) / (iterations + 1)` where a
/// hit is a swapped gap at least as large as the observed one.
pub fn approx_randomization(
    pred_a: &SpanSet,
    pred_b: &SpanSet,
    gold: &SpanSet,
    iterations: usize,
    seed: u64,
) -> Result<f64> {
    if iterations < 100 {
        return Err(Error::invalid("need at least 100 randomization iterations"));
    }
    let paired = paired_counts(pred_a, pred_b, gold);
    let observed = paired.gap(|_| false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..iterations {
        let flips: Vec<bool> = (0..paired.len()).map(|_| rng.random_bool(0.5)).collect();
        if paired.gap(|s| flips[s]) >= observed {
            hits += 1;
        }
    }
    Ok((hits + 1) as f64 / (iterations + 1) as f64)
}

/// Exact version of [`approx_randomization`] over all 2^n swap patterns;
/// only feasible for small sentence universes.
pub fn exhaustive_randomization(
    pred_a: &SpanSet,
    pred_b: &SpanSet,
    gold: &SpanSet,
) -> Result<f64> {
    let paired = paired_counts(pred_a, pred_b, gold);
    let n = paired.len();
    if n > 20 {
        return Err(Error::invalid("exhaustive enumeration needs at most 20 sentences"));
    }
    let observed = paired.gap(|_| false);
    let total = 1usize << n;
    let mut hits = 0usize;
    for pattern in 0..total {
        if paired.gap(|s| pattern >> s & 1 == 1) >= observed {
            hits += 1;
        }
    }
    Ok(hits as f64 / total as f64)
}
