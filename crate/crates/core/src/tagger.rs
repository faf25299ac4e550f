//! Linear-chain CRF over BIO labels.
//!
//! Potentials are emission weights per (feature string, label) plus a
//! 3x3 transition table; there are no start/stop potentials. Training
//! maximizes the conditional log-likelihood minus an L1 penalty by SGD
//! with cumulative-penalty lazy truncation. Decoding is Viterbi with
//! ties broken toward the lexicographically smallest label sequence
//! (B < I < O).

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::ParsedSentence;
use crate::error::{Error, Result};
use crate::features::FeatureRow;
use crate::io::is_comment;

/// BIO label of one token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    B,
    I,
    O,
}

pub const N_LABELS: usize = 3;

impl Label {
    pub const ALL: [Label; N_LABELS] = [Label::B, Label::I, Label::O];

    pub fn index(self) -> usize {
        match self {
            Label::B => 0,
            Label::I => 1,
            Label::O => 2,
        }
    }

    pub fn from_index(i: usize) -> Label {
        Self::ALL[i]
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::B => "B",
            Label::I => "I",
            Label::O => "O",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        match s {
            "B" => Some(Label::B),
            "I" => Some(Label::I),
            "O" => Some(Label::O),
            _ => None,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The trained tagger: feature-conditional emission weights and label
/// transition weights.
#[derive(Debug, Clone)]
pub struct CRFModel {
    feature_ids: HashMap<String, usize>,
    feature_names: Vec<String>,
    emission: Vec<[f64; N_LABELS]>,
    transition: [[f64; N_LABELS]; N_LABELS],
    pub l1_lambda: f64,
    /// Final training objective (mean per-sentence log-likelihood minus
    /// the L1 penalty); 0 for a hand-built or loaded model.
    pub final_objective: f64,
}

impl CRFModel {
    /// Build directly from weights (used by the loader and by tests).
    pub fn from_weights(
        features: Vec<(String, [f64; N_LABELS])>,
        transition: [[f64; N_LABELS]; N_LABELS],
        l1_lambda: f64,
    ) -> Self {
        let mut feature_ids = HashMap::new();
        let mut feature_names = Vec::new();
        let mut emission = Vec::new();
        for (name, weights) in features {
            feature_ids.insert(name.clone(), feature_names.len());
            feature_names.push(name);
            emission.push(weights);
        }
        CRFModel {
            feature_ids,
            feature_names,
            emission,
            transition,
            l1_lambda,
            final_objective: 0.0,
        }
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn transition(&self, from: Label, to: Label) -> f64 {
        self.transition[from.index()][to.index()]
    }

    pub fn emission_weight(&self, feature: &str, label: Label) -> f64 {
        self.feature_ids
            .get(feature)
            .map_or(0.0, |&id| self.emission[id][label.index()])
    }

    /// Per-label emission scores of every row; unknown features score 0.
    fn node_scores(&self, rows: &[FeatureRow]) -> Vec<[f64; N_LABELS]> {
        rows.iter()
            .map(|row| {
                let mut scores = [0.0; N_LABELS];
                for f in &row.features {
                    if let Some(&id) = self.feature_ids.get(f) {
                        for (s, w) in scores.iter_mut().zip(&self.emission[id]) {
                            *s += w;
                        }
                    }
                }
                scores
            })
            .collect()
    }

    /// Serialize: a `#TRANSITIONS` sentinel with nine `from<TAB>to<TAB>w`
    /// lines, then one `feature<TAB>label<TAB>w` line per nonzero
    /// emission weight.
    pub fn write_to(&self, w: &mut dyn Write) -> Result<()> {
        writeln!(w, "#TRANSITIONS")?;
        for from in Label::ALL {
            for to in Label::ALL {
                writeln!(w, "{from}\t{to}\t{}", self.transition(from, to))?;
            }
        }
        for (name, weights) in self.feature_names.iter().zip(&self.emission) {
            for label in Label::ALL {
                let weight = weights[label.index()];
                if weight != 0.0 {
                    writeln!(w, "{name}\t{label}\t{weight}")?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut transition = [[0.0; N_LABELS]; N_LABELS];
        let mut features: Vec<(String, [f64; N_LABELS])> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut saw_sentinel = false;
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || is_comment(&line) {
                continue;
            }
            if line == "#TRANSITIONS" {
                saw_sentinel = true;
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected 3 tab-separated fields, found {}", parts.len()),
                });
            }
            let label = Label::parse(parts[1]).ok_or_else(|| Error::Parse {
                line: lineno + 1,
                msg: format!("bad label {:?}", parts[1]),
            })?;
            let weight: f64 = parts[2].parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                msg: format!("bad weight {:?}", parts[2]),
            })?;
            match Label::parse(parts[0]) {
                Some(from) if saw_sentinel && features.is_empty() && !parts[0].contains('=') => {
                    transition[from.index()][label.index()] = weight;
                }
                _ => {
                    let id = *index.entry(parts[0].to_string()).or_insert_with(|| {
                        features.push((parts[0].to_string(), [0.0; N_LABELS]));
                        features.len() - 1
                    });
                    features[id].1[label.index()] = weight;
                }
            }
        }
        if !saw_sentinel {
            return Err(Error::invalid("model file is missing the #TRANSITIONS block"));
        }
        Ok(CRFModel::from_weights(features, transition, 0.0))
    }
}

fn log_sum_exp(scores: &[f64; N_LABELS]) -> f64 {
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + scores.iter().map(|&s| (s - m).exp()).sum::<f64>().ln()
}

/// Forward-backward quantities of one sentence.
#[derive(Debug, Clone)]
pub struct ForwardBackward {
    pub log_partition: f64,
    /// Per-position label marginals; each row sums to 1.
    pub node_marginals: Vec<[f64; N_LABELS]>,
    /// Marginals of adjacent label pairs, one entry per position pair.
    pub pair_marginals: Vec<[[f64; N_LABELS]; N_LABELS]>,
}

/// Log-sum-exp stabilized forward-backward over one sentence.
pub fn forward_backward(model: &CRFModel, rows: &[FeatureRow]) -> ForwardBackward {
    forward_backward_scores(&model.node_scores(rows), &model.transition)
}

/// Forward-backward over precomputed per-position emission scores.
fn forward_backward_scores(
    emit: &[[f64; N_LABELS]],
    transition: &[[f64; N_LABELS]; N_LABELS],
) -> ForwardBackward {
    let n = emit.len();
    if n == 0 {
        return ForwardBackward {
            log_partition: 0.0,
            node_marginals: Vec::new(),
            pair_marginals: Vec::new(),
        };
    }
    let mut alpha = vec![[0.0; N_LABELS]; n];
    alpha[0] = emit[0];
    for t in 1..n {
        for y in 0..N_LABELS {
            let mut incoming = [0.0; N_LABELS];
            for (prev, inc) in incoming.iter_mut().enumerate() {
                *inc = alpha[t - 1][prev] + transition[prev][y];
            }
            alpha[t][y] = emit[t][y] + log_sum_exp(&incoming);
        }
    }
    let mut beta = vec![[0.0; N_LABELS]; n];
    for t in (0..n - 1).rev() {
        for y in 0..N_LABELS {
            let mut outgoing = [0.0; N_LABELS];
            for (next, out) in outgoing.iter_mut().enumerate() {
                *out = transition[y][next] + emit[t + 1][next] + beta[t + 1][next];
            }
            beta[t][y] = log_sum_exp(&outgoing);
        }
    }
    let log_partition = log_sum_exp(&alpha[n - 1]);
    let node_marginals = (0..n)
        .map(|t| {
            let mut m = [0.0; N_LABELS];
            for y in 0..N_LABELS {
                m[y] = (alpha[t][y] + beta[t][y] - log_partition).exp();
            }
            m
        })
        .collect();
    let pair_marginals = (0..n - 1)
        .map(|t| {
            let mut m = [[0.0; N_LABELS]; N_LABELS];
            for y in 0..N_LABELS {
                for y2 in 0..N_LABELS {
                    m[y][y2] = (alpha[t][y]
                        + transition[y][y2]
                        + emit[t + 1][y2]
                        + beta[t + 1][y2]
                        - log_partition)
                        .exp();
                }
            }
            m
        })
        .collect();
    ForwardBackward {
        log_partition,
        node_marginals,
        pair_marginals,
    }
}

/// MAP label sequence of one sentence.
///
/// Among all maximizing sequences, returns the lexicographically smallest
/// under B < I < O; the dynamic program runs from the end so each position
/// can greedily take the smallest label that still attains the optimum.
pub fn viterbi_decode(model: &CRFModel, rows: &[FeatureRow]) -> Vec<Label> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let emit = model.node_scores(rows);
    // best[t][y]: best score of the suffix starting at t given label y.
    let mut best = vec![[0.0; N_LABELS]; n];
    best[n - 1] = emit[n - 1];
    for t in (0..n - 1).rev() {
        for y in 0..N_LABELS {
            let follow = (0..N_LABELS)
                .map(|y2| model.transition[y][y2] + best[t + 1][y2])
                .fold(f64::NEG_INFINITY, f64::max);
            best[t][y] = emit[t][y] + follow;
        }
    }
    let argmax_first = |scores: &[f64; N_LABELS]| -> usize {
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        scores.iter().position(|&s| s == top).expect("non-empty")
    };
    let mut labels = Vec::with_capacity(n);
    let mut y = argmax_first(&best[0]);
    labels.push(Label::from_index(y));
    for t in 1..n {
        let mut scores = [0.0; N_LABELS];
        for (y2, s) in scores.iter_mut().enumerate() {
            *s = model.transition[y][y2] + best[t][y2];
        }
        y = argmax_first(&scores);
        labels.push(Label::from_index(y));
    }
    labels
}

/// Training settings for the tagger.
#[derive(Debug, Clone)]
pub struct TaggerConfig {
    pub l1_lambda: f64,
    pub epochs: usize,
    pub initial_lr: f64,
    pub seed: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            l1_lambda: 1.0,
            epochs: 30,
            initial_lr: 0.1,
            seed: 1,
        }
    }
}

/// Train by SGD on the L1-penalized conditional log-likelihood.
///
/// Every row must carry a gold label. Sentences are shuffled each epoch
/// with a seeded generator; the learning rate decays as
/// `lr / (1 + t/N)` over updates. The L1 penalty uses cumulative lazy
/// truncation, so untouched weights stay exactly zero.
pub fn train_crf(sentences: &[Vec<FeatureRow>], config: &TaggerConfig) -> Result<CRFModel> {
    if sentences.is_empty() || sentences.iter().all(Vec::is_empty) {
        return Err(Error::invalid("empty training set"));
    }
    if config.epochs < 1 || !(config.initial_lr > 0.0) || config.l1_lambda < 0.0 {
        return Err(Error::invalid("bad tagger training configuration"));
    }
    // Index features and check labels up front.
    let mut feature_ids: HashMap<String, usize> = HashMap::new();
    let mut feature_names: Vec<String> = Vec::new();
    let mut indexed: Vec<(Vec<Vec<usize>>, Vec<Label>)> = Vec::new();
    let mut row_number = 0usize;
    for rows in sentences {
        let mut ids = Vec::with_capacity(rows.len());
        let mut labels = Vec::with_capacity(rows.len());
        for row in rows {
            row_number += 1;
            let label = row.label.ok_or_else(|| {
                Error::invalid(format!("row {row_number}: missing gold label"))
            })?;
            labels.push(label);
            ids.push(
                row.features
                    .iter()
                    .map(|f| {
                        *feature_ids.entry(f.clone()).or_insert_with(|| {
                            feature_names.push(f.clone());
                            feature_names.len() - 1
                        })
                    })
                    .collect::<Vec<usize>>(),
            );
        }
        indexed.push((ids, labels));
    }

    let n_feats = feature_names.len();
    let mut emission = vec![[0.0; N_LABELS]; n_feats];
    let mut transition = [[0.0; N_LABELS]; N_LABELS];
    // Cumulative penalties already applied, per weight.
    let mut emission_applied = vec![[0.0; N_LABELS]; n_feats];
    let mut transition_applied = [[0.0; N_LABELS]; N_LABELS];
    let mut cumulative = 0.0; // u_k: total penalty rate so far
    let n = sentences.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..indexed.len()).collect();
    let mut step = 0u64;

    let penalize = |w: &mut f64, applied: &mut f64, u: f64| {
        let z = *w;
        if *w > 0.0 {
            *w = (*w - (u + *applied)).max(0.0);
        } else if *w < 0.0 {
            *w = (*w + (u - *applied)).min(0.0);
        }
        *applied += *w - z;
    };

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &s in &order {
            let (ids, labels) = &indexed[s];
            if ids.is_empty() {
                continue;
            }
            let lr = config.initial_lr / (1.0 + step as f64 / (n * config.epochs as f64));
            step += 1;
            cumulative += lr * config.l1_lambda / n;
            let emit: Vec<[f64; N_LABELS]> = ids
                .iter()
                .map(|row_ids| {
                    let mut scores = [0.0; N_LABELS];
                    for &fid in row_ids {
                        for (s, w) in scores.iter_mut().zip(&emission[fid]) {
                            *s += w;
                        }
                    }
                    scores
                })
                .collect();
            let fb = forward_backward_scores(&emit, &transition);
            // Gradient ascent on the log-likelihood: observed minus expected.
            for (t, row_ids) in ids.iter().enumerate() {
                let gold = labels[t].index();
                for &fid in row_ids {
                    for y in 0..N_LABELS {
                        let observed = if y == gold { 1.0 } else { 0.0 };
                        emission[fid][y] += lr * (observed - fb.node_marginals[t][y]);
                    }
                }
            }
            for t in 0..ids.len().saturating_sub(1) {
                let (from, to) = (labels[t].index(), labels[t + 1].index());
                for y in 0..N_LABELS {
                    for y2 in 0..N_LABELS {
                        let observed = if y == from && y2 == to { 1.0 } else { 0.0 };
                        transition[y][y2] += lr * (observed - fb.pair_marginals[t][y][y2]);
                    }
                }
            }
            // Lazy L1 on everything this update touched.
            for row_ids in ids {
                for &fid in row_ids {
                    for y in 0..N_LABELS {
                        penalize(&mut emission[fid][y], &mut emission_applied[fid][y], cumulative);
                    }
                }
            }
            for y in 0..N_LABELS {
                for y2 in 0..N_LABELS {
                    penalize(
                        &mut transition[y][y2],
                        &mut transition_applied[y][y2],
                        cumulative,
                    );
                }
            }
        }
    }

    let mut model = CRFModel {
        feature_ids,
        feature_names,
        emission,
        transition,
        l1_lambda: config.l1_lambda,
        final_objective: 0.0,
    };
    model.final_objective = objective(&model, sentences)?;
    Ok(model)
}

/// Evaluate the penalized objective of a model on labeled rows (used to
/// monitor training).
pub fn objective(model: &CRFModel, sentences: &[Vec<FeatureRow>]) -> Result<f64> {
    let mut ll = 0.0;
    for rows in sentences {
        if rows.is_empty() {
            continue;
        }
        let fb = forward_backward(model, rows);
        let emit = model.node_scores(rows);
        let mut gold = 0.0;
        for (t, row) in rows.iter().enumerate() {
            let y = row
                .label
                .ok_or_else(|| Error::invalid("objective needs labeled rows"))?
                .index();
            gold += emit[t][y];
            if t > 0 {
                let prev = rows[t - 1].label.expect("checked").index();
                gold += model.transition[prev][y];
            }
        }
        ll += gold - fb.log_partition;
    }
    let l1: f64 = model
        .emission
        .iter()
        .flatten()
        .chain(model.transition.iter().flatten())
        .map(|w| w.abs())
        .sum();
    Ok(ll / sentences.len() as f64 - model.l1_lambda * l1 / sentences.len() as f64)
}

const BOUNDARY_LEFT: &str = "<s>";
const BOUNDARY_RIGHT: &str = "</s>";

/// Minimal suffix-stripping stemmer for the lexical templates: removes
/// one of -ing, -ed, -es, -s with length guards.
pub fn stem(word: &str) -> &str {
    let n = word.chars().count();
    if n >= 6 {
        if let Some(s) = word.strip_suffix("ing") {
            return s;
        }
    }
    if n >= 5 {
        if let Some(s) = word.strip_suffix("ed") {
            return s;
        }
        if let Some(s) = word.strip_suffix("es") {
            // Only where -es marks e-insertion (dishes, boxes, glasses).
            if s.ends_with('s') || s.ends_with('x') || s.ends_with('z')
                || s.ends_with("ch") || s.ends_with("sh")
            {
                return s;
            }
        }
    }
    if n >= 4 && !word.ends_with("ss") {
        if let Some(s) = word.strip_suffix('s') {
            return s;
        }
    }
    word
}

fn prefix_chars(word: &str, len: usize) -> String {
    word.chars().take(len).collect()
}

fn suffix_chars(word: &str, len: usize) -> String {
    let n = word.chars().count();
    word.chars().skip(n.saturating_sub(len)).collect()
}

/// Lexical baseline templates, one feature list per token: words and POS
/// tags at offsets -2..2, their prefixes and suffixes of lengths 1-4,
/// their stems, and a capitalization flag. Offsets past the sentence
/// emit a boundary symbol.
pub fn baseline_templates(sentence: &ParsedSentence) -> Vec<Vec<String>> {
    let n = sentence.len();
    (0..n)
        .map(|i| {
            let mut features = Vec::with_capacity(5 * 14);
            for k in -2i32..=2 {
                let pos = i as i64 + i64::from(k);
                if pos < 0 || pos as usize >= n {
                    let b = if pos < 0 { BOUNDARY_LEFT } else { BOUNDARY_RIGHT };
                    features.push(format!("w[{k}]={b}"));
                    features.push(format!("t[{k}]={b}"));
                    for len in 1..=4 {
                        features.push(format!("pre[{k},{len}]={b}"));
                        features.push(format!("suf[{k},{len}]={b}"));
                    }
                    features.push(format!("stem[{k}]={b}"));
                    features.push(format!("cap[{k}]={b}"));
                    continue;
                }
                let tok = &sentence.tokens[pos as usize];
                features.push(format!("w[{k}]={}", tok.form));
                features.push(format!("t[{k}]={}", tok.pos));
                for len in 1..=4 {
                    features.push(format!("pre[{k},{len}]={}", prefix_chars(&tok.form, len)));
                    features.push(format!("suf[{k},{len}]={}", suffix_chars(&tok.form, len)));
                }
                features.push(format!("stem[{k}]={}", stem(&tok.form)));
                features.push(format!("cap[{k}]={}", u8::from(tok.capitalized)));
            }
            features
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn row(features: &[&str], label: Option<Label>) -> FeatureRow {
        FeatureRow {
            index: 0,
            features: features.iter().map(|s| s.to_string()).collect(),
            label,
        }
    }

    /// Model with one distinct feature per position so every emission is
    /// independently random.
    fn random_model_and_rows<R: Rng>(rng: &mut R, n: usize) -> (CRFModel, Vec<FeatureRow>) {
        let features: Vec<(String, [f64; 3])> = (0..n)
            .map(|t| {
                (
                    format!("pos{t}"),
                    [
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-2.0..2.0),
                    ],
                )
            })
            .collect();
        let mut transition = [[0.0; 3]; 3];
        for row in &mut transition {
            for w in row.iter_mut() {
                *w = rng.random_range(-1.5..1.5);
            }
        }
        let rows: Vec<FeatureRow> = (0..n)
            .map(|t| row(&[format!("pos{t}").as_str()], None))
            .collect();
        (CRFModel::from_weights(features, transition, 0.0), rows)
    }

    /// Brute force over all 3^n label sequences.
    fn enumerate_scores(model: &CRFModel, rows: &[FeatureRow]) -> Vec<(Vec<Label>, f64)> {
        let n = rows.len();
        let emit = model.node_scores(rows);
        let mut out = Vec::new();
        let total = 3usize.pow(n as u32);
        for mut code in 0..total {
            let mut labels = Vec::with_capacity(n);
            for _ in 0..n {
                labels.push(Label::from_index(code % 3));
                code /= 3;
            }
            let mut score = 0.0;
            for (t, &y) in labels.iter().enumerate() {
                score += emit[t][y.index()];
                if t > 0 {
                    score += model.transition[labels[t - 1].index()][y.index()];
                }
            }
            out.push((labels, score));
        }
        out
    }

    fn brute_force_argmax(model: &CRFModel, rows: &[FeatureRow]) -> Vec<Label> {
        let scored = enumerate_scores(model, rows);
        let top = scored
            .iter()
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        scored
            .into_iter()
            .filter(|(_, s)| *s == top)
            .map(|(labels, _)| labels)
            .min()
            .expect("non-empty")
    }

    #[test]
    fn viterbi_matches_enumeration_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = rng.random_range(1..=6);
            let (model, rows) = random_model_and_rows(&mut rng, n);
            assert_eq!(viterbi_decode(&model, &rows), brute_force_argmax(&model, &rows));
        }
    }

    #[test]
    fn marginals_match_enumeration_on_random_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..100 {
            let n = rng.random_range(1..=6);
            let (model, rows) = random_model_and_rows(&mut rng, n);
            let fb = forward_backward(&model, &rows);
            let scored = enumerate_scores(&model, &rows);
            let log_z = {
                let m = scored.iter().map(|(_, s)| *s).fold(f64::NEG_INFINITY, f64::max);
                m + scored.iter().map(|(_, s)| (s - m).exp()).sum::<f64>().ln()
            };
            assert!((fb.log_partition - log_z).abs() < 1e-9, "partition");
            for t in 0..n {
                let mut expect = [0.0; 3];
                for (labels, s) in &scored {
                    expect[labels[t].index()] += (s - log_z).exp();
                }
                for y in 0..3 {
                    assert!((fb.node_marginals[t][y] - expect[y]).abs() < 1e-9);
                }
                let sum: f64 = fb.node_marginals[t].iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
                assert!(fb.node_marginals[t].iter().all(|&p| p >= 0.0));
            }
            for t in 0..n.saturating_sub(1) {
                let mut expect = [[0.0; 3]; 3];
                for (labels, s) in &scored {
                    expect[labels[t].index()][labels[t + 1].index()] += (s - log_z).exp();
                }
                for y in 0..3 {
                    for y2 in 0..3 {
                        assert!((fb.pair_marginals[t][y][y2] - expect[y][y2]).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn uniform_model_partition_and_decode() {
        let model = CRFModel::from_weights(Vec::new(), [[0.0; 3]; 3], 0.0);
        let rows: Vec<FeatureRow> = (0..4).map(|_| row(&["x=1"], None)).collect();
        let fb = forward_backward(&model, &rows);
        assert!((fb.log_partition - 4.0 * 3.0f64.ln()).abs() < 1e-12);
        assert_eq!(viterbi_decode(&model, &rows), vec![Label::B; 4]);
        assert!(viterbi_decode(&model, &[]).is_empty());
        let single = [row(&["x=1"], None)];
        assert_eq!(viterbi_decode(&model, &single).len(), 1);
    }

    #[test]
    fn log_likelihood_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..20 {
            let n = rng.random_range(2..=5);
            let (model, mut rows) = random_model_and_rows(&mut rng, n);
            let labels: Vec<Label> = (0..n)
                .map(|_| Label::from_index(rng.random_range(0..3)))
                .collect();
            for (r, &l) in rows.iter_mut().zip(&labels) {
                r.label = Some(l);
            }
            // Analytic gradient: observed minus expected.
            let fb = forward_backward(&model, &rows);
            let ll = |m: &CRFModel| -> f64 {
                let fb = forward_backward(m, &rows);
                let emit = m.node_scores(&rows);
                let mut gold = 0.0;
                for (t, &l) in labels.iter().enumerate() {
                    gold += emit[t][l.index()];
                    if t > 0 {
                        gold += m.transition[labels[t - 1].index()][l.index()];
                    }
                }
                gold - fb.log_partition
            };
            let eps = 1e-6;
            // Emission weights: feature "pos{t}" fires only at position t.
            for t in 0..n {
                for y in 0..3 {
                    let observed = if labels[t].index() == y { 1.0 } else { 0.0 };
                    let analytic = observed - fb.node_marginals[t][y];
                    let mut up = model.clone();
                    up.emission[t][y] += eps;
                    let mut down = model.clone();
                    down.emission[t][y] -= eps;
                    let fd = (ll(&up) - ll(&down)) / (2.0 * eps);
                    assert!(
                        (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1.0) < 1e-5,
                        "emission ({t},{y}): fd {fd} vs {analytic}"
                    );
                }
            }
            for y in 0..3 {
                for y2 in 0..3 {
                    let mut analytic = 0.0;
                    for t in 0..n - 1 {
                        let observed = if labels[t].index() == y && labels[t + 1].index() == y2 {
                            1.0
                        } else {
                            0.0
                        };
                        analytic += observed - fb.pair_marginals[t][y][y2];
                    }
                    let mut up = model.clone();
                    up.transition[y][y2] += eps;
                    let mut down = model.clone();
                    down.transition[y][y2] -= eps;
                    let fd = (ll(&up) - ll(&down)) / (2.0 * eps);
                    assert!(
                        (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1.0) < 1e-5,
                        "transition ({y},{y2}): fd {fd} vs {analytic}"
                    );
                }
            }
        }
    }

    fn separable_corpus() -> Vec<Vec<FeatureRow>> {
        let mut out = Vec::new();
        for _ in 0..30 {
            out.push(vec![
                row(&["W0=1"], Some(Label::B)),
                row(&["W0=0"], Some(Label::O)),
                row(&["W0=0"], Some(Label::O)),
            ]);
            out.push(vec![
                row(&["W0=0"], Some(Label::O)),
                row(&["W0=1"], Some(Label::B)),
            ]);
        }
        out
    }

    #[test]
    fn separable_data_reaches_perfect_training_accuracy() {
        let corpus = separable_corpus();
        let config = TaggerConfig {
            l1_lambda: 0.01,
            epochs: 40,
            initial_lr: 0.5,
            seed: 3,
        };
        let model = train_crf(&corpus, &config).unwrap();
        for rows in &corpus {
            let gold: Vec<Label> = rows.iter().map(|r| r.label.unwrap()).collect();
            assert_eq!(viterbi_decode(&model, rows), gold);
        }
    }

    #[test]
    fn crushing_l1_zeroes_all_weights() {
        let corpus = separable_corpus();
        let config = TaggerConfig {
            l1_lambda: 1e6,
            epochs: 5,
            initial_lr: 0.5,
            seed: 3,
        };
        let model = train_crf(&corpus, &config).unwrap();
        assert!(model.emission.iter().flatten().all(|&w| w == 0.0));
        assert!(model.transition.iter().flatten().all(|&w| w == 0.0));
        // Decoding degenerates to the tie-break order: all B.
        let rows = &corpus[0];
        assert_eq!(viterbi_decode(&model, rows), vec![Label::B; rows.len()]);
    }

    #[test]
    fn objective_improves_over_training() {
        let corpus = separable_corpus();
        let short = train_crf(
            &corpus,
            &TaggerConfig { epochs: 1, l1_lambda: 0.01, initial_lr: 0.3, seed: 5 },
        )
        .unwrap();
        let long = train_crf(
            &corpus,
            &TaggerConfig { epochs: 25, l1_lambda: 0.01, initial_lr: 0.3, seed: 5 },
        )
        .unwrap();
        assert!(
            long.final_objective > short.final_objective,
            "{} !> {}",
            long.final_objective,
            short.final_objective
        );
    }

    #[test]
    fn unlabeled_rows_and_empty_sets_are_errors() {
        assert!(train_crf(&[], &TaggerConfig::default()).is_err());
        let bad = vec![vec![row(&["a=1"], Some(Label::B)), row(&["a=2"], None)]];
        let err = train_crf(&bad, &TaggerConfig::default()).unwrap_err();
        assert!(err.to_string().contains("row 2"));
    }

    #[test]
    fn unseen_features_do_not_change_decoding() {
        let corpus = separable_corpus();
        let model = train_crf(&corpus, &TaggerConfig::default()).unwrap();
        let plain = vec![row(&["W0=1"], None), row(&["W0=0"], None)];
        let extended = vec![
            row(&["W0=1", "novel=7"], None),
            row(&["W0=0", "other=2"], None),
        ];
        assert_eq!(viterbi_decode(&model, &plain), viterbi_decode(&model, &extended));
        assert_eq!(model.emission_weight("novel=7", Label::B), 0.0);
    }

    #[test]
    fn model_file_round_trips() {
        let corpus = separable_corpus();
        let model = train_crf(&corpus, &TaggerConfig::default()).unwrap();
        let mut buf = Vec::new();
        model.write_to(&mut buf).unwrap();
        let loaded = CRFModel::read_from(std::io::Cursor::new(&buf)).unwrap();
        for rows in &corpus {
            assert_eq!(viterbi_decode(&model, rows), viterbi_decode(&loaded, rows));
        }
        for from in Label::ALL {
            for to in Label::ALL {
                assert_eq!(model.transition(from, to), loaded.transition(from, to));
            }
        }
    }

    fn tok(form: &str, pos: &str, capitalized: bool) -> Token {
        Token {
            form: form.to_string(),
            pos: pos.to_string(),
            head: 0,
            rel: "root".to_string(),
            capitalized,
        }
    }

    #[test]
    fn templates_cover_capitalization_and_boundaries() {
        let sentence = ParsedSentence {
            id: "t".into(),
            tokens: vec![
                Token { head: 0, ..tok("delicious", "ADJ", true) },
                Token { head: 1, ..tok("pizza", "NOUN", false) },
            ],
        };
        let feats = baseline_templates(&sentence);
        assert!(feats[0].contains(&"cap[0]=1".to_string()));
        assert!(feats[0].contains(&"w[0]=delicious".to_string()));
        assert!(feats[1].contains(&"cap[0]=0".to_string()));
        // Offsets before the start emit the boundary symbol.
        assert!(feats[0].contains(&"w[-2]=<s>".to_string()));
        assert!(feats[0].contains(&"t[-1]=<s>".to_string()));
        assert!(feats[1].contains(&"w[1]=</s>".to_string()));
        assert!(feats[0].contains(&"t[0]=ADJ".to_string()));
    }

    #[test]
    fn affixes_are_length_capped() {
        let sentence = ParsedSentence {
            id: "t".into(),
            tokens: vec![tok("cat", "NOUN", false)],
        };
        let feats = &baseline_templates(&sentence)[0];
        for expected in ["suf[0,1]=t", "suf[0,2]=at", "suf[0,3]=cat", "suf[0,4]=cat"] {
            assert!(feats.contains(&expected.to_string()), "{expected}");
        }
        for expected in ["pre[0,1]=c", "pre[0,2]=ca", "pre[0,3]=cat", "pre[0,4]=cat"] {
            assert!(feats.contains(&expected.to_string()), "{expected}");
        }
    }

    #[test]
    fn stemmer_strips_common_suffixes_with_guards() {
        assert_eq!(stem("tables"), "table");
        assert_eq!(stem("walked"), "walk");
        assert_eq!(stem("walking"), "walk");
        assert_eq!(stem("dishes"), "dish");
        assert_eq!(stem("is"), "is");
        assert_eq!(stem("was"), "was");
        assert_eq!(stem("glass"), "glass");
        assert_eq!(stem("ring"), "ring");
        assert_eq!(stem("bed"), "bed");
    }
}
