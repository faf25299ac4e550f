//! CoNLL-U ingestion and vocabulary construction.
//!
//! Tokens are lowercased on ingestion (the original capitalization is kept
//! as a flag for the tagger's surface templates). Words below the frequency
//! cutoff are dropped from the vocabulary; relation labels are kept verbatim
//! and unfiltered. Sampling tables use counts raised to the 3/4 power.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use rand::Rng;

use crate::deptree::DepPath;
use crate::error::{Error, Result};

/// Identifier of a word in the [`Vocabulary`]. Id 0 is reserved for the
/// unknown word, whose embedding stays at the zero vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordId(pub u32);

impl WordId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Identifier of an (undirected) grammatical-relation label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelId(pub u32);

impl RelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// One token of a parsed sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// Lowercased surface form.
    pub form: String,
    /// POS tag (UPOS when present, otherwise XPOS).
    pub pos: String,
    /// Head position: 0 for the root, otherwise the 1-based index of the head.
    pub head: usize,
    /// Grammatical-relation label of the arc to the head.
    pub rel: String,
    /// Whether the original surface form started with an uppercase letter.
    pub capitalized: bool,
}

/// A dependency-parsed sentence: an ordered token list forming a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedSentence {
    pub id: String,
    pub tokens: Vec<Token>,
}

impl ParsedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Parent of token `i` (both 0-based), or `None` for the root.
    pub fn parent(&self, i: usize) -> Option<usize> {
        match self.tokens[i].head {
            0 => None,
            h => Some(h - 1),
        }
    }

    /// 0-based index of the root token.
    pub fn root(&self) -> usize {
        self.tokens
            .iter()
            .position(|t| t.head == 0)
            .expect("validated sentence has a root")
    }

    /// Children of token `i` in surface order (0-based indices).
    pub fn children(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.head == i + 1)
            .map(|(j, _)| j)
    }
}

/// A recoverable problem encountered while parsing a CoNLL-U stream.
#[derive(Debug, Clone)]
pub struct ParseIssue {
    /// 1-based line number in the input stream.
    pub line: usize,
    pub msg: String,
}

impl fmt::Display for ParseIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.msg)
    }
}

/// Result of parsing a CoNLL-U stream: the accepted sentences plus the
/// diagnostics for every rejected block.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub sentences: Vec<ParsedSentence>,
    pub issues: Vec<ParseIssue>,
}

/// Parse a CoNLL-U stream into sentences.
///
/// Comment lines (`#`) are skipped, except that `# sent_id = ...` sets the
/// sentence id (the block ordinal is used otherwise). Multiword-token and
/// empty-node lines (ranged or decimal IDs) are skipped. A malformed line
/// or an invalid tree rejects the containing sentence with a diagnostic
/// naming the line; parsing continues with the next block.
pub fn parse_conllu<R: BufRead>(reader: R) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    let mut block: Vec<Token> = Vec::new();
    let mut block_id: Option<String> = None;
    let mut block_start = 0usize;
    let mut block_bad: Option<ParseIssue> = None;
    let mut ordinal = 0usize;

    let finish =
        |block: &mut Vec<Token>, block_id: &mut Option<String>, bad: &mut Option<ParseIssue>,
         start: usize, ordinal: &mut usize, out: &mut ParseOutcome| {
            if block.is_empty() && block_id.is_none() && bad.is_none() {
                return;
            }
            let id = block_id.take().unwrap_or_else(|| ordinal.to_string());
            *ordinal += 1;
            if let Some(issue) = bad.take() {
                out.issues.push(issue);
                block.clear();
                return;
            }
            let sentence = ParsedSentence {
                id,
                tokens: std::mem::take(block),
            };
            match validate_tree(&sentence) {
                Ok(()) => out.sentences.push(sentence),
                Err(msg) => out.issues.push(ParseIssue { line: start, msg }),
            }
        };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            finish(&mut block, &mut block_id, &mut block_bad, block_start, &mut ordinal, &mut out);
            continue;
        }
        if block.is_empty() && block_bad.is_none() {
            block_start = lineno;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("sent_id") {
                let v = v.trim_start().trim_start_matches('=').trim();
                if !v.is_empty() {
                    block_id = Some(v.to_string());
                }
            }
            continue;
        }
        if block_bad.is_some() {
            // Sentence already rejected; drain the rest of the block.
            continue;
        }
        match parse_token_line(trimmed, block.len() + 1) {
            Ok(Some(tok)) => block.push(tok),
            Ok(None) => {} // multiword-token or empty-node line
            Err(msg) => block_bad = Some(ParseIssue { line: lineno, msg }),
        }
    }
    finish(&mut block, &mut block_id, &mut block_bad, block_start, &mut ordinal, &mut out);
    Ok(out)
}

/// Parse one CoNLL-U token line. Returns `None` for skipped line kinds.
fn parse_token_line(line: &str, expected_id: usize) -> std::result::Result<Option<Token>, String> {
    let cols: Vec<&str> = if line.contains('\t') {
        line.split('\t').collect()
    } else {
        line.split_whitespace().collect()
    };
    if cols.len() < 10 {
        return Err(format!("expected 10 columns, found {}", cols.len()));
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    let id: usize = id.parse().map_err(|_| format!("non-integer ID {:?}", id))?;
    if id != expected_id {
        return Err(format!("token ID {} out of sequence (expected {})", id, expected_id));
    }
    let raw_form = cols[1];
    if raw_form.is_empty() {
        return Err("empty FORM".to_string());
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| format!("non-integer HEAD {:?}", cols[6]))?;
    let pos = if cols[3] != "_" { cols[3] } else { cols[4] };
    Ok(Some(Token {
        form: raw_form.to_lowercase(),
        pos: pos.to_string(),
        head,
        rel: cols[7].to_string(),
        capitalized: raw_form.chars().next().is_some_and(|c| c.is_uppercase()),
    }))
}

/// Check the head graph is a single-rooted tree.
fn validate_tree(sentence: &ParsedSentence) -> std::result::Result<(), String> {
    let n = sentence.len();
    if n == 0 {
        return Err("empty sentence".to_string());
    }
    let mut roots = 0usize;
    for (i, tok) in sentence.tokens.iter().enumerate() {
        if tok.head > n {
            return Err(format!("token {} HEAD {} out of range", i + 1, tok.head));
        }
        if tok.head == i + 1 {
            return Err(format!("token {} is its own head", i + 1));
        }
        if tok.head == 0 {
            roots += 1;
        }
    }
    if roots != 1 {
        return Err(format!("expected exactly one root, found {}", roots));
    }
    // Walk each node to the root; a walk longer than n nodes means a cycle.
    for start in 0..n {
        let mut cur = start;
        let mut steps = 0usize;
        while let Some(p) = sentence.parent(cur) {
            cur = p;
            steps += 1;
            if steps > n {
                return Err("cyclic dependency structure".to_string());
            }
        }
    }
    Ok(())
}

/// Cumulative-weight table for drawing indices proportionally to weights.
#[derive(Debug, Clone)]
pub struct SamplingTable {
    cum: Vec<f64>,
    total: f64,
}

impl SamplingTable {
    /// Build from nonnegative weights. Errors when the total weight is zero.
    pub fn from_weights<I: IntoIterator<Item = f64>>(weights: I) -> Result<Self> {
        let mut cum = Vec::new();
        let mut total = 0.0;
        for w in weights {
            if !(w >= 0.0) {
                return Err(Error::invalid(format!("negative sampling weight {w}")));
            }
            total += w;
            cum.push(total);
        }
        if total <= 0.0 {
            return Err(Error::invalid("sampling table has zero total weight"));
        }
        Ok(SamplingTable { cum, total })
    }

    pub fn len(&self) -> usize {
        self.cum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cum.is_empty()
    }

    /// Draw one index with probability proportional to its weight.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let x = rng.random::<f64>() * self.total;
        // partition_point returns the first index with cum > x.
        self.cum.partition_point(|&c| c <= x).min(self.cum.len() - 1)
    }

    /// Probability assigned to index `i`.
    pub fn probability(&self, i: usize) -> f64 {
        let lo = if i == 0 { 0.0 } else { self.cum[i - 1] };
        (self.cum[i] - lo) / self.total
    }
}

/// Frequency table over the distinct dependency paths of one hop count.
#[derive(Debug, Clone, Default)]
pub struct PathTable {
    paths: Vec<DepPath>,
    index: HashMap<DepPath, usize>,
    counts: Vec<u64>,
}

impl PathTable {
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn paths(&self) -> &[DepPath] {
        &self.paths
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn count_of(&self, path: &DepPath) -> u64 {
        self.index.get(path).map_or(0, |&i| self.counts[i])
    }

    fn record(&mut self, path: &DepPath) {
        match self.index.get(path) {
            Some(&i) => self.counts[i] += 1,
            None => {
                self.index.insert(path.clone(), self.paths.len());
                self.paths.push(path.clone());
                self.counts.push(1);
            }
        }
    }

    /// Sampling table over paths, weights smoothed by the 3/4 power.
    pub fn sampler(&self) -> Result<SamplingTable> {
        SamplingTable::from_weights(self.counts.iter().map(|&c| (c as f64).powf(0.75)))
    }
}

/// Reserved surface form for the unknown word (id 0, zero embedding).
pub const UNK_TOKEN: &str = "<unk>";

/// Word and relation vocabularies with smoothed sampling distributions.
///
/// Immutable after construction except for the per-hop path tables, which
/// are accumulated by a corpus pass over extracted triples before training.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    words: Vec<String>,
    word_ids: HashMap<String, WordId>,
    word_counts: Vec<u64>,
    rels: Vec<String>,
    rel_ids: HashMap<String, RelId>,
    rel_counts: Vec<u64>,
    min_count: u32,
    word_table: SamplingTable,
    path_tables: Vec<PathTable>,
}

/// The unknown-word id.
pub const UNK: WordId = WordId(0);

impl Vocabulary {
    /// Number of word rows, including the reserved unknown word at id 0.
    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    /// Number of retained corpus words (excludes the unknown word).
    pub fn n_retained(&self) -> usize {
        self.words.len() - 1
    }

    pub fn n_relations(&self) -> usize {
        self.rels.len()
    }

    pub fn min_count(&self) -> u32 {
        self.min_count
    }

    pub fn word_id(&self, form: &str) -> Option<WordId> {
        self.word_ids.get(form).copied()
    }

    /// Map a form to its id, falling back to the unknown word.
    pub fn word_id_or_unk(&self, form: &str) -> WordId {
        self.word_id(form).unwrap_or(UNK)
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id.index()]
    }

    pub fn word_count(&self, id: WordId) -> u64 {
        self.word_counts[id.index()]
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn rel_id(&self, label: &str) -> Option<RelId> {
        self.rel_ids.get(label).copied()
    }

    pub fn rel_label(&self, id: RelId) -> &str {
        &self.rels[id.index()]
    }

    pub fn rel_count(&self, id: RelId) -> u64 {
        self.rel_counts[id.index()]
    }

    pub fn rels(&self) -> &[String] {
        &self.rels
    }

    /// Sampling table over word ids, weights = count^(3/4). The unknown
    /// word has weight 0 and is never drawn.
    pub fn word_sampler(&self) -> &SamplingTable {
        &self.word_table
    }

    /// Record one observed path occurrence in the per-hop tables.
    pub fn record_path(&mut self, path: &DepPath) {
        let hop = path.len();
        if self.path_tables.len() < hop {
            self.path_tables.resize_with(hop, PathTable::default);
        }
        self.path_tables[hop - 1].record(path);
    }

    /// Frequency table for paths of exactly `hop` hops, if any were recorded.
    pub fn path_table(&self, hop: usize) -> Option<&PathTable> {
        if hop == 0 {
            return None;
        }
        self.path_tables.get(hop - 1).filter(|t| !t.is_empty())
    }

    /// Largest hop count with a non-empty path table.
    pub fn max_recorded_hops(&self) -> usize {
        self.path_tables
            .iter()
            .rposition(|t| !t.is_empty())
            .map_or(0, |i| i + 1)
    }

    /// Serialize to the vocabulary text format:
    /// a `<word_count> <relation_count> <min_count>` header, `word<TAB>count`
    /// lines, a `#RELATIONS` sentinel, then `label<TAB>count` lines.
    pub fn write_to<W: std::io::Write + ?Sized>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{} {} {}", self.n_retained(), self.rels.len(), self.min_count)?;
        for i in 1..self.words.len() {
            writeln!(w, "{}\t{}", self.words[i], self.word_counts[i])?;
        }
        writeln!(w, "#RELATIONS")?;
        for (label, count) in self.rels.iter().zip(&self.rel_counts) {
            writeln!(w, "{label}\t{count}")?;
        }
        Ok(())
    }

    /// Load a vocabulary written by [`Vocabulary::write_to`]. Leading `# `
    /// comment lines are skipped. Path tables start empty.
    pub fn read_from<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if line.starts_with("# ") || line.trim().is_empty() {
                        continue;
                    }
                    break line;
                }
                None => return Err(Error::invalid("empty vocabulary file")),
            }
        };
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::invalid(format!("bad vocabulary header {header:?}")));
        }
        let n_words: usize = parts[0]
            .parse()
            .map_err(|_| Error::invalid("bad word count in vocabulary header"))?;
        let n_rels: usize = parts[1]
            .parse()
            .map_err(|_| Error::invalid("bad relation count in vocabulary header"))?;
        let min_count: u32 = parts[2]
            .parse()
            .map_err(|_| Error::invalid("bad min count in vocabulary header"))?;

        let mut builder = VocabBuilder::new(min_count);
        let mut seen_words = 0usize;
        let mut in_rels = false;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            if line == "#RELATIONS" {
                in_rels = true;
                continue;
            }
            let (token, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::invalid(format!("bad vocabulary line {line:?}")))?;
            let count: u64 = count
                .parse()
                .map_err(|_| Error::invalid(format!("bad count in vocabulary line {line:?}")))?;
            if in_rels {
                builder.push_rel(token, count);
            } else {
                builder.push_word(token, count);
                seen_words += 1;
            }
        }
        if seen_words != n_words || builder.rels.len() != n_rels {
            return Err(Error::invalid(format!(
                "vocabulary header promises {n_words} words / {n_rels} relations, found {} / {}",
                seen_words,
                builder.rels.len()
            )));
        }
        builder.finish()
    }
}

struct VocabBuilder {
    words: Vec<String>,
    word_ids: HashMap<String, WordId>,
    word_counts: Vec<u64>,
    rels: Vec<String>,
    rel_ids: HashMap<String, RelId>,
    rel_counts: Vec<u64>,
    min_count: u32,
}

impl VocabBuilder {
    fn new(min_count: u32) -> Self {
        let mut word_ids = HashMap::new();
        word_ids.insert(UNK_TOKEN.to_string(), UNK);
        VocabBuilder {
            words: vec![UNK_TOKEN.to_string()],
            word_ids,
            word_counts: vec![0],
            rels: Vec::new(),
            rel_ids: HashMap::new(),
            rel_counts: Vec::new(),
            min_count,
        }
    }

    fn push_word(&mut self, form: &str, count: u64) {
        let id = WordId(self.words.len() as u32);
        self.word_ids.insert(form.to_string(), id);
        self.words.push(form.to_string());
        self.word_counts.push(count);
    }

    fn push_rel(&mut self, label: &str, count: u64) {
        let id = RelId(self.rels.len() as u32);
        self.rel_ids.insert(label.to_string(), id);
        self.rels.push(label.to_string());
        self.rel_counts.push(count);
    }

    fn finish(self) -> Result<Vocabulary> {
        let word_table =
            SamplingTable::from_weights(self.word_counts.iter().map(|&c| (c as f64).powf(0.75)))?;
        Ok(Vocabulary {
            words: self.words,
            word_ids: self.word_ids,
            word_counts: self.word_counts,
            rels: self.rels,
            rel_ids: self.rel_ids,
            rel_counts: self.rel_counts,
            min_count: self.min_count,
            word_table,
            path_tables: Vec::new(),
        })
    }
}

/// Build word and relation vocabularies from a parsed corpus.
///
/// Words occurring fewer than `min_count` times are dropped; every relation
/// label seen is kept. Ids follow first occurrence in the corpus, so the
/// assignment is deterministic.
pub fn build_vocab(sentences: &[ParsedSentence], min_count: u32) -> Result<Vocabulary> {
    if sentences.is_empty() {
        return Err(Error::invalid("no sentences"));
    }
    if min_count < 1 {
        return Err(Error::invalid("min_count must be at least 1"));
    }
    let mut word_counts: HashMap<&str, u64> = HashMap::new();
    let mut word_order: Vec<&str> = Vec::new();
    let mut rel_counts: HashMap<&str, u64> = HashMap::new();
    let mut rel_order: Vec<&str> = Vec::new();
    for sentence in sentences {
        for tok in &sentence.tokens {
            let c = word_counts.entry(tok.form.as_str()).or_insert(0);
            if *c == 0 {
                word_order.push(&tok.form);
            }
            *c += 1;
            let c = rel_counts.entry(tok.rel.as_str()).or_insert(0);
            if *c == 0 {
                rel_order.push(&tok.rel);
            }
            *c += 1;
        }
    }
    let mut builder = VocabBuilder::new(min_count);
    for form in word_order {
        let count = word_counts[form];
        if count >= u64::from(min_count) {
            builder.push_word(form, count);
        }
    }
    for label in rel_order {
        builder.push_rel(label, rel_counts[label]);
    }
    builder.finish()
}
