//! Per-token CRF feature assembly from trained embeddings.
//!
//! A token's continuous representation has up to three blocks: its own
//! target-word embedding (W), the concatenated embeddings of its linear
//! neighbors (L), and the averaged dependency-context embedding (D).
//! Each block is discretized with its own fitted table and emitted as
//! `name=code` strings, optionally alongside the lexical baseline
//! templates from the tagger.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use crate::corpus::{ParsedSentence, Vocabulary};
use crate::deptree::dependency_context;
use crate::discretize::{apply_discretizer, fit_discretizer, DiscreteEmbeddingTable};
use crate::embed::{compose_path, Matrix, ModelParams};
use crate::error::{Error, Result};
use crate::io::{atomic_write, is_comment, open_text, write_provenance};
use crate::tagger::{baseline_templates, Label};

/// Which embedding blocks to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSets {
    pub word: bool,
    pub linear: bool,
    pub dep: bool,
}

impl FeatureSets {
    pub const ALL: FeatureSets = FeatureSets { word: true, linear: true, dep: true };
    pub const NONE: FeatureSets = FeatureSets { word: false, linear: false, dep: false };

    /// Parse a comma-separated subset of `W`, `L`, `D` (empty means none).
    pub fn parse(s: &str) -> Result<Self> {
        let mut sets = FeatureSets::NONE;
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "W" | "w" => sets.word = true,
                "L" | "l" => sets.linear = true,
                "D" | "d" => sets.dep = true,
                other => return Err(Error::invalid(format!("unknown feature set {other:?}"))),
            }
        }
        Ok(sets)
    }
}

impl std::fmt::Display for FeatureSets {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if self.word {
            parts.push("W");
        }
        if self.linear {
            parts.push("L");
        }
        if self.dep {
            parts.push("D");
        }
        write!(f, "{}", parts.join(","))
    }
}

/// Feature-extraction settings shared by fitting and assembly.
#[derive(Debug, Clone, Copy)]
pub struct FeatureConfig {
    pub sets: FeatureSets,
    /// Linear-context window size (`len`); the slots are the offsets
    /// -len/2..-1 and +1..+len/2.
    pub ctx_len: usize,
    pub max_hops: usize,
    /// Also emit the lexical baseline templates.
    pub baseline: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { sets: FeatureSets::ALL, ctx_len: 5, max_hops: 3, baseline: false }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ctx_len < 3 || self.ctx_len % 2 == 0 {
            return Err(Error::invalid("linear-context window must be odd and at least 3"));
        }
        if self.max_hops < 1 {
            return Err(Error::invalid("max_hops must be at least 1"));
        }
        Ok(())
    }

    fn offsets(&self) -> Vec<isize> {
        let half = (self.ctx_len / 2) as isize;
        (-half..=half).filter(|&o| o != 0).collect()
    }
}

/// One token's assembled features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureRow {
    /// Token index within its sentence.
    pub index: usize,
    /// `name=code` feature strings, unique within the row.
    pub features: Vec<String>,
    /// Gold BIO label, when known.
    pub label: Option<Label>,
}

/// The target-word embedding of token `i` (the unknown word and anything
/// out of vocabulary contribute zeros).
pub fn word_vector(
    sentence: &ParsedSentence,
    i: usize,
    vocab: &Vocabulary,
    params: &ModelParams,
) -> Vec<f64> {
    let id = vocab.word_id_or_unk(&sentence.tokens[i].form);
    params.target_words.row(id.index()).to_vec()
}

/// Concatenated target-word embeddings of the linear neighbors of token
/// `i` at offsets -len/2..-1, +1..+len/2. Positions beyond the sentence
/// contribute a zero boundary vector, so the output is always
/// `d * (len - 1)` long.
pub fn linear_context_vector(
    sentence: &ParsedSentence,
    i: usize,
    len: usize,
    vocab: &Vocabulary,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    if len < 3 || len % 2 == 0 {
        return Err(Error::invalid("linear-context window must be odd and at least 3"));
    }
    let d = params.dim();
    let half = (len / 2) as isize;
    let mut out = Vec::with_capacity(d * (len - 1));
    for offset in (-half..=half).filter(|&o| o != 0) {
        let pos = i as isize + offset;
        if pos < 0 || pos as usize >= sentence.len() {
            out.extend(std::iter::repeat_n(0.0, d));
        } else {
            out.extend_from_slice(&word_vector(sentence, pos as usize, vocab, params));
        }
    }
    Ok(out)
}

/// Averaged dependency-context embedding of token `i`: for every
/// `(path, word)` pair within `max_hops`, the composed path vector plus
/// the context word's target vector, averaged over the pairs. An empty
/// context yields the zero vector.
pub fn dep_context_vector(
    sentence: &ParsedSentence,
    i: usize,
    vocab: &Vocabulary,
    params: &ModelParams,
    max_hops: usize,
) -> Result<Vec<f64>> {
    let d = params.dim();
    let pairs = dependency_context(sentence, vocab, i, max_hops);
    let mut sum = vec![0.0; d];
    if pairs.is_empty() {
        return Ok(sum);
    }
    for (path, word) in &pairs {
        let composed = compose_path(path, params)?;
        let wv = params.target_words.row(word.index());
        for ((s, c), w) in sum.iter_mut().zip(&composed).zip(wv) {
            *s += c + w;
        }
    }
    let count = pairs.len() as f64;
    for s in &mut sum {
        *s /= count;
    }
    Ok(sum)
}

/// Fitted discretization tables, one per enabled block.
#[derive(Debug, Clone, Default)]
pub struct BlockTables {
    pub word: Option<DiscreteEmbeddingTable>,
    pub linear: Option<DiscreteEmbeddingTable>,
    pub dep: Option<DiscreteEmbeddingTable>,
}

impl BlockTables {
    fn suffix(block: char) -> String {
        format!(".{block}.txt")
    }

    fn block_path(prefix: &Path, block: char) -> PathBuf {
        let mut s = prefix.as_os_str().to_os_string();
        s.push(Self::suffix(block));
        PathBuf::from(s)
    }

    /// Write one `<prefix>.<block>.txt` file per fitted block.
    pub fn write(&self, prefix: &Path, provenance: Option<&str>) -> Result<()> {
        for (block, table) in [('W', &self.word), ('L', &self.linear), ('D', &self.dep)] {
            if let Some(table) = table {
                atomic_write(&Self::block_path(prefix, block), |w| {
                    write_provenance(w, provenance)?;
                    table.write_to(w)
                })?;
            }
        }
        Ok(())
    }

    /// Load the tables for the requested sets, erroring on a missing file.
    pub fn read(prefix: &Path, sets: FeatureSets) -> Result<Self> {
        let load = |block: char| -> Result<DiscreteEmbeddingTable> {
            let path = Self::block_path(prefix, block);
            DiscreteEmbeddingTable::read_from(open_text(&path)?)
        };
        Ok(BlockTables {
            word: if sets.word { Some(load('W')?) } else { None },
            linear: if sets.linear { Some(load('L')?) } else { None },
            dep: if sets.dep { Some(load('D')?) } else { None },
        })
    }
}

/// Fit one discretization table per enabled block over every token of the
/// corpus.
pub fn fit_block_tables(
    sentences: &[ParsedSentence],
    vocab: &Vocabulary,
    params: &ModelParams,
    config: &FeatureConfig,
    bins: u32,
) -> Result<BlockTables> {
    config.validate()?;
    if sentences.is_empty() {
        return Err(Error::invalid("no sentences to fit discretizers on"));
    }
    let mut word_cols: Vec<Vec<f64>> = Vec::new();
    let mut linear_cols: Vec<Vec<f64>> = Vec::new();
    let mut dep_cols: Vec<Vec<f64>> = Vec::new();
    for sentence in sentences {
        for i in 0..sentence.len() {
            if config.sets.word {
                word_cols.push(word_vector(sentence, i, vocab, params));
            }
            if config.sets.linear {
                linear_cols.push(linear_context_vector(sentence, i, config.ctx_len, vocab, params)?);
            }
            if config.sets.dep {
                dep_cols.push(dep_context_vector(sentence, i, vocab, params, config.max_hops)?);
            }
        }
    }
    let fit = |cols: Vec<Vec<f64>>| -> Result<DiscreteEmbeddingTable> {
        let dims = cols[0].len();
        let mut rows = vec![Vec::with_capacity(cols.len()); dims];
        for col in &cols {
            for (dim, &v) in col.iter().enumerate() {
                rows[dim].push(v);
            }
        }
        fit_discretizer(&Matrix::from_rows(rows)?, bins)
    };
    Ok(BlockTables {
        word: if config.sets.word { Some(fit(word_cols)?) } else { None },
        linear: if config.sets.linear { Some(fit(linear_cols)?) } else { None },
        dep: if config.sets.dep { Some(fit(dep_cols)?) } else { None },
    })
}

/// Assemble the discrete feature rows of one sentence.
///
/// Every enabled block needs its fitted table; `labels`, when given, must
/// align one per token. Block features are named `W<dim>`, `L<offset>_<dim>`,
/// and `D<dim>`; with `baseline` set, the lexical template features are
/// appended.
pub fn assemble_features(
    sentence: &ParsedSentence,
    labels: Option<&[Label]>,
    vocab: &Vocabulary,
    params: &ModelParams,
    tables: &BlockTables,
    config: &FeatureConfig,
) -> Result<Vec<FeatureRow>> {
    config.validate()?;
    if let Some(labels) = labels {
        if labels.len() != sentence.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} tokens",
                labels.len(),
                sentence.len()
            )));
        }
    }
    let missing = |block: &str| Error::invalid(format!("no fitted discretizer for block {block}"));
    let baseline_rows = if config.baseline {
        Some(baseline_templates(sentence))
    } else {
        None
    };
    let mut rows = Vec::with_capacity(sentence.len());
    for i in 0..sentence.len() {
        let mut features = Vec::new();
        if config.sets.word {
            let table = tables.word.as_ref().ok_or_else(|| missing("W"))?;
            let codes = apply_discretizer(table, &word_vector(sentence, i, vocab, params))?;
            features.extend(codes.iter().enumerate().map(|(dim, c)| format!("W{dim}={c}")));
        }
        if config.sets.linear {
            let table = tables.linear.as_ref().ok_or_else(|| missing("L"))?;
            let vec = linear_context_vector(sentence, i, config.ctx_len, vocab, params)?;
            let codes = apply_discretizer(table, &vec)?;
            let d = params.dim();
            for (slot, offset) in config.offsets().into_iter().enumerate() {
                for dim in 0..d {
                    features.push(format!("L{offset}_{dim}={}", codes[slot * d + dim]));
                }
            }
        }
        if config.sets.dep {
            let table = tables.dep.as_ref().ok_or_else(|| missing("D"))?;
            let vec = dep_context_vector(sentence, i, vocab, params, config.max_hops)?;
            let codes = apply_discretizer(table, &vec)?;
            features.extend(codes.iter().enumerate().map(|(dim, c)| format!("D{dim}={c}")));
        }
        if let Some(baseline) = &baseline_rows {
            features.extend(baseline[i].iter().cloned());
        }
        debug_assert_eq!(
            features.iter().collect::<HashSet<_>>().len(),
            features.len(),
            "feature names must be unique within a row"
        );
        rows.push(FeatureRow {
            index: i,
            features,
            label: labels.map(|l| l[i]),
        });
    }
    Ok(rows)
}

/// Placeholder for a row with no features in the feature file format.
const EMPTY_FIELDS: &str = "_";

/// Write sentences of feature rows in the CRF-suite-like text format:
/// one token per line with TAB-separated feature strings, the gold label
/// last when present, a `# sent <id>` comment opening each sentence, and
/// a blank line between sentences.
pub fn write_feature_file(
    w: &mut dyn Write,
    sentences: &[(String, Vec<FeatureRow>)],
    provenance: Option<&str>,
) -> Result<()> {
    write_provenance(w, provenance)?;
    for (idx, (id, rows)) in sentences.iter().enumerate() {
        if idx > 0 {
            writeln!(w)?;
        }
        writeln!(w, "# sent {id}")?;
        for row in rows {
            let mut fields: Vec<&str> = row.features.iter().map(String::as_str).collect();
            if fields.is_empty() {
                fields.push(EMPTY_FIELDS);
            }
            if let Some(label) = row.label {
                fields.push(label.as_str());
            }
            writeln!(w, "{}", fields.join("\t"))?;
        }
    }
    Ok(())
}

/// Read a feature file written by [`write_feature_file`]. A trailing
/// field that parses as a BIO label and is not a `name=code` feature is
/// taken as the gold label.
pub fn read_feature_file<R: BufRead>(reader: R) -> Result<Vec<(String, Vec<FeatureRow>)>> {
    let mut out: Vec<(String, Vec<FeatureRow>)> = Vec::new();
    let mut current: Vec<FeatureRow> = Vec::new();
    let mut current_id: Option<String> = None;
    let mut seen_any = false;

    let flush = |current: &mut Vec<FeatureRow>, current_id: &mut Option<String>, out: &mut Vec<_>| {
        if current.is_empty() && current_id.is_none() {
            return;
        }
        let id = current_id.take().unwrap_or_else(|| out.len().to_string());
        out.push((id, std::mem::take(current)));
    };

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            flush(&mut current, &mut current_id, &mut out);
            continue;
        }
        if let Some(rest) = line.strip_prefix("# sent ") {
            current_id = Some(rest.trim().to_string());
            seen_any = true;
            continue;
        }
        if is_comment(&line) {
            continue;
        }
        seen_any = true;
        let mut fields: Vec<&str> = line.split('\t').collect();
        let label = match fields.last() {
            Some(&last) if !last.contains('=') && Label::parse(last).is_some() => {
                fields.pop();
                Label::parse(last)
            }
            _ => None,
        };
        let features: Vec<String> = fields
            .iter()
            .filter(|&&f| f != EMPTY_FIELDS && !f.is_empty())
            .map(|&f| f.to_string())
            .collect();
        for f in &features {
            if !f.contains('=') {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("field {f:?} is neither a feature nor a BIO label"),
                });
            }
        }
        current.push(FeatureRow { index: current.len(), features, label });
    }
    flush(&mut current, &mut current_id, &mut out);
    if !seen_any {
        return Err(Error::invalid("empty feature file"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, Token};

    fn sentence(arcs: &[(&str, usize, &str)]) -> ParsedSentence {
        ParsedSentence {
            id: "t".into(),
            tokens: arcs
                .iter()
                .map(|&(form, head, rel)| Token {
                    form: form.to_string(),
                    pos: "N".into(),
                    head,
                    rel: rel.to_string(),
                    capitalized: false,
                })
                .collect(),
        }
    }

    fn figure_tree() -> ParsedSentence {
        sentence(&[
            ("staff", 0, "root"),
            ("waiter", 1, "dep"),
            ("very", 2, "advmod"),
            ("professional", 2, "amod"),
            ("service", 1, "conj"),
            ("and", 1, "cc"),
        ])
    }

    fn setup(d: usize) -> (ParsedSentence, Vocabulary, ModelParams) {
        let s = figure_tree();
        let v = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let p = ModelParams::init(&v, d, 77);
        (s, v, p)
    }

    #[test]
    fn linear_context_is_the_neighbor_concatenation() {
        let (s, v, p) = setup(4);
        let got = linear_context_vector(&s, 2, 5, &v, &p).unwrap();
        assert_eq!(got.len(), 16);
        let mut expected = Vec::new();
        for pos in [0usize, 1, 3, 4] {
            expected.extend_from_slice(&word_vector(&s, pos, &v, &p));
        }
        assert_eq!(got, expected);
    }

    #[test]
    fn boundary_slots_are_zero() {
        let (s, v, p) = setup(3);
        let got = linear_context_vector(&s, 0, 5, &v, &p).unwrap();
        assert!(got[..6].iter().all(|&x| x == 0.0), "both left slots empty");
        assert_eq!(&got[6..9], word_vector(&s, 1, &v, &p).as_slice());
        assert!(linear_context_vector(&s, 0, 4, &v, &p).is_err());
        assert!(linear_context_vector(&s, 0, 1, &v, &p).is_err());
    }

    #[test]
    fn dep_context_averages_pair_vectors() {
        // Two pairs with vectors u and v average to (u + v) / 2. Zero the
        // composer so multi-hop paths contribute nothing, then check the
        // hand-computed mean on a 3-dimensional model.
        let (s, v, _) = setup(3);
        let mut p = ModelParams::init(&v, 3, 0);
        for row in 0..p.target_words.n_rows() {
            p.target_words.row_mut(row).fill(0.0);
        }
        for row in 0..p.relations.n_rows() {
            p.relations.row_mut(row).fill(0.0);
        }
        // Token "very" has context pairs (advmod:u, waiter) and two 2-hop
        // pairs through it; restrict to 1 hop for the hand computation.
        let waiter = v.word_id("waiter").unwrap();
        p.target_words.row_mut(waiter.index()).copy_from_slice(&[0.3, 0.0, -0.3]);
        let advmod_up_row = crate::deptree::DirectedRelation::new(
            v.rel_id("advmod").unwrap(),
            crate::deptree::Direction::TowardHead,
        )
        .row();
        p.relations.row_mut(advmod_up_row).copy_from_slice(&[0.1, 0.2, 0.3]);
        let got = dep_context_vector(&s, 2, &v, &p, 1).unwrap();
        // Single pair: path vector + word vector.
        assert_eq!(got, vec![0.4, 0.2, 0.0]);

        // Now two 1-hop pairs from "waiter"'s perspective: children very
        // and professional plus head staff; zero all but two pair vectors
        // and check the average.
        let mut p2 = ModelParams::init(&v, 3, 0);
        for row in 0..p2.target_words.n_rows() {
            p2.target_words.row_mut(row).fill(0.0);
        }
        for row in 0..p2.relations.n_rows() {
            p2.relations.row_mut(row).fill(0.0);
        }
        let very = v.word_id("very").unwrap();
        let professional = v.word_id("professional").unwrap();
        p2.target_words.row_mut(very.index()).copy_from_slice(&[0.6, 0.0, 0.0]);
        p2.target_words.row_mut(professional.index()).copy_from_slice(&[0.0, 0.9, 0.0]);
        let got = dep_context_vector(&s, 1, &v, &p2, 1).unwrap();
        // Three pairs (staff, very, professional); u = (0.6,0,0), v = (0,0.9,0),
        // staff contributes zero: mean = (0.2, 0.3, 0).
        for (a, b) in got.iter().zip(&[0.2, 0.3, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn figure_staff_context_averages_five_pairs() {
        let (s, v, p) = setup(5);
        let pairs = dependency_context(&s, &v, 0, 3);
        assert_eq!(pairs.len(), 5);
        let mut expected = vec![0.0; 5];
        for (path, word) in &pairs {
            let composed = compose_path(path, &p).unwrap();
            for (e, (c, w)) in expected
                .iter_mut()
                .zip(composed.iter().zip(p.target_words.row(word.index())))
            {
                *e += c + w;
            }
        }
        for e in &mut expected {
            *e /= 5.0;
        }
        assert_eq!(dep_context_vector(&s, 0, &v, &p, 3).unwrap(), expected);
    }

    #[test]
    fn empty_context_is_zero() {
        let s = sentence(&[("pizza", 0, "root")]);
        let v = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let p = ModelParams::init(&v, 4, 1);
        assert_eq!(dep_context_vector(&s, 0, &v, &p, 3).unwrap(), vec![0.0; 4]);
    }

    fn full_setup() -> (ParsedSentence, Vocabulary, ModelParams, BlockTables, FeatureConfig) {
        let (s, v, p) = setup(3);
        let config = FeatureConfig::default();
        let tables = fit_block_tables(std::slice::from_ref(&s), &v, &p, &config, 15).unwrap();
        (s, v, p, tables, config)
    }

    #[test]
    fn word_block_features_name_each_dimension() {
        let (s, v, p, tables, _) = full_setup();
        let config = FeatureConfig {
            sets: FeatureSets::parse("W").unwrap(),
            ..FeatureConfig::default()
        };
        let rows = assemble_features(&s, None, &v, &p, &tables, &config).unwrap();
        let codes = apply_discretizer(
            tables.word.as_ref().unwrap(),
            &word_vector(&s, 0, &v, &p),
        )
        .unwrap();
        let expected: Vec<String> = codes
            .iter()
            .enumerate()
            .map(|(dim, c)| format!("W{dim}={c}"))
            .collect();
        assert_eq!(rows[0].features, expected);
    }

    #[test]
    fn feature_counts_are_constant_and_blocks_independent() {
        let (s, v, p, tables, config) = full_setup();
        let rows = assemble_features(&s, None, &v, &p, &tables, &config).unwrap();
        let d = p.dim();
        for row in &rows {
            assert_eq!(row.features.len(), d + 4 * d + d);
        }
        // Dropping the D block leaves W and L features untouched.
        let wl = FeatureConfig {
            sets: FeatureSets::parse("W,L").unwrap(),
            ..config
        };
        let rows_wl = assemble_features(&s, None, &v, &p, &tables, &wl).unwrap();
        for (full, partial) in rows.iter().zip(&rows_wl) {
            assert_eq!(&full.features[..5 * d], partial.features.as_slice());
        }
        // Assembly is deterministic.
        let again = assemble_features(&s, None, &v, &p, &tables, &config).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn linear_feature_names_carry_offset_and_dimension() {
        let (s, v, p, tables, _) = full_setup();
        let config = FeatureConfig {
            sets: FeatureSets::parse("L").unwrap(),
            ..FeatureConfig::default()
        };
        let rows = assemble_features(&s, None, &v, &p, &tables, &config).unwrap();
        assert!(rows[0].features.iter().any(|f| f.starts_with("L-2_0=")));
        assert!(rows[0].features.iter().any(|f| f.starts_with("L2_2=")));
    }

    #[test]
    fn empty_sets_without_baseline_yield_bare_rows() {
        let (s, v, p, tables, _) = full_setup();
        let config = FeatureConfig {
            sets: FeatureSets::NONE,
            baseline: false,
            ..FeatureConfig::default()
        };
        let rows = assemble_features(&s, None, &v, &p, &tables, &config).unwrap();
        assert!(rows.iter().all(|r| r.features.is_empty()));
    }

    #[test]
    fn missing_discretizer_is_an_error() {
        let (s, v, p, _, config) = full_setup();
        let empty = BlockTables::default();
        assert!(assemble_features(&s, None, &v, &p, &empty, &config).is_err());
    }

    #[test]
    fn labels_must_align() {
        let (s, v, p, tables, config) = full_setup();
        let labels = vec![Label::O; 2];
        assert!(assemble_features(&s, Some(&labels), &v, &p, &tables, &config).is_err());
        let labels = vec![Label::O, Label::B, Label::I, Label::O, Label::O, Label::O];
        let rows = assemble_features(&s, Some(&labels), &v, &p, &tables, &config).unwrap();
        assert_eq!(rows[1].label, Some(Label::B));
    }

    #[test]
    fn feature_file_round_trips() {
        let (s, v, p, tables, config) = full_setup();
        let labels = vec![Label::B, Label::I, Label::O, Label::O, Label::B, Label::O];
        let rows = assemble_features(&s, Some(&labels), &v, &p, &tables, &config).unwrap();
        let bare = vec![FeatureRow { index: 0, features: Vec::new(), label: Some(Label::O) }];
        let sentences = vec![("fig1".to_string(), rows), ("bare".to_string(), bare)];
        let mut buf = Vec::new();
        write_feature_file(&mut buf, &sentences, Some("test run")).unwrap();
        let loaded = read_feature_file(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(loaded, sentences);
    }

    #[test]
    fn block_tables_round_trip_through_files() {
        let (_, _, _, tables, _) = full_setup();
        let dir = tempfile::tempdir().unwrap();
        let prefix = dir.path().join("disc");
        tables.write(&prefix, Some("test")).unwrap();
        let loaded = BlockTables::read(&prefix, FeatureSets::ALL).unwrap();
        for (a, b) in [
            (&tables.word, &loaded.word),
            (&tables.linear, &loaded.linear),
            (&tables.dep, &loaded.dep),
        ] {
            let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
            assert_eq!(a.dim(), b.dim());
            assert_eq!(a.bins(), b.bins());
            for dim in 0..a.dim() {
                assert_eq!(a.min(dim), b.min(dim));
                assert_eq!(a.max(dim), b.max(dim));
            }
        }
        assert!(BlockTables::read(dir.path().join("nope").as_path(), FeatureSets::ALL).is_err());
    }
}
