//! Embedding model persistence.
//!
//! Three text sections (target words, context words, relations) share the
//! word2vec-style text layout: a `<rows> <d>` header, then one `token
//! v1 ... vd` line per row. Relation rows use `label:u` / `label:d`
//! tokens. The composer is a binary sidecar: an 8-byte magic plus the
//! dimension as a little-endian u64, then the d x 2d matrix row-major as
//! little-endian f64. The vocabulary is written alongside so a model
//! directory is self-contained.

use std::io::{BufRead, Read, Write};
use std::path::{Path, PathBuf};

use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::io::{atomic_write, is_comment, open_text, write_provenance};

use super::{Matrix, ModelParams};

const COMPOSER_MAGIC: &[u8; 8] = b"PVECWCMP";

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_matrix_text(
    w: &mut dyn Write,
    matrix: &Matrix,
    tokens: &mut dyn Iterator<Item = String>,
    provenance: Option<&str>,
) -> Result<()> {
    write_provenance(w, provenance)?;
    writeln!(w, "{} {}", matrix.n_rows(), matrix.n_cols())?;
    for row in 0..matrix.n_rows() {
        let token = tokens
            .next()
            .ok_or_else(|| Error::invalid("fewer tokens than matrix rows"))?;
        write!(w, "{token}")?;
        for v in matrix.row(row) {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

fn read_matrix_text(path: &Path) -> Result<(Vec<String>, Matrix)> {
    let reader = open_text(path)?;
    let label = path.display().to_string();
    let mut lines = reader.lines();
    let header = loop {
        match lines.next() {
            Some(line) => {
                let line = line?;
                if is_comment(&line) || line.trim().is_empty() {
                    continue;
                }
                break line;
            }
            None => return Err(Error::format(label, "missing header")),
        }
    };
    let mut parts = header.split_whitespace();
    let rows: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(&label, "bad row count in header"))?;
    let cols: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::format(&label, "bad dimension in header"))?;
    let mut tokens = Vec::with_capacity(rows);
    let mut data = Vec::with_capacity(rows * cols);
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < cols + 1 {
            return Err(Error::format(&label, format!("short row {:?}", line)));
        }
        // The last `cols` fields are the vector; anything before is the token.
        let split = fields.len() - cols;
        tokens.push(fields[..split].join(" "));
        for f in &fields[split..] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::format(&label, format!("bad float {f:?}")))?;
            data.push(v);
        }
    }
    if tokens.len() != rows {
        return Err(Error::format(
            &label,
            format!("header promises {rows} rows, found {}", tokens.len()),
        ));
    }
    let matrix = Matrix::from_rows(data.chunks(cols).map(<[f64]>::to_vec).collect())?;
    Ok((tokens, matrix))
}

fn write_composer(w: &mut dyn Write, composer: &Matrix) -> Result<()> {
    w.write_all(COMPOSER_MAGIC)?;
    w.write_all(&(composer.n_rows() as u64).to_le_bytes())?;
    for v in composer.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_composer(path: &Path) -> Result<Matrix> {
    let label = path.display().to_string();
    let mut file = std::fs::File::open(path)
        .map_err(|e| Error::format(&label, e.to_string()))?;
    let mut header = [0u8; 16];
    file.read_exact(&mut header)
        .map_err(|_| Error::format(&label, "truncated header"))?;
    if &header[..8] != COMPOSER_MAGIC {
        return Err(Error::format(&label, "bad magic"));
    }
    let d = u64::from_le_bytes(header[8..].try_into().expect("8 bytes")) as usize;
    let mut raw = Vec::new();
    file.read_to_end(&mut raw)?;
    if raw.len() != d * 2 * d * 8 {
        return Err(Error::format(
            &label,
            format!("expected {} payload bytes, found {}", d * 2 * d * 8, raw.len()),
        ));
    }
    let data: Vec<f64> = raw
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    Matrix::from_rows(data.chunks(2 * d).map(<[f64]>::to_vec).collect())
}

/// Expected relation-row tokens in matrix order.
fn relation_tokens(vocab: &Vocabulary) -> Vec<String> {
    let mut out = Vec::with_capacity(2 * vocab.n_relations());
    for label in vocab.rels() {
        out.push(format!("{label}:u"));
        out.push(format!("{label}:d"));
    }
    out
}

/// Write a trained model next to its vocabulary under a path prefix:
/// `<prefix>.words.txt`, `<prefix>.ctx.txt`, `<prefix>.rels.txt`,
/// `<prefix>.composer.bin`, and `<prefix>.vocab.txt`.
pub fn write_model(
    params: &ModelParams,
    vocab: &Vocabulary,
    prefix: &Path,
    provenance: Option<&str>,
) -> Result<()> {
    atomic_write(&with_suffix(prefix, ".vocab.txt"), |w| {
        write_provenance(w, provenance)?;
        vocab.write_to(w)
    })?;
    atomic_write(&with_suffix(prefix, ".words.txt"), |w| {
        let mut tokens = vocab.words().iter().cloned();
        write_matrix_text(w, &params.target_words, &mut tokens, provenance)
    })?;
    atomic_write(&with_suffix(prefix, ".ctx.txt"), |w| {
        let mut tokens = vocab.words().iter().cloned();
        write_matrix_text(w, &params.context_words, &mut tokens, provenance)
    })?;
    atomic_write(&with_suffix(prefix, ".rels.txt"), |w| {
        let mut tokens = relation_tokens(vocab).into_iter();
        write_matrix_text(w, &params.relations, &mut tokens, provenance)
    })?;
    atomic_write(&with_suffix(prefix, ".composer.bin"), |w| {
        write_composer(w, &params.composer)
    })?;
    Ok(())
}

/// Load a model written by [`write_model`], cross-checking every section
/// against the vocabulary.
pub fn load_model(prefix: &Path) -> Result<(Vocabulary, ModelParams)> {
    let vocab_path = with_suffix(prefix, ".vocab.txt");
    let vocab = Vocabulary::read_from(open_text(&vocab_path)?)?;

    let (word_tokens, target_words) = read_matrix_text(&with_suffix(prefix, ".words.txt"))?;
    let (ctx_tokens, context_words) = read_matrix_text(&with_suffix(prefix, ".ctx.txt"))?;
    let (rel_tokens, relations) = read_matrix_text(&with_suffix(prefix, ".rels.txt"))?;
    let composer = read_composer(&with_suffix(prefix, ".composer.bin"))?;

    if word_tokens != vocab.words() || ctx_tokens != vocab.words() {
        return Err(Error::invalid(
            "word embedding rows do not match the vocabulary",
        ));
    }
    if rel_tokens != relation_tokens(&vocab) {
        return Err(Error::invalid(
            "relation embedding rows do not match the vocabulary",
        ));
    }
    let params = ModelParams::from_parts(target_words, context_words, relations, composer)?;
    Ok((vocab, params))
}
