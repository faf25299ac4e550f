//! Scoring and similarity queries over a trained model.

use crate::corpus::WordId;
use crate::deptree::DepPath;
use crate::error::{Error, Result};

use super::{compose_path, dot, ModelParams};

/// Ranking score of a triple: `(w2 - w1)' compose(path)`.
pub fn ranking_score(
    w1: WordId,
    w2: WordId,
    path: &DepPath,
    params: &ModelParams,
) -> Result<f64> {
    let n = params.target_words.n_rows();
    if w1.index() >= n || w2.index() >= n {
        return Err(Error::invalid("word id outside the embedding matrix"));
    }
    let r = compose_path(path, params)?;
    let a = params.target_words.row(w1.index());
    let b = params.target_words.row(w2.index());
    Ok(b.iter().zip(a).zip(&r).map(|((x, y), z)| (x - y) * z).sum())
}

/// A nearest-neighbor query.
pub enum Query {
    /// An arbitrary vector of the model dimension.
    Vector(Vec<f64>),
    /// A word's target vector; the word itself is excluded from results.
    Word(WordId),
    /// The translation `word + compose(path)`.
    WordPath(WordId, DepPath),
}

/// Rank target-word rows by cosine similarity to the query vector.
///
/// Zero-norm rows (the unknown word, or anything untrained) are skipped;
/// a zero-norm query is an error. Ties break toward the smaller word id.
pub fn nearest_neighbors(
    query: &Query,
    k: usize,
    params: &ModelParams,
) -> Result<Vec<(WordId, f64)>> {
    if k < 1 {
        return Err(Error::invalid("k must be at least 1"));
    }
    let n = params.target_words.n_rows();
    let check = |w: WordId| -> Result<()> {
        if w.index() >= n {
            Err(Error::invalid("word id outside the embedding matrix"))
        } else {
            Ok(())
        }
    };
    let (vector, exclude): (Vec<f64>, Option<WordId>) = match query {
        Query::Vector(v) => {
            if v.len() != params.dim() {
                return Err(Error::invalid(format!(
                    "query vector has {} components, model dimension is {}",
                    v.len(),
                    params.dim()
                )));
            }
            (v.clone(), None)
        }
        Query::Word(w) => {
            check(*w)?;
            (params.target_words.row(w.index()).to_vec(), Some(*w))
        }
        Query::WordPath(w, path) => {
            check(*w)?;
            let composed = compose_path(path, params)?;
            let v = params
                .target_words
                .row(w.index())
                .iter()
                .zip(&composed)
                .map(|(a, b)| a + b)
                .collect();
            (v, None)
        }
    };
    let qnorm = dot(&vector, &vector).sqrt();
    if qnorm == 0.0 {
        return Err(Error::invalid("undefined cosine: query vector has zero norm"));
    }
    let mut scored: Vec<(WordId, f64)> = Vec::new();
    for row in 0..n {
        let id = WordId(row as u32);
        if exclude == Some(id) {
            continue;
        }
        let v = params.target_words.row(row);
        let norm = dot(v, v).sqrt();
        if norm == 0.0 {
            continue;
        }
        scored.push((id, dot(&vector, v) / (qnorm * norm)));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored)
}
