//! Joint training of word, relation, and path-composition parameters.
//!
//! Two hinge objectives share the word vectors. The path objective asks
//! that the composed path vector score higher against `w2 - w1` than a
//! corrupted path of the same hop count; the linear-context objective
//! asks that an observed context word score higher against the target
//! than a sampled one. Multi-hop paths are composed left to right by a
//! single matrix with a hard-tanh nonlinearity.

mod loss;
mod query;
mod sampling;
mod store;
mod train;

pub use loss::{context_loss_and_grads, path_loss_and_grads, SparseGrads};
pub use query::{nearest_neighbors, ranking_score, Query};
pub use sampling::{sample_negative_paths, sample_negative_words, NegativeSamplers};
pub use store::{load_model, write_model};
pub use train::{train, train_with_stats, TrainStats};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Vocabulary;
use crate::deptree::{DepPath, DirectedRelation};
use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in &rows {
            if row.len() != ncols {
                return Err(Error::invalid("ragged rows in matrix"));
            }
            data.extend_from_slice(row);
        }
        Ok(Matrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn fill_uniform<R: Rng>(&mut self, rng: &mut R, bound: f64, skip_rows: usize) {
        for v in &mut self.data[skip_rows * self.cols..] {
            *v = rng.random_range(-bound..=bound);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hard hyperbolic tangent: identity on [-1, 1], clamped outside.
pub fn htanh(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Subgradient of [`htanh`]: 1 strictly inside (-1, 1), 0 elsewhere
/// (including at the kinks).
pub fn htanh_grad(x: f64) -> f64 {
    if x > -1.0 && x < 1.0 {
        1.0
    } else {
        0.0
    }
}

/// All trainable parameters of the embedding model.
///
/// Word rows are indexed by [`crate::corpus::WordId`]; row 0 is the
/// unknown word and stays at zero. Relation rows are indexed by
/// [`DirectedRelation::row`], two per label. The composer maps the
/// concatenation `[h; g]` (length 2d) to the next hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    d: usize,
    pub target_words: Matrix,
    pub context_words: Matrix,
    pub relations: Matrix,
    pub composer: Matrix,
}

impl ModelParams {
    /// Initialize for a vocabulary: target words and relations uniform in
    /// [-0.5/d, +0.5/d], context words zero, composer uniform in
    /// ±sqrt(6/(3d)). The unknown-word row stays zero.
    pub fn init(vocab: &Vocabulary, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut target_words = Matrix::zeros(vocab.n_words(), d);
        target_words.fill_uniform(&mut rng, 0.5 / d as f64, 1);
        let context_words = Matrix::zeros(vocab.n_words(), d);
        let mut relations = Matrix::zeros(2 * vocab.n_relations(), d);
        relations.fill_uniform(&mut rng, 0.5 / d as f64, 0);
        let mut composer = Matrix::zeros(d, 2 * d);
        composer.fill_uniform(&mut rng, (6.0 / (3.0 * d as f64)).sqrt(), 0);
        ModelParams {
            d,
            target_words,
            context_words,
            relations,
            composer,
        }
    }

    pub fn from_parts(
        target_words: Matrix,
        context_words: Matrix,
        relations: Matrix,
        composer: Matrix,
    ) -> Result<Self> {
        let d = target_words.n_cols();
        if context_words.n_cols() != d || relations.n_cols() != d {
            return Err(Error::invalid("embedding matrices disagree on dimension"));
        }
        if composer.n_rows() != d || composer.n_cols() != 2 * d {
            return Err(Error::invalid(format!(
                "composer must be {d}x{}, got {}x{}",
                2 * d,
                composer.n_rows(),
                composer.n_cols()
            )));
        }
        Ok(ModelParams {
            d,
            target_words,
            context_words,
            relations,
            composer,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn relation_vec(&self, step: DirectedRelation) -> Result<&[f64]> {
        let row = step.row();
        if row >= self.relations.n_rows() {
            return Err(Error::invalid(format!(
                "relation row {row} outside the relation matrix"
            )));
        }
        Ok(self.relations.row(row))
    }
}

/// Forward pass of the path composition with the intermediate states
/// needed for backpropagation.
pub(crate) struct ComposeTrace {
    /// Hidden states h_1..h_n (post-activation).
    pub hidden: Vec<Vec<f64>>,
    /// Pre-activations z_2..z_n.
    pub pre: Vec<Vec<f64>>,
}

pub(crate) fn compose_with_trace(path: &DepPath, params: &ModelParams) -> Result<ComposeTrace> {
    let d = params.d;
    let mut hidden = Vec::with_capacity(path.len());
    let mut pre = Vec::with_capacity(path.len().saturating_sub(1));
    hidden.push(params.relation_vec(path.steps()[0])?.to_vec());
    for step in &path.steps()[1..] {
        let g = params.relation_vec(*step)?;
        let h_prev = hidden.last().expect("at least one hidden state");
        let mut z = vec![0.0; d];
        for (a, z_a) in z.iter_mut().enumerate() {
            let w_row = params.composer.row(a);
            *z_a = dot(&w_row[..d], h_prev) + dot(&w_row[d..], g);
        }
        let h = z.iter().map(|&x| htanh(x)).collect();
        pre.push(z);
        hidden.push(h);
    }
    Ok(ComposeTrace { hidden, pre })
}

/// Compose a dependency path into a single vector.
///
/// A 1-hop path returns its relation row unchanged; longer paths fold
/// steps through the composer with hard-tanh clamping, so every output
/// component of a multi-hop composition lies in [-1, 1].
pub fn compose_path(path: &DepPath, params: &ModelParams) -> Result<Vec<f64>> {
    let trace = compose_with_trace(path, params)?;
    Ok(trace.hidden.into_iter().next_back().expect("non-empty path"))
}

/// Configuration for embedding training.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    /// Embedding dimension d.
    pub dim: usize,
    /// Negative words per context pair (k_W).
    pub neg_words: usize,
    /// Negative paths per triple, indexed by hop count minus one.
    pub neg_paths: Vec<usize>,
    pub initial_lr: f64,
    /// Linear-context window: positions i-window..=i+window count.
    pub window: usize,
    pub max_hops: usize,
    pub epochs: usize,
    pub threads: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            neg_words: 5,
            neg_paths: vec![5, 3, 2],
            initial_lr: 0.001,
            window: 5,
            max_hops: 3,
            epochs: 5,
            threads: 1,
            seed: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1
            || self.neg_words < 1
            || self.window < 1
            || self.max_hops < 1
            || self.epochs < 1
            || self.threads < 1
        {
            return Err(Error::invalid("all training counts must be at least 1"));
        }
        if !(self.initial_lr > 0.0) {
            return Err(Error::invalid("initial learning rate must be positive"));
        }
        if self.neg_paths.len() < self.max_hops || self.neg_paths.iter().any(|&k| k < 1) {
            return Err(Error::invalid(format!(
                "need a positive negative-path count for each of the {} hop buckets",
                self.max_hops
            )));
        }
        Ok(())
    }

    /// Negative paths to draw for a path of `hop` hops.
    pub fn neg_paths_for(&self, hop: usize) -> usize {
        self.neg_paths[hop - 1]
    }
}

/// A linear-context training pair: a context word observed inside the
/// target word's window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextPair {
    pub target: crate::corpus::WordId,
    pub context: crate::corpus::WordId,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, ParsedSentence, Token};
    use crate::deptree::tree_path;

    pub(crate) fn toy_sentence() -> ParsedSentence {
        let arcs: &[(&str, usize, &str)] = &[
            ("staff", 0, "root"),
            ("waiter", 1, "dep"),
            ("very", 2, "advmod"),
            ("professional", 2, "amod"),
            ("service", 1, "conj"),
            ("and", 1, "cc"),
        ];
        ParsedSentence {
            id: "t".to_string(),
            tokens: arcs
                .iter()
                .map(|&(form, head, rel)| Token {
                    form: form.to_string(),
                    pos: "X".to_string(),
                    head,
                    rel: rel.to_string(),
                    capitalized: false,
                })
                .collect(),
        }
    }

    #[test]
    fn one_hop_composition_returns_relation_row() {
        let s = toy_sentence();
        let v = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let params = ModelParams::init(&v, 7, 3);
        let path = tree_path(&s, &v, 1, 0).unwrap(); // dep:u, one hop
        let composed = compose_path(&path, &params).unwrap();
        assert_eq!(composed.as_slice(), params.relation_vec(path.steps()[0]).unwrap());
    }

    #[test]
    fn htanh_clamps_per_case_analysis() {
        assert_eq!(htanh(1.5), 1.0);
        assert_eq!(htanh(-2.0), -1.0);
        assert_eq!(htanh(0.3), 0.3);
        assert_eq!(htanh_grad(0.3), 1.0);
        assert_eq!(htanh_grad(1.0), 0.0);
        assert_eq!(htanh_grad(-1.0), 0.0);
        assert_eq!(htanh_grad(2.5), 0.0);
    }

    #[test]
    fn zero_composer_collapses_multi_hop_paths() {
        let s = toy_sentence();
        let v = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let mut params = ModelParams::init(&v, 5, 3);
        params.composer = Matrix::zeros(5, 10);
        let path = tree_path(&s, &v, 4, 3).unwrap(); // 3 hops
        let composed = compose_path(&path, &params).unwrap();
        assert!(composed.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn multi_hop_outputs_stay_clamped() {
        use rand::SeedableRng;
        let s = toy_sentence();
        let v = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for trial in 0..50 {
            let mut params = ModelParams::init(&v, 6, trial);
            // Exaggerate the composer so clamping actually engages.
            for w in params.composer.data_mut() {
                *w = rng.random_range(-3.0..=3.0);
            }
            for (i, j) in [(4usize, 3usize), (2, 5), (3, 0)] {
                let path = tree_path(&s, &v, i, j).unwrap();
                if path.len() < 2 {
                    continue;
                }
                let composed = compose_path(&path, &params).unwrap();
                assert!(composed.iter().all(|&x| (-1.0..=1.0).contains(&x)));
            }
        }
    }

    #[test]
    fn unknown_relation_row_is_an_error() {
        let s = toy_sentence();
        let v = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let params = ModelParams::init(&v, 4, 0);
        let bogus = DepPath::new(vec![DirectedRelation::new(
            crate::corpus::RelId(99),
            crate::deptree::Direction::TowardHead,
        )])
        .unwrap();
        assert!(compose_path(&bogus, &params).is_err());
    }

    #[test]
    fn init_is_seed_deterministic_and_shaped() {
        let s = toy_sentence();
        let v = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let a = ModelParams::init(&v, 9, 42);
        let b = ModelParams::init(&v, 9, 42);
        assert_eq!(a, b);
        assert_ne!(a, ModelParams::init(&v, 9, 43));
        assert!(a.target_words.row(0).iter().all(|&x| x == 0.0), "unk row stays zero");
        assert!(a.context_words.data().iter().all(|&x| x == 0.0));
        assert_eq!(a.relations.n_rows(), 2 * v.n_relations());
        assert_eq!(a.composer.n_rows(), 9);
        assert_eq!(a.composer.n_cols(), 18);
        let bound = 0.5 / 9.0;
        assert!(a.target_words.data().iter().all(|&x| x.abs() <= bound));
    }
}
