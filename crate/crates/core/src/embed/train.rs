//! Asynchronous SGD over the joint objective.
//!
//! Workers partition the sentences and update one shared parameter set
//! without locking, in the Hogwild style: updates are sparse, so lossy
//! interleavings are tolerated by contract. Bitwise reproducibility is
//! guaranteed only for a single thread with a fixed seed. The learning
//! rate decays linearly over the processed instance count, with a floor
//! at 1e-4 of the initial rate.

use std::cell::UnsafeCell;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ParsedSentence, Vocabulary, WordId, UNK};
use crate::deptree::{dependency_context, index_paths, Triple};
use crate::error::{Error, Result};

use super::loss::{context_loss_and_grads, path_loss_and_grads};
use super::sampling::NegativeSamplers;
use super::{ContextPair, ModelParams, TrainConfig};

/// Shared mutable parameters for lock-free parallel SGD. Every worker
/// holds a clone and may take a mutable view concurrently; races on
/// individual `f64` updates are accepted.
struct Hogwild(Arc<UnsafeCell<ModelParams>>);

unsafe impl Send for Hogwild {}
unsafe impl Sync for Hogwild {}

impl Clone for Hogwild {
    fn clone(&self) -> Self {
        Hogwild(Arc::clone(&self.0))
    }
}

impl Hogwild {
    fn new(params: ModelParams) -> Self {
        Hogwild(Arc::new(UnsafeCell::new(params)))
    }

    #[allow(clippy::mut_from_ref)]
    fn get_mut(&self) -> &mut ModelParams {
        unsafe { &mut *self.0.get() }
    }

    fn into_inner(self) -> ModelParams {
        match Arc::try_unwrap(self.0) {
            Ok(cell) => cell.into_inner(),
            Err(_) => panic!("workers still hold the shared parameters"),
        }
    }
}

/// Diagnostics from one training run.
#[derive(Debug, Default, Clone)]
pub struct TrainStats {
    /// Mean instance loss per window of 1000 updates, in order. Collected
    /// only for single-threaded runs; empty otherwise.
    pub loss_checkpoints: Vec<f64>,
    /// Total instances processed (pairs plus triples, over all epochs).
    pub instances: u64,
}

struct LossMeter {
    sum: f64,
    count: u64,
    checkpoints: Vec<f64>,
}

impl LossMeter {
    fn new() -> Self {
        LossMeter { sum: 0.0, count: 0, checkpoints: Vec::new() }
    }

    fn record(&mut self, loss: f64) {
        self.sum += loss;
        self.count += 1;
        if self.count == 1000 {
            self.checkpoints.push(self.sum / self.count as f64);
            self.sum = 0.0;
            self.count = 0;
        }
    }

    fn finish(mut self) -> Vec<f64> {
        if self.count > 0 {
            self.checkpoints.push(self.sum / self.count as f64);
        }
        self.checkpoints
    }
}

/// One SGD instance: a linear-context pair (Eq. 4 side) or a path triple
/// (Eq. 1 side). Both carry equal weight.
enum Instance {
    Pair(ContextPair),
    Triple(Triple),
}

/// The trainable instances of one sentence, in processing order: for each
/// target position, its linear-context pairs (left to right), then its
/// path triples (level order).
fn sentence_instances(
    sentence: &ParsedSentence,
    vocab: &Vocabulary,
    config: &TrainConfig,
) -> Vec<Instance> {
    let n = sentence.len();
    let mut out = Vec::new();
    let ids: Vec<WordId> = sentence
        .tokens
        .iter()
        .map(|t| vocab.word_id_or_unk(&t.form))
        .collect();
    for i in 0..n {
        let target = ids[i];
        if target == UNK {
            continue;
        }
        let lo = i.saturating_sub(config.window);
        let hi = (i + config.window).min(n - 1);
        for j in lo..=hi {
            if j == i || ids[j] == UNK {
                continue;
            }
            out.push(Instance::Pair(ContextPair { target, context: ids[j] }));
        }
        for (path, j) in dependency_context(sentence, vocab, i, config.max_hops) {
            if j == UNK {
                continue;
            }
            out.push(Instance::Triple(Triple { w1: target, w2: j, path }));
        }
    }
    out
}

struct Worker<'a> {
    sentences: &'a [ParsedSentence],
    vocab: &'a Vocabulary,
    config: &'a TrainConfig,
    samplers: &'a NegativeSamplers<'a>,
    params: Hogwild,
    processed: &'a AtomicU64,
    total: u64,
}

impl Worker<'_> {
    fn next_lr(&self) -> f64 {
        let done = self.processed.fetch_add(1, Ordering::Relaxed);
        let remaining = 1.0 - done as f64 / self.total as f64;
        self.config.initial_lr * remaining.max(1e-4)
    }

    fn run(&self, rng: &mut ChaCha8Rng, mut meter: Option<&mut LossMeter>) -> Result<()> {
        for _ in 0..self.config.epochs {
            for sentence in self.sentences {
                for instance in sentence_instances(sentence, self.vocab, self.config) {
                    let lr = self.next_lr();
                    let loss = match instance {
                        Instance::Pair(pair) => {
                            let negatives = self
                                .samplers
                                .sample_words(self.config.neg_words, pair.context, rng);
                            // A duplicate accepted after retry exhaustion
                            // would violate the loss precondition; drop it.
                            let negatives: Vec<WordId> = negatives
                                .into_iter()
                                .filter(|&w| w != pair.context)
                                .collect();
                            if negatives.is_empty() {
                                continue;
                            }
                            let params = self.params.get_mut();
                            let (loss, grads) = context_loss_and_grads(&pair, &negatives, params)?;
                            grads.apply(params, lr);
                            loss
                        }
                        Instance::Triple(triple) => {
                            let hop = triple.path.len();
                            let negatives = self.samplers.sample_paths(
                                hop,
                                self.config.neg_paths_for(hop),
                                &triple.path,
                                rng,
                            )?;
                            let params = self.params.get_mut();
                            let (loss, grads) = path_loss_and_grads(&triple, &negatives, params)?;
                            grads.apply(params, lr);
                            loss
                        }
                    };
                    if let Some(m) = meter.as_deref_mut() {
                        m.record(loss);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Train embedding parameters over a parsed corpus.
///
/// If the vocabulary has no recorded path tables yet, a counting pass
/// fills them first. See [`train_with_stats`] for loss diagnostics.
pub fn train(
    sentences: &[ParsedSentence],
    vocab: &mut Vocabulary,
    config: &TrainConfig,
) -> Result<ModelParams> {
    train_with_stats(sentences, vocab, config).map(|(params, _)| params)
}

/// [`train`], returning loss checkpoints alongside the parameters.
pub fn train_with_stats(
    sentences: &[ParsedSentence],
    vocab: &mut Vocabulary,
    config: &TrainConfig,
) -> Result<(ModelParams, TrainStats)> {
    config.validate()?;
    if vocab.max_recorded_hops() == 0 {
        index_paths(sentences, vocab, config.max_hops);
    }
    let vocab = &*vocab;
    let mut per_epoch = 0u64;
    for sentence in sentences {
        per_epoch += sentence_instances(sentence, vocab, config).len() as u64;
    }
    let total = per_epoch * config.epochs as u64;
    if total == 0 {
        return Err(Error::invalid("no trainable instances in the corpus"));
    }

    let samplers = NegativeSamplers::new(vocab)?;
    let params = Hogwild::new(ModelParams::init(vocab, config.dim, config.seed));
    let processed = AtomicU64::new(0);

    if config.threads <= 1 {
        let worker = Worker {
            sentences,
            vocab,
            config,
            samplers: &samplers,
            params: params.clone(),
            processed: &processed,
            total,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(worker_seed(config.seed, 0));
        let mut meter = LossMeter::new();
        worker.run(&mut rng, Some(&mut meter))?;
        drop(worker);
        let stats = TrainStats {
            loss_checkpoints: meter.finish(),
            instances: processed.into_inner(),
        };
        return Ok((params.into_inner(), stats));
    }

    let chunk = sentences.len().div_ceil(config.threads);
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (t, part) in sentences.chunks(chunk).enumerate() {
            let worker = Worker {
                sentences: part,
                vocab,
                config,
                samplers: &samplers,
                params: params.clone(),
                processed: &processed,
                total,
            };
            let seed = worker_seed(config.seed, t as u64);
            handles.push(scope.spawn(move || {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                worker.run(&mut rng, None)
            }));
        }
        for handle in handles {
            handle.join().expect("training worker panicked")?;
        }
        Ok(())
    })?;
    let stats = TrainStats {
        loss_checkpoints: Vec::new(),
        instances: processed.into_inner(),
    };
    Ok((params.into_inner(), stats))
}

fn worker_seed(seed: u64, thread: u64) -> u64 {
    seed ^ (thread.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, ParsedSentence, Token};

    fn sentence(forms: &[&str], heads: &[usize], rels: &[&str]) -> ParsedSentence {
        ParsedSentence {
            id: "t".into(),
            tokens: forms
                .iter()
                .zip(heads)
                .zip(rels)
                .map(|((&form, &head), &rel)| Token {
                    form: form.to_string(),
                    pos: "X".into(),
                    head,
                    rel: rel.to_string(),
                    capitalized: false,
                })
                .collect(),
        }
    }

    fn toy_corpus() -> Vec<ParsedSentence> {
        let mut out = Vec::new();
        for (a, b) in [
            ("good", "pizza"),
            ("bad", "pizza"),
            ("good", "soup"),
            ("warm", "soup"),
            ("good", "bread"),
        ] {
            out.push(sentence(
                &["the", a, b, "arrived"],
                &[3, 3, 4, 0],
                &["det", "amod", "nsubj", "root"],
            ));
            out.push(sentence(
                &[b, "was", a],
                &[3, 3, 0],
                &["nsubj", "cop", "root"],
            ));
        }
        out
    }

    #[test]
    fn single_thread_fixed_seed_is_bitwise_reproducible() {
        let corpus = toy_corpus();
        let config = TrainConfig {
            dim: 8,
            epochs: 1,
            seed: 42,
            ..TrainConfig::default()
        };
        let mut v1 = build_vocab(&corpus, 1).unwrap();
        let mut v2 = build_vocab(&corpus, 1).unwrap();
        let a = train(&corpus, &mut v1, &config).unwrap();
        let b = train(&corpus, &mut v2, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn window_respects_sentence_bounds() {
        let s = sentence(
            &["a", "b", "c", "d", "e", "f", "g", "h"],
            &[0, 1, 1, 1, 1, 1, 1, 1],
            &["root", "dep", "dep", "dep", "dep", "dep", "dep", "dep"],
        );
        let vocab = build_vocab(std::slice::from_ref(&s), 1).unwrap();
        let config = TrainConfig { window: 5, ..TrainConfig::default() };
        let pairs: Vec<ContextPair> = sentence_instances(&s, &vocab, &config)
            .into_iter()
            .filter_map(|inst| match inst {
                Instance::Pair(p) => Some(p),
                Instance::Triple(_) => None,
            })
            .collect();
        // Target at position 0 sees positions 1..=5; target at position 3
        // sees 0..=2 and 4..=7 (truncated at both sides).
        let for_target = |t: &str| -> Vec<String> {
            let id = vocab.word_id(t).unwrap();
            pairs
                .iter()
                .filter(|p| p.target == id)
                .map(|p| vocab.word(p.context).to_string())
                .collect()
        };
        assert_eq!(for_target("a"), vec!["b", "c", "d", "e", "f"]);
        assert_eq!(for_target("d"), vec!["a", "b", "c", "e", "f", "g", "h"]);
        assert_eq!(for_target("h"), vec!["c", "d", "e", "f", "g"]);
    }

    #[test]
    fn empty_training_set_is_an_error() {
        // Every word filtered out: nothing trainable.
        let corpus = vec![sentence(&["a", "b"], &[0, 1], &["root", "amod"])];
        let mut vocab = build_vocab(&corpus, 1).unwrap();
        let config = TrainConfig {
            dim: 4,
            ..TrainConfig::default()
        };
        // A vocabulary from a different corpus retains nothing from this one.
        let other = vec![sentence(&["x", "y"], &[0, 1], &["root", "amod"])];
        let mut unrelated = build_vocab(&other, 1).unwrap();
        assert!(train(&corpus, &mut unrelated, &config).is_err());
        assert!(train(&corpus, &mut vocab, &config).is_ok());
    }

    #[test]
    fn loss_checkpoints_trend_downward_on_the_toy_corpus() {
        let corpus: Vec<ParsedSentence> =
            std::iter::repeat_with(toy_corpus).take(40).flatten().collect();
        let mut vocab = build_vocab(&corpus, 1).unwrap();
        let config = TrainConfig {
            dim: 10,
            epochs: 3,
            seed: 7,
            initial_lr: 0.02,
            ..TrainConfig::default()
        };
        let (_, stats) = train_with_stats(&corpus, &mut vocab, &config).unwrap();
        assert!(stats.loss_checkpoints.len() >= 3);
        let first = stats.loss_checkpoints.first().unwrap();
        let last = stats.loss_checkpoints.last().unwrap();
        assert!(last < first, "loss should trend down: {first} -> {last}");
    }

    #[test]
    fn multithreaded_training_runs() {
        let corpus: Vec<ParsedSentence> =
            std::iter::repeat_with(toy_corpus).take(10).flatten().collect();
        let mut vocab = build_vocab(&corpus, 1).unwrap();
        let config = TrainConfig {
            dim: 6,
            epochs: 1,
            threads: 3,
            ..TrainConfig::default()
        };
        let params = train(&corpus, &mut vocab, &config).unwrap();
        assert!(params.target_words.data().iter().all(|x| x.is_finite()));
        assert!(params.composer.data().iter().all(|x| x.is_finite()));
    }
}
