//! Negative sampling from the smoothed frequency tables.
//!
//! Words and paths are drawn proportionally to count^(3/4). Paths are
//! bucketed by hop count and a corrupted path always has the same hop
//! count as the true one. A draw equal to the excluded item is retried
//! up to ten times, then accepted.

use rand::Rng;

use crate::corpus::{SamplingTable, Vocabulary, WordId};
use crate::deptree::DepPath;
use crate::error::{Error, Result};

const RESAMPLE_LIMIT: usize = 10;

/// Prebuilt sampling tables for a vocabulary, shared read-only by the
/// training workers.
pub struct NegativeSamplers<'v> {
    vocab: &'v Vocabulary,
    paths: Vec<Option<SamplingTable>>,
}

impl<'v> NegativeSamplers<'v> {
    /// Build tables for every hop bucket the vocabulary has recorded.
    pub fn new(vocab: &'v Vocabulary) -> Result<Self> {
        let mut paths = Vec::new();
        for hop in 1..=vocab.max_recorded_hops() {
            paths.push(match vocab.path_table(hop) {
                Some(table) => Some(table.sampler()?),
                None => None,
            });
        }
        Ok(NegativeSamplers { vocab, paths })
    }

    /// Draw `k` word ids, each retried against `exclude`.
    pub fn sample_words<R: Rng + ?Sized>(&self, k: usize, exclude: WordId, rng: &mut R) -> Vec<WordId> {
        let table = self.vocab.word_sampler();
        (0..k)
            .map(|_| {
                let mut draw = table.sample(rng);
                for _ in 0..RESAMPLE_LIMIT {
                    if draw != exclude.index() {
                        break;
                    }
                    draw = table.sample(rng);
                }
                WordId(draw as u32)
            })
            .collect()
    }

    /// Draw `k` paths of exactly `hop` hops, each retried against `exclude`.
    pub fn sample_paths<R: Rng + ?Sized>(
        &self,
        hop: usize,
        k: usize,
        exclude: &DepPath,
        rng: &mut R,
    ) -> Result<Vec<DepPath>> {
        let sampler = self
            .paths
            .get(hop.wrapping_sub(1))
            .and_then(Option::as_ref)
            .ok_or_else(|| Error::invalid(format!("no recorded paths of {hop} hops")))?;
        let table = self.vocab.path_table(hop).expect("sampler implies table");
        Ok((0..k)
            .map(|_| {
                let mut draw = sampler.sample(rng);
                for _ in 0..RESAMPLE_LIMIT {
                    if &table.paths()[draw] != exclude {
                        break;
                    }
                    draw = sampler.sample(rng);
                }
                table.paths()[draw].clone()
            })
            .collect())
    }
}

/// Draw `k` negative context words for one pair. Convenience wrapper
/// around [`NegativeSamplers`] for one-off use.
pub fn sample_negative_words<R: Rng + ?Sized>(
    k: usize,
    exclude: WordId,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Vec<WordId>> {
    Ok(NegativeSamplers::new(vocab)?.sample_words(k, exclude, rng))
}

/// Draw `k` negative paths of exactly `hop` hops for one triple.
pub fn sample_negative_paths<R: Rng + ?Sized>(
    hop: usize,
    k: usize,
    exclude: &DepPath,
    vocab: &Vocabulary,
    rng: &mut R,
) -> Result<Vec<DepPath>> {
    NegativeSamplers::new(vocab)?.sample_paths(hop, k, exclude, rng)
}
