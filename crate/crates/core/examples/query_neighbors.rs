//! Persist a trained model to its file set, reload it, and answer
//! similarity queries: plain nearest neighbors and queries that add a
//! composed dependency path to a word vector.
//!
//! Run with: cargo run --release -p pathvec --example query_neighbors

use pathvec::corpus::build_vocab;
use pathvec::deptree::DepPath;
use pathvec::embed::{load_model, nearest_neighbors, train, write_model, Query, TrainConfig};
use pathvec::synth::{generate, SynthConfig};

fn main() -> pathvec::Result<()> {
    let corpus = generate(&SynthConfig { sentences: 3000, seed: 17 });
    let mut vocab = build_vocab(&corpus.sentences, 10)?;
    let config = TrainConfig { dim: 25, seed: 3, ..Default::default() };
    let params = train(&corpus.sentences, &mut vocab, &config)?;

    let dir = tempfile::tempdir().expect("temp dir");
    let prefix = dir.path().join("model");
    write_model(&params, &vocab, &prefix, Some("query_neighbors example"))?;
    println!("wrote model files under {}", prefix.display());

    let (vocab, params) = load_model(&prefix)?;
    for word in ["salad", "crunchy"] {
        let id = vocab.word_id(word).expect("in vocabulary");
        println!("\nnearest neighbors of {word:?}:");
        for (hit, cosine) in nearest_neighbors(&Query::Word(id), 6, &params)? {
            println!("  {:<12} {cosine:.3}", vocab.word(hit));
        }
    }

    // A modifier plus the path toward its head lands among head nouns;
    // composing two hops through the conjunction stays in the same class.
    for (word, path) in [("zesty", "amod:u"), ("zesty", "amod:u/conj:d")] {
        let id = vocab.word_id(word).expect("in vocabulary");
        let parsed = DepPath::parse(path, &vocab)?;
        println!("\n{word:?} + {path}:");
        for (hit, cosine) in nearest_neighbors(&Query::WordPath(id, parsed), 6, &params)? {
            println!("  {:<12} {cosine:.3}", vocab.word(hit));
        }
    }
    Ok(())
}
