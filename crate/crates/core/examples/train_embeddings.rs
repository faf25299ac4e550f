//! Train word and dependency-path embeddings on a synthetic review
//! corpus, then inspect what the translation objective learned: scores
//! of true triples against corrupted paths, and word+path queries that
//! should land on the planted noun class.
//!
//! Run with: cargo run --release -p pathvec --example train_embeddings

use std::time::Instant;

use pathvec::corpus::build_vocab;
use pathvec::deptree::DepPath;
use pathvec::embed::{nearest_neighbors, ranking_score, train_with_stats, Query, TrainConfig};
use pathvec::synth::{generate, SynthConfig};

fn main() -> pathvec::Result<()> {
    let corpus = generate(&SynthConfig { sentences: 5000, seed: 7 });
    let mut vocab = build_vocab(&corpus.sentences, 10)?;
    println!(
        "corpus: {} sentences, {} retained words, {} relation labels",
        corpus.sentences.len(),
        vocab.n_retained(),
        vocab.n_relations()
    );

    let config = TrainConfig { dim: 25, seed: 11, ..TrainConfig::default() };
    let start = Instant::now();
    let (params, stats) = train_with_stats(&corpus.sentences, &mut vocab, &config)?;
    println!(
        "trained {} instances in {:.1}s; mean instance loss {:.3} -> {:.3}",
        stats.instances,
        start.elapsed().as_secs_f64(),
        stats.loss_checkpoints.first().unwrap(),
        stats.loss_checkpoints.last().unwrap()
    );

    // Score a few true (adjective, noun, amod:u) triples against the same
    // pair with a corrupted path.
    let modifier_path = DepPath::parse("amod:u", &vocab)?;
    let corrupt_path = DepPath::parse("det:u", &vocab)?;
    println!("\ntrue path vs corrupted path scores:");
    for (a, b) in [("delicious", "pizza"), ("crispy", "bacon"), ("smoky", "sausage")] {
        let (Some(w1), Some(w2)) = (vocab.word_id(a), vocab.word_id(b)) else {
            continue;
        };
        let good = ranking_score(w1, w2, &modifier_path, &params)?;
        let bad = ranking_score(w1, w2, &corrupt_path, &params)?;
        println!("  {a} -> {b}: amod:u {good:+.3}   det:u {bad:+.3}");
    }

    println!("\nnearest neighbors of 'pizza':");
    let pizza = vocab.word_id("pizza").expect("in vocabulary");
    for (id, cosine) in nearest_neighbors(&Query::Word(pizza), 6, &params)? {
        println!("  {:<12} {cosine:.3}", vocab.word(id));
    }

    println!("\n'delicious' + amod:u (what does delicious modify?):");
    let delicious = vocab.word_id("delicious").expect("in vocabulary");
    let query = Query::WordPath(delicious, modifier_path);
    for (id, cosine) in nearest_neighbors(&query, 6, &params)? {
        println!("  {:<12} {cosine:.3}", vocab.word(id));
    }
    Ok(())
}
