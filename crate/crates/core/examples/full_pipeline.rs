//! The whole pipeline in one place: generate a labeled synthetic corpus,
//! train embeddings, discretize, assemble features under three ablation
//! settings (W, W+L, W+L+D), train a CRF per setting, and score
//! exact-span F1 on held-out sentences.
//!
//! Run with: cargo run --release -p pathvec --example full_pipeline

use std::time::Instant;

use pathvec::corpus::build_vocab;
use pathvec::eval::{bio_to_spans, span_f1, BioMode, SpanSet};
use pathvec::features::{assemble_features, fit_block_tables, FeatureConfig, FeatureSets};
use pathvec::synth::{generate, SynthConfig};
use pathvec::tagger::{train_crf, viterbi_decode, TaggerConfig};
use pathvec::{embed, eval};

fn main() -> pathvec::Result<()> {
    let start = Instant::now();
    let train = generate(&SynthConfig { sentences: 2000, seed: 21 });
    let test = generate(&SynthConfig { sentences: 500, seed: 22 });

    let mut vocab = build_vocab(&train.sentences, 10)?;
    let emb_config = embed::TrainConfig { dim: 25, seed: 5, ..Default::default() };
    let (params, _) = embed::train_with_stats(&train.sentences, &mut vocab, &emb_config)?;
    println!("embeddings trained in {:.1}s", start.elapsed().as_secs_f64());

    let tagger_config = TaggerConfig { seed: 5, ..Default::default() };
    println!("\nsetting    precision  recall     f1");
    for sets in ["W", "W,L", "W,L,D"] {
        let config = FeatureConfig {
            sets: FeatureSets::parse(sets)?,
            ..Default::default()
        };
        let tables = fit_block_tables(&train.sentences, &vocab, &params, &config, 15)?;

        let mut rows = Vec::new();
        for sentence in &train.sentences {
            let spans = train.gold.spans(&sentence.id).expect("generated");
            let labels = eval::spans_to_bio(spans, sentence.len())?;
            rows.push(assemble_features(sentence, Some(&labels), &vocab, &params, &tables, &config)?);
        }
        let model = train_crf(&rows, &tagger_config)?;

        let mut pred = SpanSet::new();
        for sentence in &test.sentences {
            pred.touch(&sentence.id);
            let rows = assemble_features(sentence, None, &vocab, &params, &tables, &config)?;
            for (a, b) in bio_to_spans(&viterbi_decode(&model, &rows), BioMode::Lenient) {
                pred.insert(&sentence.id, a, b)?;
            }
        }
        let scores = span_f1(&pred, &test.gold);
        println!(
            "{:<10} {:<10.4} {:<10.4} {:<10.4}",
            sets.replace(',', "+"),
            scores.precision,
            scores.recall,
            scores.f1
        );
    }
    println!("\ntotal {:.1}s", start.elapsed().as_secs_f64());
    Ok(())
}
