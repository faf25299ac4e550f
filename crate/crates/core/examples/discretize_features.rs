//! Turn real-valued embeddings into discrete CRF features: min-max bin
//! boundaries per dimension, integer codes, and named feature strings
//! for the word / linear-context / dependency-context blocks.
//!
//! Run with: cargo run --release -p pathvec --example discretize_features

use pathvec::corpus::build_vocab;
use pathvec::discretize::{apply_discretizer, fit_discretizer};
use pathvec::embed::{train, Matrix, TrainConfig};
use pathvec::features::{assemble_features, fit_block_tables, FeatureConfig, FeatureSets};
use pathvec::synth::{generate, SynthConfig};

fn main() -> pathvec::Result<()> {
    // The binning formula on a tiny hand-made matrix first.
    let columns = Matrix::from_rows(vec![
        vec![-2.0, -1.0, 0.0, 1.0, 2.0],
        vec![0.0, 0.25, 0.5, 0.75, 1.0],
    ])?;
    let table = fit_discretizer(&columns, 15)?;
    println!("dimension ranges and codes with 15 bins:");
    for dim in 0..table.dim() {
        println!(
            "  dim {dim}: [{}, {}] -> codes {:?}",
            table.min(dim),
            table.max(dim),
            table.codes()[dim]
        );
    }
    println!(
        "  a value outside the fitted range clamps: {:?}",
        apply_discretizer(&table, &[9.9, -3.0])?
    );

    // Now the real thing: block tables fitted over a trained model.
    let corpus = generate(&SynthConfig { sentences: 2000, seed: 9 });
    let mut vocab = build_vocab(&corpus.sentences, 10)?;
    let params = train(
        &corpus.sentences,
        &mut vocab,
        &TrainConfig { dim: 25, seed: 2, ..Default::default() },
    )?;
    let config = FeatureConfig { sets: FeatureSets::ALL, ..Default::default() };
    let tables = fit_block_tables(&corpus.sentences, &vocab, &params, &config, 15)?;
    println!(
        "\nfitted blocks: W has {} dims, L {}, D {}",
        tables.word.as_ref().unwrap().dim(),
        tables.linear.as_ref().unwrap().dim(),
        tables.dep.as_ref().unwrap().dim()
    );

    let sentence = &corpus.sentences[0];
    let rows = assemble_features(sentence, None, &vocab, &params, &tables, &config)?;
    let forms: Vec<&str> = sentence.tokens.iter().map(|t| t.form.as_str()).collect();
    println!("\nsentence: {}", forms.join(" "));
    let row = &rows[2];
    println!(
        "features of token {:?} ({} total), first few of each block:",
        forms[row.index],
        row.features.len()
    );
    for prefix in ["W", "L-2_", "D"] {
        let sample: Vec<&str> = row
            .features
            .iter()
            .filter(|f| f.starts_with(prefix) && !f.starts_with("L-2_1"))
            .take(4)
            .map(String::as_str)
            .collect();
        println!("  {}", sample.join(" "));
    }
    Ok(())
}
