//! The linear-chain CRF on its own: lexical baseline templates, training
//! with L1 regularization, Viterbi decoding, and position marginals.
//!
//! Run with: cargo run --release -p pathvec --example crf_tagger

use std::io::Cursor;

use pathvec::corpus::parse_conllu;
use pathvec::eval::{bio_to_spans, BioMode};
use pathvec::features::FeatureRow;
use pathvec::synth::{generate, SynthConfig};
use pathvec::tagger::{
    baseline_templates, forward_backward, train_crf, viterbi_decode, Label, TaggerConfig,
};

fn labeled_rows(
    corpus: &pathvec::synth::SynthCorpus,
) -> pathvec::Result<Vec<Vec<FeatureRow>>> {
    let mut out = Vec::new();
    for sentence in &corpus.sentences {
        let spans = corpus.gold.spans(&sentence.id).expect("generated");
        let labels = pathvec::eval::spans_to_bio(spans, sentence.len())?;
        let features = baseline_templates(sentence);
        out.push(
            features
                .into_iter()
                .zip(labels)
                .enumerate()
                .map(|(index, (features, label))| FeatureRow {
                    index,
                    features,
                    label: Some(label),
                })
                .collect(),
        );
    }
    Ok(out)
}

fn main() -> pathvec::Result<()> {
    // Template features on a small parsed sentence.
    let parsed = parse_conllu(Cursor::new(
        "1\tDelicious\tdelicious\tADJ\t_\t_\t2\tamod\t_\t_\n\
         2\tdumplings\tdumpling\tNOUN\t_\t_\t0\troot\t_\t_\n",
    ))?;
    let templates = baseline_templates(&parsed.sentences[0]);
    println!("a few template features of \"Delicious\":");
    for f in templates[0].iter().filter(|f| {
        f.starts_with("w[") || f.starts_with("cap[0]") || f.starts_with("stem[0]") || f.starts_with("suf[0,3]")
    }) {
        println!("  {f}");
    }

    // Train on lexical templates alone over a synthetic corpus.
    let train_corpus = generate(&SynthConfig { sentences: 1200, seed: 31 });
    let test_corpus = generate(&SynthConfig { sentences: 200, seed: 32 });
    let rows = labeled_rows(&train_corpus)?;
    let model = train_crf(&rows, &TaggerConfig { seed: 1, ..Default::default() })?;
    println!(
        "\ntrained on {} sentences, {} features, final objective {:.4}",
        rows.len(),
        model.n_features(),
        model.final_objective
    );

    let sentence = &test_corpus.sentences[0];
    let forms: Vec<&str> = sentence.tokens.iter().map(|t| t.form.as_str()).collect();
    let test_rows: Vec<FeatureRow> = baseline_templates(sentence)
        .into_iter()
        .enumerate()
        .map(|(index, features)| FeatureRow { index, features, label: None })
        .collect();
    let decoded = viterbi_decode(&model, &test_rows);
    println!("\nsentence: {}", forms.join(" "));
    let rendered: Vec<&str> = decoded.iter().map(|l| l.as_str()).collect();
    println!("decoded:  {}", rendered.join(" "));
    println!("spans:    {:?}", bio_to_spans(&decoded, BioMode::Lenient));
    println!("gold:     {:?}", test_corpus.gold.spans(&sentence.id).unwrap());

    let fb = forward_backward(&model, &test_rows);
    println!("\nper-token marginals (B / I / O):");
    for (i, marginal) in fb.node_marginals.iter().enumerate() {
        println!(
            "  {:<12} {:.3} / {:.3} / {:.3}",
            forms[i],
            marginal[Label::B.index()],
            marginal[Label::I.index()],
            marginal[Label::O.index()]
        );
    }
    Ok(())
}
