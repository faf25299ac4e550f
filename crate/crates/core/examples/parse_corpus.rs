//! Read CoNLL-U text, survive malformed blocks, and build a frequency-
//! filtered vocabulary with smoothed sampling weights.
//!
//! Run with: cargo run -p pathvec --example parse_corpus

use std::io::Cursor;

use pathvec::corpus::{build_vocab, parse_conllu, WordId};

const CONLLU: &str = "\
# sent_id = r1
1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_
2\tpizza\tpizza\tNOUN\t_\t_\t3\tnsubj\t_\t_
3\twas\tbe\tAUX\t_\t_\t0\troot\t_\t_
4\tdelicious\tdelicious\tADJ\t_\t_\t3\tacomp\t_\t_

# sent_id = broken
1\tbad\tbad\tADJ\t_\t_\tx\tamod\t_\t_

# sent_id = r2
1\tGreat\tgreat\tADJ\t_\t_\t2\tamod\t_\t_
2\tpizza\tpizza\tNOUN\t_\t_\t0\troot\t_\t_
3\t!\t!\tPUNCT\t_\t_\t2\tpunct\t_\t_
";

fn main() -> pathvec::Result<()> {
    let outcome = parse_conllu(Cursor::new(CONLLU))?;
    println!("parsed {} sentences", outcome.sentences.len());
    for issue in &outcome.issues {
        println!("skipped a sentence: {issue}");
    }
    for sentence in &outcome.sentences {
        let forms: Vec<&str> = sentence.tokens.iter().map(|t| t.form.as_str()).collect();
        println!("  [{}] {}", sentence.id, forms.join(" "));
    }

    let vocab = build_vocab(&outcome.sentences, 1)?;
    println!(
        "\nvocabulary: {} words (+ the reserved unknown), {} relation labels",
        vocab.n_retained(),
        vocab.n_relations()
    );
    println!("word\tcount\tsampling weight (count^0.75)");
    for i in 1..vocab.n_words() {
        let id = WordId(i as u32);
        let count = vocab.word_count(id);
        println!("{}\t{}\t{:.3}", vocab.word(id), count, (count as f64).powf(0.75));
    }

    // The same corpus with the frequency cutoff raised: singletons drop out.
    let filtered = build_vocab(&outcome.sentences, 2)?;
    println!(
        "\nwith min count 2 only {} word(s) survive; 'delicious' maps to unknown: {}",
        filtered.n_retained(),
        filtered.word_id("delicious").is_none()
    );
    Ok(())
}
