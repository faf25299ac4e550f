//! Path algebra on one dependency tree: unique paths between token
//! pairs, the ordered triples a sentence yields, and per-token
//! dependency contexts.
//!
//! Run with: cargo run -p pathvec --example tree_paths

use std::io::Cursor;

use pathvec::corpus::{build_vocab, parse_conllu};
use pathvec::deptree::{dependency_context, extract_triples, tree_path};

// A noun with a conjoined noun, where the adjective hangs off the
// conjunct's dependent: walking between the far words takes three hops.
const CONLLU: &str = "\
1\tstaff\tstaff\tNOUN\t_\t_\t0\troot\t_\t_
2\twaiter\twaiter\tNOUN\t_\t_\t1\tdep\t_\t_
3\tvery\tvery\tADV\t_\t_\t2\tadvmod\t_\t_
4\tprofessional\tprofessional\tADJ\t_\t_\t2\tamod\t_\t_
5\tservice\tservice\tNOUN\t_\t_\t1\tconj\t_\t_
6\tand\tand\tCCONJ\t_\t_\t1\tcc\t_\t_
";

fn main() -> pathvec::Result<()> {
    let outcome = parse_conllu(Cursor::new(CONLLU))?;
    let sentence = &outcome.sentences[0];
    let vocab = build_vocab(&outcome.sentences, 1)?;

    let find = |form: &str| {
        sentence
            .tokens
            .iter()
            .position(|t| t.form == form)
            .expect("token present")
    };

    println!("paths between word pairs:");
    for (from, to) in [("service", "professional"), ("professional", "service"), ("very", "staff")] {
        let path = tree_path(sentence, &vocab, find(from), find(to))?;
        println!("  {from:>12} -> {to:<12} {}  ({} hops)", path.display(&vocab), path.len());
    }

    let triples = extract_triples(sentence, &vocab, 3);
    println!("\n{} ordered triples within 3 hops, e.g.:", triples.len());
    for triple in triples.iter().take(5) {
        println!(
            "  ({}, {the_path}, {})",
            vocab.word(triple.w1),
            vocab.word(triple.w2),
            the_path = triple.path.display(&vocab)
        );
    }

    println!("\ndependency context of 'staff':");
    for (path, word) in dependency_context(sentence, &vocab, find("staff"), 3) {
        println!("  ({:<18} {})", path.display(&vocab) + ",", vocab.word(word));
    }
    Ok(())
}
