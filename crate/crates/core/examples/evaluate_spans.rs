//! Exact-span scoring and the approximate-randomization significance
//! test between two systems.
//!
//! Run with: cargo run -p pathvec --example evaluate_spans

use pathvec::eval::{
    approx_randomization, bio_to_spans, exhaustive_randomization, span_f1, BioMode, SpanSet,
};
use pathvec::tagger::Label::{B, I, O};

fn main() -> pathvec::Result<()> {
    // BIO decoding, including the lenient treatment of an orphan I.
    println!("decode [O B I O] -> {:?}", bio_to_spans(&[O, B, I, O], BioMode::Lenient));
    println!("decode [I I O] lenient -> {:?}", bio_to_spans(&[I, I, O], BioMode::Lenient));
    println!("decode [I I O] strict  -> {:?}", bio_to_spans(&[I, I, O], BioMode::Strict));

    // Exact-match scoring: partial overlap earns nothing.
    let mut gold = SpanSet::new();
    let mut system_a = SpanSet::new();
    let mut system_b = SpanSet::new();
    for i in 0..10 {
        let id = format!("s{i}");
        gold.insert(&id, 2, 3)?;
        // System A nails eight sentences and misses two entirely.
        if i < 8 {
            system_a.insert(&id, 2, 3)?;
        } else {
            system_a.touch(&id);
        }
        // System B gets five right, two boundaries wrong, rest empty.
        if i < 5 {
            system_b.insert(&id, 2, 3)?;
        } else if i < 7 {
            system_b.insert(&id, 2, 4)?;
        } else {
            system_b.touch(&id);
        }
    }
    let a = span_f1(&system_a, &gold);
    let b = span_f1(&system_b, &gold);
    println!("\nsystem A: precision {:.3} recall {:.3} f1 {:.3}", a.precision, a.recall, a.f1);
    println!("system B: precision {:.3} recall {:.3} f1 {:.3}", b.precision, b.recall, b.f1);

    // Is the gap significant? With ten sentences the exact answer is
    // enumerable, and the Monte-Carlo estimate should land nearby.
    let exact = exhaustive_randomization(&system_a, &system_b, &gold)?;
    let monte_carlo = approx_randomization(&system_a, &system_b, &gold, 10_000, 42)?;
    println!("\nexact randomization p = {exact:.4}");
    println!("monte-carlo (10k iterations) p = {monte_carlo:.4}");
    let same = approx_randomization(&system_a, &system_a, &gold, 1000, 42)?;
    println!("identical systems p = {same}");
    Ok(())
}
