//! Drive the command-line pipeline end to end from library code: write a
//! corpus and gold spans to disk, then sweep bin count and dimension
//! over an 80/20 split and print the resulting F1 grid.
//!
//! Run with: cargo run --release -p pathvec --example sweep_grid

use std::fs;

use pathvec::synth::{generate, SynthConfig};

fn main() -> pathvec::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let corpus = generate(&SynthConfig { sentences: 1200, seed: 41 });

    let conllu = dir.path().join("reviews.conllu");
    fs::write(&conllu, corpus.conllu())?;
    let spans = dir.path().join("gold.tsv");
    pathvec::io::atomic_write(&spans, |w| corpus.gold.write_to(w, None))?;

    // Small grid so the example finishes quickly; the `start:end:step`
    // syntax expands inclusively.
    let out = dir.path().join("sweep.tsv");
    pathvec::cli::run([
        "pathvec",
        "sweep",
        "--conllu",
        conllu.to_str().unwrap(),
        "--spans",
        spans.to_str().unwrap(),
        "--l",
        "5:15:5",
        "--d",
        "10,25",
        "--epochs",
        "3",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ])?;

    println!("\nsweep file contents:");
    print!("{}", fs::read_to_string(&out)?);
    Ok(())
}
