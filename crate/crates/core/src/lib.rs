//! Distributed representations of words and multi-hop dependency paths,
//! learned from dependency-parsed text with a translation-style ranking
//! objective, plus the machinery to turn those embeddings into discrete
//! features for a built-in linear-chain CRF aspect-term tagger.
//!
//! The pipeline, end to end:
//!
//! 1. [`corpus`] reads CoNLL-U sentences and builds frequency-filtered
//!    word and relation vocabularies with smoothed sampling tables.
//! 2. [`deptree`] extracts unique tree paths between token pairs, the
//!    `(w1, w2, path)` triples used for training, and per-token
//!    dependency contexts.
//! 3. [`embed`] trains word, relation, and path-composition parameters
//!    so that `w1 + compose(path) ≈ w2`, jointly with a skip-gram-style
//!    linear-context objective, using negative sampling and lock-free
//!    parallel SGD. It also answers similarity and word+path queries.
//! 4. [`discretize`] maps real-valued feature columns to integer bins.
//! 5. [`features`] assembles per-token feature rows from the target
//!    word, linear context, and dependency context blocks.
//! 6. [`tagger`] trains and decodes an L1-regularized linear-chain CRF
//!    over BIO labels, with classic lexical baseline templates.
//! 7. [`eval`] scores exact-span F1 and runs approximate-randomization
//!    significance tests.
//!
//! The `examples/` directory holds one runnable example per capability;
//! the `pathvec` binary wires the same pieces into file-based pipelines
//! (see [`cli`]).

pub mod cli;
pub mod corpus;
pub mod deptree;
pub mod discretize;
pub mod embed;
pub mod error;
pub mod eval;
pub mod features;
pub mod io;
pub mod synth;
pub mod tagger;

pub use error::{Error, Result};
