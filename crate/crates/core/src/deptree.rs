//! Path algebra over dependency trees.
//!
//! A dependency path is the unique sequence of directed grammatical
//! relations connecting two tokens through their lowest common ancestor:
//! ascent steps (toward the head) precede descent steps (toward the
//! dependent). Paths are unlexicalized; only relation labels and
//! traversal directions are kept.

use std::collections::VecDeque;

use crate::corpus::{ParsedSentence, RelId, Vocabulary, WordId, UNK};
use crate::error::{Error, Result};

/// Traversal direction of one path step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// From a dependent to its head (←).
    TowardHead,
    /// From a head to one of its dependents (→).
    TowardDependent,
}

impl Direction {
    /// One-letter code used in the path string syntax: `u` toward the
    /// head, `d` toward the dependent.
    pub fn code(self) -> char {
        match self {
            Direction::TowardHead => 'u',
            Direction::TowardDependent => 'd',
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::TowardHead => Direction::TowardDependent,
            Direction::TowardDependent => Direction::TowardHead,
        }
    }
}

/// A grammatical relation annotated with a traversal direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedRelation {
    pub rel: RelId,
    pub direction: Direction,
}

impl DirectedRelation {
    pub fn new(rel: RelId, direction: Direction) -> Self {
        DirectedRelation { rel, direction }
    }

    /// Row of this directed relation in the relation embedding matrix
    /// (two rows per label: toward-head first, then toward-dependent).
    pub fn row(self) -> usize {
        self.rel.index() * 2
            + match self.direction {
                Direction::TowardHead => 0,
                Direction::TowardDependent => 1,
            }
    }

    pub fn flipped(self) -> Self {
        DirectedRelation {
            rel: self.rel,
            direction: self.direction.flipped(),
        }
    }

    /// `label:u` / `label:d` token used in files and on the CLI.
    pub fn display(self, vocab: &Vocabulary) -> String {
        format!("{}:{}", vocab.rel_label(self.rel), self.direction.code())
    }
}

/// A dependency path: a non-empty sequence of directed relations along
/// the unique tree path between two tokens. The hop count is the number
/// of steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DepPath {
    steps: Vec<DirectedRelation>,
}

impl DepPath {
    pub fn new(steps: Vec<DirectedRelation>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::invalid("a dependency path needs at least one step"));
        }
        Ok(DepPath { steps })
    }

    /// Hop count.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn steps(&self) -> &[DirectedRelation] {
        &self.steps
    }

    /// The same path walked from the other endpoint: step order reversed
    /// and every direction flipped.
    pub fn reversed(&self) -> DepPath {
        DepPath {
            steps: self.steps.iter().rev().map(|s| s.flipped()).collect(),
        }
    }

    /// Render in the path string syntax, steps joined by `/`,
    /// e.g. `conj:u/dep:d/amod:d`.
    pub fn display(&self, vocab: &Vocabulary) -> String {
        self.steps
            .iter()
            .map(|s| s.display(vocab))
            .collect::<Vec<_>>()
            .join("/")
    }

    /// Parse the path string syntax against a vocabulary.
    pub fn parse(s: &str, vocab: &Vocabulary) -> Result<DepPath> {
        let mut steps = Vec::new();
        for part in s.split('/') {
            let (label, dir) = part
                .rsplit_once(':')
                .ok_or_else(|| Error::invalid(format!("bad path step {part:?}, want label:u or label:d")))?;
            let direction = match dir {
                "u" => Direction::TowardHead,
                "d" => Direction::TowardDependent,
                other => {
                    return Err(Error::invalid(format!(
                        "bad direction {other:?} in path step {part:?}"
                    )))
                }
            };
            let rel = vocab
                .rel_id(label)
                .ok_or_else(|| Error::invalid(format!("unknown relation label {label:?}")))?;
            steps.push(DirectedRelation::new(rel, direction));
        }
        DepPath::new(steps)
    }
}

/// A training triple: two vocabulary words and the path between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub w1: WordId,
    pub w2: WordId,
    pub path: DepPath,
}

/// The unique tree path from token `i` to token `j` (0-based indices).
///
/// Steps from `i` up to the lowest common ancestor carry
/// [`Direction::TowardHead`]; steps from the LCA down to `j` carry
/// [`Direction::TowardDependent`]. Errors if `i == j`, an index is out of
/// range, or a relation label is missing from the vocabulary.
pub fn tree_path(
    sentence: &ParsedSentence,
    vocab: &Vocabulary,
    i: usize,
    j: usize,
) -> Result<DepPath> {
    let n = sentence.len();
    if i >= n || j >= n {
        return Err(Error::invalid(format!("token index out of range ({i}, {j})")));
    }
    if i == j {
        return Err(Error::invalid("no path from a token to itself"));
    }
    let step_rel = |k: usize| -> Result<RelId> {
        let label = &sentence.tokens[k].rel;
        vocab
            .rel_id(label)
            .ok_or_else(|| Error::invalid(format!("unknown relation label {label:?}")))
    };

    let depth = |mut k: usize| {
        let mut d = 0usize;
        while let Some(p) = sentence.parent(k) {
            k = p;
            d += 1;
        }
        d
    };
    let (mut a, mut b) = (i, j);
    let (mut da, mut db) = (depth(a), depth(b));
    let mut up = Vec::new();
    let mut down = Vec::new();
    while da > db {
        up.push(DirectedRelation::new(step_rel(a)?, Direction::TowardHead));
        a = sentence.parent(a).expect("depth > 0");
        da -= 1;
    }
    while db > da {
        down.push(DirectedRelation::new(step_rel(b)?, Direction::TowardDependent));
        b = sentence.parent(b).expect("depth > 0");
        db -= 1;
    }
    while a != b {
        up.push(DirectedRelation::new(step_rel(a)?, Direction::TowardHead));
        down.push(DirectedRelation::new(step_rel(b)?, Direction::TowardDependent));
        a = sentence.parent(a).expect("nodes share an ancestor");
        b = sentence.parent(b).expect("nodes share an ancestor");
    }
    up.extend(down.into_iter().rev());
    DepPath::new(up)
}

/// Breadth-first walk of the undirected tree from `start`, yielding every
/// `(path, node)` within `max_hops` hops in level order. Branches whose
/// arc label is missing from the vocabulary are pruned.
fn paths_from(
    sentence: &ParsedSentence,
    vocab: &Vocabulary,
    start: usize,
    max_hops: usize,
) -> Vec<(DepPath, usize)> {
    let n = sentence.len();
    let mut out = Vec::new();
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut queue: VecDeque<(usize, Vec<DirectedRelation>)> = VecDeque::new();
    queue.push_back((start, Vec::new()));
    while let Some((node, steps)) = queue.pop_front() {
        if steps.len() == max_hops {
            continue;
        }
        // Neighbors in a fixed order: the head first, then dependents in
        // surface order.
        let mut neighbors: Vec<(usize, DirectedRelation)> = Vec::new();
        if let Some(p) = sentence.parent(node) {
            if let Some(rel) = vocab.rel_id(&sentence.tokens[node].rel) {
                neighbors.push((p, DirectedRelation::new(rel, Direction::TowardHead)));
            }
        }
        for c in sentence.children(node) {
            if let Some(rel) = vocab.rel_id(&sentence.tokens[c].rel) {
                neighbors.push((c, DirectedRelation::new(rel, Direction::TowardDependent)));
            }
        }
        for (next, step) in neighbors {
            if visited[next] {
                continue;
            }
            visited[next] = true;
            let mut path = steps.clone();
            path.push(step);
            out.push((DepPath { steps: path.clone() }, next));
            queue.push_back((next, path));
        }
    }
    out
}

/// Extract every training triple of a sentence: one per ordered token pair
/// `(i, j)` with both words retained in the vocabulary and a tree path of
/// at most `max_hops` hops. Pairs are produced in both orders.
pub fn extract_triples(
    sentence: &ParsedSentence,
    vocab: &Vocabulary,
    max_hops: usize,
) -> Vec<Triple> {
    let mut out = Vec::new();
    for i in 0..sentence.len() {
        let w1 = vocab.word_id_or_unk(&sentence.tokens[i].form);
        if w1 == UNK {
            continue;
        }
        for (path, j) in paths_from(sentence, vocab, i, max_hops) {
            let w2 = vocab.word_id_or_unk(&sentence.tokens[j].form);
            if w2 == UNK {
                continue;
            }
            out.push(Triple { w1, w2, path });
        }
    }
    out
}

/// The dependency context of token `i`: every `(path, context word)` pair
/// reachable within `max_hops` hops, in level order. Out-of-vocabulary
/// context words map to the unknown id.
pub fn dependency_context(
    sentence: &ParsedSentence,
    vocab: &Vocabulary,
    i: usize,
    max_hops: usize,
) -> Vec<(DepPath, WordId)> {
    paths_from(sentence, vocab, i, max_hops)
        .into_iter()
        .map(|(path, j)| (path, vocab.word_id_or_unk(&sentence.tokens[j].form)))
        .collect()
}

/// One pass over the corpus that records every extracted path occurrence
/// in the vocabulary's per-hop frequency tables and returns the total
/// triple count.
pub fn index_paths(
    sentences: &[ParsedSentence],
    vocab: &mut Vocabulary,
    max_hops: usize,
) -> u64 {
    let mut total = 0u64;
    for sentence in sentences {
        for triple in extract_triples(sentence, &*vocab, max_hops) {
            vocab.record_path(&triple.path);
            total += 1;
        }
    }
    total
}
