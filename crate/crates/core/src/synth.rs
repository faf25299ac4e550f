//! Synthetic review-like corpora with planted structure, for demos and
//! end-to-end validation.
//!
//! The generator plants one relation: adjectives from a modifier class
//! attach to nouns from a head class via `amod`, and a head-class noun is
//! an aspect exactly when it carries such a modifier. Surface templates
//! vary how far the adjective sits from its noun, so the linear window
//! misses some aspects that the dependency context always sees. Head
//! nouns also occur unmodified, where word identity alone overpredicts.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{ParsedSentence, Token};
use crate::eval::SpanSet;

/// The modifier (class A) adjectives.
const CLASS_A: &[&str] = &[
    "delicious", "tasty", "crispy", "fresh", "spicy", "bland", "savory", "greasy", "tender",
    "crunchy", "zesty", "creamy", "smoky", "sweet", "sour", "bitter", "salty", "juicy", "stale",
    "soggy", "flaky", "buttery", "mild", "fiery", "tangy", "hearty", "moist", "chewy", "fluffy",
    "dense", "silky", "nutty", "fruity", "earthy", "robust", "delicate", "aromatic", "fragrant",
    "succulent", "lean", "fatty", "golden", "charred", "glazed", "seasoned", "ripe", "burnt",
    "overcooked", "undercooked", "divine",
];

/// The head (class B) nouns; aspects when modified.
const CLASS_B: &[&str] = &[
    "pizza", "pasta", "burger", "salad", "soup", "steak", "sushi", "ramen", "curry", "taco",
    "burrito", "sandwich", "noodles", "rice", "bread", "cheese", "chicken", "beef", "pork",
    "lamb", "fish", "shrimp", "lobster", "crab", "oyster", "salmon", "tuna", "dumplings",
    "pancakes", "waffles", "omelet", "bacon", "sausage", "tofu", "falafel", "hummus", "kebab",
    "paella", "risotto", "gnocchi", "lasagna", "ravioli", "quiche", "crepes", "bagel", "muffin",
    "donut", "pie", "cake", "pudding",
];

const DETS: &[&str] = &[
    "the", "a", "this", "that", "my", "our", "their", "his", "her", "its", "your", "some",
    "each", "every", "another",
];

const VERBS: &[&str] = &[
    "was", "is", "were", "arrived", "came", "looked", "seemed", "tasted", "felt", "stayed",
    "ordered", "tried", "enjoyed", "loved", "hated", "wanted", "shared", "finished", "skipped",
    "picked", "grabbed", "brought", "served", "recommended", "got",
];

const ADVS: &[&str] = &[
    "really", "very", "quite", "rather", "pretty", "fairly", "super", "extremely", "totally",
    "somewhat", "honestly", "truly", "definitely", "surprisingly", "barely", "mostly", "nearly",
    "almost", "clearly", "simply", "absolutely", "incredibly", "notably", "oddly", "strangely",
];

const NOUNS: &[&str] = &[
    "place", "waiter", "table", "menu", "service", "staff", "order", "price", "night", "lunch",
    "dinner", "evening", "friend", "server", "chef",
];

const MISC: &[&str] = &[
    "and", "but", "or", "with", "without", "again", "always", "never", "often", "usually",
    "yesterday", "today", "tonight", "here", "there", "still", "just", "only", "even", "also",
];

/// Settings for corpus generation.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub sentences: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { sentences: 5000, seed: 7 }
    }
}

/// A generated corpus: parsed sentences, gold aspect spans, and the
/// planted word classes.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub sentences: Vec<ParsedSentence>,
    pub gold: SpanSet,
    pub class_a: Vec<String>,
    pub class_b: Vec<String>,
    /// The planted relation label linking class A to class B.
    pub planted_label: String,
}

struct SentenceDraft {
    tokens: Vec<Token>,
    spans: Vec<(usize, usize)>,
}

impl SentenceDraft {
    fn new() -> Self {
        SentenceDraft { tokens: Vec::new(), spans: Vec::new() }
    }

    fn push(&mut self, form: &str, pos: &str, head: usize, rel: &str) {
        self.tokens.push(Token {
            form: form.to_string(),
            pos: pos.to_string(),
            head,
            rel: rel.to_string(),
            capitalized: self.tokens.is_empty(),
        });
    }
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool[rng.random_range(0..pool.len())]
}

/// Generate a corpus. The same seed always produces the same corpus.
pub fn generate(config: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut sentences = Vec::with_capacity(config.sentences);
    let mut gold = SpanSet::new();
    for idx in 0..config.sentences {
        let draft = draw_sentence(&mut rng);
        let id = idx.to_string();
        gold.touch(&id);
        for &(start, end) in &draft.spans {
            gold.insert(&id, start, end).expect("template spans are valid");
        }
        sentences.push(ParsedSentence { id, tokens: draft.tokens });
    }
    SynthCorpus {
        sentences,
        gold,
        class_a: CLASS_A.iter().map(|s| s.to_string()).collect(),
        class_b: CLASS_B.iter().map(|s| s.to_string()).collect(),
        planted_label: "amod".to_string(),
    }
}

fn draw_sentence<R: Rng>(rng: &mut R) -> SentenceDraft {
    let roll = rng.random::<f64>();
    let mut s = SentenceDraft::new();
    if roll < 0.20 {
        // "the delicious pizza arrived quickly ."
        let (a, b) = (pick(rng, CLASS_A), pick(rng, CLASS_B));
        s.push(pick(rng, DETS), "DET", 3, "det");
        s.push(a, "ADJ", 3, "amod");
        s.push(b, "NOUN", 4, "nsubj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(pick(rng, ADVS), "ADV", 4, "advmod");
        s.push(".", "PUNCT", 4, "punct");
        s.spans.push((3, 3));
    } else if roll < 0.32 {
        // Modifier one slot further out: "the delicious really pizza was ."
        let (a, b) = (pick(rng, CLASS_A), pick(rng, CLASS_B));
        s.push(pick(rng, DETS), "DET", 4, "det");
        s.push(a, "ADJ", 4, "amod");
        s.push(pick(rng, ADVS), "ADV", 4, "dep");
        s.push(b, "NOUN", 5, "nsubj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(".", "PUNCT", 5, "punct");
        s.spans.push((4, 4));
    } else if roll < 0.41 {
        // Modifier outside the +-2 linear window, arc still present:
        // "the delicious though usually pizza arrived ."
        let (a, b) = (pick(rng, CLASS_A), pick(rng, CLASS_B));
        s.push(pick(rng, DETS), "DET", 5, "det");
        s.push(a, "ADJ", 5, "amod");
        s.push(pick(rng, MISC), "ADV", 5, "dep");
        s.push(pick(rng, MISC), "ADV", 5, "dep");
        s.push(b, "NOUN", 6, "nsubj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(".", "PUNCT", 6, "punct");
        s.spans.push((5, 5));
    } else if roll < 0.54 {
        // Decoy with the same linear shape around the noun but no
        // modifier arc: only the dependency context can tell it apart.
        let b = pick(rng, CLASS_B);
        s.push(pick(rng, DETS), "DET", 5, "det");
        s.push(pick(rng, ADVS), "ADV", 5, "dep");
        s.push(pick(rng, MISC), "ADV", 5, "dep");
        s.push(pick(rng, MISC), "ADV", 5, "dep");
        s.push(b, "NOUN", 6, "nsubj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(".", "PUNCT", 6, "punct");
    } else if roll < 0.69 {
        // Coordination: "the delicious pizza and crispy fries came ."
        let (a1, b1) = (pick(rng, CLASS_A), pick(rng, CLASS_B));
        let (a2, b2) = (pick(rng, CLASS_A), pick(rng, CLASS_B));
        s.push(pick(rng, DETS), "DET", 3, "det");
        s.push(a1, "ADJ", 3, "amod");
        s.push(b1, "NOUN", 7, "nsubj");
        s.push("and", "CCONJ", 6, "cc");
        s.push(a2, "ADJ", 6, "amod");
        s.push(b2, "NOUN", 3, "conj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(".", "PUNCT", 7, "punct");
        s.spans.push((3, 3));
        s.spans.push((6, 6));
    } else if roll < 0.79 {
        // Compound aspect: "the tender chicken curry was ."
        let a = pick(rng, CLASS_A);
        let b1 = pick(rng, CLASS_B);
        let mut b2 = pick(rng, CLASS_B);
        while b2 == b1 {
            b2 = pick(rng, CLASS_B);
        }
        s.push(pick(rng, DETS), "DET", 4, "det");
        s.push(a, "ADJ", 4, "amod");
        s.push(b1, "NOUN", 4, "compound");
        s.push(b2, "NOUN", 5, "nsubj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(".", "PUNCT", 5, "punct");
        s.spans.push((3, 4));
    } else if roll < 0.89 {
        // Unmodified head noun: not an aspect.
        let b = pick(rng, CLASS_B);
        s.push(pick(rng, DETS), "DET", 2, "det");
        s.push(b, "NOUN", 3, "nsubj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(pick(rng, ADVS), "ADV", 3, "advmod");
        s.push(".", "PUNCT", 3, "punct");
    } else {
        // Pure filler sentence.
        s.push(pick(rng, DETS), "DET", 2, "det");
        s.push(pick(rng, NOUNS), "NOUN", 3, "nsubj");
        s.push(pick(rng, VERBS), "VERB", 0, "root");
        s.push(pick(rng, ADVS), "ADV", 3, "advmod");
        s.push(".", "PUNCT", 3, "punct");
    }
    s
}

impl SynthCorpus {
    /// Render as CoNLL-U text (with `# sent_id` comments), byte-identical
    /// for identical configurations.
    pub fn conllu(&self) -> String {
        let mut out = String::new();
        for sentence in &self.sentences {
            out.push_str(&format!("# sent_id = {}\n", sentence.id));
            for (i, tok) in sentence.tokens.iter().enumerate() {
                let form = if tok.capitalized {
                    let mut chars = tok.form.chars();
                    match chars.next() {
                        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
                        None => String::new(),
                    }
                } else {
                    tok.form.clone()
                };
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t_\n",
                    i + 1,
                    form,
                    tok.form,
                    tok.pos,
                    tok.head,
                    tok.rel
                ));
            }
            out.push('\n');
        }
        out
    }
}
