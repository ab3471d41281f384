//! Generates the bundled corpus: deterministic, grammar-driven English-like
//! prose with a Zipf-shaped vocabulary. Regenerating with the same seed
//! reproduces the shipped files byte for byte.
//!
//! Usage: make_corpus [out_dir]

use std::fmt::Write as _;
use std::path::PathBuf;

use lt_tensor::Rng;

const NOUNS: &[&str] = &[
    "river", "stone", "lantern", "harbor", "meadow", "engine", "garden", "letter", "mountain",
    "window", "teacher", "sailor", "market", "forest", "bridge", "valley", "anchor", "bottle",
    "candle", "carpet", "cellar", "chimney", "compass", "curtain", "doorway", "farmer", "feather",
    "fiddle", "hammer", "harvest", "island", "journey", "kitchen", "ladder", "lantern", "meadow",
    "miller", "morning", "needle", "orchard", "painter", "pasture", "pebble", "pillar", "pocket",
    "ribbon", "saddle", "shadow", "shelter", "shoulder", "spindle", "stable", "stream", "summer",
    "thicket", "thunder", "timber", "tunnel", "village", "wagon", "warden", "weather", "whisper",
    "winter", "woodland", "child", "brother", "sister", "captain", "doctor", "keeper", "neighbor",
    "stranger", "traveler", "shepherd", "merchant", "daughter", "evening", "harbor", "clock",
];
const VERBS: &[&str] = &[
    "carry", "follow", "gather", "watch", "mend", "build", "paint", "plant", "remember", "visit",
    "cross", "climb", "repair", "borrow", "deliver", "discover", "measure", "polish", "prepare",
    "promise", "protect", "question", "settle", "sharpen", "shelter", "study", "trade", "trust",
    "wander", "warm", "wash", "weave", "welcome", "whistle", "answer", "arrange", "assemble",
    "bless", "brighten", "calm", "collect", "consider", "describe", "fasten", "finish",
];
const ADJECTIVES: &[&str] = &[
    "quiet", "bright", "narrow", "heavy", "gentle", "crooked", "distant", "early", "faded",
    "golden", "hollow", "humble", "little", "lonely", "misty", "patient", "plain", "proud",
    "rusty", "silver", "simple", "steady", "stubborn", "sturdy", "sweet", "tall", "tired",
    "warm", "weary", "wild", "wooden", "young", "ancient", "broad", "careful", "cheerful",
];
const ADVERBS: &[&str] = &[
    "slowly", "quietly", "carefully", "often", "gladly", "rarely", "together", "alone",
    "yesterday", "tomorrow", "everywhere", "gently", "patiently", "soon",
];
const PREPOSITIONS: &[&str] = &[
    "near", "beside", "under", "over", "behind", "beyond", "through", "across", "against",
    "toward", "around", "within",
];
const DETERMINERS: &[&str] = &["the", "the", "the", "a", "that", "this", "every", "some"];
const PRONOUNS: &[&str] = &["she", "he", "they", "we", "it"];
const CONJUNCTIONS: &[&str] = &["and", "but", "while", "because", "until", "before", "after"];

/// Zipf-ish pick: rank r gets weight 1/(r + 2).
fn zipf<'a>(rng: &mut Rng, words: &[&'a str]) -> &'a str {
    let weights: Vec<f64> = (0..words.len()).map(|r| 1.0 / (r as f64 + 2.0)).collect();
    words[rng.categorical(&weights)]
}

fn inflect_noun(rng: &mut Rng, stem: &str) -> String {
    if rng.bernoulli(0.25) {
        format!("{stem}s")
    } else {
        stem.to_string()
    }
}

fn inflect_verb(rng: &mut Rng, stem: &str) -> String {
    match rng.below(4) {
        0 => format!("{stem}s"),
        1 => {
            if stem.ends_with('e') {
                format!("{}ed", &stem[..stem.len() - 1])
            } else {
                format!("{stem}ed")
            }
        }
        2 => {
            if stem.ends_with('e') {
                format!("{}ing", &stem[..stem.len() - 1])
            } else {
                format!("{stem}ing")
            }
        }
        _ => stem.to_string(),
    }
}

fn noun_phrase(rng: &mut Rng, out: &mut Vec<String>, allow_pp: bool) {
    if rng.bernoulli(0.12) {
        out.push(zipf(rng, PRONOUNS).to_string());
        return;
    }
    out.push(zipf(rng, DETERMINERS).to_string());
    if rng.bernoulli(0.45) {
        out.push(zipf(rng, ADJECTIVES).to_string());
    }
    let stem = zipf(rng, NOUNS);
    out.push(inflect_noun(rng, stem));
    if allow_pp && rng.bernoulli(0.3) {
        out.push(zipf(rng, PREPOSITIONS).to_string());
        noun_phrase(rng, out, false);
    }
}

fn clause(rng: &mut Rng, out: &mut Vec<String>) {
    noun_phrase(rng, out, true);
    let stem = zipf(rng, VERBS);
    out.push(inflect_verb(rng, stem));
    if rng.bernoulli(0.8) {
        let allow_pp = rng.bernoulli(0.4);
        noun_phrase(rng, out, allow_pp);
    }
    if rng.bernoulli(0.3) {
        out.push(zipf(rng, ADVERBS).to_string());
    }
}

fn sentence(rng: &mut Rng) -> Vec<String> {
    let mut out = Vec::new();
    clause(rng, &mut out);
    if rng.bernoulli(0.35) {
        out.push(zipf(rng, CONJUNCTIONS).to_string());
        clause(rng, &mut out);
    }
    out.push(".".to_string());
    out
}

fn generate_split(seed: u64, target_tokens: usize) -> String {
    let mut rng = Rng::from_seed(seed);
    let mut text = String::new();
    let mut tokens = 0usize;
    let mut line_sentences = 0usize;
    while tokens < target_tokens {
        let words = sentence(&mut rng);
        tokens += words.len();
        let joined = words.join(" ");
        if line_sentences > 0 {
            text.push(' ');
        }
        write!(text, "{joined}").unwrap();
        line_sentences += 1;
        if line_sentences == 6 {
            text.push('\n');
            line_sentences = 0;
        }
    }
    if line_sentences > 0 {
        text.push('\n');
    }
    text
}

fn main() {
    let out_dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("crates/nlp/data"));
    std::fs::create_dir_all(&out_dir).expect("create output directory");
    for (name, seed, tokens) in [
        ("train.txt", 0xc0c0_0001u64, 180_000),
        ("valid.txt", 0xc0c0_0002u64, 10_000),
        ("test.txt", 0xc0c0_0003u64, 10_000),
    ] {
        let text = generate_split(seed, tokens);
        let count = text.split_whitespace().count();
        std::fs::write(out_dir.join(name), &text).expect("write split");
        println!("{name}: {count} tokens");
    }
}
