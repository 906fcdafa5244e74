#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use argmine::standoff::parse_standoff;
use argmine::{AnnotatedCorpus, ArgumentAnnotation, Language, Premise, PropositionType, Span, Tweet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LAYERS: [&str; 2] = ["ann1", "ann2"];

pub fn standoff_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/standoff")
}

/// Sorted `(id, txt, ann)` triples of one layer and language.
pub fn standoff_files(layer: &str, language: Language) -> Vec<(String, String, String)> {
    let dir = standoff_root().join(layer).join(language.code());
    let mut out = Vec::new();
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "txt") {
            let id = path.file_stem().unwrap().to_string_lossy().into_owned();
            let txt = fs::read_to_string(&path).unwrap();
            let ann = fs::read_to_string(path.with_extension("ann")).unwrap();
            out.push((id, txt, ann));
        }
    }
    out.sort();
    out
}

/// The 32-tweet fixture with both annotator layers.
pub fn fixture_corpus() -> AnnotatedCorpus {
    let mut corpus = AnnotatedCorpus::new();
    for layer in LAYERS {
        for lang in [Language::En, Language::Es] {
            for (id, txt, ann) in standoff_files(layer, lang) {
                let (tweet, annotation) = parse_standoff(&id, lang, &ann, &txt).unwrap();
                if corpus.tweet(&id).is_none() {
                    corpus.push_tweet(tweet).unwrap();
                }
                corpus.annotate(layer, &id, annotation).unwrap();
            }
        }
    }
    corpus
}

const VOCAB: [&str; 24] = [
    "they", "come", "here", "and", "take", "our", "jobs", "homes", "send", "them", "back", "now", "crime", "rises",
    "every", "day", "close", "borders", "stop", "invasion", "#StopThem", "@user", "sooo", "🔥",
];

/// Counts a synthetic language portion is built to.
#[derive(Debug, Clone, Copy)]
pub struct PortionSpec {
    pub language: Language,
    pub tweets: usize,
    pub non_argumentative: usize,
    pub pair: usize,
    pub pivot: usize,
    /// Justification F/P/V and conclusion F/P/V counts over argumentative tweets.
    pub justification: [usize; 3],
    pub conclusion: [usize; 3],
}

pub const EN_SPEC: PortionSpec = PortionSpec {
    language: Language::En,
    tweets: 970,
    non_argumentative: 245,
    pair: 565,
    pivot: 437,
    justification: [674, 29, 22],
    conclusion: [268, 413, 44],
};

pub const ES_SPEC: PortionSpec = PortionSpec {
    language: Language::Es,
    tweets: 196,
    non_argumentative: 52,
    pair: 120,
    pivot: 73,
    justification: [140, 3, 1],
    conclusion: [81, 40, 23],
};

struct Layout {
    text: String,
    words: Vec<(usize, usize)>,
}

fn layout(rng: &mut ChaCha8Rng, n: usize) -> Layout {
    let mut text = String::new();
    let mut words = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            text.push(' ');
        }
        let start = text.chars().count();
        text.push_str(VOCAB[rng.gen_range(0..VOCAB.len())]);
        words.push((start, text.chars().count()));
    }
    Layout { text, words }
}

fn words_span(l: &Layout, from: usize, to: usize) -> Span {
    Span::single(l.words[from].0, l.words[to - 1].1).unwrap()
}

fn expand(counts: [usize; 3], rng: &mut ChaCha8Rng) -> Vec<PropositionType> {
    use PropositionType::*;
    let mut v: Vec<PropositionType> = [Fact, Policy, Value]
        .into_iter()
        .zip(counts)
        .flat_map(|(t, c)| std::iter::repeat_n(t, c))
        .collect();
    v.shuffle(rng);
    v
}

/// Word-level argument structure: justification `[0, cut)`, a connector
/// word, conclusion `[cut + 1, n)`.
fn arg_annotation(l: &Layout, jt: PropositionType, ct: PropositionType, pair: bool, pivot: bool) -> ArgumentAnnotation {
    let n = l.words.len();
    let cut = n / 2;
    let mut ann = ArgumentAnnotation::argumentative(
        Premise::new(words_span(l, 0, cut), jt),
        Premise::new(words_span(l, cut + 1, n), ct),
    );
    if pair {
        ann = ann.with_collective(words_span(l, 0, 1)).with_property(words_span(l, 1, cut));
    }
    if pivot {
        ann = ann.with_pivot(words_span(l, 0, 1), words_span(l, n - 1, n));
    }
    ann
}

fn portion(corpus: &mut AnnotatedCorpus, spec: PortionSpec, rng: &mut ChaCha8Rng) {
    let arg = spec.tweets - spec.non_argumentative;
    let mut is_arg: Vec<bool> = (0..spec.tweets).map(|i| i < arg).collect();
    is_arg.shuffle(rng);
    let mut pair: Vec<bool> = (0..arg).map(|i| i < spec.pair).collect();
    pair.shuffle(rng);
    let mut pivot: Vec<bool> = (0..arg).map(|i| i < spec.pivot).collect();
    pivot.shuffle(rng);
    let jt = expand(spec.justification, rng);
    let ct = expand(spec.conclusion, rng);
    let mut k = 0;
    for (i, &a) in is_arg.iter().enumerate() {
        let id = format!("{}{i:04}", spec.language.code());
        let n = rng.gen_range(8..=16);
        let l = layout(rng, n);
        corpus.push_tweet(Tweet::new(&id, spec.language, &l.text).unwrap()).unwrap();
        let ann = if a {
            let ann = arg_annotation(&l, jt[k], ct[k], pair[k], pivot[k]);
            k += 1;
            ann
        } else {
            ArgumentAnnotation::non_argumentative()
        };
        corpus.annotate("gold", &id, ann).unwrap();
    }
}

fn perturb(tweet: &Tweet, gold: &ArgumentAnnotation, rng: &mut ChaCha8Rng) -> ArgumentAnnotation {
    let l = {
        let mut words = Vec::new();
        let mut start = None;
        for (i, c) in tweet.raw_text.chars().chain(std::iter::once(' ')).enumerate() {
            match (c == ' ', start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    words.push((s, i));
                    start = None;
                }
                _ => {}
            }
        }
        Layout {
            text: tweet.raw_text.clone(),
            words,
        }
    };
    let n = l.words.len();
    let cut = n / 2;
    let flip = rng.gen_bool(0.08);
    let argumentative = gold.argumentative != flip;
    if !argumentative {
        return ArgumentAnnotation::non_argumentative();
    }
    let pick = |rng: &mut ChaCha8Rng, t: Option<PropositionType>| match t {
        Some(t) if rng.gen_bool(0.8) => t,
        _ => *PropositionType::ALL.choose(rng).unwrap(),
    };
    let jt = pick(rng, gold.justification.as_ref().map(|p| p.kind));
    let ct = pick(rng, gold.conclusion.as_ref().map(|p| p.kind));
    let j_start = if rng.gen_bool(0.3) { 1 } else { 0 };
    let c_start = match rng.gen_range(0..10) {
        0..=2 => cut + 2,
        3..=4 => cut,
        _ => cut + 1,
    };
    let mut ann = ArgumentAnnotation::argumentative(
        Premise::new(words_span(&l, j_start, cut), jt),
        Premise::new(words_span(&l, c_start, n), ct),
    );
    let had_pair = gold.collective.is_some();
    let pair = if rng.gen_bool(0.2) { !had_pair } else { had_pair };
    if pair {
        let prop_start = if rng.gen_bool(0.25) { cut - 1 } else { 1 };
        ann = ann
            .with_collective(words_span(&l, 0, 1))
            .with_property(words_span(&l, prop_start, cut));
    }
    let had_pivot = gold.pivot.is_some();
    let pivot = if rng.gen_bool(0.3) { !had_pivot } else { had_pivot };
    if pivot {
        let c_side = if rng.gen_bool(0.2) { n - 2 } else { n - 1 };
        ann = ann.with_pivot(words_span(&l, j_start, j_start + 1), words_span(&l, c_side, c_side + 1));
    }
    ann
}

/// Tweets carrying the second annotator layer.
pub const DUAL_EN: usize = 120;
pub const DUAL_ES: usize = 30;

/// A corpus with the portion sizes and label counts of `EN_SPEC` and
/// `ES_SPEC`, a `gold` layer over every tweet, and an `ann2` layer over
/// the first `DUAL_EN` English and `DUAL_ES` Spanish tweets.
pub fn synthetic_corpus(seed: u64) -> AnnotatedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = AnnotatedCorpus::new();
    portion(&mut corpus, EN_SPEC, &mut rng);
    portion(&mut corpus, ES_SPEC, &mut rng);
    let gold = corpus.layer("gold").unwrap().clone();
    let mut en_left = DUAL_EN;
    let mut es_left = DUAL_ES;
    let mut second = Vec::new();
    for tweet in corpus.tweets() {
        let left = match tweet.language {
            Language::En => &mut en_left,
            Language::Es => &mut es_left,
        };
        if *left == 0 {
            continue;
        }
        *left -= 1;
        second.push((tweet.id.clone(), perturb(tweet, gold.get(&tweet.id).unwrap(), &mut rng)));
    }
    for (id, ann) in second {
        corpus.annotate("ann2", &id, ann).unwrap();
    }
    corpus
}
