//! Seeded random score tables for optimality checks and benchmarks.
//!
//! Each instance is grown from a random gold derivation so that most of
//! them have at least one parse; every word then receives a few distractor
//! categories and random tag and head distributions.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::categories::Category;
use crate::scores::ScoreTable;

#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub min_len: usize,
    pub max_len: usize,
    pub max_candidates: usize,
    /// Chance that any single head entry is left out of its row.
    pub missing_arc_rate: f64,
}

impl Default for InstanceSpec {
    fn default() -> Self {
        InstanceSpec {
            min_len: 1,
            max_len: 7,
            max_candidates: 5,
            missing_arc_rate: 0.05,
        }
    }
}

const ARGUMENTS: [&str; 4] = ["NP", "N", "PP", "S"];
const DISTRACTORS: [&str; 14] = [
    "NP",
    "N",
    "S[dcl]",
    "S\\NP",
    "(S[dcl]\\NP)/NP",
    "NP/N",
    "N/N",
    "S/S",
    "(S\\NP)\\(S\\NP)",
    "S/(S\\NP)",
    "PP/NP",
    "conj",
    ",",
    ".",
];

fn parse(s: &str) -> Category {
    Category::parse(s).expect("built-in category")
}

fn random_argument<R: Rng + ?Sized>(rng: &mut R) -> Category {
    let base = *ARGUMENTS.choose(rng).unwrap();
    if base == "S" && rng.random_bool(0.3) {
        Category::featured("S", "dcl")
    } else {
        Category::atom(base)
    }
}

/// Lexical categories of a random derivation of `category` over `len` words.
fn grow<R: Rng + ?Sized>(rng: &mut R, category: &Category, len: usize, out: &mut Vec<Category>) {
    if len == 1 {
        if let Category::Conjoined(inner) = category {
            // a bare conjunct cannot be a single word; fall back to its content
            out.push((**inner).clone());
        } else {
            out.push(category.clone());
        }
        return;
    }
    if let Category::Conjoined(inner) = category {
        out.push(Category::atom("conj"));
        grow(rng, inner, len - 1, out);
        return;
    }
    let split = rng.random_range(1..len);
    let choice = rng.random_range(0..100);
    if choice < 8 {
        out.push(Category::atom(","));
        grow(rng, category, len - 1, out);
    } else if choice < 14 {
        grow(rng, category, len - 1, out);
        out.push(Category::atom("."));
    } else if choice < 24 && len >= 3 {
        // X X[conj]
        let left_len = rng.random_range(1..len - 1);
        grow(rng, category, left_len, out);
        grow(
            rng,
            &Category::conjoined(category.clone()),
            len - left_len,
            out,
        );
    } else if choice < 34
        && category
            .as_functor()
            .is_some_and(|f| f.slash == crate::categories::Slash::Forward)
    {
        let f = category.as_functor().unwrap();
        let middle = random_argument(rng);
        grow(
            rng,
            &Category::forward(f.result.clone(), middle.clone()),
            split,
            out,
        );
        grow(
            rng,
            &Category::forward(middle, f.argument.clone()),
            len - split,
            out,
        );
    } else if choice < 67 {
        let arg = random_argument(rng);
        grow(
            rng,
            &Category::forward(category.clone(), arg.clone()),
            split,
            out,
        );
        grow(rng, &arg, len - split, out);
    } else {
        let arg = random_argument(rng);
        grow(rng, &arg, split, out);
        grow(
            rng,
            &Category::backward(category.clone(), arg),
            len - split,
            out,
        );
    }
}

/// Normalized log-probabilities from arbitrary logits.
fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logits.iter().map(|l| (l - max).exp()).sum();
    logits.iter().map(|l| l - max - z.ln()).collect()
}

/// Lexical categories of a random gold derivation of length `len`.
pub fn random_gold_categories<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<Category> {
    let root = match rng.random_range(0..4) {
        0 => Category::atom("NP"),
        1 => Category::featured("S", "dcl"),
        _ => Category::atom("S"),
    };
    let mut gold = Vec::with_capacity(len);
    grow(rng, &root, len, &mut gold);
    gold
}

pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, spec: &InstanceSpec) -> ScoreTable {
    let n = rng.random_range(spec.min_len..=spec.max_len);
    let gold = random_gold_categories(rng, n);

    let mut tags = Vec::with_capacity(n);
    for gold_cat in &gold {
        let k = rng.random_range(1..=spec.max_candidates.max(1));
        let mut cats = vec![gold_cat.clone()];
        let mut attempts = 0;
        while cats.len() < k && attempts < 50 {
            attempts += 1;
            let c = if rng.random_bool(0.25) {
                match gold_cat.as_functor() {
                    Some(f) => {
                        Category::functor(f.result.clone(), f.slash.flip(), f.argument.clone())
                    }
                    None => random_argument(rng),
                }
            } else {
                parse(DISTRACTORS.choose(rng).unwrap())
            };
            if !cats.contains(&c) {
                cats.push(c);
            }
        }
        let logits: Vec<f64> = cats.iter().map(|_| rng.random_range(-3.0..3.0)).collect();
        tags.push(
            cats.into_iter()
                .zip(log_softmax(&logits))
                .collect::<Vec<_>>(),
        );
    }

    let mut heads = Vec::with_capacity(n);
    for i in 1..=n {
        let candidates: Vec<usize> = (0..=n).filter(|&j| j != i).collect();
        let logits: Vec<f64> = candidates
            .iter()
            .map(|_| rng.random_range(-3.0..3.0))
            .collect();
        let mut row: Vec<(usize, f64)> = candidates.into_iter().zip(log_softmax(&logits)).collect();
        let keep = rng.random_range(0..row.len());
        let mut k = 0;
        row.retain(|_| {
            k += 1;
            k - 1 == keep || !rng.random_bool(spec.missing_arc_rate)
        });
        heads.push(row);
    }

    let tokens = (1..=n).map(|i| format!("w{i}")).collect();
    ScoreTable::new(tokens, tags, heads).expect("generated tables are well formed")
}
