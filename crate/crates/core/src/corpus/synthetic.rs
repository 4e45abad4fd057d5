//! Template-generated English-like text with a planted gender skew.
//!
//! Each sentence mentions one person. Occupation words are split into a
//! male-leaning and a female-leaning group; a person holding a leaning
//! occupation has the leaning gender with probability `skew / (skew + 1)`.
//! Everything else (places, adjectives, activities) is gender-neutral, so a
//! bias meter should score occupations away from zero and the rest near it.

use rand::seq::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Gender;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    /// Approximate corpus length in whitespace tokens.
    pub tokens: usize,
    /// Odds of the leaning gender for a skewed occupation (4.0 means 4:1).
    pub skew: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            tokens: 50_000,
            skew: 4.0,
            seed: 0,
        }
    }
}

pub const MALE_LEANING: &[&str] = &[
    "doctor", "engineer", "pilot", "soldier", "banker", "lawyer", "farmer", "captain",
];
pub const FEMALE_LEANING: &[&str] = &[
    "nurse", "teacher", "dancer", "secretary", "librarian", "designer", "baker", "tailor",
];

// (male, female) forms used by the templates. Every pair here is also in
// the shipped defining lists.
const SUBJECT: (&str, &str) = ("he", "she");
const OBJECT: (&str, &str) = ("him", "her");
const POSSESSIVE: (&str, &str) = ("his", "her");
const NOUNS: &[(&str, &str)] = &[
    ("man", "woman"),
    ("boy", "girl"),
    ("father", "mother"),
    ("son", "daughter"),
    ("brother", "sister"),
    ("king", "queen"),
];

const PLACES: &[&str] = &[
    "city", "village", "market", "station", "harbor", "garden", "office", "school", "hospital",
    "museum", "library", "park",
];
const ADJECTIVES: &[&str] = &[
    "tired", "happy", "busy", "calm", "late", "early", "quiet", "hungry", "proud", "careful",
];
const ACTIVITIES: &[&str] = &[
    "reading", "walking", "cooking", "singing", "painting", "running", "writing", "fishing",
];
const OBJECTS: &[&str] = &["letter", "book", "map", "ticket", "coat", "basket", "lamp", "key"];

fn pick<'a, R: Rng + ?Sized>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty word list")
}

fn form(pair: (&'static str, &'static str), g: Gender) -> &'static str {
    match g {
        Gender::Male => pair.0,
        Gender::Female => pair.1,
    }
}

fn person<R: Rng + ?Sized>(rng: &mut R, skew: f64) -> (&'static str, Gender) {
    let male_job = rng.random_bool(0.5);
    let job = if male_job {
        *MALE_LEANING.choose(rng).unwrap()
    } else {
        *FEMALE_LEANING.choose(rng).unwrap()
    };
    let leaning = if male_job { Gender::Male } else { Gender::Female };
    let gender = if rng.random_bool(skew / (skew + 1.0)) {
        leaning
    } else {
        leaning.other()
    };
    (job, gender)
}

fn sentence<R: Rng + ?Sized>(rng: &mut R, skew: f64) -> String {
    let (job, g) = person(rng, skew);
    let noun = form(*NOUNS.choose(rng).unwrap(), g);
    let place = pick(rng, PLACES);
    let adj = pick(rng, ADJECTIVES);
    let act = pick(rng, ACTIVITIES);
    let obj = pick(rng, OBJECTS);
    let he = form(SUBJECT, g);
    let him = form(OBJECT, g);
    let his = form(POSSESSIVE, g);
    match rng.random_range(0..8) {
        0 => format!("the {job} said that {he} was {adj} ."),
        1 => format!("{he} worked as a {job} in the {place} ."),
        2 => format!("the {job} took {his} {obj} to the {place} ."),
        3 => format!("the {noun} is a {job} and {he} likes {act} ."),
        4 => format!("we saw the {job} near the {place} and thanked {him} ."),
        5 => format!("the {job} was {act} with {his} {obj} ."),
        6 => format!("{his} {obj} was found by the {job} at the {place} ."),
        _ => {
            // neutral filler: a gendered mention without an occupation
            let g2 = if rng.random_bool(0.5) { Gender::Male } else { Gender::Female };
            let noun2 = form(*NOUNS.choose(rng).unwrap(), g2);
            format!("the {noun2} went to the {place} and was {adj} .")
        }
    }
}

/// Generates the corpus text, one sentence per line.
pub fn generate_text(spec: &SyntheticSpec) -> String {
    let mut rng = rng::substream(spec.seed, rng::CORPUS);
    let mut out = String::new();
    let mut tokens = 0;
    while tokens < spec.tokens {
        let s = sentence(&mut rng, spec.skew);
        tokens += s.split_whitespace().count();
        out.push_str(&s);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_sized() {
        let spec = SyntheticSpec {
            tokens: 2000,
            ..Default::default()
        };
        let a = generate_text(&spec);
        assert_eq!(a, generate_text(&spec));
        let n = a.split_whitespace().count();
        assert!((2000..2020).contains(&n));
        let other = generate_text(&SyntheticSpec { seed: 1, ..spec });
        assert_ne!(a, other);
    }

    #[test]
    fn skew_is_planted() {
        let spec = SyntheticSpec {
            tokens: 40_000,
            ..Default::default()
        };
        let text = generate_text(&spec);
        let (mut doc_he, mut doc_she) = (0, 0);
        for line in text.lines() {
            if line.contains(" doctor ") {
                doc_he += line.split_whitespace().filter(|w| *w == "he").count();
                doc_she += line.split_whitespace().filter(|w| *w == "she").count();
            }
        }
        let ratio = doc_he as f64 / doc_she as f64;
        assert!((2.5..6.0).contains(&ratio), "{ratio}");
    }
}
