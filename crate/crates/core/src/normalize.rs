//! Answer normalization applied before any string matching.
//!
//! The pipeline mirrors the preprocessing of the standard VQA evaluation
//! tooling: lowercasing, punctuation handling, word-number replacement,
//! article removal, and contraction canonicalization. Every step is
//! independently toggleable and the replacement tables can be overridden, so
//! the whole config is (de)serializable from a JSON file. With all flags off
//! the function is the identity.
//!
//! Steps run in a fixed order: lowercase, punctuation, word numbers,
//! articles, contractions, whitespace collapse. Applying the pipeline twice
//! yields the same string as applying it once.
//!
//! No stemming or lemmatization is performed: `"hot dogs"` and `"hot dog"`
//! stay distinct answers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Word-number replacements, `"none"`/`"zero"` through `"ten"`.
const DIGIT_WORDS: &[(&str, &str)] = &[
    ("none", "0"),
    ("zero", "0"),
    ("one", "1"),
    ("two", "2"),
    ("three", "3"),
    ("four", "4"),
    ("five", "5"),
    ("six", "6"),
    ("seven", "7"),
    ("eight", "8"),
    ("nine", "9"),
    ("ten", "10"),
];

const ARTICLES: &[&str] = &["a", "an", "the"];

/// Apostrophe-less tokens mapped to their canonical contraction.
const CONTRACTIONS: &[(&str, &str)] = &[
    ("aint", "ain't"),
    ("arent", "aren't"),
    ("cant", "can't"),
    ("couldve", "could've"),
    ("couldnt", "couldn't"),
    ("couldnt've", "couldn't've"),
    ("couldn'tve", "couldn't've"),
    ("didnt", "didn't"),
    ("doesnt", "doesn't"),
    ("dont", "don't"),
    ("hadnt", "hadn't"),
    ("hasnt", "hasn't"),
    ("havent", "haven't"),
    ("hed", "he'd"),
    ("hes", "he's"),
    ("howd", "how'd"),
    ("howll", "how'll"),
    ("hows", "how's"),
    ("im", "i'm"),
    ("ive", "i've"),
    ("isnt", "isn't"),
    ("itd", "it'd"),
    ("itll", "it'll"),
    ("its", "it's"),
    ("lets", "let's"),
    ("maam", "ma'am"),
    ("mightve", "might've"),
    ("mightnt", "mightn't"),
    ("mustve", "must've"),
    ("mustnt", "mustn't"),
    ("neednt", "needn't"),
    ("oclock", "o'clock"),
    ("oughtnt", "oughtn't"),
    ("shant", "shan't"),
    ("shes", "she's"),
    ("shouldve", "should've"),
    ("shouldnt", "shouldn't"),
    ("somebodyd", "somebody'd"),
    ("somebodyll", "somebody'll"),
    ("somebodys", "somebody's"),
    ("someoned", "someone'd"),
    ("someonell", "someone'll"),
    ("someones", "someone's"),
    ("somethingd", "something'd"),
    ("somethingll", "something'll"),
    ("thats", "that's"),
    ("thered", "there'd"),
    ("therere", "there're"),
    ("theres", "there's"),
    ("theyd", "they'd"),
    ("theyll", "they'll"),
    ("theyre", "they're"),
    ("theyve", "they've"),
    ("twas", "'twas"),
    ("wasnt", "wasn't"),
    ("weve", "we've"),
    ("werent", "weren't"),
    ("whatll", "what'll"),
    ("whatre", "what're"),
    ("whats", "what's"),
    ("whatve", "what've"),
    ("whens", "when's"),
    ("whered", "where'd"),
    ("wheres", "where's"),
    ("whereve", "where've"),
    ("whod", "who'd"),
    ("wholl", "who'll"),
    ("whos", "who's"),
    ("whove", "who've"),
    ("whyll", "why'll"),
    ("whyre", "why're"),
    ("whys", "why's"),
    ("wont", "won't"),
    ("wouldve", "would've"),
    ("wouldnt", "wouldn't"),
    ("yall", "y'all"),
    ("youd", "you'd"),
    ("youll", "you'll"),
    ("youre", "you're"),
    ("youve", "you've"),
];

/// Configuration for [`normalize_answer`]; all steps on by default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct NormalizationConfig {
    pub lowercase: bool,
    /// Remove punctuation. Periods survive between digits (`"3.5"`), commas
    /// between digits are dropped without inserting a space (`"1,000"` to
    /// `"1000"`), apostrophes survive between alphanumerics (`"don't"`);
    /// every other punctuation character becomes a space.
    pub punctuation_rules: bool,
    pub word_numbers_to_digits: bool,
    /// Drop standalone `"a"`, `"an"`, `"the"` tokens.
    pub strip_articles: bool,
    /// Map apostrophe-less tokens to their canonical contraction
    /// (`"dont"` to `"don't"`).
    pub expand_contractions: bool,
    pub collapse_whitespace: bool,
    /// Token replacements applied by the word-number step.
    pub number_map: BTreeMap<String, String>,
    /// Token replacements applied by the contraction step.
    pub contraction_map: BTreeMap<String, String>,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            lowercase: true,
            punctuation_rules: true,
            word_numbers_to_digits: true,
            strip_articles: true,
            expand_contractions: true,
            collapse_whitespace: true,
            number_map: DIGIT_WORDS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
            contraction_map: CONTRACTIONS
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

impl NormalizationConfig {
    /// Config with every step disabled; normalization becomes the identity.
    pub fn identity() -> Self {
        NormalizationConfig {
            lowercase: false,
            punctuation_rules: false,
            word_numbers_to_digits: false,
            strip_articles: false,
            expand_contractions: false,
            collapse_whitespace: false,
            number_map: BTreeMap::new(),
            contraction_map: BTreeMap::new(),
        }
    }
}

/// Normalizes a raw answer string. Deterministic and idempotent.
pub fn normalize_answer(raw: &str, config: &NormalizationConfig) -> String {
    let mut text = if config.lowercase {
        raw.to_lowercase()
    } else {
        raw.to_owned()
    };

    if config.punctuation_rules {
        text = apply_punctuation(&text);
    }

    if config.word_numbers_to_digits {
        text = map_tokens(&text, |tok| {
            Some(config.number_map.get(tok).map_or(tok, String::as_str))
        });
    }

    if config.strip_articles {
        text = map_tokens(&text, |tok| {
            if ARTICLES.contains(&tok) {
                None
            } else {
                Some(tok)
            }
        });
    }

    if config.expand_contractions {
        text = map_tokens(&text, |tok| {
            Some(config.contraction_map.get(tok).map_or(tok, String::as_str))
        });
    }

    if config.collapse_whitespace {
        text = text.split_whitespace().collect::<Vec<_>>().join(" ");
    }

    text
}

fn apply_punctuation(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    for (i, &c) in chars.iter().enumerate() {
        let prev = i.checked_sub(1).and_then(|p| chars.get(p).copied());
        let next = chars.get(i + 1).copied();
        let between = |pred: fn(char) -> bool| {
            prev.is_some_and(pred) && next.is_some_and(pred)
        };
        match c {
            '.' => {
                if between(|c| c.is_ascii_digit()) {
                    out.push(c);
                }
            }
            ',' => {
                if !between(|c| c.is_ascii_digit()) {
                    out.push(' ');
                }
            }
            '\'' => {
                if between(char::is_alphanumeric) {
                    out.push(c);
                }
            }
            c if c.is_ascii_punctuation() => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

/// Applies a per-token replacement and rejoins with single spaces.
fn map_tokens<'a, F>(text: &'a str, f: F) -> String
where
    F: Fn(&'a str) -> Option<&'a str>,
{
    text.split_whitespace()
        .filter_map(f)
        .collect::<Vec<_>>()
        .join(" ")
}
