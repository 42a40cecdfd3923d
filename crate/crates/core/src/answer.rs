//! Annotation, prediction, and answer-pattern types.
//!
//! Every metric in this crate consumes an [`AnswerPattern`]: the multiset of
//! answers given by the annotators of one question, reduced to
//! (unique answer, frequency) pairs. Patterns are immutable after
//! construction and safe to share across threads.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::normalize::{normalize_answer, NormalizationConfig};

/// Question identifier, preserved verbatim from the input file.
///
/// Annotation files carry either integer or string ids; both forms round-trip
/// through JSON unchanged. Integer and string ids never compare equal, so
/// `42` and `"42"` are distinct questions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuestionId {
    Int(i64),
    Text(String),
}

impl fmt::Display for QuestionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuestionId::Int(v) => write!(f, "{v}"),
            QuestionId::Text(s) => write!(f, "{s}"),
        }
    }
}

impl From<i64> for QuestionId {
    fn from(v: i64) -> Self {
        QuestionId::Int(v)
    }
}

impl From<&str> for QuestionId {
    fn from(s: &str) -> Self {
        QuestionId::Text(s.to_owned())
    }
}

impl From<String> for QuestionId {
    fn from(s: String) -> Self {
        QuestionId::Text(s)
    }
}

/// The raw crowd answers for one question, in annotator order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAnnotation {
    pub question_id: QuestionId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub question: Option<String>,
    /// One raw answer string per annotator; order is preserved as read.
    pub answers: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answer_type: Option<String>,
}

impl RawAnnotation {
    pub fn new(question_id: impl Into<QuestionId>, answers: Vec<&str>) -> Self {
        RawAnnotation {
            question_id: question_id.into(),
            question: None,
            answers: answers.into_iter().map(str::to_owned).collect(),
            answer_type: None,
        }
    }

    /// Number of annotators `n`.
    pub fn annotator_count(&self) -> usize {
        self.answers.len()
    }
}

/// A model prediction; the answer is normalized lazily at scoring time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub question_id: QuestionId,
    pub answer: String,
}

/// One `(answer, frequency)` entry of an [`AnswerPattern`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternEntry {
    pub answer: String,
    pub frequency: usize,
}

/// A question's answers reduced to unique normalized answers with counts.
///
/// Entries are sorted by descending frequency, then ascending answer, so
/// identical inputs always produce identical patterns. The first entry holds
/// the modal frequency `f_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerPattern {
    entries: Vec<PatternEntry>,
    total: usize,
    max_frequency: usize,
}

/// Read access to a frequency distribution over answers.
///
/// Implemented by [`AnswerPattern`] and by
/// [`GroupedPattern`](crate::grouping::GroupedPattern), so the majority and
/// subjectivity scores apply to both unchanged.
pub trait Pattern {
    /// Total number of annotations `n`.
    fn total(&self) -> usize;
    /// Frequency of the most frequent answer (or merged group).
    fn max_frequency(&self) -> usize;
    /// Frequency of the entry (or group) containing an exact match of
    /// `answer`, if any.
    fn frequency_of(&self, answer: &str) -> Option<usize>;
}

impl AnswerPattern {
    /// Builds a pattern from already-normalized answers.
    ///
    /// Panics if `answers` is empty; callers ingest annotations through
    /// [`crate::ingest`], which rejects empty answer lists.
    pub fn from_normalized<I, S>(answers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut counts: HashMap<String, usize> = HashMap::new();
        let mut total = 0usize;
        for answer in answers {
            *counts.entry(answer.into()).or_insert(0) += 1;
            total += 1;
        }
        assert!(total > 0, "answer pattern requires at least one answer");

        let mut entries: Vec<PatternEntry> = counts
            .into_iter()
            .map(|(answer, frequency)| PatternEntry { answer, frequency })
            .collect();
        entries.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.answer.cmp(&b.answer)));
        let max_frequency = entries[0].frequency;

        AnswerPattern {
            entries,
            total,
            max_frequency,
        }
    }

    /// Unique answers with frequencies, most frequent first.
    pub fn entries(&self) -> &[PatternEntry] {
        &self.entries
    }

    /// Number of unique answers.
    pub fn unique_answers(&self) -> usize {
        self.entries.len()
    }

    /// Whether `answer` attains the maximum frequency.
    pub fn is_modal(&self, answer: &str) -> bool {
        self.frequency_of(answer) == Some(self.max_frequency)
    }
}

impl Pattern for AnswerPattern {
    fn total(&self) -> usize {
        self.total
    }

    fn max_frequency(&self) -> usize {
        self.max_frequency
    }

    fn frequency_of(&self, answer: &str) -> Option<usize> {
        self.entries
            .iter()
            .find(|e| e.answer == answer)
            .map(|e| e.frequency)
    }
}

/// Normalizes each raw answer and tabulates frequencies.
///
/// Frequencies count normalized-string equality, so case or punctuation
/// variants of the same answer merge into one entry.
pub fn build_pattern(annotation: &RawAnnotation, config: &NormalizationConfig) -> AnswerPattern {
    AnswerPattern::from_normalized(annotation.answers.iter().map(|a| normalize_answer(a, config)))
}
