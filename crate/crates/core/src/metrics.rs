//! Majority, subjectivity, and their composites.
//!
//! All scores are ratios of integer frequencies and live in `[0, 1]`:
//!
//! * `majority` — `f_pred / f_max`. Credit is relative to the modal answer,
//!   so some answer always scores `1.0` and a perfect model can reach full
//!   accuracy. With a [`GroupedPattern`] this is the updated majority over
//!   merged frequencies.
//! * `subjectivity` — `(f_max - 1) / (n - 1)`. Under the discrete ground
//!   metric, `n - f_max` is the minimum number of annotations that must be
//!   relabeled to reach full consensus and `n - 1` is its maximum over
//!   patterns of size `n`; subjectivity is one minus that normalized
//!   transport cost. Full consensus scores `1`, an all-distinct pattern
//!   scores `0`.
//! * `mas` / `masses_scores` — per-sample products. Dataset-level scores are
//!   means of per-sample products, never products of means.

use serde::{Deserialize, Serialize};

use crate::answer::{AnswerPattern, Pattern, QuestionId};
use crate::error::{Error, Result};
use crate::grouping::GroupedPattern;
use crate::{count, Real, Score};

/// Majority score `f_pred / f_max`; `0` when the prediction matches no entry.
///
/// Matching is exact on the normalized string (membership in a merged group
/// counts); predictions absent from the pattern are never embedded or fuzzily
/// attached.
pub fn majority<T: Real, P: Pattern + ?Sized>(pattern: &P, predicted: &str) -> T {
    let f = pattern.frequency_of(predicted).unwrap_or(0);
    count::<T>(f) / count::<T>(pattern.max_frequency())
}

/// Subjectivity score `(f_max - 1) / (n - 1)`.
///
/// Undefined for single-annotation patterns, which callers report separately.
pub fn subjectivity<T: Real, P: Pattern + ?Sized>(pattern: &P) -> Result<T> {
    let n = pattern.total();
    if n < 2 {
        return Err(Error::DegeneratePattern { total: n });
    }
    Ok(count::<T>(pattern.max_frequency() - 1) / count::<T>(n - 1))
}

/// Majority-with-subjectivity composite for one sample.
pub fn mas<T: Real>(ma: T, s: T) -> T {
    ma * s
}

/// Scores derived from a grouped pattern at one threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupedScores<T> {
    pub ses: T,
    pub ma_updated: T,
    pub masses: T,
}

/// Computes `ses`, the updated majority, and their product on a grouping of
/// `pattern`.
pub fn masses_scores<T: Real>(
    pattern: &AnswerPattern,
    grouped: &GroupedPattern<T>,
    predicted: &str,
) -> Result<GroupedScores<T>> {
    if grouped.total() != pattern.total() {
        return Err(Error::Invariant(format!(
            "grouped pattern total {} does not match source pattern total {}",
            grouped.total(),
            pattern.total()
        )));
    }
    let ses = subjectivity(grouped)?;
    let ma_updated = majority(grouped, predicted);
    Ok(GroupedScores {
        ses,
        ma_updated,
        masses: ma_updated * ses,
    })
}

/// Scores computed on one grouping threshold, as serialized per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScore<T = Score> {
    pub threshold: T,
    pub ses: T,
    pub ma_updated: T,
    pub masses: T,
}

/// Per-question metric record emitted as one JSONL line.
///
/// `s` and the per-threshold scores are absent for degenerate (single
/// annotation) samples unless the run includes them by policy. `masses` is
/// always the exact product `ma_updated * ses`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleScore<T = Score> {
    pub question_id: QuestionId,
    /// Number of annotations for the question.
    pub n: usize,
    /// Number of unique normalized answers in the pattern.
    pub unique_answers: usize,
    pub vqa3plus: T,
    pub ma: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<T>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thresholds: Vec<ThresholdScore<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wups_acm: Option<T>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wups_mcm: Option<T>,
    /// Fraction of the pattern's unique answers the vector source covered.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<T>,
}

impl<T: Real> SampleScore<T> {
    /// The threshold entry for `t`, matched exactly.
    pub fn at_threshold(&self, t: T) -> Option<&ThresholdScore<T>> {
        self.thresholds.iter().find(|entry| entry.threshold == t)
    }
}
