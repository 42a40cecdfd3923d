//! Wu-Palmer similarity and the WUPS consensus baselines.

use crate::answer::{AnswerPattern, Pattern};
use crate::taxonomy::Taxonomy;
use crate::{count, Real};

/// How a prediction is scored against a multi-annotator pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WupsMode {
    /// All-consensus: frequency-weighted mean over the `n` annotations.
    Acm,
    /// Max-consensus: the best-matching annotation is taken.
    Mcm,
}

impl std::str::FromStr for WupsMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "acm" => Ok(WupsMode::Acm),
            "mcm" => Ok(WupsMode::Mcm),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown wups mode {other:?}; expected acm or mcm"
            ))),
        }
    }
}

/// Wu-Palmer word similarity: `2 * depth(dca) / (depth(a) + depth(b))`
/// maximized over the concept nodes of both words, where `dca` is their
/// deepest common ancestor.
///
/// Equal words score `1`; a word with no node mapping scores `0`.
pub fn wu_palmer<T: Real>(a: &str, b: &str, taxonomy: &Taxonomy) -> T {
    if a == b {
        return T::one();
    }
    let (Some(nodes_a), Some(nodes_b)) = (taxonomy.word_nodes(a), taxonomy.word_nodes(b)) else {
        return T::zero();
    };
    let mut best = T::zero();
    for na in nodes_a {
        for nb in nodes_b {
            let Some((_, lcs_depth)) = taxonomy.deepest_common_ancestor(na, nb) else {
                continue;
            };
            let (da, db) = (
                taxonomy.depth(na).expect("mapped node has depth"),
                taxonomy.depth(nb).expect("mapped node has depth"),
            );
            let sim = count::<T>(2 * lcs_depth) / count::<T>(da + db);
            best = best.max(sim);
        }
    }
    best
}

fn thresholded<T: Real>(sim: T, threshold: T, hard_cut: bool) -> T {
    if sim >= threshold {
        sim
    } else if hard_cut {
        T::zero()
    } else {
        T::from_f64(0.1).expect("0.1 representable") * sim
    }
}

/// Set-based phrase similarity.
///
/// Each token of one side is matched to its best thresholded Wu-Palmer score
/// on the other side; the per-side scores multiply and the smaller of the two
/// directions wins. Token scores below `threshold` are down-weighted by 0.1
/// (or zeroed with `hard_cut`). Equal strings score `1` regardless of the
/// taxonomy; a side with no tokens scores `0`.
pub fn wups_phrase<T: Real>(
    predicted: &str,
    ground_truth: &str,
    taxonomy: &Taxonomy,
    threshold: T,
    hard_cut: bool,
) -> T {
    if predicted == ground_truth {
        return T::one();
    }
    let pred_tokens: Vec<&str> = predicted.split_whitespace().collect();
    let gt_tokens: Vec<&str> = ground_truth.split_whitespace().collect();
    if pred_tokens.is_empty() || gt_tokens.is_empty() {
        return T::zero();
    }

    let direction = |from: &[&str], to: &[&str]| {
        from.iter().fold(T::one(), |product, a| {
            let best = to
                .iter()
                .map(|b| thresholded(wu_palmer::<T>(a, b, taxonomy), threshold, hard_cut))
                .fold(T::zero(), T::max);
            product * best
        })
    };

    direction(&pred_tokens, &gt_tokens).min(direction(&gt_tokens, &pred_tokens))
}

/// Scores a prediction against every annotation in the pattern.
///
/// Each unique answer contributes frequency-many terms. `Mcm` takes the
/// maximum phrase score; `Acm` the mean, computed as the maximum minus the
/// mean shortfall so that rounding can never push the mean above the maximum.
pub fn wups_consensus<T: Real>(
    pattern: &AnswerPattern,
    predicted: &str,
    taxonomy: &Taxonomy,
    threshold: T,
    mode: WupsMode,
    hard_cut: bool,
) -> T {
    let scores: Vec<(T, usize)> = pattern
        .entries()
        .iter()
        .map(|e| {
            (
                wups_phrase(predicted, &e.answer, taxonomy, threshold, hard_cut),
                e.frequency,
            )
        })
        .collect();
    let max = scores.iter().map(|&(s, _)| s).fold(T::zero(), T::max);
    match mode {
        WupsMode::Mcm => max,
        WupsMode::Acm => {
            let shortfall = scores
                .iter()
                .fold(T::zero(), |acc, &(s, f)| acc + count::<T>(f) * (max - s));
            (max - shortfall / count::<T>(pattern.total())).max(T::zero())
        }
    }
}
