//! Semantic grouping of answer patterns.
//!
//! An [`AnswerPattern`] is regrouped in four steps: (a) each unique answer is
//! vectorized by averaging the embeddings of its tokens, (b) the unweighted
//! mean of those vectors forms the pattern centroid (frequencies play no
//! role, so the long tail counts as much as the modal answer), (c) each
//! vectorizable answer is scored by cosine against the centroid with negative
//! cosines clamped to zero, and (d) every answer scoring at or above the
//! threshold `t` is merged into one cluster whose frequency is the sum of its
//! members'. Everything else — below-threshold answers and answers with no
//! known tokens — stays a singleton.
//!
//! Subjectivity computed on the result is the semantics-aware `ses` score,
//! and majority computed on it is the updated `ma`. Predictions are located
//! in a cluster by exact normalized string membership only: an answer absent
//! from the pattern never joins a cluster, however semantically close.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::Deserialize;

use crate::answer::{AnswerPattern, Pattern};
use crate::embedding::{cosine, mean_of, vectorize_answer, EmbeddingTable};
use crate::error::{Error, Result};
use crate::{count, Real};

/// Source of answer vectors for grouping.
///
/// Implementations must be deterministic: the same answer always yields the
/// same vector or the same miss.
pub trait SimilarityBackend<T: Real> {
    fn vector(&self, answer: &str) -> Option<Vec<T>>;
}

/// The default backend: token-averaged word embeddings.
impl<T: Real> SimilarityBackend<T> for EmbeddingTable<T> {
    fn vector(&self, answer: &str) -> Option<Vec<T>> {
        vectorize_answer(answer, self)
    }
}

struct AnswerVectorMap<'a, T>(&'a HashMap<String, Vec<T>>);

impl<T: Real> SimilarityBackend<T> for AnswerVectorMap<'_, T> {
    fn vector(&self, answer: &str) -> Option<Vec<T>> {
        self.0.get(answer).cloned()
    }
}

/// Test-oriented backend pinned by a JSON file.
///
/// The file is a JSON object mapping whole answers either to vectors
/// (`{"hot dog": [0.1, 0.2]}`) or to cluster labels
/// (`{"hot dog": "g1", "hot dogs": "g1"}`). Vectors go through the regular
/// cosine pipeline; labels override grouping directly, which decouples golden
/// tests from any particular embedding release. Mixing the two forms in one
/// file is rejected.
#[derive(Debug, Clone)]
pub enum FixtureBackend<T> {
    Vectors(HashMap<String, Vec<T>>),
    Labels(HashMap<String, String>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FixtureEntry {
    Vector(Vec<f64>),
    Label(String),
}

impl<T: Real> FixtureBackend<T> {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, FixtureEntry> = serde_json::from_str(&contents)
            .map_err(|e| Error::malformed(path, Some(e.line()), e.to_string()))?;

        let mut vectors = HashMap::new();
        let mut labels = HashMap::new();
        let mut dimension: Option<usize> = None;
        for (answer, entry) in raw {
            match entry {
                FixtureEntry::Vector(v) => {
                    let dim = *dimension.get_or_insert(v.len());
                    if v.len() != dim || v.is_empty() {
                        return Err(Error::malformed(
                            path,
                            None,
                            format!("vector for {answer:?} has {} components, expected {dim}", v.len()),
                        ));
                    }
                    let converted: Option<Vec<T>> = v
                        .into_iter()
                        .map(|x| T::from_f64(x).filter(|c| c.is_finite()))
                        .collect();
                    let converted = converted.ok_or_else(|| {
                        Error::malformed(path, None, format!("non-finite component for {answer:?}"))
                    })?;
                    vectors.insert(answer, converted);
                }
                FixtureEntry::Label(l) => {
                    labels.insert(answer, l);
                }
            }
        }

        match (vectors.is_empty(), labels.is_empty()) {
            (false, true) => Ok(FixtureBackend::Vectors(vectors)),
            (true, false) => Ok(FixtureBackend::Labels(labels)),
            (true, true) => Err(Error::malformed(path, None, "fixture backend file is empty")),
            (false, false) => Err(Error::malformed(
                path,
                None,
                "fixture backend mixes vectors and cluster labels",
            )),
        }
    }
}

/// A cluster of unique answers with their summed frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Member answers, sorted ascending.
    pub members: Vec<String>,
    pub frequency: usize,
}

impl Cluster {
    pub fn contains(&self, answer: &str) -> bool {
        self.members.iter().any(|m| m == answer)
    }
}

/// An [`AnswerPattern`] after semantic grouping.
///
/// Clusters partition the unique answers of the source pattern and preserve
/// its total frequency. Threshold-based grouping produces at most one cluster
/// with more than one member; [`GroupedPattern::from_partition`] admits
/// arbitrary partitions for direct overrides and property tests.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedPattern<T> {
    clusters: Vec<Cluster>,
    total: usize,
    max_frequency: usize,
    threshold: Option<T>,
    covered_unique: usize,
    unique: usize,
}

impl<T: Real> GroupedPattern<T> {
    /// Groups a pattern by an explicit partition of its unique answers.
    ///
    /// Every unique answer must appear in exactly one part.
    pub fn from_partition(pattern: &AnswerPattern, parts: Vec<Vec<String>>) -> Result<Self> {
        let mut remaining: HashMap<&str, usize> = pattern
            .entries()
            .iter()
            .map(|e| (e.answer.as_str(), e.frequency))
            .collect();

        let mut clusters = Vec::with_capacity(parts.len());
        for part in parts {
            if part.is_empty() {
                return Err(Error::Invariant("empty part in answer partition".into()));
            }
            let mut frequency = 0usize;
            let mut members = Vec::with_capacity(part.len());
            for answer in part {
                match remaining.remove(answer.as_str()) {
                    Some(f) => frequency += f,
                    None => {
                        return Err(Error::Invariant(format!(
                            "partition member {answer:?} is not an unclaimed pattern answer"
                        )))
                    }
                }
                members.push(answer);
            }
            members.sort();
            clusters.push(Cluster { members, frequency });
        }
        if !remaining.is_empty() {
            return Err(Error::Invariant(format!(
                "partition misses {} pattern answer(s)",
                remaining.len()
            )));
        }

        Ok(Self::assemble(clusters, pattern, None, pattern.unique_answers()))
    }

    fn assemble(
        mut clusters: Vec<Cluster>,
        pattern: &AnswerPattern,
        threshold: Option<T>,
        covered_unique: usize,
    ) -> Self {
        clusters.sort_by(|a, b| {
            b.frequency
                .cmp(&a.frequency)
                .then_with(|| a.members.cmp(&b.members))
        });
        let max_frequency = clusters.iter().map(|c| c.frequency).max().unwrap_or(0);
        GroupedPattern {
            clusters,
            total: pattern.total(),
            max_frequency,
            threshold,
            covered_unique,
            unique: pattern.unique_answers(),
        }
    }

    /// Clusters, largest frequency first.
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// The threshold used for cosine grouping; `None` for direct overrides.
    pub fn threshold(&self) -> Option<T> {
        self.threshold
    }

    /// Fraction of unique answers that were vectorizable (or labeled).
    pub fn coverage(&self) -> T {
        count::<T>(self.covered_unique) / count::<T>(self.unique)
    }

    /// The cluster with more than one member, if any.
    pub fn merged_cluster(&self) -> Option<&Cluster> {
        self.clusters.iter().find(|c| c.members.len() > 1)
    }
}

impl<T: Real> Pattern for GroupedPattern<T> {
    fn total(&self) -> usize {
        self.total
    }

    fn max_frequency(&self) -> usize {
        self.max_frequency
    }

    fn frequency_of(&self, answer: &str) -> Option<usize> {
        self.clusters
            .iter()
            .find(|c| c.contains(answer))
            .map(|c| c.frequency)
    }
}

/// Unweighted mean over the vectors of the pattern's vectorizable unique
/// answers.
///
/// Frequencies play no role: a nine-vote answer and a one-vote answer pull
/// the centroid equally, so the long tail of a pattern counts fully towards
/// its overall meaning. Returns `None` when no unique answer is
/// vectorizable.
pub fn pattern_centroid<T, B>(pattern: &AnswerPattern, backend: &B) -> Option<Vec<T>>
where
    T: Real,
    B: SimilarityBackend<T> + ?Sized,
{
    let vectors: Vec<Option<Vec<T>>> = pattern
        .entries()
        .iter()
        .map(|e| backend.vector(&e.answer))
        .collect();
    centroid_of(&vectors)
}

fn centroid_of<T: Real>(vectors: &[Option<Vec<T>>]) -> Option<Vec<T>> {
    let dimension = vectors.iter().flatten().map(Vec::len).next().unwrap_or(0);
    mean_of(vectors.iter().flatten().map(Vec::as_slice), dimension)
}

/// Groups a pattern by cosine similarity against its centroid.
///
/// Answers whose clamped cosine reaches `threshold` form one merged cluster;
/// below-threshold and unvectorizable answers stay singletons. When no answer
/// is vectorizable the result mirrors the original pattern entries.
pub fn group_pattern<T, B>(pattern: &AnswerPattern, backend: &B, threshold: T) -> GroupedPattern<T>
where
    T: Real,
    B: SimilarityBackend<T> + ?Sized,
{
    let vectors: Vec<Option<Vec<T>>> = pattern
        .entries()
        .iter()
        .map(|e| backend.vector(&e.answer))
        .collect();
    let covered = vectors.iter().filter(|v| v.is_some()).count();
    let centroid = centroid_of(&vectors);

    let mut merged: Vec<usize> = Vec::new();
    let mut singletons: Vec<usize> = Vec::new();
    match centroid {
        Some(centroid) => {
            for (i, vector) in vectors.iter().enumerate() {
                let joins = vector.as_ref().is_some_and(|v| {
                    let sim = cosine(v.as_slice(), &centroid).max(T::zero());
                    sim >= threshold
                });
                if joins {
                    merged.push(i);
                } else {
                    singletons.push(i);
                }
            }
        }
        None => singletons.extend(0..pattern.entries().len()),
    }

    let entries = pattern.entries();
    let mut clusters = Vec::with_capacity(singletons.len() + 1);
    if !merged.is_empty() {
        let mut members: Vec<String> = merged.iter().map(|&i| entries[i].answer.clone()).collect();
        members.sort();
        let frequency = merged.iter().map(|&i| entries[i].frequency).sum();
        clusters.push(Cluster { members, frequency });
    }
    for i in singletons {
        clusters.push(Cluster {
            members: vec![entries[i].answer.clone()],
            frequency: entries[i].frequency,
        });
    }

    GroupedPattern::assemble(clusters, pattern, Some(threshold), covered)
}

/// Groups a pattern by explicit cluster labels; answers without a label stay
/// singletons.
pub fn group_with_labels<T: Real>(
    pattern: &AnswerPattern,
    labels: &HashMap<String, String>,
) -> GroupedPattern<T> {
    let mut by_label: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    let mut parts: Vec<Vec<String>> = Vec::new();
    let mut covered = 0usize;
    for entry in pattern.entries() {
        match labels.get(&entry.answer) {
            Some(label) => {
                covered += 1;
                by_label.entry(label).or_default().push(entry.answer.clone());
            }
            None => parts.push(vec![entry.answer.clone()]),
        }
    }
    parts.extend(by_label.into_values());

    let grouped = GroupedPattern::from_partition(pattern, parts)
        .expect("label grouping always forms a partition");
    GroupedPattern {
        covered_unique: covered,
        ..grouped
    }
}

/// Dispatches grouping to whichever vector source a run was configured with.
#[derive(Debug, Clone)]
pub enum GroupingSource<T> {
    Embeddings(EmbeddingTable<T>),
    Fixture(FixtureBackend<T>),
    /// No vector source: every unique answer stays a singleton.
    Identity,
}

impl<T: Real> GroupingSource<T> {
    pub fn group(&self, pattern: &AnswerPattern, threshold: T) -> GroupedPattern<T> {
        match self {
            GroupingSource::Embeddings(table) => group_pattern(pattern, table, threshold),
            GroupingSource::Fixture(FixtureBackend::Vectors(map)) => {
                group_pattern(pattern, &AnswerVectorMap(map), threshold)
            }
            GroupingSource::Fixture(FixtureBackend::Labels(labels)) => {
                group_with_labels(pattern, labels)
            }
            GroupingSource::Identity => group_with_labels(pattern, &HashMap::new()),
        }
    }
}

/// Finds the cluster containing an exact member match of `predicted`.
pub fn locate_prediction<'a, T: Real>(
    grouped: &'a GroupedPattern<T>,
    predicted: &str,
) -> Option<&'a Cluster> {
    grouped.clusters.iter().find(|c| c.contains(predicted))
}
