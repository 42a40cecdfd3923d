//! Consensus-aware evaluation metrics for open-ended visual question answering.
//!
//! Open-ended VQA predictions are scored against the answers of `n` crowd
//! annotators. The standard accuracy (here `vqa3plus`) saturates once three
//! annotators agree with the prediction, which hides how contested a question
//! actually was. This crate implements a family of finer-grained scores over
//! the same annotation patterns:
//!
//! * **Majority** (`ma`) — frequency of the predicted answer divided by the
//!   frequency of the most frequent answer. `1.0` iff the prediction is modal.
//! * **Subjectivity** (`s`) — `(f_max - 1) / (n - 1)`, the reliability of the
//!   pattern itself: `1.0` under full consensus, `0.0` when every annotator
//!   answered differently. Equivalently one minus the normalized minimum
//!   number of annotations that must be relabeled to reach consensus.
//! * **Semantic subjectivity** (`ses`) — subjectivity recomputed after
//!   merging answers whose embedding-cosine similarity to the pattern
//!   centroid meets a threshold `t`.
//! * **Composites** — per-sample products `mas = ma * s` and
//!   `masses = ma_updated * ses`, where `ma_updated` is the majority score on
//!   the merged pattern.
//!
//! Wu-Palmer based consensus baselines (`wups_acm` / `wups_mcm`) over a
//! taxonomy file are provided for comparison, together with an evaluation
//! pipeline that ingests annotation/prediction files and emits per-sample
//! JSONL records plus an aggregate dataset report.
//!
//! Metric kernels are generic over the scalar type via [`Real`]; the pipeline
//! and serialized reports use the [`Score`] alias (`f64`).
//!
//! ```
//! use masses::{build_pattern, NormalizationConfig, RawAnnotation};
//!
//! let ann = RawAnnotation::new("q1", vec!["diced", "diced", "diced", "diced",
//!     "cubed", "cubed", "squares", "squares", "with knife", "into cubes"]);
//! let pattern = build_pattern(&ann, &NormalizationConfig::default());
//!
//! let ma: f64 = masses::majority(&pattern, "cubed");
//! let s: f64 = masses::subjectivity(&pattern).unwrap();
//! assert_eq!(ma, 0.5);
//! assert_eq!(s, 1.0 / 3.0);
//! ```

pub mod answer;
pub mod baseline;
pub mod embedding;
pub mod error;
pub mod grouping;
pub mod ingest;
pub mod metrics;
pub mod normalize;
pub mod pipeline;
pub mod report;
pub mod taxonomy;
pub mod wups;

use num_traits::{Float, FromPrimitive};

pub use answer::{build_pattern, AnswerPattern, Pattern, PatternEntry, Prediction, QuestionId, RawAnnotation};
pub use baseline::{vqa3plus_averaged, vqa3plus_raw};
pub use embedding::{cosine, vectorize_answer, EmbeddingTable};
pub use error::{Error, Result};
pub use grouping::{group_pattern, group_with_labels, locate_prediction, pattern_centroid, Cluster, FixtureBackend, GroupedPattern, GroupingSource, SimilarityBackend};
pub use ingest::{load_annotations, load_embeddings, load_predictions, load_taxonomy, AnnotationFormat};
pub use metrics::{majority, mas, masses_scores, subjectivity, GroupedScores, SampleScore, ThresholdScore};
pub use normalize::{normalize_answer, NormalizationConfig};
pub use pipeline::{analyze, compare, evaluate, CompareInput, CompareReport, MetricKey, RunConfig};
pub use report::DatasetReport;
pub use taxonomy::Taxonomy;
pub use wups::{wu_palmer, wups_consensus, wups_phrase, WupsMode};

/// Floating-point scalar the metric kernels are generic over.
///
/// Implemented for `f32` and `f64`. Every score is a ratio of small integer
/// counts (or a cosine), so any IEEE float type works; the pipeline pins
/// [`Score`] for serialized output.
pub trait Real: Float + FromPrimitive {}

impl<T: Float + FromPrimitive> Real for T {}

/// Scalar type used by the pipeline, the CLI, and serialized reports.
pub type Score = f64;

pub(crate) fn count<T: Real>(n: usize) -> T {
    T::from_usize(n).expect("count representable as scalar")
}
