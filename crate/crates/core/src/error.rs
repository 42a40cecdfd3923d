//! Error type shared across the crate.

use std::path::PathBuf;

use crate::answer::QuestionId;

/// Result alias using [`Error`].
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by ingestion, metric computation, and the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed record in {path}{}: {detail}", fmt_line(*.line))]
    MalformedRecord {
        path: PathBuf,
        line: Option<usize>,
        detail: String,
    },

    #[error("duplicate question_id {id} in {path}")]
    DuplicateQuestionId { path: PathBuf, id: QuestionId },

    #[error("embedding file {path} has no vector rows")]
    EmptyEmbeddings { path: PathBuf },

    #[error("dimension mismatch in {path} line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        path: PathBuf,
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("taxonomy cycle involving node {node:?}")]
    TaxonomyCycle { node: String },

    #[error("taxonomy must have exactly one root, found {roots:?}")]
    TaxonomyRoots { roots: Vec<String> },

    #[error("taxonomy word mapping references unknown node {node:?}")]
    UnknownTaxonomyNode { node: String },

    #[error("degenerate pattern: {total} annotation(s), need at least 2")]
    DegeneratePattern { total: usize },

    #[error(
        "unresolved question ids: {} prediction(s) without annotation, {} annotation(s) without prediction{}",
        .predictions_without_annotation.len(),
        .annotations_without_prediction.len(),
        fmt_id_listing(.predictions_without_annotation, .annotations_without_prediction)
    )]
    UnresolvedIds {
        predictions_without_annotation: Vec<QuestionId>,
        annotations_without_prediction: Vec<QuestionId>,
    },

    #[error("runs disagree on question ids: {} only in left, {} only in right{}",
        .left_only.len(), .right_only.len(), fmt_id_listing(.left_only, .right_only))]
    IdMismatch {
        left_only: Vec<QuestionId>,
        right_only: Vec<QuestionId>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown metric {0:?}")]
    UnknownMetric(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(path: impl Into<PathBuf>, line: Option<usize>, detail: impl Into<String>) -> Self {
        Error::MalformedRecord {
            path: path.into(),
            line,
            detail: detail.into(),
        }
    }
}

fn fmt_line(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" line {l}"),
        None => String::new(),
    }
}

fn fmt_id_listing(a: &[QuestionId], b: &[QuestionId]) -> String {
    const CAP: usize = 20;
    let mut ids: Vec<String> = a.iter().chain(b).take(CAP).map(|id| id.to_string()).collect();
    if a.len() + b.len() > CAP {
        ids.push("...".to_owned());
    }
    if ids.is_empty() {
        String::new()
    } else {
        format!(": [{}]", ids.join(", "))
    }
}
