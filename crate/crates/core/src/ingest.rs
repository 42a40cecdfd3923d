//! File ingestion: annotation sets, prediction sets, word vectors, and
//! taxonomies.
//!
//! Loading is single-threaded per file; every loaded structure is immutable
//! and shareable afterwards.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Deserialize;

use crate::answer::{Prediction, QuestionId, RawAnnotation};
use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};
use crate::taxonomy::Taxonomy;
use crate::Real;

/// Supported annotation file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationFormat {
    /// Top-level object with an `"annotations"` array; each element carries
    /// `question_id` and `answers: [{"answer": ...}, ...]`. Extra fields such
    /// as `multiple_choice_answer`, `answer_confidence`, or `image_id` are
    /// accepted and ignored. This is the schema the public VQA annotation
    /// releases use.
    VqaJson,
    /// One JSON object per line: `question_id`, `answers` (array of strings),
    /// optional `question` and `answer_type`.
    SimpleJsonl,
}

impl std::str::FromStr for AnnotationFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vqa-json" => Ok(AnnotationFormat::VqaJson),
            "simple-jsonl" => Ok(AnnotationFormat::SimpleJsonl),
            other => Err(Error::InvalidConfig(format!(
                "unknown annotation format {other:?}; expected vqa-json or simple-jsonl"
            ))),
        }
    }
}

#[derive(Deserialize)]
struct VqaFile {
    annotations: Vec<VqaAnnotation>,
}

#[derive(Deserialize)]
struct VqaAnnotation {
    question_id: QuestionId,
    #[serde(default)]
    question: Option<String>,
    answers: Vec<VqaAnswer>,
    #[serde(default)]
    answer_type: Option<String>,
}

#[derive(Deserialize)]
struct VqaAnswer {
    answer: String,
}

/// Loads an annotation file in the given format.
///
/// Question ids must be unique within a file and every answer list must be
/// non-empty.
pub fn load_annotations(path: impl AsRef<Path>, format: AnnotationFormat) -> Result<Vec<RawAnnotation>> {
    let path = path.as_ref();
    let annotations = match format {
        AnnotationFormat::VqaJson => {
            let file: VqaFile = read_json(path)?;
            file.annotations
                .into_iter()
                .map(|a| RawAnnotation {
                    question_id: a.question_id,
                    question: a.question,
                    answers: a.answers.into_iter().map(|ans| ans.answer).collect(),
                    answer_type: a.answer_type,
                })
                .collect()
        }
        AnnotationFormat::SimpleJsonl => {
            let reader = open(path)?;
            let mut annotations = Vec::new();
            for (idx, line) in reader.lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let record: RawAnnotation = serde_json::from_str(&line)
                    .map_err(|e| Error::malformed(path, Some(idx + 1), e.to_string()))?;
                annotations.push(record);
            }
            annotations
        }
    };

    let mut seen = HashSet::new();
    for annotation in &annotations {
        if annotation.answers.is_empty() {
            return Err(Error::malformed(
                path,
                None,
                format!("question {} has an empty answer list", annotation.question_id),
            ));
        }
        if !seen.insert(annotation.question_id.clone()) {
            return Err(Error::DuplicateQuestionId {
                path: path.to_owned(),
                id: annotation.question_id.clone(),
            });
        }
    }
    Ok(annotations)
}

/// Writes annotations as simple-jsonl; re-parsing yields equal values.
pub fn write_annotations_jsonl(annotations: &[RawAnnotation], mut writer: impl Write) -> std::io::Result<()> {
    for annotation in annotations {
        serde_json::to_writer(&mut writer, annotation)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Loads a prediction file: a JSON array of `{question_id, answer}` objects.
pub fn load_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let path = path.as_ref();
    let predictions: Vec<Prediction> = read_json(path)?;
    let mut seen = HashSet::new();
    for prediction in &predictions {
        if !seen.insert(prediction.question_id.clone()) {
            return Err(Error::DuplicateQuestionId {
                path: path.to_owned(),
                id: prediction.question_id.clone(),
            });
        }
    }
    Ok(predictions)
}

/// Loads a word-vector text file.
///
/// Format: an optional first line `"<count> <dimension>"`, then one token
/// followed by `d` whitespace-separated reals per line. The dimension is
/// inferred from the first vector row; every following row must conform.
/// A repeated token keeps its last occurrence (a warning is logged).
pub fn load_embeddings<T: Real>(path: impl AsRef<Path>) -> Result<EmbeddingTable<T>> {
    let path = path.as_ref();
    let reader = open(path)?;
    let mut table: Option<EmbeddingTable<T>> = None;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().expect("non-empty line has a first token");
        let rest: Vec<&str> = parts.collect();

        // Optional "V d" header: exactly two integer fields on the first row.
        if table.is_none() && idx == 0 && rest.len() == 1 {
            if token.parse::<usize>().is_ok() && rest[0].parse::<usize>().is_ok() {
                continue;
            }
        }

        let mut components = Vec::with_capacity(rest.len());
        for raw in &rest {
            let value: f64 = raw.parse().map_err(|_| {
                Error::malformed(path, Some(line_no), format!("component {raw:?} is not a number"))
            })?;
            let value = T::from_f64(value).filter(|v| v.is_finite()).ok_or_else(|| {
                Error::malformed(path, Some(line_no), format!("component {raw:?} is not finite"))
            })?;
            components.push(value);
        }
        if components.is_empty() {
            return Err(Error::malformed(path, Some(line_no), "row has a token but no vector"));
        }

        match &mut table {
            None => {
                let mut t = EmbeddingTable::new(components.len());
                t.insert(token.to_owned(), components);
                table = Some(t);
            }
            Some(t) => {
                if components.len() != t.dimension() {
                    return Err(Error::DimensionMismatch {
                        path: path.to_owned(),
                        line: line_no,
                        expected: t.dimension(),
                        found: components.len(),
                    });
                }
                if t.get(token).is_some() {
                    log::warn!("duplicate token {token:?} in {}; keeping the last occurrence", path.display());
                }
                t.insert(token.to_owned(), components);
            }
        }
    }

    table.ok_or_else(|| Error::EmptyEmbeddings { path: path.to_owned() })
}

/// Loads a taxonomy from a tab-separated edge list.
///
/// Two line forms are accepted: `child<TAB>parent` declares an edge, and
/// `word<TAB>#<TAB>node` maps a surface word to a concept node. The file must
/// describe an acyclic graph with exactly one parentless node (the root).
pub fn load_taxonomy(path: impl AsRef<Path>) -> Result<Taxonomy> {
    let path = path.as_ref();
    let reader = open(path)?;
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut words: Vec<(String, String)> = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            [child, parent] => edges.push((child.trim().to_owned(), parent.trim().to_owned())),
            [word, sep, node] if sep.trim() == "#" => {
                words.push((word.trim().to_owned(), node.trim().to_owned()))
            }
            _ => {
                return Err(Error::malformed(
                    path,
                    Some(line_no),
                    "expected 'child<TAB>parent' or 'word<TAB>#<TAB>node'",
                ))
            }
        }
    }

    Taxonomy::from_edges(edges, words)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let mut contents = String::new();
    open(path)?
        .read_to_string(&mut contents)
        .map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&contents)
        .map_err(|e| Error::malformed(path, Some(e.line()), e.to_string()))
}
