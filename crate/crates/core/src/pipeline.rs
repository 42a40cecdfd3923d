//! Evaluation pipeline: ingestion, per-sample scoring, deterministic
//! aggregation, and file emission.
//!
//! Scoring fans out across samples with a configurable worker count; all
//! shared state is immutable and the per-sample records are reduced
//! sequentially in question-id order, so two runs with identical inputs and
//! config produce byte-identical outputs regardless of parallelism.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::answer::{build_pattern, Pattern, Prediction, QuestionId, RawAnnotation};
use crate::baseline::{vqa3plus_averaged, vqa3plus_raw};
use crate::error::{Error, Result};
use crate::grouping::GroupingSource;
use crate::ingest::{load_annotations, load_embeddings, load_predictions, load_taxonomy, AnnotationFormat};
use crate::metrics::{majority, masses_scores, subjectivity, SampleScore, ThresholdScore};
use crate::normalize::{normalize_answer, NormalizationConfig};
use crate::report::{aggregate, Counts, DatasetReport, Histogram, SampleData, SesAccuracyBins, ThresholdData};
use crate::taxonomy::Taxonomy;
use crate::wups::{wups_consensus, WupsMode};
use crate::{grouping::FixtureBackend, Score};

/// Configuration for an `evaluate` or `analyze` run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub annotations: PathBuf,
    pub format: AnnotationFormat,
    /// Required by `evaluate`, ignored by `analyze`.
    pub predictions: Option<PathBuf>,
    /// Word-vector text file; mutually exclusive with `fixture_backend`.
    pub embeddings: Option<PathBuf>,
    /// JSON fixture mapping answers to vectors or cluster labels.
    pub fixture_backend: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    /// Grouping thresholds; deduplicated and sorted at validation.
    pub ses_thresholds: Vec<Score>,
    pub wups_threshold: Score,
    pub wups_modes: Vec<WupsMode>,
    pub wups_hard_cut: bool,
    pub normalization: NormalizationConfig,
    pub out_dir: PathBuf,
    /// Scoring worker threads; `0` uses all available cores.
    pub workers: usize,
    pub histogram_bins: usize,
    /// Treat single-annotation samples as full consensus instead of
    /// excluding them from subjectivity aggregates.
    pub include_degenerate: bool,
    /// Maximum tolerated fraction of unresolved question ids.
    pub unresolved_tolerance: Score,
    pub emit_csv: bool,
}

impl RunConfig {
    pub fn new(annotations: impl Into<PathBuf>, format: AnnotationFormat, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            annotations: annotations.into(),
            format,
            predictions: None,
            embeddings: None,
            fixture_backend: None,
            taxonomy: None,
            ses_thresholds: vec![0.7, 0.9],
            wups_threshold: 0.9,
            wups_modes: vec![WupsMode::Acm, WupsMode::Mcm],
            wups_hard_cut: false,
            normalization: NormalizationConfig::default(),
            out_dir: out_dir.into(),
            workers: 1,
            histogram_bins: 10,
            include_degenerate: false,
            unresolved_tolerance: 0.0,
            emit_csv: false,
        }
    }

    /// Checks ranges and normalizes the threshold list.
    pub fn validate(&mut self) -> Result<()> {
        for &t in &self.ses_thresholds {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidConfig(format!("ses threshold {t} outside [0, 1]")));
            }
        }
        self.ses_thresholds.sort_by(|a, b| a.partial_cmp(b).expect("thresholds are finite"));
        self.ses_thresholds.dedup();
        if !(0.0..=1.0).contains(&self.wups_threshold) {
            return Err(Error::InvalidConfig(format!(
                "wups threshold {} outside [0, 1]",
                self.wups_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.unresolved_tolerance) {
            return Err(Error::InvalidConfig(format!(
                "unresolved tolerance {} outside [0, 1]",
                self.unresolved_tolerance
            )));
        }
        if self.histogram_bins == 0 {
            return Err(Error::InvalidConfig("histogram bin count must be positive".into()));
        }
        if self.embeddings.is_some() && self.fixture_backend.is_some() {
            return Err(Error::InvalidConfig(
                "embeddings and fixture backend are mutually exclusive".into(),
            ));
        }
        Ok(())
    }

    fn grouping_source(&self) -> Result<GroupingSource<Score>> {
        if let Some(path) = &self.embeddings {
            return Ok(GroupingSource::Embeddings(load_embeddings(path)?));
        }
        if let Some(path) = &self.fixture_backend {
            return Ok(GroupingSource::Fixture(FixtureBackend::load(path)?));
        }
        Ok(GroupingSource::Identity)
    }

    fn load_taxonomy(&self) -> Result<Option<Taxonomy>> {
        self.taxonomy.as_deref().map(load_taxonomy).transpose()
    }
}

struct ScoreContext {
    normalization: NormalizationConfig,
    source: GroupingSource<Score>,
    thresholds: Vec<Score>,
    taxonomy: Option<Taxonomy>,
    wups_threshold: Score,
    wups_modes: Vec<WupsMode>,
    wups_hard_cut: bool,
    include_degenerate: bool,
}

impl ScoreContext {
    fn from_config(config: &RunConfig) -> Result<Self> {
        Ok(ScoreContext {
            normalization: config.normalization.clone(),
            source: config.grouping_source()?,
            thresholds: config.ses_thresholds.clone(),
            taxonomy: config.load_taxonomy()?,
            wups_threshold: config.wups_threshold,
            wups_modes: config.wups_modes.clone(),
            wups_hard_cut: config.wups_hard_cut,
            include_degenerate: config.include_degenerate,
        })
    }

    fn track_coverage(&self) -> bool {
        !matches!(self.source, GroupingSource::Identity)
    }

    fn score(&self, annotation: &RawAnnotation, prediction: &Prediction) -> SampleScore {
        let pattern = build_pattern(annotation, &self.normalization);
        let predicted = normalize_answer(&prediction.answer, &self.normalization);
        let n = pattern.total();

        let ma = majority::<Score, _>(&pattern, &predicted);
        let vqa3plus = if n >= 2 {
            vqa3plus_averaged::<Score, _>(&pattern, &predicted).expect("two or more annotations")
        } else {
            // leave-one-out is undefined for a single annotation
            vqa3plus_raw::<Score, _>(&pattern, &predicted)
        };

        let mut s = None;
        let mut thresholds = Vec::new();
        let mut coverage = None;
        if n >= 2 {
            s = Some(subjectivity::<Score, _>(&pattern).expect("two or more annotations"));
            for &t in &self.thresholds {
                let grouped = self.source.group(&pattern, t);
                if self.track_coverage() {
                    coverage.get_or_insert(grouped.coverage());
                }
                let scores = masses_scores(&pattern, &grouped, &predicted)
                    .expect("two or more annotations and matching totals");
                thresholds.push(ThresholdScore {
                    threshold: t,
                    ses: scores.ses,
                    ma_updated: scores.ma_updated,
                    masses: scores.masses,
                });
            }
        } else if self.include_degenerate {
            // a single annotation is treated as full consensus
            s = Some(1.0);
            for &t in &self.thresholds {
                let grouped = self.source.group(&pattern, t);
                if self.track_coverage() {
                    coverage.get_or_insert(grouped.coverage());
                }
                let ma_updated = majority::<Score, _>(&grouped, &predicted);
                thresholds.push(ThresholdScore {
                    threshold: t,
                    ses: 1.0,
                    ma_updated,
                    masses: ma_updated,
                });
            }
        }

        let (wups_acm, wups_mcm) = self.wups(&pattern, &predicted);

        SampleScore {
            question_id: annotation.question_id.clone(),
            n,
            unique_answers: pattern.unique_answers(),
            vqa3plus,
            ma,
            s,
            thresholds,
            wups_acm,
            wups_mcm,
            coverage,
        }
    }

    fn analyze(&self, annotation: &RawAnnotation) -> SampleData {
        let pattern = build_pattern(annotation, &self.normalization);
        let n = pattern.total();

        let mut s = None;
        let mut per_threshold = vec![ThresholdData::default(); self.thresholds.len()];
        let mut coverage = None;
        if n >= 2 {
            s = Some(subjectivity::<Score, _>(&pattern).expect("two or more annotations"));
            for (i, &t) in self.thresholds.iter().enumerate() {
                let grouped = self.source.group(&pattern, t);
                if self.track_coverage() {
                    coverage.get_or_insert(grouped.coverage());
                }
                per_threshold[i].ses =
                    Some(subjectivity::<Score, _>(&grouped).expect("two or more annotations"));
            }
        } else if self.include_degenerate {
            s = Some(1.0);
            for slot in &mut per_threshold {
                slot.ses = Some(1.0);
            }
        }

        SampleData {
            n,
            unique: pattern.unique_answers(),
            vqa3plus: None,
            ma: None,
            s,
            per_threshold,
            wups_acm: None,
            wups_mcm: None,
            coverage,
        }
    }

    fn wups(&self, pattern: &crate::AnswerPattern, predicted: &str) -> (Option<Score>, Option<Score>) {
        let Some(taxonomy) = &self.taxonomy else {
            return (None, None);
        };
        let mut acm = None;
        let mut mcm = None;
        for mode in &self.wups_modes {
            let value = wups_consensus::<Score>(
                pattern,
                predicted,
                taxonomy,
                self.wups_threshold,
                *mode,
                self.wups_hard_cut,
            );
            match mode {
                WupsMode::Acm => acm = Some(value),
                WupsMode::Mcm => mcm = Some(value),
            }
        }
        (acm, mcm)
    }
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))
}

/// Scores every matched (annotation, prediction) pair and writes
/// `samples.jsonl` plus `report.json` under the configured output directory.
///
/// Question ids that do not resolve in both files abort the run (exit-worthy
/// error listing the offenders) unless they stay within the configured
/// tolerance fraction, in which case they are only counted in the report.
pub fn evaluate(config: &RunConfig) -> Result<(Vec<SampleScore>, DatasetReport)> {
    let mut config = config.clone();
    config.validate()?;
    let predictions_path = config
        .predictions
        .clone()
        .ok_or_else(|| Error::InvalidConfig("evaluate requires a prediction file".into()))?;

    let annotations = load_annotations(&config.annotations, config.format)?;
    let predictions = load_predictions(&predictions_path)?;
    let context = ScoreContext::from_config(&config)?;

    let by_id: BTreeMap<&QuestionId, &RawAnnotation> =
        annotations.iter().map(|a| (&a.question_id, a)).collect();
    let mut matched: BTreeMap<&QuestionId, (&RawAnnotation, &Prediction)> = BTreeMap::new();
    let mut predictions_without_annotation: Vec<QuestionId> = Vec::new();
    for prediction in &predictions {
        match by_id.get(&prediction.question_id) {
            Some(annotation) => {
                matched.insert(&prediction.question_id, (annotation, prediction));
            }
            None => predictions_without_annotation.push(prediction.question_id.clone()),
        }
    }
    let mut annotations_without_prediction: Vec<QuestionId> = annotations
        .iter()
        .filter(|a| !matched.contains_key(&a.question_id))
        .map(|a| a.question_id.clone())
        .collect();
    predictions_without_annotation.sort();
    annotations_without_prediction.sort();

    let unresolved = predictions_without_annotation.len() + annotations_without_prediction.len();
    let unresolved_fraction = unresolved as Score / annotations.len().max(1) as Score;
    if unresolved > 0 && unresolved_fraction > config.unresolved_tolerance {
        return Err(Error::UnresolvedIds {
            predictions_without_annotation,
            annotations_without_prediction,
        });
    }

    let pairs: Vec<(&RawAnnotation, &Prediction)> = matched.into_values().collect();
    let pool = thread_pool(config.workers)?;
    let scores: Vec<SampleScore> =
        pool.install(|| pairs.par_iter().map(|(a, p)| context.score(a, p)).collect());

    let data: Vec<SampleData> = scores
        .iter()
        .map(|r| sample_data_from_score(r, &config.ses_thresholds))
        .collect();
    let counts = Counts {
        samples_scored: scores.len(),
        degenerate_samples: scores.iter().filter(|r| r.n == 1).count(),
        predictions_without_annotation: predictions_without_annotation.len(),
        annotations_without_prediction: annotations_without_prediction.len(),
    };
    let report = aggregate(&data, &config.ses_thresholds, config.histogram_bins, counts);
    report.validate()?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    write_jsonl(&config.out_dir.join("samples.jsonl"), &scores)?;
    write_json(&config.out_dir.join("report.json"), &report)?;
    if config.emit_csv {
        write_report_csvs(&config.out_dir, &report)?;
    }

    Ok((scores, report))
}

fn sample_data_from_score(record: &SampleScore, thresholds: &[Score]) -> SampleData {
    let per_threshold = thresholds
        .iter()
        .map(|&t| {
            record
                .thresholds
                .iter()
                .find(|entry| entry.threshold == t)
                .map(|entry| ThresholdData {
                    ses: Some(entry.ses),
                    masses: Some(entry.masses),
                })
                .unwrap_or_default()
        })
        .collect();
    SampleData {
        n: record.n,
        unique: record.unique_answers,
        vqa3plus: Some(record.vqa3plus),
        ma: Some(record.ma),
        s: record.s,
        per_threshold,
        wups_acm: record.wups_acm,
        wups_mcm: record.wups_mcm,
        coverage: record.coverage,
    }
}

/// Computes the data-side report (subjectivity, semantic subjectivity,
/// histograms) for an annotation set without any predictions.
pub fn analyze(config: &RunConfig) -> Result<DatasetReport> {
    let mut config = config.clone();
    config.validate()?;
    let annotations = load_annotations(&config.annotations, config.format)?;
    let context = ScoreContext::from_config(&config)?;

    let mut ordered: Vec<&RawAnnotation> = annotations.iter().collect();
    ordered.sort_by(|a, b| a.question_id.cmp(&b.question_id));

    let pool = thread_pool(config.workers)?;
    let data: Vec<SampleData> =
        pool.install(|| ordered.par_iter().map(|a| context.analyze(a)).collect());

    let counts = Counts {
        samples_scored: data.len(),
        degenerate_samples: data.iter().filter(|d| d.n == 1).count(),
        predictions_without_annotation: 0,
        annotations_without_prediction: 0,
    };
    let report = aggregate(&data, &config.ses_thresholds, config.histogram_bins, counts);
    report.validate()?;

    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    write_json(&config.out_dir.join("report.json"), &report)?;
    if config.emit_csv {
        write_report_csvs(&config.out_dir, &report)?;
    }
    Ok(report)
}

/// A per-sample metric addressed by name, e.g. `vqa3plus` or `masses_0.9`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKey {
    Vqa3Plus,
    Ma,
    S,
    Mas,
    Ses(Score),
    MaUpdated(Score),
    Masses(Score),
    WupsAcm,
    WupsMcm,
}

impl MetricKey {
    /// Extracts the metric value from a record; `None` when the record does
    /// not carry it (degenerate sample or unconfigured metric).
    pub fn extract(&self, record: &SampleScore) -> Option<Score> {
        let at = |t: Score| record.thresholds.iter().find(|e| e.threshold == t);
        match *self {
            MetricKey::Vqa3Plus => Some(record.vqa3plus),
            MetricKey::Ma => Some(record.ma),
            MetricKey::S => record.s,
            MetricKey::Mas => record.s.map(|s| record.ma * s),
            MetricKey::Ses(t) => at(t).map(|e| e.ses),
            MetricKey::MaUpdated(t) => at(t).map(|e| e.ma_updated),
            MetricKey::Masses(t) => at(t).map(|e| e.masses),
            MetricKey::WupsAcm => record.wups_acm,
            MetricKey::WupsMcm => record.wups_mcm,
        }
    }
}

impl std::str::FromStr for MetricKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_threshold = |prefix: &str| -> Result<Score> {
            s[prefix.len()..]
                .parse::<Score>()
                .map_err(|_| Error::UnknownMetric(s.to_owned()))
        };
        match s {
            "vqa3plus" => Ok(MetricKey::Vqa3Plus),
            "ma" => Ok(MetricKey::Ma),
            "s" => Ok(MetricKey::S),
            "mas" => Ok(MetricKey::Mas),
            "wups_acm" => Ok(MetricKey::WupsAcm),
            "wups_mcm" => Ok(MetricKey::WupsMcm),
            _ if s.starts_with("ses_") => Ok(MetricKey::Ses(parse_threshold("ses_")?)),
            _ if s.starts_with("ma_updated_") => Ok(MetricKey::MaUpdated(parse_threshold("ma_updated_")?)),
            _ if s.starts_with("masses_") => Ok(MetricKey::Masses(parse_threshold("masses_")?)),
            _ => Err(Error::UnknownMetric(s.to_owned())),
        }
    }
}

impl fmt::Display for MetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKey::Vqa3Plus => write!(f, "vqa3plus"),
            MetricKey::Ma => write!(f, "ma"),
            MetricKey::S => write!(f, "s"),
            MetricKey::Mas => write!(f, "mas"),
            MetricKey::Ses(t) => write!(f, "ses_{t}"),
            MetricKey::MaUpdated(t) => write!(f, "ma_updated_{t}"),
            MetricKey::Masses(t) => write!(f, "masses_{t}"),
            MetricKey::WupsAcm => write!(f, "wups_acm"),
            MetricKey::WupsMcm => write!(f, "wups_mcm"),
        }
    }
}

/// What a `compare` run diffs.
#[derive(Debug, Clone)]
pub enum CompareInput {
    /// One metric across two per-sample JSONL files.
    TwoRuns {
        left: PathBuf,
        right: PathBuf,
        metric: MetricKey,
    },
    /// Two metrics within one per-sample JSONL file.
    WithinRun {
        run: PathBuf,
        left_metric: MetricKey,
        right_metric: MetricKey,
    },
}

/// Per-sample score difference.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DeltaRow {
    pub question_id: QuestionId,
    pub left: Score,
    pub right: Score,
    pub delta: Score,
}

/// Divergence report between two metrics or two runs.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CompareReport {
    pub left: String,
    pub right: String,
    /// Samples with both values present.
    pub samples: usize,
    /// Samples skipped because either side lacked the metric.
    pub skipped: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_left: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_right: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_delta: Option<Score>,
    pub histogram_left: Histogram,
    pub histogram_right: Histogram,
    /// Sorted by absolute delta, largest divergence first.
    pub deltas: Vec<DeltaRow>,
    /// Mean standard accuracy per semantic-subjectivity bin, from the left
    /// (or single) run's records.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ses_accuracy_bins: Vec<SesAccuracyBins>,
}

/// Reads a per-sample JSONL file back into records.
pub fn read_run(path: impl AsRef<Path>) -> Result<Vec<SampleScore>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SampleScore = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(path, Some(idx + 1), e.to_string()))?;
        records.push(record);
    }
    records.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    Ok(records)
}

/// Diffs two runs (or two metrics of one run) and writes `compare.json`.
pub fn compare(input: &CompareInput, out_dir: &Path, bins: usize, emit_csv: bool) -> Result<CompareReport> {
    if bins == 0 {
        return Err(Error::InvalidConfig("histogram bin count must be positive".into()));
    }

    let (pairs, left_name, right_name, basis): (Vec<(QuestionId, Option<Score>, Option<Score>)>, String, String, Vec<SampleScore>) =
        match input {
            CompareInput::TwoRuns { left, right, metric } => {
                let left_records = read_run(left)?;
                let right_records = read_run(right)?;
                let left_ids: BTreeSet<&QuestionId> = left_records.iter().map(|r| &r.question_id).collect();
                let right_ids: BTreeSet<&QuestionId> = right_records.iter().map(|r| &r.question_id).collect();
                let left_only: Vec<QuestionId> =
                    left_ids.difference(&right_ids).map(|id| (*id).clone()).collect();
                let right_only: Vec<QuestionId> =
                    right_ids.difference(&left_ids).map(|id| (*id).clone()).collect();
                if !left_only.is_empty() || !right_only.is_empty() {
                    return Err(Error::IdMismatch { left_only, right_only });
                }
                let right_by_id: BTreeMap<&QuestionId, &SampleScore> =
                    right_records.iter().map(|r| (&r.question_id, r)).collect();
                let pairs = left_records
                    .iter()
                    .map(|l| {
                        let r = right_by_id[&l.question_id];
                        (l.question_id.clone(), metric.extract(l), metric.extract(r))
                    })
                    .collect();
                (
                    pairs,
                    format!("{metric}@{}", left.display()),
                    format!("{metric}@{}", right.display()),
                    left_records,
                )
            }
            CompareInput::WithinRun { run, left_metric, right_metric } => {
                let records = read_run(run)?;
                let pairs = records
                    .iter()
                    .map(|r| (r.question_id.clone(), left_metric.extract(r), right_metric.extract(r)))
                    .collect();
                (pairs, left_metric.to_string(), right_metric.to_string(), records)
            }
        };

    let mut deltas = Vec::new();
    let mut skipped = 0usize;
    for (id, left, right) in pairs {
        match (left, right) {
            (Some(l), Some(r)) => deltas.push(DeltaRow {
                question_id: id,
                left: l,
                right: r,
                delta: l - r,
            }),
            _ => skipped += 1,
        }
    }

    let left_values: Vec<Score> = deltas.iter().map(|d| d.left).collect();
    let right_values: Vec<Score> = deltas.iter().map(|d| d.right).collect();
    let mean = |v: &[Score]| (!v.is_empty()).then(|| v.iter().sum::<Score>() / v.len() as Score);

    deltas.sort_by(|a, b| {
        b.delta
            .abs()
            .partial_cmp(&a.delta.abs())
            .expect("scores are finite")
            .then_with(|| a.question_id.cmp(&b.question_id))
    });

    let thresholds: Vec<Score> = {
        let mut seen: Vec<Score> = Vec::new();
        for record in &basis {
            for entry in &record.thresholds {
                if !seen.contains(&entry.threshold) {
                    seen.push(entry.threshold);
                }
            }
        }
        seen.sort_by(|a, b| a.partial_cmp(b).expect("thresholds are finite"));
        seen
    };
    let basis_data: Vec<SampleData> = basis
        .iter()
        .map(|r| sample_data_from_score(r, &thresholds))
        .collect();
    let ses_accuracy_bins = crate::report::ses_accuracy(&basis_data, &thresholds, bins);

    let report = CompareReport {
        left: left_name,
        right: right_name,
        samples: deltas.len(),
        skipped,
        mean_left: mean(&left_values),
        mean_right: mean(&right_values),
        mean_delta: (!deltas.is_empty()).then(|| deltas.iter().map(|d| d.delta).sum::<Score>() / deltas.len() as Score),
        histogram_left: Histogram::build("left", &left_values, bins),
        histogram_right: Histogram::build("right", &right_values, bins),
        deltas,
        ses_accuracy_bins,
    };

    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    write_json(&out_dir.join("compare.json"), &report)?;
    if emit_csv {
        let mut out = String::from("question_id,left,right,delta\n");
        for row in &report.deltas {
            out.push_str(&format!("{},{},{},{}\n", row.question_id, row.left, row.right, row.delta));
        }
        std::fs::write(out_dir.join("deltas.csv"), out).map_err(|e| Error::io(out_dir, e))?;
    }
    Ok(report)
}

fn write_jsonl(path: &Path, scores: &[SampleScore]) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for score in scores {
        serde_json::to_writer(&mut writer, score).map_err(|e| Error::malformed(path, None, e.to_string()))?;
        writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    serde_json::to_writer_pretty(&mut writer, value).map_err(|e| Error::malformed(path, None, e.to_string()))?;
    writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    writer.flush().map_err(|e| Error::io(path, e))
}

fn write_report_csvs(dir: &Path, report: &DatasetReport) -> Result<()> {
    let write = |name: &str, contents: String| -> Result<()> {
        std::fs::write(dir.join(name), contents).map_err(|e| Error::io(dir, e))
    };

    for hist in &report.score_histograms {
        let mut out = String::from("bin_lo,bin_hi,count\n");
        for (i, count) in hist.bins.iter().enumerate() {
            let lo = i as Score / hist.bin_count as Score;
            let hi = (i + 1) as Score / hist.bin_count as Score;
            out.push_str(&format!("{lo},{hi},{count}\n"));
        }
        write(&format!("hist_{}.csv", hist.metric), out)?;
    }

    let mut out = String::from("unique_answers,samples\n");
    for (unique, samples) in &report.unique_answer_histogram {
        out.push_str(&format!("{unique},{samples}\n"));
    }
    write("unique_answers.csv", out)?;

    if !report.ses_accuracy_bins.is_empty() {
        let mut out = String::from("threshold,bin_lo,bin_hi,count,mean_vqa3plus\n");
        for section in &report.ses_accuracy_bins {
            for bin in &section.bins {
                let mean = bin.mean_vqa3plus.map(|m| m.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{},{mean}\n",
                    section.threshold, bin.lo, bin.hi, bin.count
                ));
            }
        }
        write("ses_accuracy_bins.csv", out)?;
    }
    Ok(())
}
