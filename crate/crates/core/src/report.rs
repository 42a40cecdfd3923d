//! Aggregate dataset report: counts, means, and histogram data.
//!
//! The report carries the plot-ready numbers behind the usual dataset
//! analyses: the unique-answer-count distribution, per-metric score
//! histograms, and mean standard accuracy per semantic-subjectivity bin.
//! Serialization is byte-stable for identical inputs and config: every
//! collection is ordered and all scores are written at full precision.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Score;

/// Sample bookkeeping for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Matched samples that were scored.
    pub samples_scored: usize,
    /// Scored samples with a single annotation (subjectivity undefined).
    pub degenerate_samples: usize,
    pub predictions_without_annotation: usize,
    pub annotations_without_prediction: usize,
}

/// Mean semantic scores at one grouping threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMeans {
    pub threshold: Score,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ses: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub masses: Option<Score>,
}

/// Arithmetic means over the scored samples.
///
/// Composite means are means of per-sample products. Fields are absent when
/// no sample carries the metric (no predictions, or every sample degenerate).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Means {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vqa3plus: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ma: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mas: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wups_acm: Option<Score>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wups_mcm: Option<Score>,
    pub thresholds: Vec<ThresholdMeans>,
}

/// Equal-width bin counts for one metric over `[0, 1]`.
///
/// Bin `i` covers `[i/k, (i+1)/k)`; the last bin includes `1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub metric: String,
    pub bin_count: usize,
    pub bins: Vec<usize>,
    /// Number of samples the histogram was built from.
    pub population: usize,
}

impl Histogram {
    pub fn build(metric: impl Into<String>, values: &[Score], bin_count: usize) -> Self {
        let mut bins = vec![0usize; bin_count];
        for &v in values {
            bins[bin_index(v, bin_count)] += 1;
        }
        Histogram {
            metric: metric.into(),
            bin_count,
            bins,
            population: values.len(),
        }
    }
}

/// Bin index for a score in `[0, 1]`.
pub fn bin_index(value: Score, bin_count: usize) -> usize {
    ((value * bin_count as Score).floor() as usize).min(bin_count - 1)
}

/// Mean standard accuracy within one semantic-subjectivity bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SesBin {
    pub lo: Score,
    pub hi: Score,
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_vqa3plus: Option<Score>,
}

/// Accuracy-versus-reliability data for one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SesAccuracyBins {
    pub threshold: Score,
    pub bins: Vec<SesBin>,
}

/// How well the vector source covered the unique answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageStats {
    pub mean: Score,
    pub min: Score,
    /// Samples where every unique answer was vectorizable.
    pub fully_covered: usize,
    pub with_misses: usize,
}

/// Aggregate of one `evaluate` or `analyze` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetReport {
    pub counts: Counts,
    pub means: Means,
    /// unique-answer count -> number of samples.
    pub unique_answer_histogram: BTreeMap<usize, usize>,
    pub score_histograms: Vec<Histogram>,
    /// Present only when predictions were scored.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ses_accuracy_bins: Vec<SesAccuracyBins>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageStats>,
}

impl DatasetReport {
    /// Internal consistency checks run before a report is written.
    pub fn validate(&self) -> Result<()> {
        for hist in &self.score_histograms {
            if hist.bins.len() != hist.bin_count {
                return Err(Error::Invariant(format!(
                    "histogram {} has {} bins, declared {}",
                    hist.metric,
                    hist.bins.len(),
                    hist.bin_count
                )));
            }
            let sum: usize = hist.bins.iter().sum();
            if sum != hist.population {
                return Err(Error::Invariant(format!(
                    "histogram {} bins sum to {sum}, population is {}",
                    hist.metric, hist.population
                )));
            }
        }
        let unique_sum: usize = self.unique_answer_histogram.values().sum();
        if unique_sum != self.counts.samples_scored {
            return Err(Error::Invariant(format!(
                "unique-answer histogram covers {unique_sum} samples, scored {}",
                self.counts.samples_scored
            )));
        }
        let check = |name: &str, value: Option<Score>| -> Result<()> {
            if let Some(v) = value {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Invariant(format!("mean {name} = {v} outside [0, 1]")));
                }
            }
            Ok(())
        };
        check("vqa3plus", self.means.vqa3plus)?;
        check("ma", self.means.ma)?;
        check("s", self.means.s)?;
        check("mas", self.means.mas)?;
        check("wups_acm", self.means.wups_acm)?;
        check("wups_mcm", self.means.wups_mcm)?;
        for tm in &self.means.thresholds {
            check("ses", tm.ses)?;
            check("masses", tm.masses)?;
        }
        Ok(())
    }
}

/// Per-sample values feeding the aggregate; model-side fields are `None` in
/// analysis-only runs, subjectivity fields are `None` for degenerate samples.
#[derive(Debug, Clone)]
pub(crate) struct SampleData {
    pub n: usize,
    pub unique: usize,
    pub vqa3plus: Option<Score>,
    pub ma: Option<Score>,
    pub s: Option<Score>,
    /// Parallel to the run's threshold list.
    pub per_threshold: Vec<ThresholdData>,
    pub wups_acm: Option<Score>,
    pub wups_mcm: Option<Score>,
    pub coverage: Option<Score>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ThresholdData {
    pub ses: Option<Score>,
    pub masses: Option<Score>,
}

fn mean_of_present(values: impl Iterator<Item = Option<Score>>) -> Option<Score> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for v in values.flatten() {
        sum += v;
        count += 1;
    }
    (count > 0).then(|| sum / count as Score)
}

fn present(values: impl Iterator<Item = Option<Score>>) -> Vec<Score> {
    values.flatten().collect()
}

/// Reduces per-sample data (already in question-id order) to a report.
/// The reduction is sequential, so results are independent of how the
/// per-sample records were computed.
pub(crate) fn aggregate(
    data: &[SampleData],
    thresholds: &[Score],
    bin_count: usize,
    counts: Counts,
) -> DatasetReport {
    let mas_values: Vec<Option<Score>> = data
        .iter()
        .map(|d| match (d.ma, d.s) {
            (Some(ma), Some(s)) => Some(ma * s),
            _ => None,
        })
        .collect();

    let mut threshold_means = Vec::with_capacity(thresholds.len());
    for (i, &t) in thresholds.iter().enumerate() {
        threshold_means.push(ThresholdMeans {
            threshold: t,
            ses: mean_of_present(data.iter().map(|d| d.per_threshold[i].ses)),
            masses: mean_of_present(data.iter().map(|d| d.per_threshold[i].masses)),
        });
    }

    let means = Means {
        vqa3plus: mean_of_present(data.iter().map(|d| d.vqa3plus)),
        ma: mean_of_present(data.iter().map(|d| d.ma)),
        s: mean_of_present(data.iter().map(|d| d.s)),
        mas: mean_of_present(mas_values.iter().copied()),
        wups_acm: mean_of_present(data.iter().map(|d| d.wups_acm)),
        wups_mcm: mean_of_present(data.iter().map(|d| d.wups_mcm)),
        thresholds: threshold_means,
    };

    let mut unique_answer_histogram: BTreeMap<usize, usize> = BTreeMap::new();
    for d in data {
        *unique_answer_histogram.entry(d.unique).or_insert(0) += 1;
    }

    let mut score_histograms = Vec::new();
    let mut push_hist = |name: String, values: Vec<Score>| {
        if !values.is_empty() {
            score_histograms.push(Histogram::build(name, &values, bin_count));
        }
    };
    push_hist("vqa3plus".into(), present(data.iter().map(|d| d.vqa3plus)));
    push_hist("ma".into(), present(data.iter().map(|d| d.ma)));
    push_hist("s".into(), present(data.iter().map(|d| d.s)));
    push_hist("mas".into(), present(mas_values.iter().copied()));
    for (i, &t) in thresholds.iter().enumerate() {
        push_hist(format!("ses_{t}"), present(data.iter().map(|d| d.per_threshold[i].ses)));
        push_hist(format!("masses_{t}"), present(data.iter().map(|d| d.per_threshold[i].masses)));
    }
    push_hist("wups_acm".into(), present(data.iter().map(|d| d.wups_acm)));
    push_hist("wups_mcm".into(), present(data.iter().map(|d| d.wups_mcm)));

    let ses_accuracy_bins = ses_accuracy(data, thresholds, bin_count);

    let coverages = present(data.iter().map(|d| d.coverage));
    let coverage = (!coverages.is_empty()).then(|| CoverageStats {
        mean: coverages.iter().sum::<Score>() / coverages.len() as Score,
        min: coverages.iter().copied().fold(Score::INFINITY, Score::min),
        fully_covered: coverages.iter().filter(|&&c| c >= 1.0).count(),
        with_misses: coverages.iter().filter(|&&c| c < 1.0).count(),
    });

    DatasetReport {
        counts,
        means,
        unique_answer_histogram,
        score_histograms,
        ses_accuracy_bins,
        coverage,
    }
}

/// Mean standard accuracy per semantic-subjectivity bin, for each threshold.
pub(crate) fn ses_accuracy(
    data: &[SampleData],
    thresholds: &[Score],
    bin_count: usize,
) -> Vec<SesAccuracyBins> {
    let mut out = Vec::new();
    for (i, &t) in thresholds.iter().enumerate() {
        let pairs: Vec<(Score, Score)> = data
            .iter()
            .filter_map(|d| match (d.per_threshold[i].ses, d.vqa3plus) {
                (Some(ses), Some(acc)) => Some((ses, acc)),
                _ => None,
            })
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let mut sums = vec![0.0 as Score; bin_count];
        let mut counts = vec![0usize; bin_count];
        for (ses, acc) in pairs {
            let idx = bin_index(ses, bin_count);
            sums[idx] += acc;
            counts[idx] += 1;
        }
        let bins = (0..bin_count)
            .map(|i| SesBin {
                lo: i as Score / bin_count as Score,
                hi: (i + 1) as Score / bin_count as Score,
                count: counts[i],
                mean_vqa3plus: (counts[i] > 0).then(|| sums[i] / counts[i] as Score),
            })
            .collect();
        out.push(SesAccuracyBins { threshold: t, bins });
    }
    out
}
