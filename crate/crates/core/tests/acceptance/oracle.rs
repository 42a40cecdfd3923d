//! Brute-force reference scorer.
//!
//! Reads the raw input files with its own parsing and recomputes every score
//! from the definitions, deriving all integer quantities by explicit search
//! or enumeration (leave-one-out subsets, relabeling counts, ancestor walks)
//! rather than closed forms. Float expressions follow the same definitions
//! in the same order, so a correct pipeline must match bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleThreshold {
    pub threshold: f64,
    pub ses: f64,
    pub ma_updated: f64,
    pub masses: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRecord {
    pub qid: String,
    pub n: usize,
    pub unique: usize,
    pub vqa3plus: f64,
    pub ma: f64,
    pub s: Option<f64>,
    pub per_threshold: Vec<OracleThreshold>,
    pub wups_acm: Option<f64>,
    pub wups_mcm: Option<f64>,
    pub coverage: Option<f64>,
}

pub struct Oracle {
    embeddings: BTreeMap<String, Vec<f64>>,
    taxonomy: OracleTaxonomy,
    pub thresholds: Vec<f64>,
    pub wups_threshold: f64,
}

#[derive(Default)]
struct OracleTaxonomy {
    parents: BTreeMap<String, Vec<String>>,
    nodes: Vec<String>,
    words: BTreeMap<String, Vec<String>>,
}

impl Oracle {
    pub fn new(
        embeddings_path: &Path,
        taxonomy_path: &Path,
        thresholds: Vec<f64>,
        wups_threshold: f64,
    ) -> Self {
        Oracle {
            embeddings: parse_embeddings(embeddings_path),
            taxonomy: parse_taxonomy(taxonomy_path),
            thresholds,
            wups_threshold,
        }
    }

    /// Scores every matched sample, ordered by question id.
    pub fn score_files(&self, annotations: &Path, predictions: &Path) -> Vec<OracleRecord> {
        let mut questions: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for line in fs::read_to_string(annotations).unwrap().lines() {
            if line.trim().is_empty() {
                continue;
            }
            let v: Value = serde_json::from_str(line).unwrap();
            let qid = v["question_id"].as_str().unwrap().to_owned();
            let answers: Vec<String> = v["answers"]
                .as_array()
                .unwrap()
                .iter()
                .map(|a| a.as_str().unwrap().to_owned())
                .collect();
            questions.insert(qid, answers);
        }

        let preds: Value = serde_json::from_str(&fs::read_to_string(predictions).unwrap()).unwrap();
        let mut by_qid: BTreeMap<String, String> = BTreeMap::new();
        for p in preds.as_array().unwrap() {
            by_qid.insert(
                p["question_id"].as_str().unwrap().to_owned(),
                p["answer"].as_str().unwrap().to_owned(),
            );
        }

        questions
            .iter()
            .filter_map(|(qid, answers)| {
                by_qid
                    .get(qid)
                    .map(|pred| self.score_sample(qid, answers, pred))
            })
            .collect()
    }

    fn score_sample(&self, qid: &str, answers: &[String], predicted: &str) -> OracleRecord {
        let n = answers.len();
        let entries = tabulate(answers);
        let unique = entries.len();

        let freq_of = |a: &str| answers.iter().filter(|x| x.as_str() == a).count();
        let f_pred = freq_of(predicted);
        let f_max = entries.iter().map(|e| e.1).max().unwrap();

        let ma = f_pred as f64 / f_max as f64;

        let vqa3plus = if n >= 2 {
            // enumerate every leave-one-out subset, recounting from scratch
            let mut thirds = 0usize;
            for skip in 0..n {
                let f = answers
                    .iter()
                    .enumerate()
                    .filter(|(i, a)| *i != skip && a.as_str() == predicted)
                    .count();
                thirds += f.min(3);
            }
            thirds as f64 / (3 * n) as f64
        } else {
            f_pred.min(3) as f64 / 3.0
        };

        let mut s = None;
        let mut per_threshold = Vec::new();
        let mut coverage = None;
        if n >= 2 {
            // minimum relabelings to consensus, found by trying every target
            let relabelings = entries.iter().map(|e| n - e.1).min().unwrap();
            s = Some((n - 1 - relabelings) as f64 / (n - 1) as f64);

            for &t in &self.thresholds {
                let (grouped, covered) = self.group(&entries, t);
                coverage.get_or_insert(covered as f64 / unique as f64);
                let g_max = grouped.iter().map(|c| c.1).max().unwrap();
                let relabel_grouped = grouped.iter().map(|c| n - c.1).min().unwrap();
                let ses = (n - 1 - relabel_grouped) as f64 / (n - 1) as f64;
                let f_in_group = grouped
                    .iter()
                    .find(|(members, _)| members.iter().any(|m| m == predicted))
                    .map(|(_, f)| *f)
                    .unwrap_or(0);
                let ma_updated = f_in_group as f64 / g_max as f64;
                per_threshold.push(OracleThreshold {
                    threshold: t,
                    ses,
                    ma_updated,
                    masses: ma_updated * ses,
                });
            }
        }

        let wups_acm = Some(self.consensus(&entries, predicted, true));
        let wups_mcm = Some(self.consensus(&entries, predicted, false));

        OracleRecord {
            qid: qid.to_owned(),
            n,
            unique,
            vqa3plus,
            ma,
            s,
            per_threshold,
            wups_acm,
            wups_mcm,
            coverage,
        }
    }

    /// Single-threshold cosine grouping; returns (clusters, covered count).
    fn group(&self, entries: &[(String, usize)], threshold: f64) -> (Vec<(Vec<String>, usize)>, usize) {
        let vectors: Vec<Option<Vec<f64>>> =
            entries.iter().map(|(a, _)| self.vectorize(a)).collect();
        let covered = vectors.iter().filter(|v| v.is_some()).count();

        let present: Vec<&Vec<f64>> = vectors.iter().flatten().collect();
        let centroid = mean(&present);

        let mut merged: Vec<usize> = Vec::new();
        let mut singles: Vec<usize> = Vec::new();
        match centroid {
            Some(centroid) => {
                for (i, v) in vectors.iter().enumerate() {
                    let joins = v
                        .as_ref()
                        .map(|v| cosine(v, &centroid).max(0.0) >= threshold)
                        .unwrap_or(false);
                    if joins {
                        merged.push(i);
                    } else {
                        singles.push(i);
                    }
                }
            }
            None => singles.extend(0..entries.len()),
        }

        let mut clusters = Vec::new();
        if !merged.is_empty() {
            let members: Vec<String> = merged.iter().map(|&i| entries[i].0.clone()).collect();
            let freq: usize = merged.iter().map(|&i| entries[i].1).sum();
            clusters.push((members, freq));
        }
        for i in singles {
            clusters.push((vec![entries[i].0.clone()], entries[i].1));
        }
        (clusters, covered)
    }

    fn vectorize(&self, answer: &str) -> Option<Vec<f64>> {
        let found: Vec<&Vec<f64>> = answer
            .split_whitespace()
            .filter_map(|tok| self.embeddings.get(tok))
            .collect();
        mean(&found)
    }

    fn wu_palmer(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        let (Some(nodes_a), Some(nodes_b)) = (self.taxonomy.words.get(a), self.taxonomy.words.get(b))
        else {
            return 0.0;
        };
        let mut best = 0.0f64;
        for na in nodes_a {
            for nb in nodes_b {
                let anc_a = self.taxonomy.ancestors(na);
                let anc_b = self.taxonomy.ancestors(nb);
                let lcs_depth = anc_a
                    .iter()
                    .filter(|x| anc_b.contains(x))
                    .map(|x| self.taxonomy.depth(x))
                    .max();
                if let Some(d) = lcs_depth {
                    let sim =
                        (2 * d) as f64 / (self.taxonomy.depth(na) + self.taxonomy.depth(nb)) as f64;
                    best = best.max(sim);
                }
            }
        }
        best
    }

    fn phrase(&self, predicted: &str, answer: &str) -> f64 {
        if predicted == answer {
            return 1.0;
        }
        let pt: Vec<&str> = predicted.split_whitespace().collect();
        let at: Vec<&str> = answer.split_whitespace().collect();
        if pt.is_empty() || at.is_empty() {
            return 0.0;
        }
        let weighted = |s: f64| if s >= self.wups_threshold { s } else { 0.1 * s };
        let dir = |from: &[&str], to: &[&str]| {
            from.iter().fold(1.0f64, |product, a| {
                let best = to
                    .iter()
                    .map(|b| weighted(self.wu_palmer(a, b)))
                    .fold(0.0f64, f64::max);
                product * best
            })
        };
        dir(&pt, &at).min(dir(&at, &pt))
    }

    fn consensus(&self, entries: &[(String, usize)], predicted: &str, mean_mode: bool) -> f64 {
        let scores: Vec<(f64, usize)> = entries
            .iter()
            .map(|(a, f)| (self.phrase(predicted, a), *f))
            .collect();
        let max = scores.iter().map(|&(s, _)| s).fold(0.0f64, f64::max);
        if !mean_mode {
            return max;
        }
        let n: usize = entries.iter().map(|(_, f)| f).sum();
        let shortfall = scores
            .iter()
            .fold(0.0f64, |acc, &(s, f)| acc + f as f64 * (max - s));
        (max - shortfall / n as f64).max(0.0)
    }
}

impl OracleTaxonomy {
    fn depth(&self, node: &str) -> usize {
        match self.parents.get(node) {
            None => 1,
            Some(ps) => 1 + ps.iter().map(|p| self.depth(p)).min().unwrap(),
        }
    }

    fn ancestors(&self, node: &str) -> Vec<String> {
        let mut out = vec![node.to_owned()];
        if let Some(ps) = self.parents.get(node) {
            for p in ps {
                for a in self.ancestors(p) {
                    if !out.contains(&a) {
                        out.push(a);
                    }
                }
            }
        }
        out
    }
}

/// unique answers sorted by frequency descending then answer ascending,
/// mirroring the pattern entry order the pipeline documents.
fn tabulate(answers: &[String]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for a in answers {
        *counts.entry(a).or_insert(0) += 1;
    }
    let mut entries: Vec<(String, usize)> =
        counts.into_iter().map(|(a, f)| (a.to_owned(), f)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries
}

fn mean(vectors: &[&Vec<f64>]) -> Option<Vec<f64>> {
    let first = vectors.first()?;
    let mut sum = vec![0.0f64; first.len()];
    for v in vectors {
        for (acc, &c) in sum.iter_mut().zip(v.iter()) {
            *acc += c;
        }
    }
    for acc in &mut sum {
        *acc /= vectors.len() as f64;
    }
    Some(sum)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |acc, &x| acc + x * x).sqrt();
    if a == b && norm(a) > 0.0 {
        return 1.0;
    }
    let denom = norm(a) * norm(b);
    if denom <= 0.0 {
        return 0.0;
    }
    let dot = a.iter().zip(b).fold(0.0f64, |acc, (&x, &y)| acc + x * y);
    dot / denom
}

fn parse_embeddings(path: &Path) -> BTreeMap<String, Vec<f64>> {
    let mut map = BTreeMap::new();
    for (idx, line) in fs::read_to_string(path).unwrap().lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let token = parts.next().unwrap().to_owned();
        let rest: Vec<f64> = parts.map(|x| x.parse().unwrap()).collect();
        if idx == 0 && rest.len() == 1 && token.parse::<usize>().is_ok() {
            continue; // header
        }
        map.insert(token, rest);
    }
    map
}

fn parse_taxonomy(path: &Path) -> OracleTaxonomy {
    let mut tax = OracleTaxonomy::default();
    for line in fs::read_to_string(path).unwrap().lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            [child, parent] => {
                tax.parents
                    .entry(child.trim().to_owned())
                    .or_default()
                    .push(parent.trim().to_owned());
                for node in [child.trim(), parent.trim()] {
                    if !tax.nodes.iter().any(|n| n == node) {
                        tax.nodes.push(node.to_owned());
                    }
                }
            }
            [word, sep, node] if sep.trim() == "#" => {
                tax.words
                    .entry(word.trim().to_owned())
                    .or_default()
                    .push(node.trim().to_owned());
            }
            _ => panic!("bad taxonomy line: {line}"),
        }
    }
    tax
}
