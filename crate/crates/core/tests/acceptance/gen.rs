//! Deterministic synthetic dataset generation for the acceptance suite.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

pub struct Dataset {
    pub annotations: PathBuf,
    pub predictions: PathBuf,
    pub embeddings: PathBuf,
    pub taxonomy: PathBuf,
}

const VOCAB: usize = 40;
const OOV: usize = 10;
const DIM: usize = 6;

fn phrase(rng: &mut ChaCha8Rng) -> String {
    let len = rng.gen_range(1..=3usize);
    (0..len)
        .map(|_| {
            if rng.gen_bool(0.85) {
                format!("tok{}", rng.gen_range(0..VOCAB))
            } else {
                format!("oov{}", rng.gen_range(0..OOV))
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Writes an annotation set, predictions, a word-vector file, and a small
/// taxonomy under `dir`, all derived from `seed`.
pub fn generate(dir: &Path, samples: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut embeddings = String::new();
    writeln!(embeddings, "{VOCAB} {DIM}").unwrap();
    for i in 0..VOCAB {
        write!(embeddings, "tok{i}").unwrap();
        for _ in 0..DIM {
            let c: f64 = rng.gen_range(-1.0..1.0);
            write!(embeddings, " {c}").unwrap();
        }
        writeln!(embeddings).unwrap();
    }

    let mut annotations = String::new();
    let mut predictions = Vec::new();
    for i in 0..samples {
        let qid = format!("q{i:04}");
        let n = match rng.gen_range(0..10u32) {
            0 => 1,
            1 | 2 => rng.gen_range(2..10usize),
            _ => 10,
        };
        let pool: Vec<String> = (0..rng.gen_range(1..=5usize)).map(|_| phrase(&mut rng)).collect();
        let answers: Vec<String> = (0..n)
            .map(|_| pool[rng.gen_range(0..pool.len())].clone())
            .collect();
        let predicted = if rng.gen_bool(0.7) {
            answers[rng.gen_range(0..answers.len())].clone()
        } else {
            phrase(&mut rng)
        };
        writeln!(
            annotations,
            "{}",
            serde_json::json!({"question_id": qid, "answers": answers})
        )
        .unwrap();
        predictions.push(serde_json::json!({"question_id": qid, "answer": predicted}));
    }

    let taxonomy = "\
animal\tentity
object\tentity
color\tentity
dog\tanimal
cat\tanimal
box\tobject
carton\tobject
red\tcolor
blue\tcolor
tok0\t#\tdog
tok1\t#\tcat
tok2\t#\tbox
tok3\t#\tcarton
tok4\t#\tred
tok5\t#\tblue
tok6\t#\tdog
tok7\t#\tanimal
tok8\t#\tdog
tok8\t#\tcat
";

    let paths = Dataset {
        annotations: dir.join("annotations.jsonl"),
        predictions: dir.join("predictions.json"),
        embeddings: dir.join("embeddings.txt"),
        taxonomy: dir.join("taxonomy.tsv"),
    };
    fs::write(&paths.annotations, annotations).unwrap();
    fs::write(&paths.predictions, serde_json::to_string(&predictions).unwrap()).unwrap();
    fs::write(&paths.embeddings, embeddings).unwrap();
    fs::write(&paths.taxonomy, taxonomy).unwrap();
    paths
}
