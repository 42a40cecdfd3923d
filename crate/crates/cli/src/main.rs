//! `masses` — consensus-aware scoring of open-ended VQA predictions.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use masses::{
    analyze, compare, evaluate, AnnotationFormat, CompareInput, DatasetReport, Error, MetricKey,
    NormalizationConfig, RunConfig, Score, WupsMode,
};

#[derive(Parser)]
#[command(name = "masses", version, about = "Evaluate open-ended VQA predictions against crowd annotations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a prediction file against an annotation file
    Evaluate(EvaluateArgs),
    /// Analyze annotation reliability without any predictions
    Analyze(AnalyzeArgs),
    /// Diff two runs, or two metrics within one run
    Compare(CompareArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Annotation file
    #[arg(long)]
    annotations: PathBuf,
    /// Annotation file format: vqa-json or simple-jsonl
    #[arg(long)]
    format: AnnotationFormat,
    /// Word-vector text file backing semantic grouping
    #[arg(long, conflicts_with = "fixture_backend")]
    embeddings: Option<PathBuf>,
    /// JSON fixture mapping answers to vectors or cluster labels
    #[arg(long)]
    fixture_backend: Option<PathBuf>,
    /// Grouping thresholds for the semantic subjectivity score
    #[arg(long, value_delimiter = ',', default_value = "0.7,0.9")]
    ses_thresholds: Vec<Score>,
    /// Disable answer normalization entirely
    #[arg(long)]
    no_normalize: bool,
    /// JSON file overriding the normalization pipeline and tables
    #[arg(long, conflicts_with = "no_normalize")]
    normalization_config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// Scoring worker threads (0 = all cores)
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Histogram bin count
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Treat single-annotation samples as consensus instead of skipping them
    #[arg(long)]
    include_degenerate: bool,
    /// Also write one CSV per histogram
    #[arg(long)]
    csv: bool,
    /// Round displayed scores to this many decimals (files keep full precision)
    #[arg(long)]
    round: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Prediction file: JSON array of {question_id, answer}
    #[arg(long)]
    predictions: PathBuf,
    /// Taxonomy file enabling the Wu-Palmer consensus baselines
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Wu-Palmer similarity threshold
    #[arg(long, default_value_t = 0.9)]
    wups_threshold: Score,
    /// Consensus modes to compute: acm, mcm
    #[arg(long, value_delimiter = ',', default_value = "acm,mcm")]
    wups_mode: Vec<WupsMode>,
    /// Zero below-threshold similarities instead of down-weighting by 0.1
    #[arg(long)]
    wups_hard_cut: bool,
    /// Tolerated fraction of unresolved question ids before aborting
    #[arg(long, default_value_t = 0.0)]
    tolerance: Score,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    input: InputArgs,
}

#[derive(Args)]
struct CompareArgs {
    /// Left per-sample JSONL file (two-run mode)
    #[arg(long, requires = "right", conflicts_with = "run")]
    left: Option<PathBuf>,
    /// Right per-sample JSONL file (two-run mode)
    #[arg(long, requires = "left")]
    right: Option<PathBuf>,
    /// Single per-sample JSONL file (two-metric mode)
    #[arg(long)]
    run: Option<PathBuf>,
    /// One metric for two-run mode, two comma-separated metrics for
    /// two-metric mode (e.g. vqa3plus,masses_0.9)
    #[arg(long, value_delimiter = ',')]
    metrics: Vec<MetricKey>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    round: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MASSES_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnresolvedIds { .. } | Error::IdMismatch { .. } => 3,
        Error::Invariant(_) => 4,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Evaluate(args) => {
            let round = args.input.round;
            let mut config = build_config(&args.input)?;
            config.predictions = Some(args.predictions.clone());
            config.taxonomy = args.taxonomy.clone();
            config.wups_threshold = args.wups_threshold;
            config.wups_modes = args.wups_mode.clone();
            config.wups_hard_cut = args.wups_hard_cut;
            config.unresolved_tolerance = args.tolerance;
            let (scores, report) = evaluate(&config)?;
            println!("scored {} sample(s) -> {}", scores.len(), config.out_dir.display());
            print_report(&report, round);
            Ok(())
        }
        Command::Analyze(args) => {
            let round = args.input.round;
            let config = build_config(&args.input)?;
            let report = analyze(&config)?;
            println!(
                "analyzed {} sample(s) -> {}",
                report.counts.samples_scored,
                config.out_dir.display()
            );
            print_report(&report, round);
            Ok(())
        }
        Command::Compare(args) => {
            let input = compare_input(&args)?;
            let report = compare(&input, &args.out, args.bins, args.csv)?;
            println!(
                "compared {} sample(s) ({} skipped) -> {}",
                report.samples,
                report.skipped,
                args.out.display()
            );
            let fmt = |v: Option<Score>| v.map(|v| fmt_score(v, args.round)).unwrap_or_else(|| "-".into());
            println!("  mean {}: {}", report.left, fmt(report.mean_left));
            println!("  mean {}: {}", report.right, fmt(report.mean_right));
            println!("  mean delta: {}", fmt(report.mean_delta));
            for row in report.deltas.iter().take(5) {
                println!(
                    "  {}: {} vs {} (delta {})",
                    row.question_id,
                    fmt_score(row.left, args.round),
                    fmt_score(row.right, args.round),
                    fmt_score(row.delta, args.round),
                );
            }
            Ok(())
        }
    }
}

fn build_config(input: &InputArgs) -> Result<RunConfig, Error> {
    let mut config = RunConfig::new(&input.annotations, input.format, &input.out);
    config.embeddings = input.embeddings.clone();
    config.fixture_backend = input.fixture_backend.clone();
    config.ses_thresholds = input.ses_thresholds.clone();
    config.workers = input.workers;
    config.histogram_bins = input.bins;
    config.include_degenerate = input.include_degenerate;
    config.emit_csv = input.csv;
    config.normalization = if input.no_normalize {
        NormalizationConfig::identity()
    } else if let Some(path) = &input.normalization_config {
        let contents = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&contents).map_err(|e| Error::malformed(path, Some(e.line()), e.to_string()))?
    } else {
        NormalizationConfig::default()
    };
    Ok(config)
}

fn compare_input(args: &CompareArgs) -> Result<CompareInput, Error> {
    match (&args.left, &args.right, &args.run) {
        (Some(left), Some(right), None) => {
            let metric = match args.metrics.as_slice() {
                [] => MetricKey::Vqa3Plus,
                [metric] => *metric,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "two-run compare takes one metric, got {}",
                        other.len()
                    )))
                }
            };
            Ok(CompareInput::TwoRuns {
                left: left.clone(),
                right: right.clone(),
                metric,
            })
        }
        (None, None, Some(run)) => match args.metrics.as_slice() {
            [left_metric, right_metric] => Ok(CompareInput::WithinRun {
                run: run.clone(),
                left_metric: *left_metric,
                right_metric: *right_metric,
            }),
            other => Err(Error::InvalidConfig(format!(
                "single-run compare takes exactly two metrics, got {}",
                other.len()
            ))),
        },
        _ => Err(Error::InvalidConfig(
            "pass either --left and --right, or --run".into(),
        )),
    }
}

fn fmt_score(v: Score, round: Option<usize>) -> String {
    match round {
        Some(k) => format!("{v:.k$}"),
        None => format!("{v}"),
    }
}

fn print_report(report: &DatasetReport, round: Option<usize>) {
    let fmt = |v: Option<Score>| v.map(|v| fmt_score(v, round)).unwrap_or_else(|| "-".into());
    println!(
        "  degenerate: {}, unmatched predictions: {}, unmatched annotations: {}",
        report.counts.degenerate_samples,
        report.counts.predictions_without_annotation,
        report.counts.annotations_without_prediction,
    );
    println!("  vqa3plus: {}", fmt(report.means.vqa3plus));
    println!("  ma:       {}", fmt(report.means.ma));
    println!("  s:        {}", fmt(report.means.s));
    println!("  mas:      {}", fmt(report.means.mas));
    for tm in &report.means.thresholds {
        println!(
            "  ses_{t}: {}  masses_{t}: {}",
            fmt(tm.ses),
            fmt(tm.masses),
            t = tm.threshold
        );
    }
    if report.means.wups_acm.is_some() || report.means.wups_mcm.is_some() {
        println!(
            "  wups_acm: {}  wups_mcm: {}",
            fmt(report.means.wups_acm),
            fmt(report.means.wups_mcm)
        );
    }
    if let Some(coverage) = &report.coverage {
        println!(
            "  embedding coverage: mean {}, min {}, {} sample(s) fully covered, {} with misses",
            fmt_score(coverage.mean, round),
            fmt_score(coverage.min, round),
            coverage.fully_covered,
            coverage.with_misses,
        );
    }
}
