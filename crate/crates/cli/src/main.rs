use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use spambench::classifiers::{self, ClassifierSpec};
use spambench::corpus::{self, labels_of, load_canonical, save_canonical, LabeledMessage, Source};
use spambench::features::{fit_vocabulary, FeatureMatrix, TfidfOptions, Vocabulary};
use spambench::harness::exchange::{self, PredictionRecord, SplitRef, Timing};
use spambench::harness::{self, report_file, ExperimentConfig, ReportStyle, ResultsStore};
use spambench::protocol::{tune_feature_count, ShotCount, DEFAULT_FEATURE_GRID};
use spambench::textprep::preprocess;
use spambench::{Algorithm, Error, TokenizedDoc};

#[derive(Parser)]
#[command(
    name = "spambench",
    version,
    about = "Spam-detection benchmark workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a raw corpus into the canonical line-delimited format.
    Ingest {
        #[arg(long)]
        source: Source,
        #[arg(long)]
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tokenize, drop stopwords and stem every message of a canonical corpus.
    Preprocess {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the train/test ids (and the few-shot sample) for one seed.
    Split {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "full")]
        k: ShotCount,
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate the tf-idf feature budget on a training split.
    TuneFeatures {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long, default_value_t = 5)]
        folds: usize,
    },
    /// Evaluate every cell of an experiment config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write exchange-format files for an external runner.
    ExportSplits {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        dataset: Option<String>,
        #[arg(long)]
        k: ShotCount,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Score an external runner's predictions and timings.
    ScorePredictions {
        #[arg(long)]
        corpus: PathBuf,
        /// The split.json written by export-splits.
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        timing: PathBuf,
        #[arg(long)]
        model: String,
        /// Append the result to this results file.
        #[arg(long)]
        results: Option<PathBuf>,
    },
    /// Render a results file as a table plus plot data.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        style: ReportStyle,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the plot data CSV here.
        #[arg(long)]
        plot_data: Option<PathBuf>,
    },
    /// Fit one classifier on a split's training sample.
    Fit {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        model: Algorithm,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "full")]
        k: ShotCount,
        /// Feature budget; defaults to the model's standard budget.
        #[arg(long)]
        features: Option<usize>,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        #[arg(long)]
        out: PathBuf,
        /// Vocabulary output; defaults to the model path with a `.vocab` extension.
        #[arg(long)]
        vocab_out: Option<PathBuf>,
    },
    /// Predict with a fitted model, writing exchange-format predictions.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        corpus: PathBuf,
        /// Restrict to the test side of this split.json.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write a timing file (train time 0, measured inference time).
        #[arg(long)]
        timing: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if !out.contains(&text) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&text);
        }
    }
    out
}

/// 1 for bad input, 2 for failures while executing.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<Error>()) {
        Some(err) if err.is_validation() => 1,
        _ => 2,
    }
}

fn dataset_name(explicit: Option<String>, corpus: &Path) -> String {
    explicit.unwrap_or_else(|| {
        let stem = corpus
            .file_name()
            .and_then(|s| s.to_str())
            .unwrap_or("dataset");
        stem.split('.').next().unwrap_or(stem).to_string()
    })
}

fn split_ref(dataset: String, k: ShotCount, seed: u64, train_fraction: f64) -> SplitRef {
    SplitRef {
        train_fraction,
        ..SplitRef::new(dataset, k, seed)
    }
}

fn docs_of(messages: &[LabeledMessage], idx: &[usize]) -> Vec<TokenizedDoc> {
    idx.iter()
        .map(|&i| preprocess(messages[i].id.clone(), &messages[i].text))
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Ingest { source, root, out } => {
            let (messages, stats) = corpus::ingest(source, &root)?;
            save_canonical(&out, &messages)?;
            println!("{stats}");
        }
        Command::Preprocess { input, out } => {
            let messages = load_canonical(&input)?;
            let mut text = String::new();
            for m in &messages {
                text.push_str(&serde_json::to_string(&preprocess(m.id.clone(), &m.text))?);
                text.push('\n');
            }
            write_text(&out, &text)?;
            println!("{} documents", messages.len());
        }
        Command::Split {
            corpus,
            seed,
            k,
            dataset,
            train_fraction,
            out,
        } => {
            let messages = load_canonical(&corpus)?;
            let r = split_ref(dataset_name(dataset, &corpus), k, seed, train_fraction);
            let (split, sample) = r.resolve(&labels_of(&messages))?;
            let ids = |idx: &[usize]| {
                idx.iter()
                    .map(|&i| messages[i].id.clone())
                    .collect::<Vec<_>>()
            };
            let doc = serde_json::json!({
                "dataset": r.dataset,
                "seed": r.seed,
                "k": r.k,
                "train_fraction": r.train_fraction,
                "train": ids(&split.train),
                "sample": ids(&sample.indices),
                "test": ids(&split.test),
            });
            write_text(&out, &(serde_json::to_string_pretty(&doc)? + "\n"))?;
            println!(
                "train {} (sample {}), test {}",
                split.train.len(),
                sample.indices.len(),
                split.test.len()
            );
        }
        Command::TuneFeatures {
            corpus,
            model,
            seed,
            grid,
            folds,
        } => {
            let messages = load_canonical(&corpus)?;
            let labels = labels_of(&messages);
            let (split, _) =
                split_ref(String::new(), ShotCount::Full, seed, 0.8).resolve(&labels)?;
            let docs = docs_of(&messages, &split.train);
            let y: Vec<_> = split.train.iter().map(|&i| labels[i]).collect();
            let grid = grid.unwrap_or_else(|| DEFAULT_FEATURE_GRID.to_vec());
            let tuned = tune_feature_count::<f64>(
                &docs,
                &y,
                &grid,
                &ClassifierSpec::baseline(model, seed),
                TfidfOptions::default(),
                folds,
                seed,
            )?;
            for (budget, f1) in &tuned.candidates {
                match f1 {
                    Some(f1) => println!("{budget}\t{f1:.4}"),
                    None => println!("{budget}\tfailed"),
                }
            }
            println!("best {}", tuned.best);
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = harness::run_matrix(&cfg)?;
            println!(
                "{} ok, {} failed, {} excluded, {} conflicts, {} exports -> {}",
                summary.ok,
                summary.failed,
                summary.excluded,
                summary.conflicts.len(),
                summary.exports.len(),
                cfg.output.results.display()
            );
            for key in &summary.conflicts {
                eprintln!("conflict: {key} already recorded");
            }
        }
        Command::ExportSplits {
            corpus,
            dataset,
            k,
            seed,
            train_fraction,
            out_dir,
        } => {
            let messages = load_canonical(&corpus)?;
            let r = split_ref(dataset_name(dataset, &corpus), k, seed, train_fraction);
            let paths = exchange::export_splits(&messages, &r, &out_dir)?;
            println!(
                "{}\n{}\n{}",
                paths.train.display(),
                paths.test.display(),
                paths.manifest.display()
            );
        }
        Command::ScorePredictions {
            corpus,
            split,
            predictions,
            timing,
            model,
            results,
        } => {
            let messages = load_canonical(&corpus)?;
            let r = SplitRef::load(&split)?;
            let result = exchange::score_predictions(&messages, &r, &predictions, &timing, &model)?;
            if let Some(path) = results {
                ResultsStore::open(&path)?.append(&result)?;
            }
            println!("{}", serde_json::to_string(&result)?);
        }
        Command::Report {
            results,
            style,
            out,
            plot_data,
        } => {
            let report = report_file(&results, style)?;
            match out {
                Some(p) => write_text(&p, &report.text)?,
                None => print!("{}", report.text),
            }
            if let Some(p) = plot_data {
                write_text(&p, &report.plot_data)?;
            }
        }
        Command::Fit {
            corpus,
            model,
            seed,
            k,
            features,
            train_fraction,
            out,
            vocab_out,
        } => {
            let messages = load_canonical(&corpus)?;
            let labels = labels_of(&messages);
            let (_, sample) =
                split_ref(dataset_name(None, &corpus), k, seed, train_fraction).resolve(&labels)?;
            let docs = docs_of(&messages, &sample.indices);
            let y: Vec<_> = sample.indices.iter().map(|&i| labels[i]).collect();
            let vocab = fit_vocabulary(&docs, features.unwrap_or(model.default_feature_budget()))?;
            let x = FeatureMatrix::<f64>::from_docs(&docs, &vocab, TfidfOptions::default());
            let fitted = classifiers::fit(&ClassifierSpec::baseline(model, seed), &x, &y)?;
            fitted.save(&out)?;
            let vocab_path = vocab_out.unwrap_or_else(|| out.with_extension("vocab"));
            vocab.save(&vocab_path)?;
            println!(
                "model {}\nvocabulary {}",
                out.display(),
                vocab_path.display()
            );
        }
        Command::Predict {
            model,
            vocab,
            corpus,
            split,
            out,
            timing,
        } => {
            let fitted = spambench::TrainedModel::load(&model)?;
            let vocab = Vocabulary::load(&vocab.unwrap_or_else(|| model.with_extension("vocab")))?;
            let messages = load_canonical(&corpus)?;
            let idx: Vec<usize> = match split {
                Some(p) => SplitRef::load(&p)?.resolve(&labels_of(&messages))?.0.test,
                None => (0..messages.len()).collect(),
            };
            let (records, infer_time) =
                spambench::metrics::time_block(|| -> spambench::Result<_> {
                    let docs = docs_of(&messages, &idx);
                    let x = FeatureMatrix::<f64>::from_docs(&docs, &vocab, TfidfOptions::default());
                    let scores = classifiers::predict_score(&fitted, &x)?;
                    Ok(idx
                        .iter()
                        .zip(scores)
                        .map(|(&i, s)| PredictionRecord {
                            id: messages[i].id.clone(),
                            predicted: fitted.label_for(s),
                            score: Some(s),
                        })
                        .collect::<Vec<_>>())
                });
            let records = records?;
            exchange::write_predictions(&out, &records)?;
            if let Some(t) = timing {
                exchange::write_timing(
                    &t,
                    &Timing {
                        train_time_s: 0.0,
                        infer_time_s: infer_time,
                        extras: Default::default(),
                    },
                )?;
            }
            println!("{} predictions", records.len());
        }
    }
    Ok(())
}
