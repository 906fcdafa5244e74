//! Command-line front end. Every subcommand reads files, calls one library
//! operation, and writes its result.

use std::borrow::Cow;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::agreement::{agreement_report, AgreementCategory};
use crate::error::Error;
use crate::export::{export_token_classification, render_conll, ExportTarget};
use crate::jsonl::{read_jsonl, to_jsonl_string};
use crate::metrics::{human_baseline_f1, MetricsReport, RunScore};
use crate::model::{AnnotatedCorpus, Language};
use crate::normalize::Normalizer;
use crate::plan::{make_partitions, score_predictions, subsample_train, task_instances, ExperimentManifest, PredictionFile, Scheme, Task};
use crate::plot::render_ablation_svg;
use crate::standoff::parse_standoff;
use crate::stats::corpus_stats;
use crate::validate::{validate, Mode, ValidationReport};

/// Environment variable naming a directory with `emoji.tsv`,
/// `lexicon_en.txt` and `lexicon_es.txt`.
pub const DATA_ENV: &str = "ARGMINE_DATA";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "argmine", version, about = "Argument-annotated tweet corpus toolkit")]
pub struct Cli {
    /// Worker threads for per-file and per-run work (output order does not depend on it).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Read a directory of standoff `.txt`/`.ann` pairs into a JSONL corpus.
    Ingest {
        dir: PathBuf,
        #[arg(long)]
        language: Language,
        #[arg(long, default_value = "gold")]
        annotator: String,
        /// Existing corpus to merge the new layer into.
        #[arg(long)]
        into: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check every annotation against the protocol.
    Validate {
        corpus: PathBuf,
        #[arg(long, conflicts_with = "lenient")]
        strict: bool,
        #[arg(long)]
        lenient: bool,
        /// Only this annotation layer.
        #[arg(long)]
        layer: Option<String>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Write normalized text and offset maps, one JSON object per tweet.
    Normalize {
        corpus: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-language corpus statistics.
    Stats {
        corpus: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Cohen's kappa between two annotation layers.
    Agreement {
        corpus: PathBuf,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        /// Also score layer b as predictions of layer a.
        #[arg(long)]
        human_f1: bool,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Write task instance files for a manifest, or token labels for one target.
    Export {
        corpus: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        #[arg(long, required_unless_present = "target", conflicts_with = "target")]
        manifest: Option<PathBuf>,
        /// Output directory for manifest instance files.
        #[arg(long, requires = "manifest")]
        out_dir: Option<PathBuf>,
        /// Category (e.g. `Pivot`) or joint pair (e.g. `Collective+Property`).
        #[arg(long)]
        target: Option<ExportTarget>,
        /// Tokenize normalized text instead of raw text (target export only).
        #[arg(long)]
        normalized: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit an experiment manifest.
    Plan {
        corpus: PathBuf,
        #[arg(long)]
        scheme: Scheme,
        #[arg(long, default_value = "argumentative")]
        task: Task,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        /// Seed of the training subsample; defaults to `--seed`.
        #[arg(long)]
        subsample_seed: Option<u64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Score prediction files and aggregate runs into a report.
    Score {
        corpus: PathBuf,
        #[arg(long, default_value = "gold")]
        layer: String,
        /// Column label of these runs in the report.
        #[arg(long)]
        setting: String,
        /// `MANIFEST=PREDICTIONS`, repeated once per run.
        #[arg(long = "run", required = true)]
        runs: Vec<String>,
        /// Existing report to extend.
        #[arg(long)]
        into: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render ablation curves from report JSON files to SVG.
    Plot {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(String),
}

impl Failure {
    fn data(path: &Path, e: Error) -> Failure {
        Failure::Invalid(format!("{}: {e}", path.display()))
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn require(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("{}: no such file or directory", path.display())))
    }
}

fn load_corpus(path: &Path) -> CliResult<AnnotatedCorpus> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    read_jsonl(BufReader::new(file)).map_err(|e| Failure::data(path, e))
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, content: &str) -> CliResult<()> {
    match output {
        Some(p) => fs::write(p, content).map_err(|e| Failure::Invalid(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Invalid(format!("stdout: {e}")))
        }
    }
}

fn normalizer() -> CliResult<Cow<'static, Normalizer>> {
    match std::env::var_os(DATA_ENV) {
        Some(dir) => {
            let dir = PathBuf::from(dir);
            if !dir.is_dir() {
                return Err(Failure::Usage(format!("{DATA_ENV}={}: not a directory", dir.display())));
            }
            Normalizer::from_dir(&dir)
                .map(Cow::Owned)
                .map_err(|e| Failure::Usage(format!("{DATA_ENV}={}: {e}", dir.display())))
        }
        None => Ok(Cow::Borrowed(Normalizer::bundled())),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize") + "\n"
}

fn ingest(dir: &Path, language: Language, annotator: &str, into: Option<&Path>) -> CliResult<AnnotatedCorpus> {
    require(dir)?;
    let mut stems: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "txt"))
        .map(|p| p.with_extension(""))
        .collect();
    stems.sort();
    let parsed: Vec<CliResult<_>> = stems
        .par_iter()
        .map(|stem| {
            let txt_path = stem.with_extension("txt");
            let ann_path = stem.with_extension("ann");
            let id = stem.file_name().unwrap_or_default().to_string_lossy().into_owned();
            let txt = read_text(&txt_path)?;
            let ann = read_text(&ann_path)?;
            parse_standoff(&id, language, &ann, &txt).map_err(|e| Failure::data(&ann_path, e))
        })
        .collect();
    let mut corpus = match into {
        Some(p) => load_corpus(p)?,
        None => AnnotatedCorpus::new(),
    };
    for item in parsed {
        let (tweet, annotation) = item?;
        let id = tweet.id.clone();
        match corpus.tweet(&id) {
            Some(existing) if existing.raw_text != tweet.raw_text => {
                return Err(Failure::Invalid(format!("tweet `{id}` has a different text than in the existing corpus")));
            }
            Some(_) => {}
            None => corpus.push_tweet(tweet).map_err(|e| Failure::data(dir, e))?,
        }
        corpus.annotate(annotator, &id, annotation).map_err(|e| Failure::data(dir, e))?;
    }
    Ok(corpus)
}

fn validate_corpus(corpus: &AnnotatedCorpus, layer: Option<&str>, mode: Mode) -> CliResult<Vec<(String, ValidationReport)>> {
    let layers: Vec<_> = match layer {
        Some(name) => vec![corpus.layer(name).map_err(|e| Failure::Usage(e.to_string()))?],
        None => corpus.layers().values().collect(),
    };
    let mut out = Vec::new();
    for l in layers {
        let reports: Vec<ValidationReport> = corpus
            .tweets()
            .par_iter()
            .filter_map(|t| l.get(&t.id).map(|a| validate(t, a, mode)))
            .collect();
        out.extend(
            reports
                .into_iter()
                .filter(|r| !r.issues.is_empty())
                .map(|r| (l.annotator_id.clone(), r)),
        );
    }
    Ok(out)
}

fn score_runs(
    corpus: &AnnotatedCorpus,
    layer: &str,
    runs: &[String],
    normalizer: &Normalizer,
) -> CliResult<Vec<RunScore>> {
    let layer = corpus.layer(layer).map_err(|e| Failure::Usage(e.to_string()))?;
    let mut pairs = Vec::new();
    for r in runs {
        let (m, p) = r
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--run expects MANIFEST=PREDICTIONS, got `{r}`")))?;
        let (m, p) = (PathBuf::from(m), PathBuf::from(p));
        require(&m)?;
        require(&p)?;
        pairs.push((m, p));
    }
    let scored: Vec<CliResult<Vec<RunScore>>> = pairs
        .par_iter()
        .map(|(m, p)| {
            let manifest = ExperimentManifest::from_json(&read_text(m)?).map_err(|e| Failure::data(m, e))?;
            let file = File::open(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            let preds = PredictionFile::read(BufReader::new(file)).map_err(|e| Failure::data(p, e))?;
            score_predictions(corpus, layer, &manifest, &preds, normalizer).map_err(|e| Failure::data(p, e))
        })
        .collect();
    let mut all = Vec::new();
    for s in scored {
        all.extend(s?);
    }
    Ok(all)
}

fn load_report(path: &Path) -> CliResult<MetricsReport> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Failure::data(path, e.into()))
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ingest {
            dir,
            language,
            annotator,
            into,
            output,
        } => {
            if let Some(p) = &into {
                require(p)?;
            }
            let corpus = ingest(&dir, language, &annotator, into.as_deref())?;
            let text = to_jsonl_string(&corpus).map_err(|e| Failure::Invalid(e.to_string()))?;
            emit(output.as_deref(), &text)
        }
        Command::Validate {
            corpus,
            strict: _,
            lenient,
            layer,
            format,
        } => {
            require(&corpus)?;
            let c = load_corpus(&corpus)?;
            let mode = if lenient { Mode::Lenient } else { Mode::Strict };
            let reports = validate_corpus(&c, layer.as_deref(), mode)?;
            let failed = reports.iter().any(|(_, r)| !r.passes());
            let text = match format {
                OutputFormat::Json => {
                    let items: Vec<_> = reports
                        .iter()
                        .map(|(l, r)| serde_json::json!({ "layer": l, "tweet_id": r.tweet_id, "issues": r.issues }))
                        .collect();
                    json(&items)
                }
                OutputFormat::Text => reports
                    .iter()
                    .flat_map(|(l, r)| r.issues.iter().map(move |i| format!("{l}/{}: {i}\n", r.tweet_id)))
                    .collect(),
            };
            emit(None, &text)?;
            if failed {
                let errors: usize = reports.iter().map(|(_, r)| r.error_count()).sum();
                return Err(Failure::Invalid(format!("{errors} validation error(s)")));
            }
            Ok(())
        }
        Command::Normalize { corpus, output } => {
            require(&corpus)?;
            let c = load_corpus(&corpus)?;
            let n = normalizer()?;
            let lines: Vec<String> = c
                .tweets()
                .par_iter()
                .map(|t| {
                    let nm = n.normalize(t);
                    serde_json::json!({
                        "id": t.id,
                        "language": t.language,
                        "text": nm.text,
                        "offset_map": nm.offset_map,
                    })
                    .to_string()
                        + "\n"
                })
                .collect();
            emit(output.as_deref(), &lines.concat())
        }
        Command::Stats { corpus, layer, format } => {
            require(&corpus)?;
            let c = load_corpus(&corpus)?;
            let l = c.layer(&layer).map_err(|e| Failure::Usage(e.to_string()))?;
            let s = corpus_stats(&c, l).map_err(|e| Failure::data(&corpus, e))?;
            let text = match format {
                OutputFormat::Json => json(&s),
                OutputFormat::Text => format!("{}\n{}", s.render_component_table(), s.render_type_table()),
            };
            emit(None, &text)
        }
        Command::Agreement {
            corpus,
            a,
            b,
            human_f1,
            format,
        } => {
            require(&corpus)?;
            let c = load_corpus(&corpus)?;
            let la = c.layer(&a).map_err(|e| Failure::Usage(e.to_string()))?;
            let lb = c.layer(&b).map_err(|e| Failure::Usage(e.to_string()))?;
            let report = agreement_report(&c, la, lb).map_err(|e| Failure::data(&corpus, e))?;
            let baseline = if human_f1 {
                let mut rows = Vec::new();
                for cat in AgreementCategory::ALL {
                    let prf = human_baseline_f1(&c, la, lb, cat).map_err(|e| Failure::data(&corpus, e))?;
                    rows.push((cat, prf));
                }
                Some(rows)
            } else {
                None
            };
            let text = match format {
                OutputFormat::Json => match &baseline {
                    Some(rows) => {
                        let hf: serde_json::Map<_, _> = rows
                            .iter()
                            .map(|(c, p)| (format!("{c:?}"), serde_json::to_value(p).expect("serializable")))
                            .collect();
                        json(&serde_json::json!({ "agreement": report, "human_f1": hf }))
                    }
                    None => json(&report),
                },
                OutputFormat::Text => {
                    let mut t = format!(
                        "{} vs {} on {} shared tweets\n{}",
                        report.annotator_a,
                        report.annotator_b,
                        report.shared_tweets,
                        report.render_table()
                    );
                    if let Some(rows) = &baseline {
                        t.push_str("\nhuman F1 (b predicting a)\n");
                        for (cat, p) in rows {
                            t.push_str(&format!(
                                "{:<14} F1 {:.3}  P {:.3}  R {:.3}\n",
                                cat.header(),
                                p.f1,
                                p.precision,
                                p.recall
                            ));
                        }
                    }
                    t
                }
            };
            emit(None, &text)
        }
        Command::Export {
            corpus,
            layer,
            manifest,
            out_dir,
            target,
            normalized,
            output,
        } => {
            require(&corpus)?;
            let c = load_corpus(&corpus)?;
            let l = c.layer(&layer).map_err(|e| Failure::Usage(e.to_string()))?;
            let n = normalizer()?;
            if let Some(mpath) = manifest {
                require(&mpath)?;
                let m = ExperimentManifest::from_json(&read_text(&mpath)?).map_err(|e| Failure::data(&mpath, e))?;
                let dir = out_dir.ok_or_else(|| Failure::Usage("--manifest needs --out-dir".into()))?;
                let inst = task_instances(&c, l, &m, &n).map_err(|e| Failure::data(&corpus, e))?;
                let paths = inst.write_to(&dir).map_err(|e| Failure::data(&dir, e))?;
                let listing: String = paths.iter().map(|p| format!("{}\n", p.display())).collect();
                return emit(None, &listing);
            }
            let target = target.expect("clap enforces --target without --manifest");
            let (blocks, warnings) = export_token_classification(&c, l, target, normalized.then_some(&*n))
                .map_err(|e| Failure::data(&corpus, e))?;
            for w in &warnings {
                eprintln!("warning: {}[{}]: {}", w.tweet_id, w.token_index, w.message);
            }
            emit(output.as_deref(), &render_conll(&blocks))
        }
        Command::Plan {
            corpus,
            scheme,
            task,
            seed,
            fraction,
            subsample_seed,
            output,
        } => {
            require(&corpus)?;
            let c = load_corpus(&corpus)?;
            let m = make_partitions(&c, scheme, task, seed).map_err(|e| Failure::data(&corpus, e))?;
            let m = subsample_train(&m, fraction, subsample_seed.unwrap_or(seed)).map_err(|e| match e {
                Error::InvalidFraction(_) => Failure::Usage(e.to_string()),
                e => Failure::Invalid(e.to_string()),
            })?;
            emit(output.as_deref(), &(m.to_json().map_err(|e| Failure::Invalid(e.to_string()))? + "\n"))
        }
        Command::Score {
            corpus,
            layer,
            setting,
            runs,
            into,
            format,
            output,
        } => {
            require(&corpus)?;
            if let Some(p) = &into {
                require(p)?;
            }
            let c = load_corpus(&corpus)?;
            let n = normalizer()?;
            let scores = score_runs(&c, &layer, &runs, &n)?;
            let mut report = match &into {
                Some(p) => load_report(p)?,
                None => MetricsReport::default(),
            };
            report.extend(MetricsReport::from_runs(&setting, &scores).map_err(|e| Failure::Invalid(e.to_string()))?);
            let text = match format {
                OutputFormat::Json => json(&report),
                OutputFormat::Text => format!("{}\n{}", report.render_component_scores(), report.render_type_scores()),
            };
            emit(output.as_deref(), &text)
        }
        Command::Plot { reports, output } => {
            let mut merged = MetricsReport::default();
            for p in &reports {
                require(p)?;
                merged.extend(load_report(p)?);
            }
            let svg = render_ablation_svg(&merged).map_err(|e| Failure::Invalid(e.to_string()))?;
            emit(output.as_deref(), &svg)
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(jobs) = cli.jobs {
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            EXIT_INVALID
        }
    }
}
