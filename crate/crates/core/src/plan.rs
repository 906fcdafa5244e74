//! Experiment manifests, task instance files, and prediction scoring.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::export::{render_conll, tweet_block, ExportTarget, JointPair, TokenBlock, FIRST, IN, SECOND};
use crate::metrics::{sequence_prf, token_prf, Averaging, RunScore, SequenceScore};
use crate::model::{AnnotatedCorpus, AnnotationLayer, Language, PremiseKind, PropositionType, SpanCategory};
use crate::normalize::{project_span, Normalizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    MonoEn,
    MixEnEs,
    CrossLingual,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::MonoEn, Scheme::MixEnEs, Scheme::CrossLingual];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::MonoEn => "mono-en",
            Scheme::MixEnEs => "mix-en-es",
            Scheme::CrossLingual => "cross-lingual",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn squash(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .collect::<String>()
        .to_lowercase()
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match squash(s).as_str() {
            "monoen" | "mono" => Ok(Scheme::MonoEn),
            "mixenes" | "mix" => Ok(Scheme::MixEnEs),
            "crosslingual" | "cross" | "xl" => Ok(Scheme::CrossLingual),
            _ => Err(Error::Format(format!("unknown scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Argumentative,
    Collective,
    Property,
    Pivot,
    Justification,
    Conclusion,
    JointCollectiveProperty,
    JointJustificationConclusion,
    TypeOfJustification,
    TypeOfConclusion,
    TypeOfBoth,
}

/// How a task's instances are shaped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Argumentative,
    Tokens(ExportTarget),
    /// `None` trains on both premise kinds.
    Type(Option<PremiseKind>),
}

impl Task {
    pub const ALL: [Task; 11] = [
        Task::Argumentative,
        Task::Collective,
        Task::Property,
        Task::Pivot,
        Task::Justification,
        Task::Conclusion,
        Task::JointCollectiveProperty,
        Task::JointJustificationConclusion,
        Task::TypeOfJustification,
        Task::TypeOfConclusion,
        Task::TypeOfBoth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Argumentative => "argumentative",
            Task::Collective => "collective",
            Task::Property => "property",
            Task::Pivot => "pivot",
            Task::Justification => "justification",
            Task::Conclusion => "conclusion",
            Task::JointCollectiveProperty => "joint-collective-property",
            Task::JointJustificationConclusion => "joint-justification-conclusion",
            Task::TypeOfJustification => "type-of-justification",
            Task::TypeOfConclusion => "type-of-conclusion",
            Task::TypeOfBoth => "type-of-both",
        }
    }

    pub fn kind(self) -> TaskKind {
        use ExportTarget::*;
        match self {
            Task::Argumentative => TaskKind::Argumentative,
            Task::Collective => TaskKind::Tokens(Single(SpanCategory::Collective)),
            Task::Property => TaskKind::Tokens(Single(SpanCategory::Property)),
            Task::Pivot => TaskKind::Tokens(Single(SpanCategory::Pivot)),
            Task::Justification => TaskKind::Tokens(Single(SpanCategory::Justification)),
            Task::Conclusion => TaskKind::Tokens(Single(SpanCategory::Conclusion)),
            Task::JointCollectiveProperty => TaskKind::Tokens(Joint(JointPair::CollectiveProperty)),
            Task::JointJustificationConclusion => TaskKind::Tokens(Joint(JointPair::JustificationConclusion)),
            Task::TypeOfJustification => TaskKind::Type(Some(PremiseKind::Justification)),
            Task::TypeOfConclusion => TaskKind::Type(Some(PremiseKind::Conclusion)),
            Task::TypeOfBoth => TaskKind::Type(None),
        }
    }

    /// Dev metric used to pick learning rate and epoch.
    pub fn selection_metric(self) -> &'static str {
        match self.kind() {
            TaskKind::Type(_) => "dev macro F1",
            _ => "dev target-class F1",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = squash(s);
        Task::ALL
            .into_iter()
            .find(|t| squash(t.name()) == key)
            .ok_or_else(|| Error::Format(format!("unknown task `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub learning_rates: Vec<f64>,
    pub batch_size: u32,
    pub max_epochs: u32,
    pub optimizer: String,
    pub dropout: f64,
    pub weight_decay: f64,
    pub adam_epsilon: f64,
    pub adam_betas: [f64; 2],
    pub early_stopping_patience: u32,
    pub restore_best_checkpoint: bool,
    #[serde(default)]
    pub selection_metric: String,
}

impl HyperGrid {
    pub fn for_task(task: Task) -> HyperGrid {
        let mut grid: HyperGrid =
            serde_json::from_str(include_str!("../data/hyper_grid.json")).expect("bundled grid parses");
        grid.selection_metric = task.selection_metric().to_string();
        grid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub scheme: Scheme,
    pub task: Task,
    pub seed: u64,
    pub fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsample_seed: Option<u64>,
    pub train: Vec<String>,
    pub dev: Vec<String>,
    pub test: Vec<String>,
    pub grid: HyperGrid,
}

impl ExperimentManifest {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Train/dev/test counts drawn from one language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LanguageSplit {
    pub train: usize,
    pub dev: usize,
    /// `None` puts every remaining tweet of the language in the test list.
    pub test: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeSizes {
    pub en: LanguageSplit,
    pub es: Option<LanguageSplit>,
}

impl SchemeSizes {
    pub fn standard(scheme: Scheme) -> SchemeSizes {
        let split = |train, dev, test| LanguageSplit { train, dev, test };
        match scheme {
            Scheme::MonoEn => SchemeSizes {
                en: split(770, 100, Some(100)),
                es: None,
            },
            Scheme::MixEnEs => SchemeSizes {
                en: split(770, 100, Some(100)),
                es: Some(split(120, 26, Some(50))),
            },
            Scheme::CrossLingual => SchemeSizes {
                en: split(850, 120, Some(0)),
                es: Some(split(0, 0, None)),
            },
        }
    }
}

fn ids_of(corpus: &AnnotatedCorpus, language: Language) -> Vec<String> {
    corpus
        .tweets()
        .iter()
        .filter(|t| t.language == language)
        .map(|t| t.id.clone())
        .collect()
}

fn draw(
    mut ids: Vec<String>,
    split: LanguageSplit,
    language: Language,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<String>, Vec<String>, Vec<String>)> {
    let fixed = split.train + split.dev + split.test.unwrap_or(0);
    let needed = if split.test.is_none() { fixed.max(1) } else { fixed };
    if ids.len() < needed {
        return Err(Error::InsufficientTweets {
            language: language.code(),
            needed,
            available: ids.len(),
        });
    }
    if split.train + split.dev == 0 && split.test.is_none() {
        // the whole language is a test set; keep corpus order
        return Ok((Vec::new(), Vec::new(), ids));
    }
    ids.shuffle(rng);
    let test_end = match split.test {
        Some(n) => split.train + split.dev + n,
        None => ids.len(),
    };
    let test = ids[split.train + split.dev..test_end].to_vec();
    let dev = ids[split.train..split.train + split.dev].to_vec();
    ids.truncate(split.train);
    Ok((ids, dev, test))
}

/// Draws train/dev/test ids with the standard sizes for `scheme`.
pub fn make_partitions(corpus: &AnnotatedCorpus, scheme: Scheme, task: Task, seed: u64) -> Result<ExperimentManifest> {
    make_partitions_sized(corpus, scheme, task, seed, SchemeSizes::standard(scheme))
}

pub fn make_partitions_sized(
    corpus: &AnnotatedCorpus,
    scheme: Scheme,
    task: Task,
    seed: u64,
    sizes: SchemeSizes,
) -> Result<ExperimentManifest> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut dev, mut test) = draw(ids_of(corpus, Language::En), sizes.en, Language::En, &mut rng)?;
    if let Some(es) = sizes.es {
        let (tr, dv, te) = draw(ids_of(corpus, Language::Es), es, Language::Es, &mut rng)?;
        train.extend(tr);
        dev.extend(dv);
        test.extend(te);
    }
    Ok(ExperimentManifest {
        scheme,
        task,
        seed,
        fraction: 1.0,
        subsample_seed: None,
        train,
        dev,
        test,
        grid: HyperGrid::for_task(task),
    })
}

pub const FRACTIONS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Keeps `round(fraction * n)` training ids. The ids kept for one seed are
/// a prefix of one fixed permutation, so smaller fractions are subsets of
/// larger ones. Kept ids stay in their original order.
pub fn subsample_train(manifest: &ExperimentManifest, fraction: f64, seed: u64) -> Result<ExperimentManifest> {
    if !FRACTIONS.iter().any(|f| (f - fraction).abs() < 1e-9) {
        return Err(Error::InvalidFraction(fraction));
    }
    if manifest.fraction != 1.0 {
        return Err(Error::AlreadySubsampled(manifest.fraction));
    }
    if fraction == 1.0 {
        return Ok(manifest.clone());
    }
    let n = manifest.train.len();
    let keep = (fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    order.shuffle(&mut rng);
    let mut kept: Vec<usize> = order[..keep].to_vec();
    kept.sort_unstable();
    let mut out = manifest.clone();
    out.train = kept.into_iter().map(|i| manifest.train[i].clone()).collect();
    out.fraction = fraction;
    out.subsample_seed = Some(seed);
    Ok(out)
}

pub const ARGUMENTATIVE: &str = "argumentative";
pub const NON_ARGUMENTATIVE: &str = "non-argumentative";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceInstance {
    pub id: String,
    pub text: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceFile {
    Sequence(Vec<SequenceInstance>),
    Tokens(Vec<TokenBlock>),
}

impl InstanceFile {
    pub fn ids(&self) -> Vec<&str> {
        match self {
            InstanceFile::Sequence(v) => v.iter().map(|i| i.id.as_str()).collect(),
            InstanceFile::Tokens(v) => v.iter().map(|b| b.id.as_str()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            InstanceFile::Sequence(v) => v.len(),
            InstanceFile::Tokens(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extension(&self) -> &'static str {
        match self {
            InstanceFile::Sequence(_) => "jsonl",
            InstanceFile::Tokens(_) => "conll",
        }
    }

    pub fn render(&self) -> Result<String> {
        match self {
            InstanceFile::Tokens(blocks) => Ok(render_conll(blocks)),
            InstanceFile::Sequence(items) => {
                let mut out = String::new();
                for item in items {
                    out.push_str(&serde_json::to_string(item)?);
                    out.push('\n');
                }
                Ok(out)
            }
        }
    }
}

/// Instance files of one manifest. Most tasks have one test file; the
/// both-premises type task has three.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskInstances {
    pub train: InstanceFile,
    pub dev: InstanceFile,
    pub tests: Vec<(String, InstanceFile)>,
}

impl TaskInstances {
    /// Writes `train`, `dev` and each test file into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        let files = [("train", &self.train), ("dev", &self.dev)]
            .into_iter()
            .chain(self.tests.iter().map(|(n, f)| (n.as_str(), f)));
        for (name, file) in files {
            let path = dir.join(format!("{name}.{}", file.extension()));
            fs::write(&path, file.render()?)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

fn premise_instance_id(tweet_id: &str, kind: PremiseKind) -> String {
    format!("{tweet_id}#{}", kind.name())
}

fn split_instances(
    corpus: &AnnotatedCorpus,
    layer: &AnnotationLayer,
    task: Task,
    ids: &[String],
    kinds: &[PremiseKind],
    normalizer: &Normalizer,
) -> Result<InstanceFile> {
    let lookup = |id: &String| -> Result<_> {
        let tweet = corpus
            .tweet(id)
            .ok_or_else(|| Error::UnknownTweet {
                layer: "manifest".into(),
                tweet: id.clone(),
            })?;
        let ann = layer.get(id).ok_or_else(|| Error::MissingAnnotation(id.clone()))?;
        Ok((tweet, ann))
    };
    match task.kind() {
        TaskKind::Argumentative => {
            let mut out = Vec::with_capacity(ids.len());
            for id in ids {
                let (tweet, ann) = lookup(id)?;
                out.push(SequenceInstance {
                    id: id.clone(),
                    text: normalizer.normalize(tweet).text,
                    label: if ann.argumentative { ARGUMENTATIVE } else { NON_ARGUMENTATIVE }.to_string(),
                });
            }
            Ok(InstanceFile::Sequence(out))
        }
        TaskKind::Tokens(target) => {
            let mut out = Vec::new();
            for id in ids {
                let (tweet, ann) = lookup(id)?;
                if ann.argumentative {
                    out.push(tweet_block(tweet, ann, target, Some(normalizer))?.0);
                }
            }
            Ok(InstanceFile::Tokens(out))
        }
        TaskKind::Type(_) => {
            let mut out = Vec::new();
            for id in ids {
                let (tweet, ann) = lookup(id)?;
                if !ann.argumentative {
                    continue;
                }
                let nm = normalizer.normalize(tweet);
                for &kind in kinds {
                    let Some(premise) = ann.premise(kind) else {
                        continue;
                    };
                    let projected = project_span(&premise.span, &nm)?;
                    out.push(SequenceInstance {
                        id: premise_instance_id(id, kind),
                        text: projected.slices(&nm.text).join(" "),
                        label: premise.kind.name().to_string(),
                    });
                }
            }
            Ok(InstanceFile::Sequence(out))
        }
    }
}

const BOTH: [PremiseKind; 2] = [PremiseKind::Justification, PremiseKind::Conclusion];

/// Builds instance files on normalized text. Span and type tasks only
/// include argumentative tweets.
pub fn task_instances(
    corpus: &AnnotatedCorpus,
    layer: &AnnotationLayer,
    manifest: &ExperimentManifest,
    normalizer: &Normalizer,
) -> Result<TaskInstances> {
    let task = manifest.task;
    let train_kinds: &[PremiseKind] = match task.kind() {
        TaskKind::Type(Some(kind)) => match kind {
            PremiseKind::Justification => &BOTH[..1],
            PremiseKind::Conclusion => &BOTH[1..],
        },
        _ => &BOTH,
    };
    let build = |ids: &[String], kinds: &[PremiseKind]| split_instances(corpus, layer, task, ids, kinds, normalizer);
    let tests = match task.kind() {
        TaskKind::Type(None) => vec![
            ("test-justification".to_string(), build(&manifest.test, &BOTH[..1])?),
            ("test-conclusion".to_string(), build(&manifest.test, &BOTH[1..])?),
            ("test-both".to_string(), build(&manifest.test, &BOTH)?),
        ],
        _ => vec![("test".to_string(), build(&manifest.test, train_kinds)?)],
    };
    Ok(TaskInstances {
        train: build(&manifest.train, train_kinds)?,
        dev: build(&manifest.dev, train_kinds)?,
        tests,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prediction {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictionFile {
    /// Optional reference to the manifest the predictions were made for.
    pub manifest: Option<String>,
    pub predictions: Vec<Prediction>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    manifest: String,
}

impl PredictionFile {
    /// One JSON object per line; an optional first line `{"manifest": ...}`.
    pub fn read<R: BufRead>(reader: R) -> Result<PredictionFile> {
        let mut file = PredictionFile::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let schema = |e: serde_json::Error| Error::Schema {
                line: i + 1,
                message: e.to_string(),
            };
            if file.predictions.is_empty() && file.manifest.is_none() {
                if let Ok(h) = serde_json::from_str::<Header>(&line) {
                    file.manifest = Some(h.manifest);
                    continue;
                }
            }
            let p: Prediction = serde_json::from_str(&line).map_err(schema)?;
            if p.labels.is_some() == p.label.is_some() {
                return Err(Error::Schema {
                    line: i + 1,
                    message: "a prediction needs exactly one of `labels` or `label`".into(),
                });
            }
            file.predictions.push(p);
        }
        Ok(file)
    }

    pub fn write<W: Write>(&self, mut writer: W) -> Result<()> {
        if let Some(m) = &self.manifest {
            writeln!(writer, "{}", serde_json::json!({ "manifest": m }))?;
        }
        for p in &self.predictions {
            writeln!(writer, "{}", serde_json::to_string(p)?)?;
        }
        Ok(())
    }
}

fn index_predictions<'a>(preds: &'a PredictionFile, expected: &[&str]) -> Result<HashMap<&'a str, &'a Prediction>> {
    let mut map = HashMap::with_capacity(preds.predictions.len());
    for p in &preds.predictions {
        if map.insert(p.id.as_str(), p).is_some() {
            return Err(Error::Coverage(format!("duplicate prediction for `{}`", p.id)));
        }
    }
    let expected_set: HashSet<&str> = expected.iter().copied().collect();
    if let Some(missing) = expected.iter().find(|id| !map.contains_key(*id)) {
        return Err(Error::Coverage(format!("no prediction for instance `{missing}`")));
    }
    if let Some(extra) = preds.predictions.iter().find(|p| !expected_set.contains(p.id.as_str())) {
        return Err(Error::Coverage(format!("prediction for unknown instance `{}`", extra.id)));
    }
    Ok(map)
}

fn sequence_label(p: &Prediction) -> Result<&str> {
    p.label
        .as_deref()
        .ok_or_else(|| Error::Coverage(format!("instance `{}` expects a single `label`", p.id)))
}

fn token_labels(p: &Prediction, expected: usize) -> Result<&[String]> {
    let labels = p
        .labels
        .as_deref()
        .ok_or_else(|| Error::Coverage(format!("instance `{}` expects per-token `labels`", p.id)))?;
    if labels.len() != expected {
        return Err(Error::Coverage(format!(
            "instance `{}` has {} tokens but {} predicted labels",
            p.id,
            expected,
            labels.len()
        )));
    }
    Ok(labels)
}

fn check_domain(label: &str, domain: &[&str]) -> Result<()> {
    if domain.contains(&label) {
        Ok(())
    } else {
        Err(Error::UnknownLabel(label.to_string()))
    }
}

fn row_name(task: Task, test_file: &str) -> String {
    match (task, test_file) {
        (Task::Argumentative, _) => "Arg./Non-Arg.".into(),
        (Task::TypeOfJustification, _) => "Type of Just.".into(),
        (Task::TypeOfConclusion, _) => "Type of Conc.".into(),
        (Task::TypeOfBoth, "test-justification") => "Type of Just".into(),
        (Task::TypeOfBoth, "test-conclusion") => "Type of Conc".into(),
        (Task::TypeOfBoth, _) => "Type of both".into(),
        (t, _) => match t.kind() {
            TaskKind::Tokens(ExportTarget::Single(c)) => c.name().into(),
            _ => unreachable!("joint rows are named per component"),
        },
    }
}

/// Scores a prediction file against the gold test instances of `manifest`.
/// Joint tasks yield one row per component; the both-premises type task
/// yields one row per test file.
pub fn score_predictions(
    corpus: &AnnotatedCorpus,
    layer: &AnnotationLayer,
    manifest: &ExperimentManifest,
    predictions: &PredictionFile,
    normalizer: &Normalizer,
) -> Result<Vec<RunScore>> {
    let instances = task_instances(corpus, layer, manifest, normalizer)?;
    let task = manifest.task;
    let coverage_file = &instances.tests.last().expect("at least one test file").1;
    let expected = coverage_file.ids();
    let by_id = index_predictions(predictions, &expected)?;
    let run = |row: String, prf, per_class| RunScore {
        task,
        row,
        seed: manifest.seed,
        fraction: manifest.fraction,
        prf,
        per_class,
    };
    let mut scores = Vec::new();
    for (name, file) in &instances.tests {
        match (task.kind(), file) {
            (TaskKind::Argumentative, InstanceFile::Sequence(items)) => {
                let gold: Vec<&str> = items.iter().map(|i| i.label.as_str()).collect();
                let mut pred = Vec::with_capacity(items.len());
                for item in items {
                    let l = sequence_label(by_id[item.id.as_str()])?;
                    check_domain(l, &[ARGUMENTATIVE, NON_ARGUMENTATIVE])?;
                    pred.push(l);
                }
                let domain = [NON_ARGUMENTATIVE, ARGUMENTATIVE];
                let prf = sequence_prf(&gold, &pred, &domain, &Averaging::TargetClass(ARGUMENTATIVE))?
                    .single()
                    .unwrap_or_default();
                scores.push(run(row_name(task, name), prf, None));
            }
            (TaskKind::Tokens(target), InstanceFile::Tokens(blocks)) => {
                let mut gold = Vec::new();
                let mut pred = Vec::new();
                for block in blocks {
                    let labels = token_labels(by_id[block.id.as_str()], block.labels.len())?;
                    for l in labels {
                        check_domain(l, target.labels())?;
                    }
                    gold.extend(block.labels.iter().cloned());
                    pred.extend(labels.iter().cloned());
                }
                match target {
                    ExportTarget::Single(_) => {
                        let g: Vec<bool> = gold.iter().map(|l| l == IN).collect();
                        let p: Vec<bool> = pred.iter().map(|l| l == IN).collect();
                        scores.push(run(row_name(task, name), token_prf(&g, &p)?, None));
                    }
                    ExportTarget::Joint(pair) => {
                        let (first, second) = pair.categories();
                        for (label, cat) in [(FIRST, first), (SECOND, second)] {
                            let g: Vec<bool> = gold.iter().map(|l| l == label).collect();
                            let p: Vec<bool> = pred.iter().map(|l| l == label).collect();
                            scores.push(run(format!("{} (joint)", cat.name()), token_prf(&g, &p)?, None));
                        }
                    }
                }
            }
            (TaskKind::Type(_), InstanceFile::Sequence(items)) => {
                let mut gold = Vec::with_capacity(items.len());
                let mut pred = Vec::with_capacity(items.len());
                for item in items {
                    gold.push(item.label.parse::<PropositionType>()?);
                    let l = sequence_label(by_id[item.id.as_str()])?;
                    pred.push(
                        l.parse::<PropositionType>()
                            .map_err(|_| Error::UnknownLabel(l.to_string()))?,
                    );
                }
                let domain = PropositionType::ALL;
                let prf = sequence_prf(&gold, &pred, &domain, &Averaging::Macro)?
                    .single()
                    .unwrap_or_default();
                let SequenceScore::PerClass(per) = sequence_prf(&gold, &pred, &domain, &Averaging::PerClass)? else {
                    unreachable!()
                };
                let per: BTreeMap<_, _> = per.into_iter().collect();
                scores.push(run(row_name(task, name), prf, Some(per)));
            }
            _ => unreachable!("instance file shape follows the task kind"),
        }
    }
    Ok(scores)
}

/// Predictions that copy the gold labels of every test instance.
pub fn gold_predictions(instances: &TaskInstances) -> PredictionFile {
    let file = &instances.tests.last().expect("at least one test file").1;
    let predictions = match file {
        InstanceFile::Sequence(items) => items
            .iter()
            .map(|i| Prediction {
                id: i.id.clone(),
                labels: None,
                label: Some(i.label.clone()),
            })
            .collect(),
        InstanceFile::Tokens(blocks) => blocks
            .iter()
            .map(|b| Prediction {
                id: b.id.clone(),
                labels: Some(b.labels.clone()),
                label: None,
            })
            .collect(),
    };
    PredictionFile {
        manifest: None,
        predictions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArgumentAnnotation, Premise, Span, Tweet};

    fn synthetic(en: usize, es: usize) -> AnnotatedCorpus {
        let mut c = AnnotatedCorpus::new();
        for (lang, n) in [(Language::En, en), (Language::Es, es)] {
            for i in 0..n {
                let id = format!("{}{i}", lang.code());
                c.push_tweet(Tweet::new(&id, lang, "they bring crime so deport them").unwrap()).unwrap();
                let ann = if i % 4 == 0 {
                    ArgumentAnnotation::non_argumentative()
                } else {
                    ArgumentAnnotation::argumentative(
                        Premise::new(Span::single(0, 16).unwrap(), PropositionType::Fact),
                        Premise::new(Span::single(20, 31).unwrap(), PropositionType::Policy),
                    )
                    .with_collective(Span::single(0, 4).unwrap())
                };
                c.annotate("gold", &id, ann).unwrap();
            }
        }
        c
    }

    fn disjoint(m: &ExperimentManifest) -> bool {
        let mut seen = HashSet::new();
        m.train.iter().chain(&m.dev).chain(&m.test).all(|id| seen.insert(id))
    }

    #[test]
    fn standard_sizes() {
        let c = synthetic(970, 196);
        let m = make_partitions(&c, Scheme::MonoEn, Task::Argumentative, 7).unwrap();
        assert_eq!((m.train.len(), m.dev.len(), m.test.len()), (770, 100, 100));
        assert!(disjoint(&m));
        let m = make_partitions(&c, Scheme::MixEnEs, Task::Argumentative, 7).unwrap();
        assert_eq!((m.train.len(), m.dev.len(), m.test.len()), (890, 126, 150));
        let es = |v: &[String]| v.iter().filter(|i| i.starts_with("es")).count();
        assert_eq!((es(&m.train), es(&m.dev), es(&m.test)), (120, 26, 50));
        assert!(disjoint(&m));
        let m = make_partitions(&c, Scheme::CrossLingual, Task::Argumentative, 7).unwrap();
        assert_eq!((m.train.len(), m.dev.len(), m.test.len()), (850, 120, 196));
        assert_eq!(es(&m.test), 196);
        assert_eq!(m.test.iter().collect::<HashSet<_>>().len(), 196);
        assert!(disjoint(&m));
    }

    #[test]
    fn deterministic_and_seed_dependent() {
        let c = synthetic(970, 196);
        let a = make_partitions(&c, Scheme::MixEnEs, Task::Pivot, 3).unwrap();
        let b = make_partitions(&c, Scheme::MixEnEs, Task::Pivot, 3).unwrap();
        assert_eq!(a, b);
        let d = make_partitions(&c, Scheme::MixEnEs, Task::Pivot, 4).unwrap();
        assert_ne!(a.train, d.train);
        assert_eq!(a.grid.learning_rates, [1e-5, 2e-5, 5e-5, 5e-4, 5e-6]);
        assert_eq!(a.grid.batch_size, 16);
        let back = ExperimentManifest::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn insufficient_tweets() {
        let c = synthetic(900, 196);
        assert!(matches!(
            make_partitions(&c, Scheme::MonoEn, Task::Argumentative, 1),
            Err(Error::InsufficientTweets { needed: 970, available: 900, .. })
        ));
        let c = synthetic(970, 10);
        assert!(make_partitions(&c, Scheme::MixEnEs, Task::Argumentative, 1).is_err());
    }

    #[test]
    fn nested_subsamples() {
        let c = synthetic(970, 196);
        let m = make_partitions(&c, Scheme::MonoEn, Task::Argumentative, 11).unwrap();
        let subs: Vec<_> = FRACTIONS.iter().map(|&f| subsample_train(&m, f, 5).unwrap()).collect();
        assert_eq!(subs[1].train.len(), 385);
        for w in subs.windows(2) {
            let big: HashSet<_> = w[1].train.iter().collect();
            assert!(w[0].train.iter().all(|id| big.contains(id)));
            assert_eq!(w[0].dev, m.dev);
            assert_eq!(w[0].test, m.test);
        }
        assert_eq!(subs[3], m);
        assert!(matches!(subsample_train(&m, 0.3, 5), Err(Error::InvalidFraction(_))));
        assert!(matches!(subsample_train(&subs[0], 0.5, 5), Err(Error::AlreadySubsampled(_))));
    }

    fn small_manifest(c: &AnnotatedCorpus, task: Task) -> ExperimentManifest {
        let sizes = SchemeSizes {
            en: LanguageSplit {
                train: 8,
                dev: 4,
                test: Some(8),
            },
            es: None,
        };
        make_partitions_sized(c, Scheme::MonoEn, task, 2, sizes).unwrap()
    }

    #[test]
    fn instance_shapes() {
        let c = synthetic(20, 0);
        let gold = c.layer("gold").unwrap();
        let n = Normalizer::bundled();
        let arg_count = |ids: &[String]| ids.iter().filter(|i| gold.get(i).unwrap().argumentative).count();

        let m = small_manifest(&c, Task::Argumentative);
        let inst = task_instances(&c, gold, &m, n).unwrap();
        assert_eq!(inst.train.len(), 8);

        let m = small_manifest(&c, Task::Collective);
        let inst = task_instances(&c, gold, &m, n).unwrap();
        assert_eq!(inst.train.len(), arg_count(&m.train));

        let m = small_manifest(&c, Task::JointCollectiveProperty);
        let inst = task_instances(&c, gold, &m, n).unwrap();
        let InstanceFile::Tokens(blocks) = &inst.train else { panic!() };
        assert!(blocks.iter().all(|b| b.labels.iter().all(|l| [FIRST, SECOND, "OUT"].contains(&l.as_str()))));

        let m = small_manifest(&c, Task::TypeOfBoth);
        let inst = task_instances(&c, gold, &m, n).unwrap();
        assert_eq!(inst.train.len(), 2 * arg_count(&m.train));
        assert_eq!(inst.tests.len(), 3);
        assert_eq!(inst.tests[2].1.len(), inst.tests[0].1.len() + inst.tests[1].1.len());
        let InstanceFile::Sequence(items) = &inst.tests[0].1 else { panic!() };
        assert_eq!(items[0].text, "they bring crime");
        assert!(items[0].id.ends_with("#justification"));
    }

    #[test]
    fn gold_predictions_score_perfectly() {
        let c = synthetic(20, 0);
        let gold = c.layer("gold").unwrap();
        let n = Normalizer::bundled();
        for task in Task::ALL {
            let m = small_manifest(&c, task);
            let inst = task_instances(&c, gold, &m, n).unwrap();
            let preds = gold_predictions(&inst);
            let scores = score_predictions(&c, gold, &m, &preds, n).unwrap();
            let expected_rows = match task {
                Task::JointCollectiveProperty | Task::JointJustificationConclusion | Task::TypeOfBoth => {
                    if task == Task::TypeOfBoth { 3 } else { 2 }
                }
                _ => 1,
            };
            assert_eq!(scores.len(), expected_rows, "{task}");
            for s in &scores {
                // property and pivot never occur in the synthetic data
                if s.row.starts_with("Property") || s.row.starts_with("Pivot") {
                    assert_eq!(s.prf.f1, 0.0);
                } else if s.per_class.is_some() {
                    // only two of three classes occur, so macro F1 is 2/3
                    assert!(s.prf.f1 > 0.3, "{task} {}", s.row);
                } else {
                    assert_eq!(s.prf.f1, 1.0, "{task} {}", s.row);
                }
            }
        }
    }

    #[test]
    fn coverage_errors() {
        let c = synthetic(20, 0);
        let gold = c.layer("gold").unwrap();
        let n = Normalizer::bundled();
        let m = small_manifest(&c, Task::Argumentative);
        let inst = task_instances(&c, gold, &m, n).unwrap();
        let mut preds = gold_predictions(&inst);
        preds.predictions.pop();
        assert!(matches!(score_predictions(&c, gold, &m, &preds, n), Err(Error::Coverage(_))));
        let mut preds = gold_predictions(&inst);
        preds.predictions.push(preds.predictions[0].clone());
        assert!(matches!(score_predictions(&c, gold, &m, &preds, n), Err(Error::Coverage(_))));
        let mut preds = gold_predictions(&inst);
        preds.predictions[0].label = Some("maybe".into());
        assert!(matches!(score_predictions(&c, gold, &m, &preds, n), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn prediction_file_round_trip() {
        let file = PredictionFile {
            manifest: Some("m.json".into()),
            predictions: vec![
                Prediction {
                    id: "a".into(),
                    labels: Some(vec!["IN".into(), "OUT".into()]),
                    label: None,
                },
                Prediction {
                    id: "b".into(),
                    labels: None,
                    label: Some("fact".into()),
                },
            ],
        };
        let mut buf = Vec::new();
        file.write(&mut buf).unwrap();
        assert_eq!(PredictionFile::read(&buf[..]).unwrap(), file);
        assert!(PredictionFile::read(&b"{\"id\":\"x\"}\n"[..]).is_err());
        assert!(PredictionFile::read(&b"{\"id\":\"x\",\"label\":\"a\",\"labels\":[]}\n"[..]).is_err());
    }

    #[test]
    fn names_parse() {
        for t in Task::ALL {
            assert_eq!(t.name().parse::<Task>().unwrap(), t);
        }
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("XL".parse::<Scheme>().unwrap(), Scheme::CrossLingual);
        assert!("bogus".parse::<Task>().is_err());
    }
}
