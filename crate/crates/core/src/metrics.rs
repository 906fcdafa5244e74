//! Evaluation metrics: target-class token scores, sequence-level macro and
//! per-class scores, run aggregation, and human-as-predictor baselines.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::agreement::{format_kappa, AgreementCategory};
use crate::error::{Error, Result};
use crate::model::{AnnotatedCorpus, AnnotationLayer, PropositionType};
use crate::plan::Task;
use crate::tokenize::{ranges_to_token_mask, tokenize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PRF {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl PRF {
    pub fn from_counts(tp: u64, fp: u64, fn_: u64) -> PRF {
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        PRF { precision, recall, f1 }
    }

    /// Unweighted mean of each field.
    pub fn mean(scores: &[PRF]) -> PRF {
        if scores.is_empty() {
            return PRF::default();
        }
        let n = scores.len() as f64;
        PRF {
            precision: scores.iter().map(|s| s.precision).sum::<f64>() / n,
            recall: scores.iter().map(|s| s.recall).sum::<f64>() / n,
            f1: scores.iter().map(|s| s.f1).sum::<f64>() / n,
        }
    }
}

fn check_lengths<T>(a: &[T], b: &[T]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Scores the IN class over per-token membership masks.
pub fn token_prf(gold_mask: &[bool], pred_mask: &[bool]) -> Result<PRF> {
    check_lengths(gold_mask, pred_mask)?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (&g, &p) in gold_mask.iter().zip(pred_mask) {
        match (g, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    Ok(PRF::from_counts(tp, fp, fn_))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Averaging<L> {
    TargetClass(L),
    Macro,
    PerClass,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SequenceScore<L> {
    Single(PRF),
    PerClass(Vec<(L, PRF)>),
}

impl<L> SequenceScore<L> {
    pub fn single(&self) -> Option<PRF> {
        match self {
            SequenceScore::Single(p) => Some(*p),
            SequenceScore::PerClass(_) => None,
        }
    }
}

fn one_vs_rest<L: PartialEq>(gold: &[L], pred: &[L], class: &L) -> PRF {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        match (g == class, p == class) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    PRF::from_counts(tp, fp, fn_)
}

/// Sequence-level scores over a label domain. Macro averages the per-class
/// precision, recall and F1 of every domain class, including classes absent
/// from both vectors.
pub fn sequence_prf<L: PartialEq + Clone + fmt::Debug>(
    gold: &[L],
    pred: &[L],
    domain: &[L],
    averaging: &Averaging<L>,
) -> Result<SequenceScore<L>> {
    check_lengths(gold, pred)?;
    if let Some(bad) = gold.iter().chain(pred).find(|l| !domain.contains(l)) {
        return Err(Error::UnknownLabel(format!("{bad:?}")));
    }
    match averaging {
        Averaging::TargetClass(c) => {
            if !domain.contains(c) {
                return Err(Error::UnknownLabel(format!("{c:?}")));
            }
            Ok(SequenceScore::Single(one_vs_rest(gold, pred, c)))
        }
        Averaging::Macro => {
            let per: Vec<PRF> = domain.iter().map(|c| one_vs_rest(gold, pred, c)).collect();
            Ok(SequenceScore::Single(PRF::mean(&per)))
        }
        Averaging::PerClass => Ok(SequenceScore::PerClass(
            domain.iter().map(|c| (c.clone(), one_vs_rest(gold, pred, c))).collect(),
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunAggregate {
    pub mean_f1: f64,
    /// Population standard deviation of the run F1s.
    pub std_f1: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub runs: Vec<PRF>,
}

pub fn aggregate_runs(runs: &[PRF]) -> Result<RunAggregate> {
    if runs.is_empty() {
        return Err(Error::Empty("run list"));
    }
    let mean = PRF::mean(runs);
    let var = runs.iter().map(|r| (r.f1 - mean.f1).powi(2)).sum::<f64>() / runs.len() as f64;
    Ok(RunAggregate {
        mean_f1: mean.f1,
        std_f1: var.sqrt(),
        mean_precision: mean.precision,
        mean_recall: mean.recall,
        runs: runs.to_vec(),
    })
}

/// Scores `layer_b` as if it were a model predicting `layer_a`, on the
/// tweets both layers annotate. Spans are compared per word without the
/// overlap rule used for kappa.
pub fn human_baseline_f1(
    corpus: &AnnotatedCorpus,
    layer_a: &AnnotationLayer,
    layer_b: &AnnotationLayer,
    category: AgreementCategory,
) -> Result<PRF> {
    if corpus.shared(layer_a, layer_b).next().is_none() {
        return Err(Error::Empty("shared tweet subset"));
    }
    if let Some(span_cat) = category.span_category() {
        let (mut gold, mut pred) = (Vec::new(), Vec::new());
        for (tweet, a, b) in corpus.shared(layer_a, layer_b) {
            let tokens = tokenize(&tweet.raw_text);
            gold.extend(ranges_to_token_mask(&a.category_ranges(span_cat), &tokens));
            pred.extend(ranges_to_token_mask(&b.category_ranges(span_cat), &tokens));
        }
        return token_prf(&gold, &pred);
    }
    if let Some(premise) = category.premise() {
        let (gold, pred): (Vec<_>, Vec<_>) = corpus
            .shared(layer_a, layer_b)
            .filter_map(|(_, a, b)| Some((a.premise_type(premise)?, b.premise_type(premise)?)))
            .unzip();
        let score = sequence_prf(&gold, &pred, &PropositionType::ALL, &Averaging::Macro)?;
        return Ok(score.single().unwrap_or_default());
    }
    let (gold, pred): (Vec<bool>, Vec<bool>) = corpus
        .shared(layer_a, layer_b)
        .map(|(_, a, b)| (a.argumentative, b.argumentative))
        .unzip();
    let score = sequence_prf(&gold, &pred, &[false, true], &Averaging::TargetClass(true))?;
    Ok(score.single().unwrap_or_default())
}

/// Score of one prediction file for one report row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunScore {
    pub task: Task,
    pub row: String,
    pub seed: u64,
    pub fraction: f64,
    pub prf: PRF,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class: Option<BTreeMap<PropositionType, PRF>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    /// Model or model-and-scheme label of a column group.
    pub setting: String,
    pub task: Task,
    pub row: String,
    pub fraction: f64,
    pub seeds: Vec<u64>,
    pub aggregate: RunAggregate,
    /// Mean per-class F1 across runs, for type tasks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class_f1: Option<BTreeMap<PropositionType, f64>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub entries: Vec<ReportEntry>,
}

const COMPONENT_ROWS: [&str; 12] = [
    "Arg./Non-Arg.",
    "Justification",
    "Conclusion",
    "Type of Just.",
    "Type of Conc.",
    "Collective",
    "Property",
    "Pivot",
    "Collective (joint)",
    "Property (joint)",
    "Justification (joint)",
    "Conclusion (joint)",
];

const TYPE_BOTH_ROWS: [&str; 3] = ["Type of Just", "Type of Conc", "Type of both"];
const TYPE_SINGLE_ROWS: [&str; 2] = ["Type of Just.", "Type of Conc."];

/// `.89±.02` style cell.
pub fn mean_std_cell(mean: f64, std: f64) -> String {
    format!("{}±{}", format_kappa(mean), format_kappa(std))
}

impl MetricsReport {
    /// Groups runs of one setting by (task, row, fraction), keeping
    /// first-seen order.
    pub fn from_runs(setting: &str, runs: &[RunScore]) -> Result<MetricsReport> {
        let mut groups: Vec<(Task, String, f64, Vec<&RunScore>)> = Vec::new();
        for run in runs {
            match groups
                .iter_mut()
                .find(|g| g.0 == run.task && g.1 == run.row && g.2 == run.fraction)
            {
                Some(g) => g.3.push(run),
                None => groups.push((run.task, run.row.clone(), run.fraction, vec![run])),
            }
        }
        let mut entries = Vec::with_capacity(groups.len());
        for (task, row, fraction, members) in groups {
            let prfs: Vec<PRF> = members.iter().map(|r| r.prf).collect();
            let per_class_f1 = members[0].per_class.as_ref().map(|_| {
                PropositionType::ALL
                    .into_iter()
                    .map(|t| {
                        let f1s: Vec<f64> = members
                            .iter()
                            .filter_map(|r| r.per_class.as_ref()?.get(&t).map(|p| p.f1))
                            .collect();
                        (t, f1s.iter().sum::<f64>() / f1s.len().max(1) as f64)
                    })
                    .collect()
            });
            entries.push(ReportEntry {
                setting: setting.to_string(),
                task,
                row,
                fraction,
                seeds: members.iter().map(|r| r.seed).collect(),
                aggregate: aggregate_runs(&prfs)?,
                per_class_f1,
            });
        }
        Ok(MetricsReport { entries })
    }

    pub fn extend(&mut self, other: MetricsReport) {
        self.entries.extend(other.entries);
    }

    fn settings(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.setting.as_str()) {
                out.push(&e.setting);
            }
        }
        out
    }

    fn find(&self, setting: &str, row: &str, both: bool) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| {
            e.setting == setting && e.row == row && e.fraction == 1.0 && (e.task == Task::TypeOfBoth) == both
        })
    }

    /// Rows of component tasks, a column triple F1/Pr/Rec per setting.
    /// Only full-data entries appear.
    pub fn render_component_scores(&self) -> String {
        let settings = self.settings();
        let mut lines = Vec::new();
        let mut header = format!("{:<22}", "");
        for s in &settings {
            header.push_str(&format!(" | {:<22}", s));
        }
        lines.push(header);
        let mut sub = format!("{:<22}", "");
        for _ in &settings {
            sub.push_str(&format!(" | {:>9} {:>5} {:>6}", "F1", "Pr", "Rec"));
        }
        lines.push(sub);
        for row in COMPONENT_ROWS {
            if !settings.iter().any(|s| self.find(s, row, false).is_some()) {
                continue;
            }
            let mut line = format!("{row:<22}");
            for s in &settings {
                match self.find(s, row, false) {
                    Some(e) => {
                        let a = &e.aggregate;
                        line.push_str(&format!(
                            " | {:>9} {:>5} {:>6}",
                            mean_std_cell(a.mean_f1, a.std_f1),
                            format_kappa(a.mean_precision),
                            format_kappa(a.mean_recall)
                        ));
                    }
                    None => line.push_str(&format!(" | {:>9} {:>5} {:>6}", "-", "-", "-")),
                }
            }
            lines.push(line);
        }
        lines.join("\n") + "\n"
    }

    /// Type rows with macro F1 and per-class F1 for F, V and P per setting.
    pub fn render_type_scores(&self) -> String {
        let settings = self.settings();
        let mut lines = Vec::new();
        let mut header = format!("{:<16}", "");
        for s in &settings {
            header.push_str(&format!(" | {:<27}", s));
        }
        lines.push(header);
        let mut sub = format!("{:<16}", "");
        for _ in &settings {
            sub.push_str(&format!(" | {:>9} {:>5} {:>5} {:>5}", "Macro", "F", "V", "P"));
        }
        lines.push(sub);
        let sections: [(&str, &[&str], bool); 2] = [
            ("trained with both kinds of premise", &TYPE_BOTH_ROWS, true),
            ("trained with one kind of premise", &TYPE_SINGLE_ROWS, false),
        ];
        for (title, rows, both) in sections {
            let present: Vec<&&str> = rows
                .iter()
                .filter(|r| settings.iter().any(|s| self.find(s, r, both).is_some()))
                .collect();
            if present.is_empty() {
                continue;
            }
            lines.push(format!("-- {title}"));
            for row in present {
                let mut line = format!("{row:<16}");
                for s in &settings {
                    match self.find(s, row, both) {
                        Some(e) => {
                            let pc = |t| {
                                e.per_class_f1
                                    .as_ref()
                                    .and_then(|m| m.get(&t))
                                    .map_or("-".to_string(), |v| format_kappa(*v))
                            };
                            line.push_str(&format!(
                                " | {:>9} {:>5} {:>5} {:>5}",
                                mean_std_cell(e.aggregate.mean_f1, e.aggregate.std_f1),
                                pc(PropositionType::Fact),
                                pc(PropositionType::Value),
                                pc(PropositionType::Policy)
                            ));
                        }
                        None => line.push_str(&format!(" | {:>9} {:>5} {:>5} {:>5}", "-", "-", "-", "-")),
                    }
                }
                lines.push(line);
            }
        }
        lines.join("\n") + "\n"
    }
}

/// Confusion-matrix scores computed by enumerating every (gold, pred) pair
/// into a full table first. Independent of [`one_vs_rest`].
pub fn prf_by_confusion<L: PartialEq>(gold: &[L], pred: &[L], domain: &[L], class: usize) -> PRF {
    let k = domain.len();
    let mut m = vec![vec![0u64; k]; k];
    for (g, p) in gold.iter().zip(pred) {
        let gi = domain.iter().position(|d| d == g).unwrap();
        let pi = domain.iter().position(|d| d == p).unwrap();
        m[gi][pi] += 1;
    }
    let tp = m[class][class];
    let predicted: u64 = (0..k).map(|g| m[g][class]).sum();
    let actual: u64 = m[class].iter().sum();
    PRF::from_counts(tp, predicted - tp, actual - tp)
}
