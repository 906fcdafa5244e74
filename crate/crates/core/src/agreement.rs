//! Inter-annotator agreement.
//!
//! Argumentativeness and proposition types are compared per tweet; span
//! categories per word, after applying the 50% overlap rule to each
//! tweet's pair of masks and pooling every word of every shared tweet into
//! one kappa.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnnotatedCorpus, AnnotationLayer, PremiseKind, PropositionType, SpanCategory};
use crate::tokenize::{ranges_to_token_mask, tokenize};

/// Cohen's kappa, or `Undefined` when chance agreement is 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kappa {
    Value(f64),
    Undefined,
}

impl Kappa {
    pub fn value(self) -> Option<f64> {
        match self {
            Kappa::Value(v) => Some(v),
            Kappa::Undefined => None,
        }
    }
}

impl fmt::Display for Kappa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kappa::Value(v) => write!(f, "{v:.2}"),
            Kappa::Undefined => f.write_str("undef"),
        }
    }
}

impl Serialize for Kappa {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Kappa::Value(v) => s.serialize_f64(*v),
            Kappa::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Kappa {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Kappa::Value(v)),
            Raw::Str(s) if s == "undefined" => Ok(Kappa::Undefined),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("bad kappa `{s}`"))),
        }
    }
}

/// Square contingency table between two annotators over a label domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contingency {
    counts: Vec<Vec<u64>>,
}

impl Contingency {
    pub fn new(domain_size: usize) -> Self {
        Contingency {
            counts: vec![vec![0; domain_size]; domain_size],
        }
    }

    pub fn add(&mut self, a: usize, b: usize) {
        self.counts[a][b] += 1;
    }

    pub fn merge(&mut self, other: &Contingency) {
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn kappa(&self) -> Kappa {
        let n = self.total() as f64;
        if n == 0.0 {
            return Kappa::Undefined;
        }
        let k = self.counts.len();
        let observed = (0..k).map(|i| self.counts[i][i]).sum::<u64>() as f64 / n;
        let chance: f64 = (0..k)
            .map(|c| {
                let row: u64 = self.counts[c].iter().sum();
                let col: u64 = self.counts.iter().map(|r| r[c]).sum();
                (row as f64 / n) * (col as f64 / n)
            })
            .sum();
        if (1.0 - chance).abs() < f64::EPSILON {
            return Kappa::Undefined;
        }
        Kappa::Value((observed - chance) / (1.0 - chance))
    }
}

fn contingency<L: PartialEq + fmt::Debug>(a: &[L], b: &[L], domain: &[L]) -> Result<Contingency> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::Empty("label vectors"));
    }
    let index = |l: &L| {
        domain
            .iter()
            .position(|d| d == l)
            .ok_or_else(|| Error::UnknownLabel(format!("{l:?}")))
    };
    let mut table = Contingency::new(domain.len());
    for (x, y) in a.iter().zip(b) {
        table.add(index(x)?, index(y)?);
    }
    Ok(table)
}

/// Cohen's kappa between two label vectors over a finite domain.
pub fn cohen_kappa<L: PartialEq + fmt::Debug>(labels_a: &[L], labels_b: &[L], label_domain: &[L]) -> Result<Kappa> {
    Ok(contingency(labels_a, labels_b, label_domain)?.kappa())
}

/// Result of comparing two annotators' masks for one category on one tweet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Harmonized {
    pub mask_a: Vec<bool>,
    pub mask_b: Vec<bool>,
    pub matched: bool,
}

/// Applies the 50% rule: if at least half of the words of the smaller
/// component are also marked by the other annotator, both annotators are
/// credited with exactly the smaller component.
pub fn harmonize_spans(mask_a: &[bool], mask_b: &[bool]) -> Result<Harmonized> {
    if mask_a.len() != mask_b.len() {
        return Err(Error::LengthMismatch {
            left: mask_a.len(),
            right: mask_b.len(),
        });
    }
    let count_a = mask_a.iter().filter(|&&m| m).count();
    let count_b = mask_b.iter().filter(|&&m| m).count();
    if count_a == 0 && count_b == 0 {
        return Ok(Harmonized {
            mask_a: mask_a.to_vec(),
            mask_b: mask_b.to_vec(),
            matched: true,
        });
    }
    let smaller = if count_b < count_a { mask_b } else { mask_a };
    let smaller_count = count_a.min(count_b);
    let overlap = mask_a.iter().zip(mask_b).filter(|(&x, &y)| x && y).count();
    if smaller_count > 0 && 2 * overlap >= smaller_count {
        return Ok(Harmonized {
            mask_a: smaller.to_vec(),
            mask_b: smaller.to_vec(),
            matched: true,
        });
    }
    Ok(Harmonized {
        mask_a: mask_a.to_vec(),
        mask_b: mask_b.to_vec(),
        matched: false,
    })
}

/// Report columns, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AgreementCategory {
    Argumentative,
    Collective,
    Property,
    Pivot,
    Justification,
    Conclusion,
    TypeOfConclusion,
    TypeOfJustification,
}

impl AgreementCategory {
    pub const ALL: [AgreementCategory; 8] = [
        AgreementCategory::Argumentative,
        AgreementCategory::Collective,
        AgreementCategory::Property,
        AgreementCategory::Pivot,
        AgreementCategory::Justification,
        AgreementCategory::Conclusion,
        AgreementCategory::TypeOfConclusion,
        AgreementCategory::TypeOfJustification,
    ];

    pub fn header(self) -> &'static str {
        match self {
            AgreementCategory::Argumentative => "Argumentative",
            AgreementCategory::Collective => "Collective",
            AgreementCategory::Property => "Property",
            AgreementCategory::Pivot => "Pivot",
            AgreementCategory::Justification => "Justif.",
            AgreementCategory::Conclusion => "Concl.",
            AgreementCategory::TypeOfConclusion => "Type of Conc.",
            AgreementCategory::TypeOfJustification => "Type of Just.",
        }
    }

    pub fn span_category(self) -> Option<SpanCategory> {
        match self {
            AgreementCategory::Collective => Some(SpanCategory::Collective),
            AgreementCategory::Property => Some(SpanCategory::Property),
            AgreementCategory::Pivot => Some(SpanCategory::Pivot),
            AgreementCategory::Justification => Some(SpanCategory::Justification),
            AgreementCategory::Conclusion => Some(SpanCategory::Conclusion),
            _ => None,
        }
    }

    pub fn premise(self) -> Option<PremiseKind> {
        match self {
            AgreementCategory::TypeOfJustification => Some(PremiseKind::Justification),
            AgreementCategory::TypeOfConclusion => Some(PremiseKind::Conclusion),
            _ => None,
        }
    }
}

impl std::str::FromStr for AgreementCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        AgreementCategory::ALL
            .into_iter()
            .find(|c| format!("{c:?}").to_lowercase() == norm)
            .ok_or_else(|| Error::UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoryAgreement {
    pub kappa: Kappa,
    /// Tweets compared for per-tweet categories, words for span categories.
    pub support: usize,
}

/// Harmonized per-word masks of both layers for one span category, one
/// entry per shared tweet in corpus order.
pub fn harmonized_masks(
    corpus: &AnnotatedCorpus,
    layer_a: &AnnotationLayer,
    layer_b: &AnnotationLayer,
    category: SpanCategory,
) -> Result<Vec<(String, Harmonized)>> {
    corpus
        .shared(layer_a, layer_b)
        .map(|(tweet, a, b)| {
            let tokens = tokenize(&tweet.raw_text);
            let mask_a = ranges_to_token_mask(&a.category_ranges(category), &tokens);
            let mask_b = ranges_to_token_mask(&b.category_ranges(category), &tokens);
            Ok((tweet.id.clone(), harmonize_spans(&mask_a, &mask_b)?))
        })
        .collect()
}

const BINARY: [bool; 2] = [false, true];

pub fn category_agreement(
    corpus: &AnnotatedCorpus,
    layer_a: &AnnotationLayer,
    layer_b: &AnnotationLayer,
    category: AgreementCategory,
) -> Result<CategoryAgreement> {
    if corpus.shared(layer_a, layer_b).next().is_none() {
        return Err(Error::Empty("shared tweet subset"));
    }
    if let Some(span_cat) = category.span_category() {
        let mut table = Contingency::new(2);
        for (_, h) in harmonized_masks(corpus, layer_a, layer_b, span_cat)? {
            for (x, y) in h.mask_a.iter().zip(&h.mask_b) {
                table.add(usize::from(*x), usize::from(*y));
            }
        }
        let support = table.total() as usize;
        return Ok(CategoryAgreement {
            kappa: table.kappa(),
            support,
        });
    }
    if let Some(premise) = category.premise() {
        let (a, b): (Vec<PropositionType>, Vec<PropositionType>) = corpus
            .shared(layer_a, layer_b)
            .filter_map(|(_, x, y)| Some((x.premise_type(premise)?, y.premise_type(premise)?)))
            .unzip();
        if a.is_empty() {
            return Ok(CategoryAgreement {
                kappa: Kappa::Undefined,
                support: 0,
            });
        }
        return Ok(CategoryAgreement {
            kappa: cohen_kappa(&a, &b, &PropositionType::ALL)?,
            support: a.len(),
        });
    }
    let (a, b): (Vec<bool>, Vec<bool>) = corpus
        .shared(layer_a, layer_b)
        .map(|(_, x, y)| (x.argumentative, y.argumentative))
        .unzip();
    Ok(CategoryAgreement {
        kappa: cohen_kappa(&a, &b, &BINARY)?,
        support: a.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub annotator_a: String,
    pub annotator_b: String,
    pub shared_tweets: usize,
    pub categories: BTreeMap<AgreementCategory, CategoryAgreement>,
}

impl AgreementReport {
    pub fn kappa(&self, category: AgreementCategory) -> Kappa {
        self.categories
            .get(&category)
            .map_or(Kappa::Undefined, |c| c.kappa)
    }

    /// Aligned two-row text table: headers, then kappa values.
    pub fn render_table(&self) -> String {
        let mut header = format!("{:<8}", "");
        let mut row = format!("{:<8}", "kappa");
        let mut support = format!("{:<8}", "support");
        for cat in AgreementCategory::ALL {
            let h = cat.header();
            let w = h.len().max(7);
            let value = match self.kappa(cat) {
                Kappa::Value(v) => format_kappa(v),
                Kappa::Undefined => "undef".to_string(),
            };
            let n = self.categories.get(&cat).map_or(0, |c| c.support);
            header.push_str(&format!(" | {h:>w$}"));
            row.push_str(&format!(" | {value:>w$}"));
            support.push_str(&format!(" | {n:>w$}"));
        }
        format!("{header}\n{row}\n{support}\n")
    }
}

/// Two decimals without the leading zero, as in published tables.
pub fn format_kappa(v: f64) -> String {
    let s = format!("{v:.2}");
    if let Some(rest) = s.strip_prefix("0.") {
        format!(".{rest}")
    } else if let Some(rest) = s.strip_prefix("-0.") {
        format!("-.{rest}")
    } else {
        s
    }
}

pub fn agreement_report(
    corpus: &AnnotatedCorpus,
    layer_a: &AnnotationLayer,
    layer_b: &AnnotationLayer,
) -> Result<AgreementReport> {
    let mut categories = BTreeMap::new();
    for cat in AgreementCategory::ALL {
        categories.insert(cat, category_agreement(corpus, layer_a, layer_b, cat)?);
    }
    Ok(AgreementReport {
        annotator_a: layer_a.annotator_id.clone(),
        annotator_b: layer_b.annotator_id.clone(),
        shared_tweets: corpus.shared(layer_a, layer_b).count(),
        categories,
    })
}

/// Kappa over the explicit concatenation of two label vectors, counted the
/// slow way. Kept independent of [`Contingency`] for cross-checking.
pub fn kappa_by_enumeration<L: PartialEq + Eq + Hash + Clone>(a: &[L], b: &[L], domain: &[L]) -> Option<f64> {
    let n = a.len() as f64;
    let mut agree = 0.0;
    for i in 0..a.len() {
        if a[i] == b[i] {
            agree += 1.0;
        }
    }
    let p_o = agree / n;
    let mut p_e = 0.0;
    for c in domain {
        let pa = a.iter().filter(|x| *x == c).count() as f64 / n;
        let pb = b.iter().filter(|x| *x == c).count() as f64 / n;
        p_e += pa * pb;
    }
    if p_e == 1.0 {
        None
    } else {
        Some((p_o - p_e) / (1.0 - p_e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArgumentAnnotation, Language, Premise, Span, Tweet};
    use proptest::prelude::*;

    #[test]
    fn kappa_examples() {
        assert_eq!(cohen_kappa(&[0, 1, 1, 0], &[0, 1, 1, 0], &[0, 1]).unwrap(), Kappa::Value(1.0));
        assert_eq!(cohen_kappa(&[1, 1, 0, 0], &[1, 0, 1, 0], &[0, 1]).unwrap(), Kappa::Value(0.0));
        assert_eq!(cohen_kappa(&[0, 0, 0], &[0, 0, 0], &[0, 1]).unwrap(), Kappa::Undefined);
        assert!(matches!(cohen_kappa(&[0], &[0, 1], &[0, 1]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(cohen_kappa(&[0, 2], &[0, 1], &[0, 1]), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn worked_example_damage() {
        // "the damage illegals do" vs "damage"
        let a = [true, true, true, true];
        let b = [false, true, false, false];
        let h = harmonize_spans(&a, &b).unwrap();
        assert!(h.matched);
        assert_eq!(h.mask_a, b);
        assert_eq!(h.mask_b, b);
    }

    #[test]
    fn harmonize_half_overlap_is_inclusive() {
        let mut a = vec![false; 10];
        let mut b = vec![false; 10];
        a[1..=4].iter_mut().for_each(|x| *x = true);
        b[3..=8].iter_mut().for_each(|x| *x = true);
        let h = harmonize_spans(&a, &b).unwrap();
        assert!(h.matched);
        assert_eq!(h.mask_a, a);
        assert_eq!(h.mask_b, a);
        // one of four: below half
        let mut c = vec![false; 10];
        c[4..=9].iter_mut().for_each(|x| *x = true);
        let h = harmonize_spans(&a, &c).unwrap();
        assert!(!h.matched);
        assert_eq!(h.mask_b, c);
    }

    #[test]
    fn harmonize_edge_cases() {
        let h = harmonize_spans(&[true, false], &[false, true]).unwrap();
        assert!(!h.matched);
        let h = harmonize_spans(&[false, false], &[false, false]).unwrap();
        assert!(h.matched);
        // one side empty: smaller component has no words, no match
        let h = harmonize_spans(&[true, false], &[false, false]).unwrap();
        assert!(!h.matched);
        assert!(harmonize_spans(&[true], &[true, false]).is_err());
    }

    fn fixture() -> AnnotatedCorpus {
        let mut c = AnnotatedCorpus::new();
        let texts = [
            "they bring crime so deport them all",
            "no to camps",
            "we do not want more refugees here",
        ];
        for (i, t) in texts.iter().enumerate() {
            c.push_tweet(Tweet::new(i.to_string(), Language::En, *t).unwrap()).unwrap();
        }
        let p = |s, e, k| Premise::new(Span::single(s, e).unwrap(), k);
        use PropositionType::*;
        c.annotate(
            "a",
            "0",
            ArgumentAnnotation::argumentative(p(0, 16, Fact), p(20, 35, Policy))
                .with_collective(Span::single(0, 4).unwrap())
                .with_property(Span::single(5, 16).unwrap()),
        )
        .unwrap();
        c.annotate(
            "b",
            "0",
            ArgumentAnnotation::argumentative(p(0, 19, Fact), p(20, 35, Policy))
                .with_collective(Span::single(0, 4).unwrap())
                .with_property(Span::single(11, 16).unwrap()),
        )
        .unwrap();
        c.annotate("a", "1", ArgumentAnnotation::non_argumentative()).unwrap();
        c.annotate("b", "1", ArgumentAnnotation::argumentative(p(0, 2, Value), p(3, 11, Policy)))
            .unwrap();
        c.annotate("a", "2", ArgumentAnnotation::argumentative(p(0, 33, Value), p(0, 33, Value)))
            .unwrap();
        c.annotate("b", "2", ArgumentAnnotation::argumentative(p(0, 33, Fact), p(0, 33, Value)))
            .unwrap();
        c
    }

    #[test]
    fn identical_layers_give_perfect_report() {
        let c = fixture();
        let a = c.layer("a").unwrap();
        let r = agreement_report(&c, a, a).unwrap();
        for cat in AgreementCategory::ALL {
            let ca = r.categories[&cat];
            if ca.support > 0 {
                match ca.kappa {
                    Kappa::Value(v) => assert!((v - 1.0).abs() < 1e-12, "{cat:?}"),
                    // a single observed class on both sides
                    Kappa::Undefined => {}
                }
            }
        }
        assert_eq!(r.kappa(AgreementCategory::Argumentative), Kappa::Value(1.0));
    }

    #[test]
    fn pooled_equals_concatenated_oracle() {
        let c = fixture();
        let (a, b) = (c.layer("a").unwrap(), c.layer("b").unwrap());
        for cat in SpanCategory::ALL {
            let (mut xa, mut xb) = (Vec::new(), Vec::new());
            for (_, h) in harmonized_masks(&c, a, b, cat).unwrap() {
                xa.extend(h.mask_a);
                xb.extend(h.mask_b);
            }
            let agreement_cat = AgreementCategory::ALL
                .into_iter()
                .find(|x| x.span_category() == Some(cat))
                .unwrap();
            let got = category_agreement(&c, a, b, agreement_cat).unwrap();
            assert_eq!(got.support, xa.len());
            match (got.kappa, kappa_by_enumeration(&xa, &xb, &[false, true])) {
                (Kappa::Value(x), Some(y)) => assert!((x - y).abs() < 1e-12),
                (Kappa::Undefined, None) => {}
                other => panic!("{cat:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn fixture_values_by_contingency() {
        let c = fixture();
        let (a, b) = (c.layer("a").unwrap(), c.layer("b").unwrap());
        // argumentative: a = [T,F,T], b = [T,T,T]; p_o = 2/3, p_e = 2/3*1 + 1/3*0 = 2/3
        assert_eq!(
            category_agreement(&c, a, b, AgreementCategory::Argumentative).unwrap().kappa,
            Kappa::Value(0.0)
        );
        // type of justification on tweets 0 and 2: a = [F,V], b = [F,F]
        // p_o = 1/2, p_e = (1/2)(1) + (1/2)(0) = 1/2 -> 0
        let tj = category_agreement(&c, a, b, AgreementCategory::TypeOfJustification).unwrap();
        assert_eq!(tj.support, 2);
        assert_eq!(tj.kappa, Kappa::Value(0.0));
        // property on tweet 0: a marks "bring crime", b marks "crime"; both reduce to "crime"
        let prop = category_agreement(&c, a, b, AgreementCategory::Property).unwrap();
        assert_eq!(prop.support, 7 + 3 + 7);
        assert_eq!(prop.kappa, Kappa::Value(1.0));
    }

    proptest! {
        #[test]
        fn kappa_symmetric_and_relabel_invariant(pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..40)) {
            let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let dom = [0, 1, 2];
            let k1 = cohen_kappa(&a, &b, &dom).unwrap();
            let k2 = cohen_kappa(&b, &a, &dom).unwrap();
            let relabel = |v: &[usize]| v.iter().map(|x| (x + 1) % 3).collect::<Vec<_>>();
            let k3 = cohen_kappa(&relabel(&a), &relabel(&b), &dom).unwrap();
            match (k1, k2, k3) {
                (Kappa::Value(x), Kappa::Value(y), Kappa::Value(z)) => {
                    prop_assert!((x - y).abs() < 1e-12 && (x - z).abs() < 1e-12);
                    prop_assert!((-1.0..=1.0 + 1e-12).contains(&x));
                }
                (Kappa::Undefined, Kappa::Undefined, Kappa::Undefined) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }

        #[test]
        fn harmonize_shrinks_and_is_idempotent(pairs in proptest::collection::vec(any::<(bool, bool)>(), 0..30)) {
            let a: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let h = harmonize_spans(&a, &b).unwrap();
            let count = |m: &[bool]| m.iter().filter(|&&x| x).count();
            prop_assert!(count(&h.mask_a) <= count(&a));
            prop_assert!(count(&h.mask_b) <= count(&b));
            let again = harmonize_spans(&h.mask_a, &h.mask_b).unwrap();
            prop_assert_eq!(&again.mask_a, &h.mask_a);
            prop_assert_eq!(&again.mask_b, &h.mask_b);
        }
    }
}
