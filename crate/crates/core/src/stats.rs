//! Per-language corpus statistics: argumentativeness, collective/property
//! pairs, pivots, and proposition-type distributions of both premises.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AnnotatedCorpus, AnnotationLayer, Language, PremiseKind, PropositionType};

/// Percentages of premises of one kind labelled with each type.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TypeDistribution {
    pub fact: f64,
    pub policy: f64,
    pub value: f64,
}

impl TypeDistribution {
    pub fn get(&self, t: PropositionType) -> f64 {
        match t {
            PropositionType::Fact => self.fact,
            PropositionType::Policy => self.policy,
            PropositionType::Value => self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LanguageStats {
    pub tweets: usize,
    pub argumentative: usize,
    pub pct_non_argumentative: f64,
    pub pct_with_collective_property_pair: f64,
    pub pct_with_pivot: f64,
    pub justification: TypeDistribution,
    pub conclusion: TypeDistribution,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub languages: BTreeMap<Language, LanguageStats>,
}

#[derive(Default)]
struct Counts {
    tweets: usize,
    argumentative: usize,
    pair: usize,
    pivot: usize,
    types: BTreeMap<(PremiseKind, PropositionType), usize>,
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

impl Counts {
    fn distribution(&self, kind: PremiseKind) -> TypeDistribution {
        let c = |t| self.types.get(&(kind, t)).copied().unwrap_or(0);
        let total: usize = PropositionType::ALL.iter().map(|&t| c(t)).sum();
        TypeDistribution {
            fact: pct(c(PropositionType::Fact), total),
            policy: pct(c(PropositionType::Policy), total),
            value: pct(c(PropositionType::Value), total),
        }
    }

    fn finish(&self) -> LanguageStats {
        LanguageStats {
            tweets: self.tweets,
            argumentative: self.argumentative,
            pct_non_argumentative: pct(self.tweets - self.argumentative, self.tweets),
            pct_with_collective_property_pair: pct(self.pair, self.tweets),
            pct_with_pivot: pct(self.pivot, self.tweets),
            justification: self.distribution(PremiseKind::Justification),
            conclusion: self.distribution(PremiseKind::Conclusion),
        }
    }
}

/// Component percentages are over all tweets of a language; type
/// distributions over its argumentative tweets.
pub fn corpus_stats(corpus: &AnnotatedCorpus, layer: &AnnotationLayer) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::Empty("corpus"));
    }
    let mut counts: BTreeMap<Language, Counts> = BTreeMap::new();
    for tweet in corpus.tweets() {
        let ann = layer
            .get(&tweet.id)
            .ok_or_else(|| Error::MissingAnnotation(tweet.id.clone()))?;
        let c = counts.entry(tweet.language).or_default();
        c.tweets += 1;
        if !ann.argumentative {
            continue;
        }
        c.argumentative += 1;
        if ann.collective.is_some() && ann.property.is_some() {
            c.pair += 1;
        }
        if ann.pivot.is_some() {
            c.pivot += 1;
        }
        for kind in [PremiseKind::Justification, PremiseKind::Conclusion] {
            if let Some(t) = ann.premise_type(kind) {
                *c.types.entry((kind, t)).or_default() += 1;
            }
        }
    }
    Ok(CorpusStats {
        languages: counts.into_iter().map(|(l, c)| (l, c.finish())).collect(),
    })
}

impl CorpusStats {
    pub fn render_component_table(&self) -> String {
        let mut out = format!("{:<4} | {:>7} | {:>20} | {:>6}\n", "", "Non-Arg", "Collective-Property", "Pivot");
        for (lang, s) in &self.languages {
            out.push_str(&format!(
                "{:<4} | {:>7.1} | {:>20.1} | {:>6.1}\n",
                lang.code().to_uppercase(),
                s.pct_non_argumentative,
                s.pct_with_collective_property_pair,
                s.pct_with_pivot
            ));
        }
        out
    }

    pub fn render_type_table(&self) -> String {
        let mut out = format!(
            "{:<4} | {:>17} | {:>17}\n{:<4} | {:>5} {:>5} {:>5} | {:>5} {:>5} {:>5}\n",
            "", "Justification", "Conclusion", "", "F", "P", "V", "F", "P", "V"
        );
        for (lang, s) in &self.languages {
            let (j, c) = (&s.justification, &s.conclusion);
            out.push_str(&format!(
                "{:<4} | {:>5.1} {:>5.1} {:>5.1} | {:>5.1} {:>5.1} {:>5.1}\n",
                lang.code().to_uppercase(),
                j.fact,
                j.policy,
                j.value,
                c.fact,
                c.policy,
                c.value
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArgumentAnnotation, Premise, Span, Tweet};

    fn premise(kind: PropositionType) -> Premise {
        Premise::new(Span::single(0, 1).unwrap(), kind)
    }

    #[test]
    fn single_full_tweet() {
        let mut c = AnnotatedCorpus::new();
        c.push_tweet(Tweet::new("1", Language::En, "ab cd").unwrap()).unwrap();
        c.annotate(
            "g",
            "1",
            ArgumentAnnotation::argumentative(premise(PropositionType::Fact), premise(PropositionType::Policy))
                .with_collective(Span::single(0, 1).unwrap())
                .with_property(Span::single(1, 2).unwrap())
                .with_pivot(Span::single(0, 1).unwrap(), Span::single(0, 1).unwrap()),
        )
        .unwrap();
        let s = corpus_stats(&c, c.layer("g").unwrap()).unwrap();
        let en = &s.languages[&Language::En];
        assert_eq!(en.pct_non_argumentative, 0.0);
        assert_eq!(en.pct_with_collective_property_pair, 100.0);
        assert_eq!(en.pct_with_pivot, 100.0);
        assert_eq!(en.justification.fact, 100.0);
        assert_eq!(en.conclusion.policy, 100.0);
    }

    #[test]
    fn mixed_counts_and_permutation_invariance() {
        let anns = [
            ArgumentAnnotation::non_argumentative(),
            ArgumentAnnotation::argumentative(premise(PropositionType::Fact), premise(PropositionType::Value))
                .with_collective(Span::single(0, 1).unwrap()),
            ArgumentAnnotation::argumentative(premise(PropositionType::Fact), premise(PropositionType::Policy))
                .with_collective(Span::single(0, 1).unwrap())
                .with_property(Span::single(1, 2).unwrap()),
            ArgumentAnnotation::argumentative(premise(PropositionType::Value), premise(PropositionType::Policy)),
        ];
        let build = |order: &[usize]| {
            let mut c = AnnotatedCorpus::new();
            for &i in order {
                c.push_tweet(Tweet::new(i.to_string(), Language::Es, "xy").unwrap()).unwrap();
                c.annotate("g", &i.to_string(), anns[i].clone()).unwrap();
            }
            corpus_stats(&c, c.layer("g").unwrap()).unwrap()
        };
        let s = build(&[0, 1, 2, 3]);
        let es = &s.languages[&Language::Es];
        assert_eq!(es.pct_non_argumentative, 25.0);
        assert_eq!(es.pct_with_collective_property_pair, 25.0);
        assert!((es.justification.fact - 200.0 / 3.0).abs() < 1e-9);
        let sum = es.conclusion.fact + es.conclusion.policy + es.conclusion.value;
        assert!((sum - 100.0).abs() < 1e-9);
        assert_eq!(build(&[3, 1, 0, 2]), s);
        assert!(s.render_component_table().contains("ES   |    25.0"));
        assert!(s.render_type_table().lines().count() == 3);
    }

    #[test]
    fn errors() {
        let c = AnnotatedCorpus::new();
        assert!(corpus_stats(&c, &AnnotationLayer::new("g")).is_err());
        let mut c = AnnotatedCorpus::new();
        c.push_tweet(Tweet::new("1", Language::En, "x").unwrap()).unwrap();
        assert!(matches!(
            corpus_stats(&c, &AnnotationLayer::new("g")),
            Err(Error::MissingAnnotation(_))
        ));
    }
}
