//! Selection of source tweets from HatEval-style records.

use std::io::Read;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{Language, SourceFlags, Tweet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HatevalRecord {
    pub id: String,
    pub text: String,
    pub hate_speech: bool,
    pub targeted_individual: bool,
    pub aggressive: bool,
    pub language: Language,
}

impl HatevalRecord {
    fn flags(&self) -> SourceFlags {
        SourceFlags {
            hate_speech: self.hate_speech,
            targeted_individual: self.targeted_individual,
            aggressive: self.aggressive,
        }
    }
}

/// Keeps hateful, non-aggressive tweets not aimed at an individual, in input order.
pub fn filter_hateval(records: &[HatevalRecord]) -> Vec<Tweet> {
    records
        .iter()
        .filter(|r| r.hate_speech && !r.aggressive && !r.targeted_individual && !r.text.is_empty())
        .map(|r| Tweet {
            id: r.id.clone(),
            language: r.language,
            raw_text: r.text.clone(),
            source_flags: Some(r.flags()),
        })
        .collect()
}

#[derive(Deserialize)]
struct Row {
    id: String,
    text: String,
    #[serde(rename = "HS")]
    hs: u8,
    #[serde(rename = "TR")]
    tr: u8,
    #[serde(rename = "AG")]
    ag: u8,
}

/// Reads the shared-task release layout: a header row with `id`, `text`,
/// `HS`, `TR`, `AG` columns, flags as 0/1.
pub fn read_hateval<R: Read>(reader: R, delimiter: u8, language: Language) -> Result<Vec<HatevalRecord>> {
    let mut rdr = csv::ReaderBuilder::new().delimiter(delimiter).from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        let flag = |v: u8, name: &str| match v {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::Schema {
                line: i + 2,
                message: format!("{name} must be 0 or 1, got {v}"),
            }),
        };
        out.push(HatevalRecord {
            hate_speech: flag(row.hs, "HS")?,
            targeted_individual: flag(row.tr, "TR")?,
            aggressive: flag(row.ag, "AG")?,
            id: row.id,
            text: row.text,
            language,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(id: &str, hs: bool, tr: bool, ag: bool) -> HatevalRecord {
        HatevalRecord {
            id: id.into(),
            text: format!("text {id}"),
            hate_speech: hs,
            targeted_individual: tr,
            aggressive: ag,
            language: Language::En,
        }
    }

    #[test]
    fn rule() {
        let records = vec![
            rec("keep", true, false, false),
            rec("aggr", true, false, true),
            rec("target", true, true, false),
            rec("nohate", false, false, false),
            rec("keep2", true, false, false),
        ];
        let out = filter_hateval(&records);
        let ids: Vec<_> = out.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["keep", "keep2"]);
        assert!(out[0].source_flags.unwrap().hate_speech);
    }

    #[test]
    fn reads_release_csv() {
        let data = "id,text,HS,TR,AG\n1,\"hello, there\",1,0,0\n2,go home,1,0,1\n";
        let recs = read_hateval(data.as_bytes(), b',', Language::En).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].text, "hello, there");
        assert!(recs[1].aggressive);
        let bad = "id,text,HS,TR,AG\n1,x,2,0,0\n";
        assert!(read_hateval(bad.as_bytes(), b',', Language::En).is_err());
    }

    proptest! {
        #[test]
        fn subset_and_idempotent(flags in proptest::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 0..40)) {
            let records: Vec<_> = flags.iter().enumerate().map(|(i, &(h, t, a))| rec(&i.to_string(), h, t, a)).collect();
            let once = filter_hateval(&records);
            prop_assert!(once.iter().all(|t| records.iter().any(|r| r.id == t.id)));
            let again_input: Vec<_> = once.iter().map(|t| {
                let f = t.source_flags.unwrap();
                HatevalRecord { id: t.id.clone(), text: t.raw_text.clone(), hate_speech: f.hate_speech,
                    targeted_individual: f.targeted_individual, aggressive: f.aggressive, language: t.language }
            }).collect();
            prop_assert_eq!(filter_hateval(&again_input), once);
        }
    }
}
