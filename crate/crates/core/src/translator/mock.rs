//! Deterministic stand-in for a translation model.
//!
//! Each language pair carries an ordered list of variants. A variant rewrites
//! tokens through a substitution table and may then reorder them. A request with
//! `num_return = k` receives the first `k` variants, scored `0, -1, -2, ...`.
//! Unconfigured pairs answer 422, like a server that lacks the language.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::textkit::tokenize_raw;
use crate::transport::TransportError;

use super::protocol::{Hypothesis, TranslateRequest, TranslateResponse, Translator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reorder {
    #[default]
    None,
    Reverse,
    /// Swap tokens 0/1, 2/3, ...
    SwapPairs,
    /// Move the first token to the end.
    RotateLeft,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    /// Token substitutions. A replacement may hold several words or be empty
    /// (deletes the token).
    #[serde(default)]
    pub map: BTreeMap<String, String>,
    #[serde(default)]
    pub reorder: Reorder,
}

impl Variant {
    pub fn identity() -> Self {
        Variant::default()
    }

    pub fn apply(&self, text: &str) -> String {
        let mut out: Vec<String> = Vec::new();
        for tok in tokenize_raw(text).iter() {
            match self.map.get(tok) {
                Some(rep) => out.extend(rep.split_whitespace().map(str::to_owned)),
                None => out.push(tok.clone()),
            }
        }
        match self.reorder {
            Reorder::None => {}
            Reorder::Reverse => out.reverse(),
            Reorder::SwapPairs => out.chunks_mut(2).for_each(|c| c.reverse()),
            Reorder::RotateLeft => {
                if !out.is_empty() {
                    out.rotate_left(1)
                }
            }
        }
        out.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairTable {
    pub src: String,
    pub tgt: String,
    #[serde(default)]
    pub variants: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockTables {
    pub pairs: Vec<PairTable>,
}

impl MockTables {
    /// One identity variant for every ordered pair of `langs`, including
    /// same-language pairs.
    pub fn identity(langs: &[&str]) -> Self {
        let mut pairs = Vec::new();
        for &src in langs {
            for &tgt in langs {
                pairs.push(PairTable {
                    src: src.into(),
                    tgt: tgt.into(),
                    variants: vec![Variant::identity()],
                });
            }
        }
        MockTables { pairs }
    }

    pub fn set_pair(&mut self, src: &str, tgt: &str, variants: Vec<Variant>) {
        self.pairs.retain(|p| !(p.src == src && p.tgt == tgt));
        self.pairs.push(PairTable {
            src: src.into(),
            tgt: tgt.into(),
            variants,
        });
    }
}

#[derive(Debug, Clone, Default)]
pub struct MockTranslator {
    tables: BTreeMap<(String, String), Vec<Variant>>,
}

impl MockTranslator {
    pub fn new(tables: MockTables) -> Self {
        let tables = tables
            .pairs
            .into_iter()
            .map(|p| ((p.src, p.tgt), p.variants))
            .collect();
        MockTranslator { tables }
    }

    pub fn from_json(json: &str) -> serde_json::Result<Self> {
        Ok(Self::new(serde_json::from_str(json)?))
    }
}

impl Translator for MockTranslator {
    fn label(&self) -> String {
        "mock".into()
    }

    fn translate(&self, req: &TranslateRequest) -> Result<TranslateResponse, TransportError> {
        let variants = self
            .tables
            .get(&(req.src_lang.clone(), req.tgt_lang.clone()))
            .ok_or_else(|| TransportError::Status {
                code: 422,
                body: format!("unsupported language pair {}->{}", req.src_lang, req.tgt_lang),
            })?;
        let results = req
            .texts
            .iter()
            .map(|text| {
                variants
                    .iter()
                    .take(req.num_return)
                    .enumerate()
                    .map(|(i, v)| Hypothesis {
                        text: v.apply(text),
                        score: -(i as f64),
                    })
                    .collect()
            })
            .collect();
        Ok(TranslateResponse { results })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_application() {
        let v = Variant {
            map: BTreeMap::from([("cat".into(), "small feline".into()), ("the".into(), "".into())]),
            reorder: Reorder::None,
        };
        assert_eq!(v.apply("The cat sat."), "small feline sat .");
        let r = Variant {
            reorder: Reorder::SwapPairs,
            ..Default::default()
        };
        assert_eq!(r.apply("a b c d e"), "b a d c e");
        let r = Variant {
            reorder: Reorder::RotateLeft,
            ..Default::default()
        };
        assert_eq!(r.apply("a b c"), "b c a");
        assert_eq!(r.apply(""), "");
    }

    #[test]
    fn tables_parse_from_json() {
        let json = r#"{"pairs":[{"src":"en","tgt":"en","variants":[{"map":{"a":"b"}},{"reorder":"reverse"}]}]}"#;
        let mock = MockTranslator::from_json(json).unwrap();
        let req = TranslateRequest {
            src_lang: "en".into(),
            tgt_lang: "en".into(),
            texts: vec!["a c".into()],
            beam_size: 10,
            num_return: 5,
            no_repeat_ngram: 3,
            block_source_overlap_ratio: Some(0.5),
        };
        let resp = mock.translate(&req).unwrap();
        assert_eq!(resp.results[0].len(), 2);
        assert_eq!(resp.results[0][0].text, "b c");
        assert_eq!(resp.results[0][1].text, "c a");
        resp.validate(&req).unwrap();
        let missing = TranslateRequest {
            tgt_lang: "fr".into(),
            ..req
        };
        assert!(matches!(mock.translate(&missing), Err(TransportError::Status { code: 422, .. })));
        assert!(MockTranslator::from_json(r#"{"pairs":[{"src":"en"}]}"#).is_err());
    }
}
