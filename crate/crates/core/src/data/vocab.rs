use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{text, Document};
use crate::{Error, Result};

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
pub const CLS: u32 = 2;
pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";
pub const CLS_TOKEN: &str = "[CLS]";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    token_to_id: BTreeMap<String, u32>,
    id_to_token: Vec<String>,
    pub min_count: usize,
}

impl Vocab {
    fn with_reserved(min_count: usize) -> Self {
        let mut v = Vocab {
            token_to_id: BTreeMap::new(),
            id_to_token: Vec::new(),
            min_count,
        };
        for t in [PAD_TOKEN, UNK_TOKEN, CLS_TOKEN] {
            v.push(t.to_string());
        }
        v
    }

    fn push(&mut self, token: String) {
        let id = self.id_to_token.len() as u32;
        self.token_to_id.insert(token.clone(), id);
        self.id_to_token.push(token);
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    /// Id of `token`, or [`UNK`] when it is not in the vocabulary.
    pub fn id(&self, token: &str) -> u32 {
        self.token_to_id.get(token).copied().unwrap_or(UNK)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.id_to_token.iter().map(String::as_str)
    }

    /// One token per line, in id order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.id_to_token {
            s.push_str(t);
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut v = Vocab::with_reserved(1);
        for (i, line) in text.lines().enumerate() {
            let expected = v.id_to_token.get(i).map(String::as_str);
            match (i, expected) {
                (0..=2, Some(r)) if r == line => continue,
                (0..=2, _) => {
                    return Err(Error::Format {
                        line: i + 1,
                        msg: format!("reserved token {:?} expected", expected.unwrap_or("")),
                    })
                }
                _ => {}
            }
            if line.is_empty() || v.token_to_id.contains_key(line) {
                return Err(Error::Format {
                    line: i + 1,
                    msg: format!("empty or duplicate token {line:?}"),
                });
            }
            v.push(line.to_string());
        }
        Ok(v)
    }
}

/// Builds a vocabulary over every token of `corpus`. Tokens seen at least
/// `min_count` times get ids after the reserved ones, most frequent first and
/// alphabetical among equals.
pub fn build_vocab(corpus: &[Document], min_count: usize) -> Result<Vocab> {
    if corpus.is_empty() {
        return Err(Error::Data("cannot build a vocabulary from an empty corpus".into()));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        for tok in text::tokenize(&doc.text) {
            *counts.entry(tok).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count.max(1))
        .collect();
    // BTreeMap iteration is already alphabetical; a stable sort keeps that
    // order among equal counts.
    ranked.sort_by(|a, b| b.1.cmp(&a.1));
    let mut v = Vocab::with_reserved(min_count);
    for (tok, _) in ranked {
        if v.token_to_id.contains_key(&tok) {
            continue;
        }
        v.push(tok);
    }
    Ok(v)
}
