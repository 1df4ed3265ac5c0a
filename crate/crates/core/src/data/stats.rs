use alloc::collections::BTreeSet;

use super::{text, Document};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusStats {
    pub n_docs: usize,
    pub avg_words: f64,
    pub avg_sents: f64,
    pub n_classes: usize,
}

/// Mean token and sentence counts per document, before any truncation.
pub fn corpus_stats(docs: &[Document]) -> Result<CorpusStats> {
    if docs.is_empty() {
        return Err(Error::Data("corpus statistics need at least one document".into()));
    }
    let mut words = 0usize;
    let mut sents = 0usize;
    let mut classes = BTreeSet::new();
    for d in docs {
        words += text::tokenize(&d.text).len();
        sents += text::split_sentences(&d.text)?.len();
        classes.insert(d.label);
    }
    let n = docs.len() as f64;
    Ok(CorpusStats {
        n_docs: docs.len(),
        avg_words: words as f64 / n,
        avg_sents: sents as f64 / n,
        n_classes: classes.len(),
    })
}

impl core::fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "n_docs={} avg_words={:.2} avg_sents={:.2} n_classes={}",
            self.n_docs, self.avg_words, self.avg_sents, self.n_classes
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn single_document() {
        let s = corpus_stats(&[Document {
            label: 0,
            text: "a b. c.".to_string(),
        }])
        .unwrap();
        assert_eq!((s.avg_words, s.avg_sents, s.n_classes), (3.0, 2.0, 1));
        assert_eq!(s.to_string(), "n_docs=1 avg_words=3.00 avg_sents=2.00 n_classes=1");
    }

    #[test]
    fn empty_corpus() {
        assert!(corpus_stats(&[]).is_err());
    }
}
