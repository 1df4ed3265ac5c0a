use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{text, Document, TokenizedDoc, Vocab, CLS, PAD};
use crate::{Error, Result};

/// Padded word ids laid out `[batch, sentences, words + 1]`. The last slot of
/// every sentence is the summary ([CLS]) slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocumentBatch {
    pub batch: usize,
    /// Sentence slots per document (M).
    pub sentences: usize,
    /// Word slots per sentence, excluding the summary slot (K).
    pub words: usize,
    pub word_ids: Vec<u32>,
    pub word_mask: Vec<bool>,
    pub sent_mask: Vec<bool>,
    pub labels: Vec<usize>,
    /// Real sentence count per document, after truncation.
    pub sent_counts: Vec<usize>,
    /// Real word count per kept sentence, after truncation.
    pub word_counts: Vec<Vec<usize>>,
}

impl DocumentBatch {
    pub fn slots(&self) -> usize {
        self.words + 1
    }

    pub fn index(&self, doc: usize, sent: usize, slot: usize) -> usize {
        (doc * self.sentences + sent) * self.slots() + slot
    }
}

/// Lays documents out as a padded batch: the first `m` sentences of each
/// document and the first `k` words of each sentence are kept, and the
/// [CLS] id is written to slot `k` of every real sentence.
pub fn pad_batch(docs: &[&TokenizedDoc], k: usize, m: usize) -> Result<DocumentBatch> {
    if docs.is_empty() {
        return Err(Error::Data("empty batch".into()));
    }
    if m == 0 {
        return Err(Error::Config("sentence budget must be at least 1".into()));
    }
    let s = k + 1;
    let n = docs.len() * m * s;
    let mut b = DocumentBatch {
        batch: docs.len(),
        sentences: m,
        words: k,
        word_ids: vec![PAD; n],
        word_mask: vec![false; n],
        sent_mask: vec![false; docs.len() * m],
        labels: Vec::with_capacity(docs.len()),
        sent_counts: Vec::with_capacity(docs.len()),
        word_counts: Vec::with_capacity(docs.len()),
    };
    for (di, doc) in docs.iter().enumerate() {
        if doc.sentences.is_empty() {
            return Err(Error::Data(format!("document {di} has no sentences")));
        }
        let kept = doc.sentences.len().min(m);
        let mut counts = Vec::with_capacity(kept);
        for (si, sent) in doc.sentences.iter().take(kept).enumerate() {
            b.sent_mask[di * m + si] = true;
            let w = sent.len().min(k);
            for (wi, &id) in sent.iter().take(w).enumerate() {
                let at = b.index(di, si, wi);
                b.word_ids[at] = id;
                b.word_mask[at] = true;
            }
            let cls = b.index(di, si, k);
            b.word_ids[cls] = CLS;
            b.word_mask[cls] = true;
            counts.push(w);
        }
        b.labels.push(doc.label);
        b.sent_counts.push(kept);
        b.word_counts.push(counts);
    }
    Ok(b)
}

pub fn tokenize_document(doc: &Document, vocab: &Vocab) -> Result<TokenizedDoc> {
    let sentences = text::split_sentences(&doc.text)?
        .iter()
        .map(|s| text::tokenize(s).iter().map(|t| vocab.id(t)).collect())
        .collect();
    Ok(TokenizedDoc {
        label: doc.label,
        sentences,
    })
}

/// Tokenises and pads raw documents in one step.
pub fn encode_and_pad(
    docs: &[Document],
    vocab: &Vocab,
    k_max: usize,
    m_max: usize,
    num_classes: usize,
) -> Result<DocumentBatch> {
    let mut toks = Vec::with_capacity(docs.len());
    for (i, d) in docs.iter().enumerate() {
        if d.label >= num_classes {
            return Err(Error::Data(format!(
                "document {i}: label {} outside {num_classes} classes",
                d.label
            )));
        }
        toks.push(tokenize_document(d, vocab)?);
    }
    let refs: Vec<&TokenizedDoc> = toks.iter().collect();
    pad_batch(&refs, k_max, m_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{build_vocab, UNK};
    use alloc::string::ToString;

    fn doc(label: usize, text: &str) -> Document {
        Document {
            label,
            text: text.to_string(),
        }
    }

    #[test]
    fn layout_puts_cls_in_last_slot() {
        let docs = [doc(1, "a b. c d.")];
        let v = build_vocab(&docs, 1).unwrap();
        let b = encode_and_pad(&docs, &v, 3, 2, 2).unwrap();
        assert_eq!((b.batch, b.sentences, b.slots()), (1, 2, 4));
        let (a, bb, c, d) = (v.id("a"), v.id("b"), v.id("c"), v.id("d"));
        assert_eq!(b.word_ids, vec![a, bb, PAD, CLS, c, d, PAD, CLS]);
        assert_eq!(
            b.word_mask,
            vec![true, true, false, true, true, true, false, true]
        );
        assert_eq!(b.sent_mask, vec![true, true]);
        assert_eq!(b.labels, vec![1]);
    }

    #[test]
    fn long_documents_keep_their_first_sentences() {
        let text: alloc::string::String = (0..7).map(|i| alloc::format!("s{i}. ")).collect();
        let docs = [doc(0, &text)];
        let v = build_vocab(&docs, 1).unwrap();
        let b = encode_and_pad(&docs, &v, 2, 2, 2).unwrap();
        assert_eq!(b.sent_counts, vec![2]);
        assert_eq!(b.word_ids[0], v.id("s0"));
        assert_eq!(b.word_ids[3], v.id("s1"));
    }

    #[test]
    fn unknown_tokens_and_labels() {
        let v = build_vocab(&[doc(0, "known")], 1).unwrap();
        let b = encode_and_pad(&[doc(0, "unknown")], &v, 2, 1, 2).unwrap();
        assert_eq!(b.word_ids[0], UNK);
        assert!(matches!(
            encode_and_pad(&[doc(5, "known")], &v, 2, 1, 2),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn padded_sentences_are_fully_masked() {
        let docs = [doc(0, "a."), doc(1, "a. b. c.")];
        let v = build_vocab(&docs, 1).unwrap();
        let b = encode_and_pad(&docs, &v, 2, 3, 2).unwrap();
        for si in 1..3 {
            assert!(!b.sent_mask[si]);
            for slot in 0..3 {
                let i = b.index(0, si, slot);
                assert!(!b.word_mask[i]);
                assert_eq!(b.word_ids[i], PAD);
            }
        }
    }
}
