//! Corpus handling: sentence splitting, tokenisation, vocabulary, padded
//! batches, synthetic tasks, pretrained vectors and corpus statistics.

mod batch;
mod embeddings;
mod stats;
mod synth;
mod text;
mod vocab;

use alloc::string::String;
use alloc::vec::Vec;

pub use batch::{encode_and_pad, pad_batch, tokenize_document, DocumentBatch};
pub use embeddings::{parse_embedding_table, Coverage, GLOVE_DIM};
pub use stats::{corpus_stats, CorpusStats};
pub use synth::{gen_synthetic_task, SignalPolicy, SynthSpec, TaskKind, KEYWORD, XOR_TOKENS};
pub use text::{split_sentences, tokenize};
pub use vocab::{build_vocab, Vocab, CLS, CLS_TOKEN, PAD, PAD_TOKEN, UNK, UNK_TOKEN};

/// A labelled raw-text document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub label: usize,
    pub text: String,
}

/// A document after sentence splitting and vocabulary lookup. Sentences are
/// kept whole; truncation happens when a batch is padded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenizedDoc {
    pub label: usize,
    pub sentences: Vec<Vec<u32>>,
}

impl TokenizedDoc {
    pub fn num_tokens(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    /// Word ids in reading order, without sentence boundaries.
    pub fn flat_tokens(&self) -> impl Iterator<Item = u32> + '_ {
        self.sentences.iter().flatten().copied()
    }
}
