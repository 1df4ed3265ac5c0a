//! Synthetic corpora where the label depends on tokens far apart in the text.
//!
//! * `keyword`: label 1 iff [`KEYWORD`] occurs somewhere. With
//!   [`SignalPolicy::Late`] it only ever occurs at word index `late_after` or
//!   later, out of reach of a model truncated to that length.
//! * `xor`: each of the two [`XOR_TOKENS`] is present or absent, always in
//!   different sentences, and the label is the parity of their presence.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};
use rand::{Rng as _, SeedableRng};

use super::Document;
use crate::numerics::Rng;
use crate::{Error, Result};

pub const KEYWORD: &str = "signal";
pub const XOR_TOKENS: [&str; 2] = ["alpha", "beta"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Keyword,
    Xor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignalPolicy {
    Uniform,
    Late,
}

impl core::str::FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "keyword" => Ok(TaskKind::Keyword),
            "xor" => Ok(TaskKind::Xor),
            _ => Err(Error::Config(format!("unknown task kind {s:?} (keyword|xor)"))),
        }
    }
}

impl core::str::FromStr for SignalPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(SignalPolicy::Uniform),
            "late" => Ok(SignalPolicy::Late),
            _ => Err(Error::Config(format!("unknown signal policy {s:?} (uniform|late)"))),
        }
    }
}

impl core::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            TaskKind::Keyword => "keyword",
            TaskKind::Xor => "xor",
        })
    }
}

impl core::fmt::Display for SignalPolicy {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            SignalPolicy::Uniform => "uniform",
            SignalPolicy::Late => "late",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthSpec {
    pub kind: TaskKind,
    pub n_docs: usize,
    /// Sentences per document.
    pub sentences: usize,
    /// Words per sentence.
    pub words: usize,
    /// Number of distinct filler words.
    pub vocab_size: usize,
    pub policy: SignalPolicy,
    /// First word index the late policy may use.
    pub late_after: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            kind: TaskKind::Keyword,
            n_docs: 200,
            sentences: 24,
            words: 32,
            vocab_size: 100,
            policy: SignalPolicy::Uniform,
            late_after: 512,
            seed: 7,
        }
    }
}

fn filler(rng: &mut Rng, vocab: usize) -> String {
    format!("w{}", rng.random_range(0..vocab))
}

fn render(sentences: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (i, s) in sentences.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&s.join(" "));
        out.push('.');
    }
    out
}

/// Generates a labelled corpus that is a pure function of `spec`.
pub fn gen_synthetic_task(spec: &SynthSpec) -> Result<Vec<Document>> {
    let (m, k) = (spec.sentences, spec.words);
    if m == 0 || k == 0 || spec.vocab_size == 0 {
        return Err(Error::Config("synthetic documents need M, K and vocab >= 1".into()));
    }
    let first_late = spec.late_after.div_ceil(k);
    match spec.kind {
        TaskKind::Keyword if spec.policy == SignalPolicy::Late && first_late >= m => {
            return Err(Error::Config(format!(
                "M*K = {} leaves no room for a signal at index >= {}",
                m * k,
                spec.late_after
            )))
        }
        TaskKind::Xor if m < 2 => {
            return Err(Error::Config("xor task needs at least two sentences".into()))
        }
        _ => {}
    }

    let mut rng = Rng::seed_from_u64(spec.seed);
    // label (or presence pattern) assignment, balanced then shuffled
    let mut plan: Vec<usize> = (0..spec.n_docs).map(|i| i % 4).collect();
    plan.shuffle(&mut rng);

    let mut docs = Vec::with_capacity(spec.n_docs);
    for &p in &plan {
        let mut sents: Vec<Vec<String>> = (0..m)
            .map(|_| (0..k).map(|_| filler(&mut rng, spec.vocab_size)).collect())
            .collect();
        let label = match spec.kind {
            TaskKind::Keyword => {
                let positive = p % 2 == 1;
                if positive {
                    let lo = match spec.policy {
                        SignalPolicy::Uniform => 0,
                        SignalPolicy::Late => first_late,
                    };
                    let s = rng.random_range(lo..m);
                    let w = rng.random_range(0..k);
                    sents[s][w] = KEYWORD.into();
                }
                positive as usize
            }
            TaskKind::Xor => {
                // patterns 0..4 map to (a, b) = (0,0), (1,0), (1,1), (0,1)
                let (a, b) = [(false, false), (true, false), (true, true), (false, true)][p];
                let picks = index::sample(&mut rng, m, 2).into_vec();
                for (present, (tok, s)) in [a, b].into_iter().zip(XOR_TOKENS.iter().zip(picks)) {
                    if present {
                        let w = rng.random_range(0..k);
                        sents[s][w] = (*tok).into();
                    }
                }
                (a ^ b) as usize
            }
        };
        docs.push(Document {
            label,
            text: render(&sents),
        });
    }
    Ok(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{split_sentences, tokenize};

    #[test]
    fn generation_is_deterministic() {
        let spec = SynthSpec::default();
        assert_eq!(gen_synthetic_task(&spec).unwrap(), gen_synthetic_task(&spec).unwrap());
        let other = SynthSpec { seed: 8, ..spec.clone() };
        assert_ne!(gen_synthetic_task(&spec).unwrap(), gen_synthetic_task(&other).unwrap());
    }

    #[test]
    fn late_keyword_sits_beyond_the_cutoff() {
        let spec = SynthSpec {
            n_docs: 60,
            sentences: 6,
            words: 8,
            policy: SignalPolicy::Late,
            late_after: 32,
            ..SynthSpec::default()
        };
        let docs = gen_synthetic_task(&spec).unwrap();
        let mut positives = 0;
        for d in &docs {
            let toks = tokenize(&d.text);
            let at = toks.iter().position(|t| t == KEYWORD);
            assert_eq!(at.is_some(), d.label == 1);
            if let Some(i) = at {
                assert!(i >= 32, "keyword at {i}");
                positives += 1;
            }
        }
        assert_eq!(positives, 30);
    }

    #[test]
    fn xor_tokens_never_share_a_sentence() {
        let spec = SynthSpec {
            kind: TaskKind::Xor,
            n_docs: 101,
            sentences: 4,
            words: 5,
            ..SynthSpec::default()
        };
        let docs = gen_synthetic_task(&spec).unwrap();
        let ones = docs.iter().filter(|d| d.label == 1).count();
        assert!(ones.abs_diff(docs.len() - ones) <= 1);
        for d in &docs {
            let mut has = [false; 2];
            for s in split_sentences(&d.text).unwrap() {
                let t = tokenize(&s);
                let here = XOR_TOKENS.map(|x| t.iter().any(|w| w == x));
                assert!(!(here[0] && here[1]));
                has[0] |= here[0];
                has[1] |= here[1];
            }
            assert_eq!(d.label, (has[0] ^ has[1]) as usize);
        }
    }

    #[test]
    fn impossible_layouts_are_config_errors() {
        let late = SynthSpec {
            sentences: 2,
            words: 4,
            policy: SignalPolicy::Late,
            late_after: 8,
            ..SynthSpec::default()
        };
        assert!(matches!(gen_synthetic_task(&late), Err(Error::Config(_))));
        let xor = SynthSpec {
            kind: TaskKind::Xor,
            sentences: 1,
            ..SynthSpec::default()
        };
        assert!(matches!(gen_synthetic_task(&xor), Err(Error::Config(_))));
    }
}
