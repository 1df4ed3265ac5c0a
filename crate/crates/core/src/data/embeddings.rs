use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::Vocab;
use crate::numerics::{init, Rng, Tensor};
use crate::{Error, Result};

pub const GLOVE_DIM: usize = 300;

/// How much of a vocabulary a pretrained file covered. Reserved tokens are
/// not counted.
#[derive(Clone, Debug, PartialEq)]
pub struct Coverage {
    pub matched: usize,
    pub total: usize,
    pub missing: Vec<String>,
}

impl Coverage {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }
}

/// Reads whitespace-separated vectors (`token v1 ... v_width` per line) into a
/// `[vocab, width]` table. Rows for tokens absent from the text are drawn from
/// N(0, 0.02) with `rng`.
pub fn parse_embedding_table(
    text: &str,
    vocab: &Vocab,
    width: usize,
    rng: &mut Rng,
) -> Result<(Tensor<f32>, Coverage)> {
    let v = vocab.len();
    let mut table = init::normal::<f32, _>(&[v, width], init::EMBEDDING_STD, rng).into_data();
    let mut found = vec![false; v];
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let mut parts = line.split_whitespace();
        let Some(token) = parts.next() else { continue };
        let values: Vec<f32> = parts
            .map(|p| {
                p.parse::<f32>().map_err(|_| Error::Format {
                    line: lineno,
                    msg: format!("bad number {p:?}"),
                })
            })
            .collect::<Result<_>>()?;
        if values.len() != width {
            return Err(Error::Format {
                line: lineno,
                msg: format!("expected {width} values after {token:?}, found {}", values.len()),
            });
        }
        if let Some(id) = vocab.get(token) {
            let id = id as usize;
            if !found[id] {
                table[id * width..(id + 1) * width].copy_from_slice(&values);
                found[id] = true;
            }
        }
    }
    let mut cov = Coverage {
        matched: 0,
        total: 0,
        missing: Vec::new(),
    };
    for (id, tok) in vocab.tokens().enumerate().skip(3) {
        cov.total += 1;
        if found[id] {
            cov.matched += 1;
        } else {
            cov.missing.push(tok.into());
        }
    }
    Ok((Tensor::new(&[v, width], table)?, cov))
}
