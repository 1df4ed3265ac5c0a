//! Hierarchical interactive Transformer for long-document classification.
//!
//! Documents are encoded sentence by sentence, sentence summaries are mixed by
//! a document-level encoder, and the result is pushed back into every word of
//! every sentence before hierarchical attentive pooling. A flat Transformer
//! baseline, training loop, metrics and an analytic attention-cost model sit
//! alongside.
//!
//! The crate is `no_std` and only needs `alloc`; file formats, timing and the
//! command line live in the `hit` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod attention;
pub mod bench;
pub mod data;
pub mod error;
pub mod hi_layer;
pub mod model;
pub mod numerics;
pub mod train_eval;

pub use error::{Error, Result};
