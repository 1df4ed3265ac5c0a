//! Single-file checkpoint encoding.
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"HITCKPT\0"
//! 8       4     version, u32 little-endian (currently 1)
//! 12      4     manifest length N in bytes, u32 little-endian
//! 16      N     manifest, UTF-8, one line per parameter in name order:
//!               "<name>\t<d0>x<d1>x...\t<offset>\n"
//!               (shape "" for scalars; offset counts f32 values, not bytes)
//! 16+N    4*P   payload: every parameter's values as f32 little-endian,
//!               concatenated in manifest order
//! ```

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use super::{ParamStore, Tensor};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"HITCKPT\0";
pub const VERSION: u32 = 1;

pub fn encode(params: &ParamStore<f32>) -> Vec<u8> {
    let mut manifest = String::new();
    let mut offset = 0usize;
    for p in params.iter() {
        let dims: Vec<String> = p.tensor.shape().iter().map(ToString::to_string).collect();
        writeln!(manifest, "{}\t{}\t{}", p.name, dims.join("x"), offset).expect("string write");
        offset += p.tensor.numel();
    }
    let mut out = Vec::with_capacity(16 + manifest.len() + 4 * offset);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
    out.extend_from_slice(manifest.as_bytes());
    for p in params.iter() {
        for v in p.tensor.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        line,
        msg: msg.into(),
    }
}

pub fn decode(bytes: &[u8]) -> Result<ParamStore<f32>> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(bad(0, "not a checkpoint (bad magic)"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(bad(0, format!("unsupported checkpoint version {version}")));
    }
    let mlen = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
    let manifest = bytes
        .get(16..16 + mlen)
        .ok_or_else(|| bad(0, "truncated manifest"))?;
    let manifest = core::str::from_utf8(manifest).map_err(|_| bad(0, "manifest is not UTF-8"))?;
    let payload = &bytes[16 + mlen..];
    if payload.len() % 4 != 0 {
        return Err(bad(0, "payload is not a whole number of f32 values"));
    }
    let floats: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
        .collect();

    let mut store = ParamStore::new();
    let mut expected_offset = 0usize;
    for (i, line) in manifest.lines().enumerate() {
        let lineno = i + 1;
        let mut parts = line.split('\t');
        let (Some(name), Some(dims), Some(off), None) =
            (parts.next(), parts.next(), parts.next(), parts.next())
        else {
            return Err(bad(lineno, "expected name<TAB>shape<TAB>offset"));
        };
        let shape: Vec<usize> = if dims.is_empty() {
            Vec::new()
        } else {
            dims.split('x')
                .map(|d| d.parse().map_err(|_| bad(lineno, format!("bad dimension {d:?}"))))
                .collect::<Result<_>>()?
        };
        let off: usize = off.parse().map_err(|_| bad(lineno, format!("bad offset {off:?}")))?;
        if off != expected_offset {
            return Err(bad(lineno, format!("offset {off}, expected {expected_offset}")));
        }
        let n: usize = shape.iter().product();
        let data = floats
            .get(off..off + n)
            .ok_or_else(|| bad(lineno, "payload too short"))?
            .to_vec();
        store.insert(name, Tensor::new(&shape, data)?)?;
        expected_offset += n;
    }
    if expected_offset != floats.len() {
        return Err(bad(0, "payload has trailing values"));
    }
    Ok(store)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_bit_exact() {
        let mut s = ParamStore::new();
        s.insert("b", Tensor::new(&[2], alloc::vec![1.0, -2.0]).unwrap()).unwrap();
        s.insert("a", Tensor::scalar(0.5)).unwrap();
        let bytes = encode(&s);
        let manifest = "a\t\t0\nb\t2\t1\n";
        let mut want = Vec::new();
        want.extend_from_slice(b"HITCKPT\0");
        want.extend_from_slice(&1u32.to_le_bytes());
        want.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        want.extend_from_slice(manifest.as_bytes());
        for v in [0.5f32, 1.0, -2.0] {
            want.extend_from_slice(&v.to_le_bytes());
        }
        assert_eq!(bytes, want);
        let back = decode(&bytes).unwrap();
        assert_eq!(back.get("b").unwrap().tensor.data(), &[1.0, -2.0]);
        assert_eq!(back.get("a").unwrap().tensor.shape(), &[] as &[usize]);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        assert!(decode(b"nope").is_err());
        let mut s = ParamStore::new();
        s.insert("w", Tensor::zeros(&[3])).unwrap();
        let mut bytes = encode(&s);
        bytes.truncate(bytes.len() - 4);
        assert!(decode(&bytes).is_err());
    }
}
