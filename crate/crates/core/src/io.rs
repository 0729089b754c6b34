//! Element ingestion and the binary signature format.
//!
//! Signature file layout, little-endian throughout:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `SMH1`                            |
//! | 4      | 1    | algorithm code (0..=3)                  |
//! | 5      | 4    | signature size `m` (u32, >= 1)          |
//! | 9      | 8    | global seed (u64)                       |
//! | 17     | 8*m  | slot values (binary64), unset = +inf    |

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::sketch::{Algorithm, Signature, SketchConfig, UNSET};

pub const MAGIC: [u8; 4] = *b"SMH1";
pub const HEADER_LEN: usize = 17;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic {0:?}, expected \"SMH1\"")]
    BadMagic([u8; 4]),
    #[error("truncated signature: {0}")]
    Truncated(&'static str),
    #[error("unknown algorithm code {0}")]
    UnknownAlgorithm(u8),
    #[error("signature size must be at least 1")]
    ZeroSize,
    #[error("slot {index} holds invalid value bits {bits:#018x}")]
    InvalidValue { index: usize, bits: u64 },
    #[error("{0} unexpected trailing byte(s) after signature")]
    TrailingBytes(usize),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Iterator over newline-delimited records of a byte stream.
///
/// Every record is one element; the delimiter is not included, empty lines
/// are elements, and a final record without a newline is kept.
pub fn elements<R: BufRead>(source: R) -> io::Split<R> {
    source.split(b'\n')
}

pub fn read_elements<R: BufRead>(source: R) -> io::Result<Vec<Vec<u8>>> {
    elements(source).collect()
}

pub fn write_signature<W: Write>(sig: &Signature, mut sink: W) -> io::Result<()> {
    sink.write_all(&encode_signature(sig))
}

pub fn encode_signature(sig: &Signature) -> Vec<u8> {
    let config = sig.config();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * sig.values().len());
    out.extend_from_slice(&MAGIC);
    out.push(config.algorithm().code());
    out.extend_from_slice(&config.m().to_le_bytes());
    out.extend_from_slice(&config.global_seed().to_le_bytes());
    for v in sig.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn read_exact_or<R: Read>(source: &mut R, buf: &mut [u8], what: &'static str) -> Result<(), FormatError> {
    source.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::Truncated(what),
        _ => FormatError::Io(e),
    })
}

/// Reads one signature from `source`, leaving any following bytes unread.
pub fn read_signature<R: Read>(mut source: R) -> Result<Signature, FormatError> {
    let mut header = [0u8; HEADER_LEN];
    read_exact_or(&mut source, &mut header[..4], "header")?;
    let magic: [u8; 4] = header[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(FormatError::BadMagic(magic));
    }
    read_exact_or(&mut source, &mut header[4..], "header")?;
    let algorithm = Algorithm::from_code(header[4]).ok_or(FormatError::UnknownAlgorithm(header[4]))?;
    let m = u32::from_le_bytes(header[5..9].try_into().unwrap());
    let seed = u64::from_le_bytes(header[9..17].try_into().unwrap());
    let config = SketchConfig::new(m, algorithm, seed).map_err(|_| FormatError::ZeroSize)?;

    // don't trust m for the allocation size
    let mut values = Vec::with_capacity(config.size().min(1 << 16));
    let mut word = [0u8; 8];
    for index in 0..config.size() {
        read_exact_or(&mut source, &mut word, "slot values")?;
        let v = f64::from_le_bytes(word);
        if !v.is_finite() && v != UNSET {
            return Err(FormatError::InvalidValue {
                index,
                bits: v.to_bits(),
            });
        }
        values.push(v);
    }
    Ok(Signature::from_values(config, values).expect("length matches m"))
}

/// Decodes a complete signature file; trailing bytes are an error.
pub fn decode_signature(bytes: &[u8]) -> Result<Signature, FormatError> {
    let mut cursor = bytes;
    let sig = read_signature(&mut cursor)?;
    if !cursor.is_empty() {
        return Err(FormatError::TrailingBytes(cursor.len()));
    }
    Ok(sig)
}
