//! On-disk stream container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic[4] = "RFD1"
//! version: u8 = 1
//! N: u32  d: u32  c_num: u32  c_den: u32  T: u32
//! s0_flag: u8            0 = all-ones, 1 = explicit u32 array of length N
//! [s0: u32 * N]          only when s0_flag = 1
//! original_length: u64   number of symbols
//! payload_length: u64
//! payload bytes
//! crc32: u32             over every preceding byte
//! ```
//!
//! The header carries the complete parameter set, so the decoder rebuilds
//! the exact model the encoder ran and the round trip is bit-exact.

use crate::coder::{self, CodeLengthMeter, CodecError};
use crate::estimator::RfdModel;
use crate::params::{InitialCounts, RfdParams};

pub const MAGIC: [u8; 4] = *b"RFD1";
pub const VERSION: u8 = 1;

/// A parsed stream: parameters, original symbol count and coder payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedStream {
    pub params: RfdParams,
    pub original_len: u64,
    pub payload: Vec<u8>,
}

impl CodedStream {
    /// Serializes header, payload and trailing checksum.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(46 + self.payload.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.params.alphabet_size().to_le_bytes());
        out.extend_from_slice(&self.params.increment().to_le_bytes());
        let (c_num, c_den) = self.params.discount();
        out.extend_from_slice(&c_num.to_le_bytes());
        out.extend_from_slice(&c_den.to_le_bytes());
        out.extend_from_slice(&self.params.threshold().to_le_bytes());
        match self.params.initial_counts() {
            InitialCounts::AllOnes => out.push(0),
            InitialCounts::Explicit(counts) => {
                out.push(1);
                for &s in counts {
                    out.extend_from_slice(&s.to_le_bytes());
                }
            }
        }
        out.extend_from_slice(&self.original_len.to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.payload);
        let crc = crc32fast::hash(&out);
        out.extend_from_slice(&crc.to_le_bytes());
        out
    }

    /// Parses and verifies a serialized stream.
    pub fn from_bytes(data: &[u8]) -> Result<Self, CodecError> {
        let mut r = Reader { data, pos: 0 };
        let magic = r.take(4, "magic")?;
        if magic != MAGIC {
            return Err(CodecError::BadMagic);
        }
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(CodecError::UnsupportedVersion(version));
        }
        let alphabet_size = r.u32("alphabet size")?;
        let increment = r.u32("increment")?;
        let c_num = r.u32("discount numerator")?;
        let c_den = r.u32("discount denominator")?;
        let threshold = r.u32("threshold")?;
        let s0_flag = r.u8("initial-counts flag")?;
        let initial_counts = match s0_flag {
            0 => InitialCounts::AllOnes,
            1 => {
                // Capacity hint clamped: the size field is untrusted.
                let mut counts = Vec::with_capacity(alphabet_size.min(1 << 16) as usize);
                for _ in 0..alphabet_size {
                    counts.push(r.u32("initial counts")?);
                }
                InitialCounts::Explicit(counts)
            }
            _ => {
                return Err(CodecError::InvalidHeader {
                    context: "initial-counts flag",
                })
            }
        };
        let original_len = r.u64("original length")?;
        let payload_len = r.u64("payload length")?;
        let payload = r.take(payload_len as usize, "payload")?.to_vec();
        let body_end = r.pos;
        let stored_crc = u32::from_le_bytes(r.take(4, "checksum")?.try_into().expect("four bytes"));
        if crc32fast::hash(&data[..body_end]) != stored_crc {
            return Err(CodecError::CrcMismatch);
        }
        let params = RfdParams::new(
            alphabet_size,
            increment,
            (c_num, c_den),
            threshold,
            initial_counts,
        )?;
        Ok(Self {
            params,
            original_len,
            payload,
        })
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize, context: &'static str) -> Result<&'a [u8], CodecError> {
        if self.data.len() - self.pos < len {
            return Err(CodecError::Truncated { context });
        }
        let out = &self.data[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u8(&mut self, context: &'static str) -> Result<u8, CodecError> {
        Ok(self.take(1, context)?[0])
    }

    fn u32(&mut self, context: &'static str) -> Result<u32, CodecError> {
        Ok(u32::from_le_bytes(
            self.take(4, context)?.try_into().unwrap(),
        ))
    }

    fn u64(&mut self, context: &'static str) -> Result<u64, CodecError> {
        Ok(u64::from_le_bytes(
            self.take(8, context)?.try_into().unwrap(),
        ))
    }
}

/// Encodes a symbol sequence into a stream under the given parameters.
/// Parameters whose threshold exceeds the coder's frequency cap are
/// rejected up front.
pub fn encode_stream(
    params: &RfdParams,
    symbols: &[u32],
) -> Result<(CodedStream, CodeLengthMeter), CodecError> {
    if params.threshold() as u64 > coder::FREQ_TOTAL_CAP {
        return Err(CodecError::TotalExceedsCap {
            total: params.threshold() as u64,
            cap: coder::FREQ_TOTAL_CAP,
        });
    }
    let model = RfdModel::new(params.clone());
    let (payload, meter) = coder::encode_with_model(model, symbols.iter().copied())?;
    Ok((
        CodedStream {
            params: params.clone(),
            original_len: symbols.len() as u64,
            payload,
        },
        meter,
    ))
}

/// Reconstructs the original symbol sequence from a stream.
pub fn decode_stream(stream: &CodedStream) -> Result<Vec<u32>, CodecError> {
    let model = RfdModel::new(stream.params.clone());
    coder::decode_with_model(model, &stream.payload, stream.original_len)
}

/// Compresses raw bytes with the byte alphabet. `params` must have
/// `N = 256`.
pub fn compress_bytes(
    params: &RfdParams,
    data: &[u8],
) -> Result<(Vec<u8>, CodeLengthMeter), CodecError> {
    if params.alphabet_size() != 256 {
        return Err(CodecError::NotByteAlphabet {
            alphabet_size: params.alphabet_size(),
        });
    }
    if params.threshold() as u64 > coder::FREQ_TOTAL_CAP {
        return Err(CodecError::TotalExceedsCap {
            total: params.threshold() as u64,
            cap: coder::FREQ_TOTAL_CAP,
        });
    }
    let model = RfdModel::new(params.clone());
    let (payload, meter) = coder::encode_with_model(model, data.iter().map(|&b| b as u32))?;
    let stream = CodedStream {
        params: params.clone(),
        original_len: data.len() as u64,
        payload,
    };
    Ok((stream.to_bytes(), meter))
}

/// Decompresses a byte-alphabet stream produced by [`compress_bytes`].
pub fn decompress_bytes(container: &[u8]) -> Result<Vec<u8>, CodecError> {
    let stream = CodedStream::from_bytes(container)?;
    if stream.params.alphabet_size() != 256 {
        return Err(CodecError::NotByteAlphabet {
            alphabet_size: stream.params.alphabet_size(),
        });
    }
    let model = RfdModel::new(stream.params.clone());
    let mut out = Vec::with_capacity(stream.original_len.min(1 << 20) as usize);
    coder::decode_each(model, &stream.payload, stream.original_len, |x| {
        out.push(x as u8)
    })?;
    Ok(out)
}
