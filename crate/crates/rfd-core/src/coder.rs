//! Byte-oriented range coder over exact integer frequencies.
//!
//! The encoder keeps a 64-bit coding window: `low` (in a `u128`, so the
//! carry out of bit 63 is bit 64) and a 64-bit `range` renormalized to stay
//! in `[2^56, 2^64)`. Each symbol narrows the interval to its frequency
//! slice `[cum, cum + freq)` of the current total; settled top bytes are
//! emitted through a pending-byte buffer (`cache` plus a run of `0xFF`s)
//! that resolves carries exactly. The decoder mirrors the arithmetic, so
//! both sides renormalize in lockstep.
//!
//! With totals capped at `2^24` the division truncation wastes less than
//! `2^-31` bits per symbol, and the final flush emits at most a handful of
//! bytes, so a whole stream costs only a few dozen bits above the ideal
//! code length; the meters measure exactly that slack. Frequencies above
//! the cap are rejected rather than degraded.

use crate::model::FreqModel;
use crate::params::ParamError;
use thiserror::Error;

/// Upper bound on the frequency total accepted by the coder.
pub const FREQ_TOTAL_CAP: u64 = 1 << 24;

/// Renormalization bound: `range` stays in `[2^56, 2^64)` between symbols.
const RENORM_BOUND: u64 = 1 << 56;

/// Bits 0..=55 of the coding window; the byte above them is emitted on
/// shift, the bit above that is the carry.
const WINDOW_MASK: u128 = (1u128 << 56) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("bad magic bytes in stream header")]
    BadMagic,
    #[error("unsupported stream version {0}")]
    UnsupportedVersion(u8),
    #[error("stream truncated: {context}")]
    Truncated { context: &'static str },
    #[error("checksum mismatch")]
    CrcMismatch,
    #[error("header field out of range: {context}")]
    InvalidHeader { context: &'static str },
    #[error("embedded parameters invalid: {0}")]
    InvalidParams(#[from] ParamError),
    #[error("frequency total {total} exceeds the coder cap {cap}")]
    TotalExceedsCap { total: u64, cap: u64 },
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: u32, alphabet_size: u32 },
    #[error("operation requires the byte alphabet (N = 256), got {alphabet_size}")]
    NotByteAlphabet { alphabet_size: u32 },
}

/// Ideal versus actual code length of one encoded stream.
///
/// `ideal_bits` is `sum_k -log2 p(x_k)` under the model's exact
/// frequencies; `actual_bits` is eight times the payload length. The coder
/// never beats its own model (`actual >= ideal`) and stays within a small
/// constant slack of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeLengthMeter {
    pub ideal_bits: f64,
    pub actual_bits: u64,
}

impl CodeLengthMeter {
    /// Actual bits above ideal.
    pub fn slack(&self) -> f64 {
        self.actual_bits as f64 - self.ideal_bits
    }
}

/// Range encoder with exact carry propagation.
#[derive(Debug)]
pub struct RangeEncoder {
    low: u128,
    range: u64,
    cache: u8,
    ff_count: u64,
    out: Vec<u8>,
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u64::MAX,
            // The initial zero byte absorbs a possible carry out of the
            // first window; the decoder skips it.
            cache: 0,
            ff_count: 0,
            out: Vec::new(),
        }
    }

    /// Narrows the interval to the slice `[cum, cum + freq)` of `total`.
    /// Requires `freq >= 1`, `cum + freq <= total <= FREQ_TOTAL_CAP`.
    pub fn encode(&mut self, cum: u64, freq: u64, total: u64) {
        debug_assert!(freq >= 1 && cum + freq <= total && total <= FREQ_TOTAL_CAP);
        let slice = self.range / total;
        self.low += slice as u128 * cum as u128;
        self.range = slice * freq;
        while self.range < RENORM_BOUND {
            self.shift_low();
            self.range <<= 8;
        }
    }

    fn shift_low(&mut self) {
        let carry = (self.low >> 64) as u8; // 0 or 1
        if carry == 1 || self.low < (0xFFu128 << 56) {
            // The pending bytes are settled now: the carry bumps them,
            // wrapping the 0xFF run to zeros.
            self.out.push(self.cache.wrapping_add(carry));
            for _ in 0..self.ff_count {
                self.out.push(0xFFu8.wrapping_add(carry));
            }
            self.ff_count = 0;
            self.cache = ((self.low >> 56) & 0xFF) as u8;
        } else {
            // Top byte is 0xFF with no carry yet; hold it back.
            self.ff_count += 1;
        }
        self.low = (self.low & WINDOW_MASK) << 8;
    }

    /// Flushes: picks the coarsest byte-aligned value inside the final
    /// interval, emits its significant bytes and drops flush-generated
    /// trailing zeros (the decoder zero-pads past the end).
    pub fn finish(mut self) -> Vec<u8> {
        // range >= 2^56 > 2^48, so rounding low up to a multiple of 2^48
        // stays inside [low, low + range).
        const GRANULE: u128 = 1 << 48;
        let rounded = (self.low + (GRANULE - 1)) & !(GRANULE - 1);
        debug_assert!(rounded - self.low < self.range as u128);
        self.low = rounded;
        let before_flush = self.out.len();
        for _ in 0..9 {
            self.shift_low();
        }
        while self.out.len() > before_flush + 1 && self.out.last() == Some(&0) {
            self.out.pop();
        }
        self.out
    }
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

/// Range decoder; reads past the end of the payload as zero bytes.
#[derive(Debug)]
pub struct RangeDecoder<'a> {
    data: &'a [u8],
    pos: usize,
    code: u64,
    range: u64,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        let mut dec = Self {
            data,
            pos: 1, // skip the encoder's initial zero byte
            code: 0,
            range: u64::MAX,
        };
        for _ in 0..8 {
            dec.code = (dec.code << 8) | dec.next_byte() as u64;
        }
        dec
    }

    fn next_byte(&mut self) -> u8 {
        let b = self.data.get(self.pos).copied().unwrap_or(0);
        self.pos += 1;
        b
    }

    /// Position of the code inside the current total; always `< total`.
    pub fn decode_target(&self, total: u64) -> u64 {
        debug_assert!((1..=FREQ_TOTAL_CAP).contains(&total));
        (self.code / (self.range / total)).min(total - 1)
    }

    /// Consumes the symbol slice the encoder used.
    pub fn consume(&mut self, cum: u64, freq: u64, total: u64) {
        let slice = self.range / total;
        self.code -= slice * cum;
        self.range = slice * freq;
        while self.range < RENORM_BOUND {
            self.code = (self.code << 8) | self.next_byte() as u64;
            self.range <<= 8;
        }
    }
}

/// Drives a model through the predict/encode/update loop over a symbol
/// sequence and returns the payload together with its meter.
pub fn encode_with_model<M, I>(
    mut model: M,
    symbols: I,
) -> Result<(Vec<u8>, CodeLengthMeter), CodecError>
where
    M: FreqModel,
    I: IntoIterator<Item = u32>,
{
    let alphabet_size = model.num_symbols();
    let mut encoder = RangeEncoder::new();
    let mut ideal_bits = 0.0f64;
    let mut count = 0u64;
    for x in symbols {
        if x >= alphabet_size {
            return Err(CodecError::SymbolOutOfRange {
                symbol: x,
                alphabet_size,
            });
        }
        let total = model.total();
        if total > FREQ_TOTAL_CAP {
            return Err(CodecError::TotalExceedsCap {
                total,
                cap: FREQ_TOTAL_CAP,
            });
        }
        let (cum, freq) = model.cum_and_freq(x);
        ideal_bits += (total as f64).log2() - (freq as f64).log2();
        encoder.encode(cum, freq, total);
        model.observe(x);
        count += 1;
    }
    let payload = if count == 0 {
        Vec::new()
    } else {
        encoder.finish()
    };
    let meter = CodeLengthMeter {
        ideal_bits,
        actual_bits: 8 * payload.len() as u64,
    };
    Ok((payload, meter))
}

/// Decodes `count` symbols, feeding each one to `sink`. The model must be
/// initialized identically to the encoder's.
pub fn decode_each<M, F>(
    mut model: M,
    payload: &[u8],
    count: u64,
    mut sink: F,
) -> Result<(), CodecError>
where
    M: FreqModel,
    F: FnMut(u32),
{
    if count == 0 {
        return Ok(());
    }
    let mut decoder = RangeDecoder::new(payload);
    for _ in 0..count {
        let total = model.total();
        if total > FREQ_TOTAL_CAP {
            return Err(CodecError::TotalExceedsCap {
                total,
                cap: FREQ_TOTAL_CAP,
            });
        }
        let target = decoder.decode_target(total);
        let (symbol, cum) = model.find_symbol(target);
        decoder.consume(cum, model.freq(symbol), total);
        model.observe(symbol);
        sink(symbol);
    }
    Ok(())
}

/// Decodes `count` symbols into a vector.
pub fn decode_with_model<M: FreqModel>(
    model: M,
    payload: &[u8],
    count: u64,
) -> Result<Vec<u32>, CodecError> {
    let mut out = Vec::with_capacity(count.min(1 << 20) as usize);
    decode_each(model, payload, count, |x| out.push(x))?;
    Ok(out)
}

/// Encodes and returns only the meter.
pub fn measure_code_length<M, I>(model: M, symbols: I) -> Result<CodeLengthMeter, CodecError>
where
    M: FreqModel,
    I: IntoIterator<Item = u32>,
{
    encode_with_model(model, symbols).map(|(_, meter)| meter)
}
