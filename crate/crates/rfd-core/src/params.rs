//! Parameters of the discounted-frequency estimator and their validity
//! conditions.
//!
//! A parameter set consists of the alphabet size `N`, the per-observation
//! increment `d`, the discount factor `c = discount_num / discount_den`
//! (an exact rational), the frequency threshold `T` and the initial counts
//! `s0`. The estimator is only well behaved when
//!
//! * `d >= 1`,
//! * `0 <= c < 1`,
//! * `d <= (1 - c) * (T - N)`, and
//! * every initial count is positive and their sum is at most `T`,
//!
//! so construction rejects anything else. All condition checks are carried
//! out in integer arithmetic. The discount is kept as a `num/den` pair
//! because `floor(c * s)` must be computed as `(num * s) / den` with
//! integer division: floating-point floors are not portable enough for
//! bit-exact decoding.

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used for derived quantities and exact comparisons.
pub type Rational = Ratio<i128>;

/// Hard cap on the threshold `T`. Keeps every `discount_num * count`
/// product comfortably inside 64 bits.
pub const THRESHOLD_CAP: u32 = 1 << 31;

/// Initial counts `s0`, either the all-ones default or an explicit vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitialCounts {
    /// `s0(x) = 1` for every symbol. Satisfies the sum condition whenever
    /// `N <= T`.
    AllOnes,
    /// One positive count per symbol.
    Explicit(Vec<u32>),
}

/// A single violated parameter condition.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConditionViolation {
    #[error("alphabet size must be at least 2, got {alphabet_size}")]
    AlphabetTooSmall { alphabet_size: u32 },
    #[error("increment must be a positive integer")]
    IncrementZero,
    #[error("discount must satisfy 0 <= num/den < 1, got {num}/{den}")]
    DiscountOutOfRange { num: u32, den: u32 },
    #[error(
        "increment {increment} exceeds (1 - discount) * (threshold - alphabet size) \
         for threshold {threshold} and alphabet size {alphabet_size}"
    )]
    ThresholdTooSmall {
        increment: u32,
        threshold: u32,
        alphabet_size: u32,
    },
    #[error("initial count for symbol {symbol} must be positive")]
    InitialCountZero { symbol: u32 },
    #[error("initial counts sum to {sum}, which exceeds the threshold {threshold}")]
    InitialSumExceedsThreshold { sum: u64, threshold: u32 },
    #[error("expected {expected} initial counts, got {got}")]
    InitialCountsWrongLength { expected: u32, got: usize },
    #[error("threshold {threshold} exceeds the supported cap {cap}")]
    ThresholdAboveCap { threshold: u32, cap: u32 },
}

/// Parameter rejection carrying the full list of violated conditions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameters: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct ParamError {
    pub violations: Vec<ConditionViolation>,
}

/// Validated estimator parameters.
///
/// Values can only be constructed through [`RfdParams::new`] (or one of the
/// convenience constructors), which runs the full condition check, so any
/// `RfdParams` in circulation is valid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RfdParams {
    alphabet_size: u32,
    increment: u32,
    discount_num: u32,
    discount_den: u32,
    threshold: u32,
    initial_counts: InitialCounts,
}

impl RfdParams {
    /// Builds a parameter set, rejecting it with the list of violated
    /// conditions if any check fails.
    pub fn new(
        alphabet_size: u32,
        increment: u32,
        discount: (u32, u32),
        threshold: u32,
        initial_counts: InitialCounts,
    ) -> Result<Self, ParamError> {
        let params = Self {
            alphabet_size,
            increment,
            discount_num: discount.0,
            discount_den: discount.1,
            threshold,
            initial_counts,
        };
        let violations = params.violations();
        if violations.is_empty() {
            Ok(params)
        } else {
            Err(ParamError { violations })
        }
    }

    /// Builds a parameter set from the segment scale `L` instead of the
    /// threshold, using `T = N + d * L`.
    pub fn with_scale(
        alphabet_size: u32,
        increment: u32,
        discount: (u32, u32),
        scale: u32,
        initial_counts: InitialCounts,
    ) -> Result<Self, ParamError> {
        let threshold = alphabet_size as u64 + increment as u64 * scale as u64;
        if threshold > THRESHOLD_CAP as u64 {
            return Err(ParamError {
                violations: vec![ConditionViolation::ThresholdAboveCap {
                    threshold: threshold.min(u32::MAX as u64) as u32,
                    cap: THRESHOLD_CAP,
                }],
            });
        }
        Self::new(
            alphabet_size,
            increment,
            discount,
            threshold as u32,
            initial_counts,
        )
    }

    /// Default byte-oriented file compression parameters:
    /// `N = 256`, `d = 32`, `c = 1/2`, `T = 2^16`, all-ones initial counts.
    pub fn default_file_params() -> Self {
        Self::new(256, 32, (1, 2), 1 << 16, InitialCounts::AllOnes)
            .expect("default parameters are valid")
    }

    /// Returns the list of violated conditions, empty when all hold.
    pub fn violations(&self) -> Vec<ConditionViolation> {
        let mut out = Vec::new();
        if self.alphabet_size < 2 {
            out.push(ConditionViolation::AlphabetTooSmall {
                alphabet_size: self.alphabet_size,
            });
        }
        if self.increment == 0 {
            out.push(ConditionViolation::IncrementZero);
        }
        let discount_ok = self.discount_den > 0 && self.discount_num < self.discount_den;
        if !discount_ok {
            out.push(ConditionViolation::DiscountOutOfRange {
                num: self.discount_num,
                den: self.discount_den,
            });
        }
        if self.threshold > THRESHOLD_CAP {
            out.push(ConditionViolation::ThresholdAboveCap {
                threshold: self.threshold,
                cap: THRESHOLD_CAP,
            });
        }
        if discount_ok && self.increment > 0 {
            // d * den <= (den - num) * (T - N), evaluated exactly in i128.
            let lhs = self.increment as i128 * self.discount_den as i128;
            let rhs = (self.discount_den as i128 - self.discount_num as i128)
                * (self.threshold as i128 - self.alphabet_size as i128);
            if lhs > rhs {
                out.push(ConditionViolation::ThresholdTooSmall {
                    increment: self.increment,
                    threshold: self.threshold,
                    alphabet_size: self.alphabet_size,
                });
            }
        }
        match &self.initial_counts {
            InitialCounts::AllOnes => {
                if self.alphabet_size as u64 > self.threshold as u64 {
                    out.push(ConditionViolation::InitialSumExceedsThreshold {
                        sum: self.alphabet_size as u64,
                        threshold: self.threshold,
                    });
                }
            }
            InitialCounts::Explicit(counts) => {
                if counts.len() != self.alphabet_size as usize {
                    out.push(ConditionViolation::InitialCountsWrongLength {
                        expected: self.alphabet_size,
                        got: counts.len(),
                    });
                } else {
                    for (x, &s) in counts.iter().enumerate() {
                        if s == 0 {
                            out.push(ConditionViolation::InitialCountZero { symbol: x as u32 });
                        }
                    }
                    let sum: u64 = counts.iter().map(|&s| s as u64).sum();
                    if sum > self.threshold as u64 {
                        out.push(ConditionViolation::InitialSumExceedsThreshold {
                            sum,
                            threshold: self.threshold,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn alphabet_size(&self) -> u32 {
        self.alphabet_size
    }

    pub fn increment(&self) -> u32 {
        self.increment
    }

    /// Discount as the exact `(num, den)` pair.
    pub fn discount(&self) -> (u32, u32) {
        (self.discount_num, self.discount_den)
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn initial_counts(&self) -> &InitialCounts {
        &self.initial_counts
    }

    /// Initial count `s0(x)` for one symbol.
    pub fn initial_count(&self, symbol: u32) -> u64 {
        debug_assert!(symbol < self.alphabet_size);
        match &self.initial_counts {
            InitialCounts::AllOnes => 1,
            InitialCounts::Explicit(counts) => counts[symbol as usize] as u64,
        }
    }

    /// Initial total `t0 = sum of s0(x)`.
    pub fn initial_total(&self) -> u64 {
        match &self.initial_counts {
            InitialCounts::AllOnes => self.alphabet_size as u64,
            InitialCounts::Explicit(counts) => counts.iter().map(|&s| s as u64).sum(),
        }
    }

    /// `floor(c * count)` computed exactly as `(num * count) / den`.
    pub fn discount_floor(&self, count: u64) -> u64 {
        // count <= T <= 2^31 and num < 2^32, so the product fits in u64.
        self.discount_num as u64 * count / self.discount_den as u64
    }

    /// Quantities derived from the parameters.
    pub fn derived(&self) -> DerivedParams {
        let n = self.alphabet_size as i128;
        let d = self.increment as i128;
        let span = self.threshold as i128 - n;
        let num = self.discount_num as i128;
        let den = self.discount_den as i128;
        let segment_scale = Rational::new(span, d);
        let restart_scale = Rational::new(n, d) + Rational::new(num * span, den * d);
        let min_gap = ((den - num) * span / (den * d)) as u64;
        DerivedParams {
            segment_scale,
            restart_scale,
            min_gap,
        }
    }

    /// The integer `gamma` with `c = gamma / L`, when `c * L` is integral.
    pub fn gamma(&self) -> Option<u64> {
        let num = self.discount_num as u128 * (self.threshold - self.alphabet_size) as u128;
        let den = self.discount_den as u128 * self.increment as u128;
        num.is_multiple_of(den).then(|| (num / den) as u64)
    }
}

/// Quantities derived from a parameter set.
///
/// `segment_scale` is `L = (T - N) / d`, the governing scale of rescale
/// segment lengths. `restart_scale` is `A = N/d + c*L`, which bounds the
/// frequency mass (in units of `d`) carried across a rescale. `min_gap` is
/// `floor((1 - c) * L)`, the minimum length of an interior rescale segment;
/// it is at least 1 for any valid parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedParams {
    pub segment_scale: Rational,
    pub restart_scale: Rational,
    pub min_gap: u64,
}

impl DerivedParams {
    pub fn segment_scale_f64(&self) -> f64 {
        self.segment_scale.to_f64().expect("L fits in f64")
    }

    pub fn restart_scale_f64(&self) -> f64 {
        self.restart_scale.to_f64().expect("A fits in f64")
    }
}
