//! Adaptive probability estimation from relative letter frequencies with
//! periodic discount, wired to an exact range coder, plus baselines,
//! piecewise stationary competitors and redundancy-bound validators.
//!
//! The estimator keeps one integer count per symbol and predicts
//! `count / total`. When the total would exceed a threshold, all counts
//! are discounted by an exact rational factor (with zero cells fixed up to
//! one), which bounds memory, keeps every probability positive and gives
//! recent statistics more weight. State evolution is integer-only, so
//! encoder and decoder reproduce identical model trajectories on any
//! platform.
//!
//! Modules:
//!
//! * [`params`], [`estimator`] — the validated parameter set and the exact
//!   state machine with full rescale instrumentation;
//! * [`baselines`] — Laplace, KT and periodically reset KT reference
//!   models plus the piecewise stationary oracle;
//! * [`coder`], [`container`] — the range coder and the on-disk format;
//! * [`pws`] — piecewise stationary competitors and sequence sampling;
//! * [`bounds`], [`checks`], [`report`] — bound evaluators, structural
//!   validators and experiment harnesses.
//!
//! ```
//! use rfd_core::container::{compress_bytes, decompress_bytes};
//! use rfd_core::params::RfdParams;
//!
//! let params = RfdParams::default_file_params();
//! let (stream, meter) = compress_bytes(&params, b"abracadabra")?;
//! assert_eq!(decompress_bytes(&stream)?, b"abracadabra");
//! assert!(meter.slack() >= 0.0 && meter.slack() <= 64.0);
//! # Ok::<(), rfd_core::CodecError>(())
//! ```

pub mod baselines;
pub mod bounds;
pub mod checks;
pub mod coder;
pub mod container;
pub mod dist;
pub mod estimator;
pub mod model;
pub mod params;
pub mod pws;
pub mod report;

pub use coder::{CodeLengthMeter, CodecError};
pub use container::CodedStream;
pub use dist::CategoricalDist;
pub use estimator::{RfdModel, RfdState, StepInterval, Trace};
pub use model::{FreqModel, Model};
pub use params::{DerivedParams, InitialCounts, ParamError, Rational, RfdParams};
pub use pws::PwsSpec;
pub use report::RedundancyReport;
