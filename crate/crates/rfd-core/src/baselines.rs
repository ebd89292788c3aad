//! Reference estimators sharing the model interface, used as comparison
//! baselines and as oracles in equivalence tests.
//!
//! All integer-frequency baselines are exact: the Laplace estimator
//! predicts `(count + 1) / (k + N)`, the KT estimator `(count + 1/2) /
//! (k + N/2)` kept exact by doubling numerator and denominator. The
//! discounted-frequency estimator with `d = 1`, all-ones initial counts
//! and a threshold large enough to suppress rescales coincides with the
//! Laplace estimator exactly, which the equivalence tests exploit.

use crate::model::{FreqModel, Model};
use crate::pws::PwsSpec;

/// Laplace estimator: frequency `count + 1` over total `k + N`.
#[derive(Debug, Clone)]
pub struct LaplaceModel {
    counts: Vec<u64>,
    observed: u64,
}

impl LaplaceModel {
    pub fn new(alphabet_size: u32) -> Self {
        assert!(alphabet_size >= 2);
        Self {
            counts: vec![0; alphabet_size as usize],
            observed: 0,
        }
    }
}

impl FreqModel for LaplaceModel {
    fn num_symbols(&self) -> u32 {
        self.counts.len() as u32
    }

    fn total(&self) -> u64 {
        self.observed + self.counts.len() as u64
    }

    fn freq(&self, symbol: u32) -> u64 {
        self.counts[symbol as usize] + 1
    }

    fn observe(&mut self, symbol: u32) {
        self.counts[symbol as usize] += 1;
        self.observed += 1;
    }
}

/// Krichevsky-Trofimov estimator, kept exact with doubled counts:
/// frequency `2 * count + 1` over total `2 * k + N`.
#[derive(Debug, Clone)]
pub struct KtModel {
    counts: Vec<u64>,
    observed: u64,
}

impl KtModel {
    pub fn new(alphabet_size: u32) -> Self {
        assert!(alphabet_size >= 2);
        Self {
            counts: vec![0; alphabet_size as usize],
            observed: 0,
        }
    }
}

impl FreqModel for KtModel {
    fn num_symbols(&self) -> u32 {
        self.counts.len() as u32
    }

    fn total(&self) -> u64 {
        2 * self.observed + self.counts.len() as u64
    }

    fn freq(&self, symbol: u32) -> u64 {
        2 * self.counts[symbol as usize] + 1
    }

    fn observe(&mut self, symbol: u32) {
        self.counts[symbol as usize] += 1;
        self.observed += 1;
    }
}

/// KT estimator whose counts are zeroed after each scheduled step, so the
/// prediction at step `k + 1` starts fresh whenever `k` is in the
/// schedule. An empty schedule gives plain KT.
#[derive(Debug, Clone)]
pub struct ResetKtModel {
    inner: KtModel,
    schedule: Vec<u64>,
    next_reset: usize,
    step: u64,
}

impl ResetKtModel {
    /// `schedule` must be strictly increasing.
    pub fn new(alphabet_size: u32, schedule: Vec<u64>) -> Self {
        assert!(
            schedule.windows(2).all(|w| w[0] < w[1]),
            "schedule must be strictly increasing"
        );
        Self {
            inner: KtModel::new(alphabet_size),
            schedule,
            next_reset: 0,
            step: 0,
        }
    }
}

impl FreqModel for ResetKtModel {
    fn num_symbols(&self) -> u32 {
        self.inner.num_symbols()
    }

    fn total(&self) -> u64 {
        self.inner.total()
    }

    fn freq(&self, symbol: u32) -> u64 {
        self.inner.freq(symbol)
    }

    fn observe(&mut self, symbol: u32) {
        self.inner.observe(symbol);
        self.step += 1;
        if self.next_reset < self.schedule.len() && self.schedule[self.next_reset] == self.step {
            self.inner = KtModel::new(self.inner.num_symbols());
            self.next_reset += 1;
        }
    }
}

/// The piecewise stationary model as a (real-valued) sequential model.
///
/// Only used for code-length accounting: its probabilities may be zero, so
/// it cannot drive the coder.
#[derive(Debug, Clone)]
pub struct PwsOracle {
    spec: PwsSpec,
    consumed: u64,
}

impl PwsOracle {
    pub fn new(spec: PwsSpec) -> Self {
        Self { spec, consumed: 0 }
    }
}

impl Model for PwsOracle {
    fn alphabet_size(&self) -> u32 {
        self.spec.alphabet_size()
    }

    fn prob(&self, symbol: u32) -> f64 {
        assert!(
            self.consumed < self.spec.len(),
            "prediction past the end of the spec"
        );
        self.spec.dist_at(self.consumed + 1)[symbol as usize]
    }

    fn update(&mut self, symbol: u32) {
        let _ = symbol;
        self.consumed += 1;
    }
}
