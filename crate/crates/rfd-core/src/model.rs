//! Sequential model interfaces.
//!
//! A [`Model`] maps each prefix of a sequence to a probability
//! distribution over the next symbol and is scored under log loss. A
//! [`FreqModel`] additionally exposes its prediction as exact integer
//! frequencies over a total, which is what the range coder consumes; every
//! `FreqModel` is a `Model` through the blanket impl. Real-valued models
//! (such as the piecewise stationary oracle) implement only `Model` and
//! are used for code-length accounting, never for coding.

use crate::dist::CategoricalDist;

/// A sequential predictor scored under log loss.
pub trait Model {
    fn alphabet_size(&self) -> u32;

    /// Probability assigned to `symbol` given the symbols consumed so far.
    fn prob(&self, symbol: u32) -> f64;

    /// Consumes the next symbol of the sequence.
    fn update(&mut self, symbol: u32);
}

/// A model whose predictions are exact integer frequencies.
pub trait FreqModel {
    /// Alphabet size; named apart from [`Model::alphabet_size`] so both
    /// traits can be in scope without qualification.
    fn num_symbols(&self) -> u32;

    /// Current frequency total. Always positive.
    fn total(&self) -> u64;

    /// Frequency of `symbol`. Always positive for in-range symbols.
    fn freq(&self, symbol: u32) -> u64;

    /// Consumes the next symbol; the counterpart of [`Model::update`].
    fn observe(&mut self, symbol: u32);

    /// Cumulative frequency of all symbols below `symbol`, plus the
    /// symbol's own frequency.
    fn cum_and_freq(&self, symbol: u32) -> (u64, u64) {
        let cum = (0..symbol).map(|x| self.freq(x)).sum();
        (cum, self.freq(symbol))
    }

    /// Finds the symbol whose cumulative slice `[cum, cum + freq)` contains
    /// `target`. Requires `target < total()`.
    fn find_symbol(&self, target: u64) -> (u32, u64) {
        let mut cum = 0u64;
        for x in 0..self.num_symbols() {
            let f = self.freq(x);
            if target < cum + f {
                return (x, cum);
            }
            cum += f;
        }
        unreachable!("target {target} not below total {}", self.total())
    }

    /// The full prediction as a distribution.
    fn dist(&self) -> CategoricalDist {
        CategoricalDist::new((0..self.num_symbols()).map(|x| self.freq(x)).collect())
    }
}

impl<M: FreqModel> Model for M {
    fn alphabet_size(&self) -> u32 {
        self.num_symbols()
    }

    fn prob(&self, symbol: u32) -> f64 {
        self.freq(symbol) as f64 / self.total() as f64
    }

    fn update(&mut self, symbol: u32) {
        self.observe(symbol);
    }
}

/// Total ideal code length `sum_k -log2 p(x_k)` of a sequence under a
/// model, consuming the model. Returns infinity as soon as an observed
/// symbol has probability zero.
pub fn ideal_bits<M: Model>(mut model: M, symbols: &[u32]) -> f64 {
    let mut bits = 0.0;
    for &x in symbols {
        assert!(x < model.alphabet_size(), "symbol out of range");
        let p = model.prob(x);
        if p <= 0.0 {
            return f64::INFINITY;
        }
        bits -= p.log2();
        model.update(x);
    }
    bits
}
