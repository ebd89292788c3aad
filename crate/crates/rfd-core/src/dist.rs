//! Exact categorical distributions backed by integer frequencies.

use crate::params::Rational;

/// A probability vector represented as `p(x) = freqs[x] / total`.
///
/// Every frequency is positive, so every probability is strictly positive
/// and the vector sums to one exactly in rational form. Consumers pick
/// their own precision: the coder uses the integer frequencies directly,
/// code-length accounting converts to `f64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalDist {
    freqs: Vec<u64>,
    total: u64,
}

impl CategoricalDist {
    /// Builds a distribution from positive frequencies.
    ///
    /// Panics if `freqs` is empty or contains a zero; all producers in this
    /// crate guarantee positive counts.
    pub fn new(freqs: Vec<u64>) -> Self {
        assert!(!freqs.is_empty(), "empty frequency vector");
        assert!(freqs.iter().all(|&f| f > 0), "frequencies must be positive");
        let total = freqs.iter().sum();
        Self { freqs, total }
    }

    pub fn alphabet_size(&self) -> u32 {
        self.freqs.len() as u32
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn freq(&self, symbol: u32) -> u64 {
        self.freqs[symbol as usize]
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    pub fn prob(&self, symbol: u32) -> f64 {
        self.freqs[symbol as usize] as f64 / self.total as f64
    }

    /// Probability as an exact (reduced) rational.
    pub fn prob_ratio(&self, symbol: u32) -> Rational {
        Rational::new(self.freqs[symbol as usize] as i128, self.total as i128)
    }

    /// `log2 p(x)`, computed as `log2(freq) - log2(total)`.
    pub fn log2_prob(&self, symbol: u32) -> f64 {
        (self.freqs[symbol as usize] as f64).log2() - (self.total as f64).log2()
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.alphabet_size()).map(|x| self.prob(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_probabilities() {
        let d = CategoricalDist::new(vec![1, 1]);
        assert_eq!(d.prob_ratio(0), Rational::new(1, 2));

        let d = CategoricalDist::new(vec![5, 1]);
        assert_eq!(d.total(), 6);
        assert_eq!(d.prob_ratio(0), Rational::new(5, 6));
        assert_eq!(d.prob_ratio(1), Rational::new(1, 6));

        let d = CategoricalDist::new(vec![3, 2, 5]);
        assert_eq!(d.prob(0), 0.3);
        assert_eq!(d.prob(1), 0.2);
        assert_eq!(d.prob(2), 0.5);
    }

    #[test]
    #[should_panic(expected = "positive")]
    fn rejects_zero_frequency() {
        CategoricalDist::new(vec![1, 0]);
    }
}
