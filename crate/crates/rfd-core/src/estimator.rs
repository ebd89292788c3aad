//! The discounted relative-frequency estimator.
//!
//! State is a vector of integer counts `s[x]` and their total `t`. The
//! prediction for the next symbol is `s[x] / t`. After observing symbol
//! `x` the counts are updated:
//!
//! * if `t + d > T`, a *rescale* fires first: every count is replaced by
//!   `floor(c * s[x])`, zero cells are fixed up to 1, and `t` is recomputed
//!   as the new sum;
//! * then (in both branches) `s[x] += d` and `t += d`.
//!
//! State evolution uses integer arithmetic only, so traces are bit-exact
//! across runs and platforms, which is what makes encoder and decoder stay
//! in lockstep. Steps are numbered from 1; a rescale "in step k" happens
//! inside the k-th update, before the increment.

use crate::dist::CategoricalDist;
use crate::model::FreqModel;
use crate::params::{InitialCounts, ParamError, Rational, RfdParams};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimatorError {
    #[error("symbol {symbol} out of range for alphabet of size {alphabet_size}")]
    SymbolOutOfRange { symbol: u32, alphabet_size: u32 },
    #[error("a rescale fires at step {step}, inside the prefix; the closed form does not apply")]
    RescaleInPrefix { step: u64 },
}

/// A closed interval `[start, end]` of 1-based step indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepInterval {
    pub start: u64,
    pub end: u64,
}

impl StepInterval {
    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false // intervals are non-empty by construction
    }

    pub fn contains(&self, step: u64) -> bool {
        self.start <= step && step <= self.end
    }
}

/// Mutable estimator state: counts, their total, the number of completed
/// updates and the steps at which rescales fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RfdState {
    counts: Vec<u64>,
    total: u64,
    step: u64,
    rescale_steps: Vec<u64>,
}

impl RfdState {
    /// Fresh state from the initial counts.
    pub fn init(params: &RfdParams) -> Self {
        let counts: Vec<u64> = (0..params.alphabet_size())
            .map(|x| params.initial_count(x))
            .collect();
        let total = counts.iter().sum();
        Self {
            counts,
            total,
            step: 0,
            rescale_steps: Vec::new(),
        }
    }

    /// Prediction from the current counts. Does not mutate.
    pub fn predict(&self) -> CategoricalDist {
        CategoricalDist::new(self.counts.clone())
    }

    /// Consumes one symbol: rescale if the total would exceed the
    /// threshold, then increment.
    pub fn update(&mut self, symbol: u32, params: &RfdParams) {
        debug_assert!((symbol as usize) < self.counts.len());
        let d = params.increment() as u64;
        if self.total + d > params.threshold() as u64 {
            let mut total = 0u64;
            for c in self.counts.iter_mut() {
                *c = params.discount_floor(*c).max(1);
                total += *c;
            }
            self.total = total;
            self.rescale_steps.push(self.step + 1);
        }
        self.counts[symbol as usize] += d;
        self.total += d;
        self.step += 1;
        debug_assert_eq!(self.total, self.counts.iter().sum::<u64>());
        debug_assert!(self.total <= params.threshold() as u64 + d);
    }

    /// Range-checked [`RfdState::update`].
    pub fn try_update(&mut self, symbol: u32, params: &RfdParams) -> Result<(), EstimatorError> {
        if symbol >= params.alphabet_size() {
            return Err(EstimatorError::SymbolOutOfRange {
                symbol,
                alphabet_size: params.alphabet_size(),
            });
        }
        self.update(symbol, params);
        Ok(())
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of completed updates.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// 1-based steps at which a rescale fired, in increasing order.
    pub fn rescale_steps(&self) -> &[u64] {
        &self.rescale_steps
    }

    /// Parameters that restart the estimator from the current counts, used
    /// by the segment-restart property: running a fresh estimator with
    /// these parameters on a segment's symbols reproduces the original
    /// per-step predictions of that segment.
    pub fn restart_params(&self, params: &RfdParams) -> Result<RfdParams, ParamError> {
        let counts = self.counts.iter().map(|&c| c as u32).collect();
        RfdParams::new(
            params.alphabet_size(),
            params.increment(),
            params.discount(),
            params.threshold(),
            InitialCounts::Explicit(counts),
        )
    }
}

/// The estimator as a sequential model.
#[derive(Debug, Clone)]
pub struct RfdModel {
    params: RfdParams,
    state: RfdState,
}

impl RfdModel {
    pub fn new(params: RfdParams) -> Self {
        let state = RfdState::init(&params);
        Self { params, state }
    }

    pub fn params(&self) -> &RfdParams {
        &self.params
    }

    pub fn state(&self) -> &RfdState {
        &self.state
    }
}

impl FreqModel for RfdModel {
    fn num_symbols(&self) -> u32 {
        self.params.alphabet_size()
    }

    fn total(&self) -> u64 {
        self.state.total()
    }

    fn freq(&self, symbol: u32) -> u64 {
        self.state.counts()[symbol as usize]
    }

    fn observe(&mut self, symbol: u32) {
        assert!(
            symbol < self.params.alphabet_size(),
            "symbol {symbol} out of range"
        );
        self.state.update(symbol, &self.params);
    }
}

/// Full record of a run: the prediction used at each step, the total after
/// each update, and the final state (which carries the rescale steps).
#[derive(Debug, Clone)]
pub struct Trace {
    /// Element `k - 1` is the prediction in effect at step `k`, i.e. the
    /// model's distribution after consuming `x^{k-1}`.
    pub predictions: Vec<CategoricalDist>,
    /// Element `k - 1` is the total `t` at the end of step `k`.
    pub totals_after: Vec<u64>,
    pub state: RfdState,
}

impl Trace {
    pub fn len(&self) -> u64 {
        self.predictions.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.predictions.is_empty()
    }
}

/// Runs the predict/update pairs over a whole sequence.
///
/// Deterministic: identical inputs produce identical traces, including the
/// rescale steps.
pub fn run_trace(params: &RfdParams, symbols: &[u32]) -> Result<Trace, EstimatorError> {
    let mut state = RfdState::init(params);
    let mut predictions = Vec::with_capacity(symbols.len());
    let mut totals_after = Vec::with_capacity(symbols.len());
    for &x in symbols {
        predictions.push(state.predict());
        state.try_update(x, params)?;
        totals_after.push(state.total());
    }
    Ok(Trace {
        predictions,
        totals_after,
        state,
    })
}

/// Partition of `[1, n]` induced by a sorted list of rescale steps: each
/// interval ends at a rescale step, except possibly the last.
pub fn partition_from_rescales(rescale_steps: &[u64], n: u64) -> Vec<StepInterval> {
    debug_assert!(rescale_steps.windows(2).all(|w| w[0] < w[1]));
    let mut out = Vec::new();
    let mut start = 1;
    for &r in rescale_steps.iter().take_while(|&&r| r <= n) {
        out.push(StepInterval { start, end: r });
        start = r + 1;
    }
    if start <= n {
        out.push(StepInterval { start, end: n });
    }
    out
}

/// Rescale partition of `[1, n]` for a finished run.
pub fn rescale_partition(state: &RfdState, n: u64) -> Vec<StepInterval> {
    partition_from_rescales(state.rescale_steps(), n)
}

/// Prediction after a rescale-free prefix, in closed form:
/// `(s0(x) + d * count of x in prefix) / (t0 + d * k)`.
///
/// Fails with the first offending step if a rescale fires anywhere in the
/// prefix (the closed form is only valid on rescale-free prefixes).
pub fn closed_form_predict(
    params: &RfdParams,
    prefix: &[u32],
    symbol: u32,
) -> Result<Rational, EstimatorError> {
    let n_sym = params.alphabet_size();
    if symbol >= n_sym {
        return Err(EstimatorError::SymbolOutOfRange {
            symbol,
            alphabet_size: n_sym,
        });
    }
    if let Some(&bad) = prefix.iter().find(|&&x| x >= n_sym) {
        return Err(EstimatorError::SymbolOutOfRange {
            symbol: bad,
            alphabet_size: n_sym,
        });
    }
    let d = params.increment() as u64;
    let t0 = params.initial_total();
    let k = prefix.len() as u64;
    // No rescale in steps 1..=k  <=>  t0 + d * k <= T.
    if t0 + d * k > params.threshold() as u64 {
        let first = (params.threshold() as u64 - t0) / d + 1;
        return Err(EstimatorError::RescaleInPrefix { step: first });
    }
    let count = prefix.iter().filter(|&&x| x == symbol).count() as u64;
    Ok(Rational::new(
        (params.initial_count(symbol) + d * count) as i128,
        (t0 + d * k) as i128,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::InitialCounts;

    fn params(n: u32, d: u32, c: (u32, u32), t: u32, s0: Option<Vec<u32>>) -> RfdParams {
        let init = match s0 {
            Some(v) => InitialCounts::Explicit(v),
            None => InitialCounts::AllOnes,
        };
        RfdParams::new(n, d, c, t, init).unwrap()
    }

    #[test]
    fn init_copies_counts() {
        let p = params(3, 1, (0, 1), 10, Some(vec![2, 1, 1]));
        let s = RfdState::init(&p);
        assert_eq!(s.counts(), &[2, 1, 1]);
        assert_eq!(s.total(), 4);
        assert_eq!(s.step(), 0);
        assert!(s.rescale_steps().is_empty());
    }

    #[test]
    fn update_without_rescale() {
        let p = params(2, 1, (0, 1), 10, None);
        let mut s = RfdState::init(&p);
        s.update(1, &p);
        assert_eq!(s.counts(), &[1, 2]);
        assert_eq!(s.total(), 3);
        assert!(s.rescale_steps().is_empty());
    }

    #[test]
    fn update_with_rescale() {
        // Hand-executed: s = (6, 3), t = 9, T = 10, d = 2, c = 1/2,
        // observe symbol 0 -> rescale to (3, 1), t = 4, then (5, 1), t = 6.
        let p = params(2, 2, (1, 2), 10, Some(vec![6, 3]));
        let mut s = RfdState::init(&p);
        s.update(0, &p);
        assert_eq!(s.counts(), &[5, 1]);
        assert_eq!(s.total(), 6);
        assert_eq!(s.rescale_steps(), &[1]);
    }

    #[test]
    fn rescale_zero_fixup() {
        // s = (1, 8): floor(0.5 * 1) = 0 is fixed up to 1, floor(4) = 4,
        // t = 5; then the increment gives (3, 4), t = 7.
        let p = params(2, 2, (1, 2), 10, Some(vec![1, 8]));
        let mut s = RfdState::init(&p);
        s.update(0, &p);
        assert_eq!(s.counts(), &[3, 4]);
        assert_eq!(s.total(), 7);
    }

    #[test]
    fn trace_matches_simple_closed_form() {
        // d = 1, c = 0, T = 100: predictions for symbol 0 after prefixes of
        // 0s are 1/2, 2/3, 3/4.
        let p = params(2, 1, (0, 1), 100, None);
        let trace = run_trace(&p, &[0, 0, 1]).unwrap();
        assert_eq!(trace.predictions[0].prob_ratio(0), Rational::new(1, 2));
        assert_eq!(trace.predictions[1].prob_ratio(0), Rational::new(2, 3));
        assert_eq!(trace.predictions[2].prob_ratio(0), Rational::new(3, 4));
    }

    #[test]
    fn reference_trace_with_rescale() {
        // Frozen against an independent hand execution of the update rule:
        // N = 3, d = 2, c = 1/3, T = 12, s0 = (1,1,1),
        // sequence 0 1 0 2 0 0 1 0.
        let p = params(3, 2, (1, 3), 12, None);
        let seq = [0, 1, 0, 2, 0, 0, 1, 0];
        let trace = run_trace(&p, &seq).unwrap();
        let expected: [(u64, u64); 8] = [
            (1, 3),
            (1, 5),
            (3, 7),
            (1, 9),
            (5, 11),
            (3, 5),
            (1, 7),
            (5, 9),
        ];
        for (k, &(f, t)) in expected.iter().enumerate() {
            assert_eq!(trace.predictions[k].freq(seq[k]), f, "step {}", k + 1);
            assert_eq!(trace.predictions[k].total(), t, "step {}", k + 1);
        }
        assert_eq!(trace.state.counts(), &[7, 3, 1]);
        assert_eq!(trace.state.total(), 11);
        assert_eq!(trace.state.rescale_steps(), &[5]);
    }

    #[test]
    fn empty_trace() {
        let p = params(2, 1, (0, 1), 10, None);
        let trace = run_trace(&p, &[]).unwrap();
        assert!(trace.is_empty());
        assert_eq!(trace.state, RfdState::init(&p));
    }

    #[test]
    fn traces_are_deterministic() {
        let p = params(4, 2, (1, 2), 20, None);
        let seq: Vec<u32> = (0..200).map(|i| (i * 7 % 4) as u32).collect();
        let a = run_trace(&p, &seq).unwrap();
        let b = run_trace(&p, &seq).unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(a.predictions, b.predictions);
    }

    #[test]
    fn out_of_range_symbol_is_rejected() {
        let p = params(2, 1, (0, 1), 10, None);
        assert_eq!(
            run_trace(&p, &[0, 2]).unwrap_err(),
            EstimatorError::SymbolOutOfRange {
                symbol: 2,
                alphabet_size: 2
            }
        );
    }

    #[test]
    fn partition_examples() {
        assert_eq!(
            partition_from_rescales(&[], 5),
            vec![StepInterval { start: 1, end: 5 }]
        );
        assert_eq!(
            partition_from_rescales(&[3, 7], 10),
            vec![
                StepInterval { start: 1, end: 3 },
                StepInterval { start: 4, end: 7 },
                StepInterval { start: 8, end: 10 },
            ]
        );
        // A rescale at the final step stays inside the last segment.
        assert_eq!(
            partition_from_rescales(&[3, 7], 7),
            vec![
                StepInterval { start: 1, end: 3 },
                StepInterval { start: 4, end: 7 },
            ]
        );
        assert!(partition_from_rescales(&[], 0).is_empty());
    }

    #[test]
    fn closed_form_examples() {
        let p = params(2, 1, (0, 1), 100, None);
        // k = 0 -> s0(x) / t0
        assert_eq!(
            closed_form_predict(&p, &[], 0).unwrap(),
            Rational::new(1, 2)
        );
        // s0 = (1,1), d = 1, prefix (0,0), symbol 0 -> 3/4
        assert_eq!(
            closed_form_predict(&p, &[0, 0], 0).unwrap(),
            Rational::new(3, 4)
        );
        // s0 = (1,1), d = 3, prefix (0,1), symbol 1 -> 4/8
        let p3 = params(2, 3, (0, 1), 100, None);
        assert_eq!(
            closed_form_predict(&p3, &[0, 1], 1).unwrap(),
            Rational::new(4, 8)
        );
    }

    #[test]
    fn closed_form_rejects_rescaled_prefix() {
        // t0 = 2, d = 1, T = 4: first rescale at step 3.
        let p = params(2, 1, (0, 1), 4, None);
        assert_eq!(
            closed_form_predict(&p, &[0, 0, 0], 0).unwrap_err(),
            EstimatorError::RescaleInPrefix { step: 3 }
        );
    }

    #[test]
    fn segment_restart_reproduces_predictions() {
        let p = params(3, 2, (1, 3), 12, None);
        let seq = [0u32, 1, 0, 2, 0, 0, 1, 0, 2, 2, 0, 1];
        let trace = run_trace(&p, &seq).unwrap();
        // Restart from the state at the end of step 5 (a rescale step) and
        // replay the tail.
        let mut state = RfdState::init(&p);
        for &x in &seq[..5] {
            state.update(x, &p);
        }
        let restart = state.restart_params(&p).unwrap();
        let tail_trace = run_trace(&restart, &seq[5..]).unwrap();
        for (i, pred) in tail_trace.predictions.iter().enumerate() {
            assert_eq!(pred, &trace.predictions[5 + i]);
        }
    }
}
