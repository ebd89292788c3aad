//! Structural validators: every run of the estimator must satisfy a set
//! of exact integer inequalities on its totals and its rescale partition,
//! and the analysis rests on a combinatorial bound for induced partitions
//! and a multinomial inequality. These checkers re-derive all of them from
//! raw traces so that randomized runs can falsify them.

use crate::estimator::{partition_from_rescales, StepInterval, Trace};
use crate::params::RfdParams;
use statrs::function::gamma::ln_gamma;

/// Verdicts of the per-trace structure checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureVerdicts {
    /// Totals: `t <= T` after every update, and after a rescaling update
    /// `t <= d + N + c d L`, checked exactly in integers.
    pub total_bounds: bool,
    /// Rescale partition: first segment length in `[1, L+1]`, interior
    /// lengths in `[floor((1-c)L), L]`, last length in `[1, L]` when the
    /// partition has more than one segment.
    pub segment_lengths: bool,
    /// Partition size: `(|R| - 2) * floor((1-c)L) <= n`.
    pub segment_count: bool,
}

impl StructureVerdicts {
    pub fn all_pass(&self) -> bool {
        self.total_bounds && self.segment_lengths && self.segment_count
    }
}

/// Runs every structure check against a finished trace.
pub fn check_trace_structure(trace: &Trace, params: &RfdParams, n: u64) -> StructureVerdicts {
    debug_assert_eq!(trace.len(), n);
    let d = params.increment() as u64;
    let alpha = params.alphabet_size() as u64;
    let threshold = params.threshold() as u64;
    let (c_num, c_den) = params.discount();
    let span = threshold - alpha; // T - N >= 0 for valid params

    let mut total_bounds = true;
    let rescales = trace.state.rescale_steps();
    let mut next_rescale = 0usize;
    for (i, &t) in trace.totals_after.iter().enumerate() {
        let step = i as u64 + 1;
        if t > threshold {
            total_bounds = false;
        }
        let rescaled_here = next_rescale < rescales.len() && rescales[next_rescale] == step;
        if rescaled_here {
            next_rescale += 1;
            // t <= d + N + c d L  <=>  (t - d - N) * den <= num * (T - N)
            let lhs = (t as i128 - d as i128 - alpha as i128) * c_den as i128;
            let rhs = c_num as i128 * span as i128;
            if lhs > rhs {
                total_bounds = false;
            }
        }
    }

    let partition = partition_from_rescales(rescales, n);
    let min_gap = params.derived().min_gap;
    let mut segment_lengths = true;
    let last = partition.len().saturating_sub(1);
    for (i, seg) in partition.iter().enumerate() {
        let m = seg.len();
        let ok = if i == 0 {
            // m <= L + 1  <=>  (m - 1) d <= T - N
            (m - 1) * d <= span
        } else if i == last {
            m * d <= span
        } else {
            m * d <= span && m >= min_gap
        };
        if !ok {
            segment_lengths = false;
        }
    }

    let r_size = partition.len() as u64;
    let segment_count = r_size <= 2 || (r_size - 2) * min_gap <= n;

    StructureVerdicts {
        total_bounds,
        segment_lengths,
        segment_count,
    }
}

fn count_in_range(sorted: &[u64], lo: u64, hi: u64) -> u64 {
    if hi < lo {
        return 0;
    }
    let a = sorted.partition_point(|&x| x < lo);
    let b = sorted.partition_point(|&x| x <= hi);
    (b - a) as u64
}

/// Size of the rescale partition induced on `[start, end]`: one segment
/// per rescale strictly inside the interval, plus the tail.
pub fn induced_partition_size(rescale_steps: &[u64], interval: StepInterval) -> u64 {
    count_in_range(rescale_steps, interval.start, interval.end - 1) + 1
}

/// Checks `|R| <= sum_I |R_I| <= |R| + |S| - 1` for the rescale partition
/// of `[1, n]` and the partitions it induces on the competitor's segments.
/// The segments must partition `[1, n]`.
pub fn check_partition_counts(rescale_steps: &[u64], segments: &[StepInterval], n: u64) -> bool {
    if n == 0 || segments.is_empty() {
        return true;
    }
    let r_size = induced_partition_size(rescale_steps, StepInterval { start: 1, end: n });
    let sum: u64 = segments
        .iter()
        .map(|&seg| induced_partition_size(rescale_steps, seg))
        .sum();
    let s_size = segments.len() as u64;
    r_size <= sum && sum < r_size + s_size
}

/// Checks the multinomial inequality
/// `log2 binom(n; c(1), ..., c(N)) <= sum_x c(x) log2(1/p(x))`
/// for non-negative counts with positive sum. The left side is evaluated
/// through the log-gamma function; the comparison allows `1e-9` relative
/// slack for the floating-point evaluation. Zero-probability cells with
/// positive counts make the right side infinite, so the check passes.
pub fn check_multinomial_bound(counts: &[u64], p: &[f64]) -> bool {
    assert_eq!(counts.len(), p.len());
    let n: u64 = counts.iter().sum();
    assert!(n > 0, "counts must have positive sum");
    let ln2 = std::f64::consts::LN_2;
    let mut lhs = ln_gamma(n as f64 + 1.0);
    for &c in counts {
        lhs -= ln_gamma(c as f64 + 1.0);
    }
    lhs /= ln2;
    let mut rhs = 0.0f64;
    for (&c, &px) in counts.iter().zip(p) {
        if c > 0 {
            if px <= 0.0 {
                return true;
            }
            rhs -= c as f64 * px.log2();
        }
    }
    lhs <= rhs + 1e-9 * (1.0 + rhs.abs())
}

/// Per-symbol counts of a sequence.
pub fn symbol_counts(symbols: &[u32], alphabet_size: u32) -> Vec<u64> {
    let mut counts = vec![0u64; alphabet_size as usize];
    for &x in symbols {
        counts[x as usize] += 1;
    }
    counts
}

/// Code length of a sequence under the best fixed distribution in
/// hindsight, which is its empirical distribution: `sum_x c(x) log2(n / c(x))`.
pub fn hindsight_fixed_code_length(symbols: &[u32], alphabet_size: u32) -> f64 {
    let n = symbols.len() as f64;
    if symbols.is_empty() {
        return 0.0;
    }
    symbol_counts(symbols, alphabet_size)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| c as f64 * (n / c as f64).log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::run_trace;
    use crate::params::{InitialCounts, RfdParams};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn rescale_free_trace_passes_trivially() {
        let p = RfdParams::new(2, 1, (0, 1), 1000, InitialCounts::AllOnes).unwrap();
        let xs: Vec<u32> = (0..100).map(|i| (i % 2) as u32).collect();
        let trace = run_trace(&p, &xs).unwrap();
        assert!(trace.state.rescale_steps().is_empty());
        assert!(check_trace_structure(&trace, &p, 100).all_pass());
    }

    #[test]
    fn interior_segments_have_exact_length_at_zero_discount() {
        // c = 0, d = 1, T = N + 4: interior segments are exactly L = 4 long.
        let p = RfdParams::new(2, 1, (0, 1), 6, InitialCounts::AllOnes).unwrap();
        let xs: Vec<u32> = (0..40).map(|i| (i % 2) as u32).collect();
        let trace = run_trace(&p, &xs).unwrap();
        let verdicts = check_trace_structure(&trace, &p, 40);
        assert!(verdicts.all_pass());
        let partition = partition_from_rescales(trace.state.rescale_steps(), 40);
        assert!(partition.len() > 3);
        for seg in &partition[1..partition.len() - 1] {
            assert_eq!(seg.len(), 4);
        }
    }

    #[test]
    fn structure_holds_on_randomized_traces() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let alphabet = *[2u32, 3, 4, 8].get(rng.random_range(0..4)).unwrap();
            let d = *[1u32, 2, 5].get(rng.random_range(0..3)).unwrap();
            let c = *[(0u32, 1u32), (1, 4), (1, 2), (3, 4)]
                .get(rng.random_range(0..4))
                .unwrap();
            let scale = rng.random_range(4..40) * 4;
            let p = match RfdParams::with_scale(alphabet, d, c, scale, InitialCounts::AllOnes) {
                Ok(p) => p,
                Err(_) => continue,
            };
            let n = rng.random_range(1..800);
            let xs: Vec<u32> = (0..n).map(|_| rng.random_range(0..alphabet)).collect();
            let trace = run_trace(&p, &xs).unwrap();
            let v = check_trace_structure(&trace, &p, n as u64);
            assert!(v.all_pass(), "params {p:?} n {n} verdicts {v:?}");
        }
    }

    #[test]
    fn induced_partition_sizes() {
        // Rescales at 3 and 7 on [1, 10].
        let steps = [3u64, 7];
        let whole = induced_partition_size(&steps, StepInterval { start: 1, end: 10 });
        assert_eq!(whole, 3);
        // Competitor equal to the whole interval: equality on both sides.
        assert!(check_partition_counts(
            &steps,
            &[StepInterval { start: 1, end: 10 }],
            10
        ));
        // No rescales: each induced partition is a single segment.
        assert!(check_partition_counts(
            &[],
            &[
                StepInterval { start: 1, end: 4 },
                StepInterval { start: 5, end: 10 }
            ],
            10
        ));
    }

    #[test]
    fn partition_counts_hold_for_random_partitions() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let n = 200u64;
        for _ in 0..500 {
            // Random rescale steps.
            let mut steps: Vec<u64> = (1..=n).filter(|_| rng.random::<f64>() < 0.15).collect();
            steps.dedup();
            // Random competitor partition.
            let mut cuts: Vec<u64> = (1..n).filter(|_| rng.random::<f64>() < 0.05).collect();
            cuts.push(n);
            cuts.dedup();
            let mut segments = Vec::new();
            let mut start = 1;
            for &end in &cuts {
                segments.push(StepInterval { start, end });
                start = end + 1;
            }
            assert!(
                check_partition_counts(&steps, &segments, n),
                "steps {steps:?} segments {segments:?}"
            );
        }
    }

    #[test]
    fn multinomial_equality_case() {
        // All mass on one cell with p = 1: both sides are zero.
        assert!(check_multinomial_bound(&[10, 0, 0], &[1.0, 0.0, 0.0]));
    }

    #[test]
    fn multinomial_with_empirical_distribution() {
        let counts = [3u64, 5, 2];
        let n: u64 = counts.iter().sum();
        let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        assert!(check_multinomial_bound(&counts, &p));
    }

    #[test]
    fn multinomial_random_cases() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let k = rng.random_range(2..6);
            let counts: Vec<u64> = (0..k).map(|_| rng.random_range(0..50)).collect();
            if counts.iter().sum::<u64>() == 0 {
                continue;
            }
            let mut p: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
            assert!(check_multinomial_bound(&counts, &p), "{counts:?} {p:?}");
        }
    }

    #[test]
    fn hindsight_code_length_is_minimal_over_fixed_distributions() {
        // Brute force: the empirical distribution minimizes the fixed-
        // distribution code length.
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let xs: Vec<u32> = (0..200).map(|_| rng.random_range(0..3)).collect();
        let best = hindsight_fixed_code_length(&xs, 3);
        for _ in 0..100 {
            let mut p: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 1e-6).collect();
            let s: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= s);
            let bits: f64 = xs.iter().map(|&x| -(p[x as usize]).log2()).sum();
            assert!(bits >= best - 1e-9);
        }
    }
}
