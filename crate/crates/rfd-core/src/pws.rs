//! Piecewise stationary competitors and the sequences they generate.
//!
//! A [`PwsSpec`] partitions `[1, n]` into segments and fixes one
//! probability distribution per segment. It serves as the competitor in
//! redundancy experiments and as a sequence source. Sampling uses
//! `ChaCha12Rng`, a portable seedable generator, so every experiment table
//! is reproducible from its seed.

use crate::estimator::StepInterval;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance for "sums to one" checks on real-valued distributions.
const SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PwsError {
    #[error("breakpoints must be strictly increasing and end at n = {n}")]
    BadBreakpoints { n: u64 },
    #[error("expected {expected} distributions, got {got}")]
    WrongDistCount { expected: usize, got: usize },
    #[error("distribution {index} does not sum to 1 (sum = {sum})")]
    NotNormalized { index: usize, sum: f64 },
    #[error("distribution {index} has a negative entry")]
    NegativeProbability { index: usize },
    #[error("distribution {index} has max probability {max}, above 1 - eps = {cap}")]
    EpsCapViolated { index: usize, max: f64, cap: f64 },
    #[error("eps must lie in [0, 1), got {eps}")]
    EpsOutOfRange { eps: f64 },
    #[error("eps = {eps} infeasible for alphabet size {alphabet_size}: 1 - eps < 1/N")]
    InfeasibleEps { eps: f64, alphabet_size: u32 },
    #[error("segment count {segments} must lie in 1..=n for n = {n}")]
    BadSegmentCount { segments: u64, n: u64 },
    #[error("distributions must be non-empty and share one alphabet size")]
    InconsistentAlphabet,
}

/// A piecewise stationary model: a partition of `[1, n]` with one fixed
/// distribution per segment, and optionally a bound `1 - eps` on every
/// probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwsSpec {
    n: u64,
    /// Right endpoints `i_1 < i_2 < ... < i_s = n` of the segments.
    breakpoints: Vec<u64>,
    dists: Vec<Vec<f64>>,
    eps: Option<f64>,
    /// Provenance: the seed this spec was generated from, when it was.
    seed: Option<u64>,
}

impl PwsSpec {
    pub fn new(
        n: u64,
        breakpoints: Vec<u64>,
        dists: Vec<Vec<f64>>,
        eps: Option<f64>,
    ) -> Result<Self, PwsError> {
        let spec = Self {
            n,
            breakpoints,
            dists,
            eps,
            seed: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Single-segment spec over `[1, n]`.
    pub fn single(n: u64, dist: Vec<f64>) -> Result<Self, PwsError> {
        let breakpoints = if n == 0 { vec![] } else { vec![n] };
        let dists = if n == 0 { vec![] } else { vec![dist] };
        Self::new(n, breakpoints, dists, None)
    }

    fn validate(&self) -> Result<(), PwsError> {
        if self.n == 0 {
            if !self.breakpoints.is_empty() || !self.dists.is_empty() {
                return Err(PwsError::BadBreakpoints { n: 0 });
            }
            return Ok(());
        }
        let increasing = self.breakpoints.windows(2).all(|w| w[0] < w[1]);
        if self.breakpoints.is_empty()
            || !increasing
            || *self.breakpoints.last().unwrap() != self.n
            || self.breakpoints[0] == 0
        {
            return Err(PwsError::BadBreakpoints { n: self.n });
        }
        if self.dists.len() != self.breakpoints.len() {
            return Err(PwsError::WrongDistCount {
                expected: self.breakpoints.len(),
                got: self.dists.len(),
            });
        }
        let alphabet = self.dists[0].len();
        if alphabet == 0 || self.dists.iter().any(|d| d.len() != alphabet) {
            return Err(PwsError::InconsistentAlphabet);
        }
        if let Some(eps) = self.eps {
            if !(0.0..1.0).contains(&eps) {
                return Err(PwsError::EpsOutOfRange { eps });
            }
        }
        for (i, dist) in self.dists.iter().enumerate() {
            if dist.iter().any(|&p| p < 0.0) {
                return Err(PwsError::NegativeProbability { index: i });
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(PwsError::NotNormalized { index: i, sum });
            }
            if let Some(eps) = self.eps {
                let cap = 1.0 - eps;
                let max = dist.iter().cloned().fold(0.0, f64::max);
                if max > cap + SUM_TOL {
                    return Err(PwsError::EpsCapViolated { index: i, max, cap });
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> u64 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn num_segments(&self) -> u64 {
        self.breakpoints.len() as u64
    }

    pub fn alphabet_size(&self) -> u32 {
        self.dists.first().map_or(0, |d| d.len() as u32)
    }

    pub fn eps(&self) -> Option<f64> {
        self.eps
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dists(&self) -> &[Vec<f64>] {
        &self.dists
    }

    /// The segments as step intervals.
    pub fn segments(&self) -> Vec<StepInterval> {
        let mut out = Vec::with_capacity(self.breakpoints.len());
        let mut start = 1;
        for &end in &self.breakpoints {
            out.push(StepInterval { start, end });
            start = end + 1;
        }
        out
    }

    /// Index of the segment containing 1-based step `k`.
    pub fn segment_index(&self, step: u64) -> usize {
        debug_assert!(step >= 1 && step <= self.n);
        self.breakpoints.partition_point(|&b| b < step)
    }

    /// Distribution in effect at 1-based step `k`.
    pub fn dist_at(&self, step: u64) -> &[f64] {
        &self.dists[self.segment_index(step)]
    }

    /// Ideal code length of a sequence under this model, in bits; infinite
    /// as soon as an observed symbol has probability zero.
    pub fn ideal_code_length(&self, symbols: &[u32]) -> f64 {
        assert_eq!(symbols.len() as u64, self.n, "sequence length mismatch");
        let mut bits = 0.0;
        for (k, &x) in symbols.iter().enumerate() {
            let p = self.dist_at(k as u64 + 1)[x as usize];
            if p <= 0.0 {
                return f64::INFINITY;
            }
            bits -= p.log2();
        }
        bits
    }

    /// Draws a sequence with i.i.d. symbols from each segment's
    /// distribution. Deterministic per seed.
    pub fn sample_sequence(&self, seed: u64) -> Vec<u32> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(self.n as usize);
        for seg in self.segments() {
            let dist = &self.dists[self.segment_index(seg.start)];
            for _ in seg.start..=seg.end {
                out.push(sample_from(dist, &mut rng));
            }
        }
        out
    }
}

fn sample_from(dist: &[f64], rng: &mut ChaCha12Rng) -> u32 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (x, &p) in dist.iter().enumerate() {
        acc += p;
        if u < acc {
            return x as u32;
        }
    }
    dist.len() as u32 - 1
}

/// Draws one distribution: symmetric Dirichlet(1) via normalized
/// exponentials, rejection-sampled against the eps cap. After too many
/// rejections the draw is blended toward uniform just enough to satisfy
/// the cap.
fn random_dist(alphabet: u32, eps: f64, rng: &mut ChaCha12Rng) -> Vec<f64> {
    let n = alphabet as usize;
    let cap = 1.0 - eps;
    for attempt in 0..64 {
        let mut w: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                -(1.0 - u).ln()
            })
            .collect();
        let sum: f64 = w.iter().sum();
        if sum <= 0.0 {
            continue;
        }
        for p in w.iter_mut() {
            *p /= sum;
        }
        let max = w.iter().cloned().fold(0.0, f64::max);
        if eps == 0.0 || max <= cap {
            return w;
        }
        if attempt == 63 {
            // Blend toward uniform: (1 - lam) * p + lam / N with the
            // smallest lam that brings the max down to the cap.
            let lam = (max - cap) / (max - 1.0 / n as f64);
            for p in w.iter_mut() {
                *p = (1.0 - lam) * *p + lam / n as f64;
            }
            return w;
        }
    }
    vec![1.0 / n as f64; n]
}

/// Generates a random piecewise stationary spec: `segments` breakpoints
/// drawn uniformly without replacement, one random distribution per
/// segment, all with max probability at most `1 - eps` when `eps > 0`.
pub fn random_pws(
    n: u64,
    segments: u64,
    alphabet: u32,
    eps: f64,
    seed: u64,
) -> Result<PwsSpec, PwsError> {
    if !(0.0..1.0).contains(&eps) {
        return Err(PwsError::EpsOutOfRange { eps });
    }
    if alphabet >= 1 && 1.0 - eps < 1.0 / alphabet as f64 {
        return Err(PwsError::InfeasibleEps {
            eps,
            alphabet_size: alphabet,
        });
    }
    if segments == 0 || segments > n {
        return Err(PwsError::BadSegmentCount { segments, n });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // Internal breakpoints are segments-1 distinct values from [1, n-1].
    let mut breakpoints: Vec<u64> =
        index::sample(&mut rng, (n - 1) as usize, (segments - 1) as usize)
            .into_iter()
            .map(|i| i as u64 + 1)
            .collect();
    breakpoints.sort_unstable();
    breakpoints.push(n);
    let dists: Vec<Vec<f64>> = (0..segments)
        .map(|_| random_dist(alphabet, eps, &mut rng))
        .collect();
    let mut spec = PwsSpec::new(n, breakpoints, dists, (eps > 0.0).then_some(eps))?;
    spec.seed = Some(seed);
    Ok(spec)
}

/// The two-regime scenario: `m` copies of symbol 0 followed by `m` copies
/// of symbol 1, paired with the matching two-segment competitor. With
/// `eps` set, each segment's mass is capped at `1 - eps` and the remainder
/// spread over the other symbols.
pub fn recency_scenario(m: u64, alphabet: u32, eps: Option<f64>) -> (Vec<u32>, PwsSpec) {
    assert!(m >= 1 && alphabet >= 2);
    let mut seq = vec![0u32; m as usize];
    seq.extend(std::iter::repeat_n(1, m as usize));
    let point_mass = |on: usize| -> Vec<f64> {
        let mut d = vec![0.0; alphabet as usize];
        match eps {
            None => d[on] = 1.0,
            Some(e) => {
                let rest = e / (alphabet as f64 - 1.0);
                d.fill(rest);
                d[on] = 1.0 - e;
            }
        }
        d
    };
    let spec = PwsSpec::new(
        2 * m,
        vec![m, 2 * m],
        vec![point_mass(0), point_mass(1)],
        eps,
    )
    .expect("recency spec is valid");
    (seq, spec)
}
