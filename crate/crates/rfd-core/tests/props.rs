//! Randomized property tests for the estimator, the coder and the
//! container format.

use proptest::collection::vec;
use proptest::prelude::*;
use rfd_core::baselines::LaplaceModel;
use rfd_core::coder::{decode_with_model, encode_with_model};
use rfd_core::container::{decode_stream, encode_stream, CodedStream};
use rfd_core::estimator::{closed_form_predict, rescale_partition, run_trace, RfdModel, RfdState};
use rfd_core::params::{InitialCounts, RfdParams};

/// Arbitrary valid parameters with rescales likely: small scale, any
/// discount, mixed increments and initial counts.
fn arb_params() -> impl Strategy<Value = RfdParams> {
    (
        2u32..9,
        prop_oneof![Just(1u32), Just(2), Just(3), Just(8), Just(32)],
        prop_oneof![
            Just((0u32, 1u32)),
            Just((1, 4)),
            Just((1, 2)),
            Just((3, 4)),
            Just((7, 8)),
            (1u32..20, 20u32..40).prop_map(|(a, b)| (a, b)),
        ],
        4u32..80,
        any::<bool>(),
        any::<u64>(),
    )
        .prop_filter_map(
            "valid parameter combination",
            |(alphabet, d, c, scale, explicit, seed)| {
                let init = if explicit {
                    let mut s = seed;
                    let counts = (0..alphabet)
                        .map(|_| {
                            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
                            (s >> 33) as u32 % 5 + 1
                        })
                        .collect();
                    InitialCounts::Explicit(counts)
                } else {
                    InitialCounts::AllOnes
                };
                RfdParams::with_scale(alphabet, d, c, scale, init).ok()
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Counts stay positive, the total matches their sum and never
    /// exceeds the threshold.
    #[test]
    fn trace_state_invariants((params, seed) in arb_params().prop_flat_map(|p| {
        let a = p.alphabet_size();
        (Just(p), vec(0u32..a, 1..600))
    })) {
        let (params, xs) = (params, seed);
        let mut state = RfdState::init(&params);
        for &x in &xs {
            state.update(x, &params);
            prop_assert!(state.counts().iter().all(|&c| c >= 1));
            prop_assert_eq!(state.total(), state.counts().iter().sum::<u64>());
            prop_assert!(state.total() <= params.threshold() as u64);
        }
        prop_assert_eq!(state.step(), xs.len() as u64);
    }

    /// On a rescale-free run the trace equals the closed form exactly, as
    /// rationals, at every step and for every symbol.
    #[test]
    fn closed_form_matches_trace((alphabet, d, xs) in (2u32..6, 1u32..4, vec(0u32..2, 0..200))) {
        let xs: Vec<u32> = xs.iter().map(|&x| x % alphabet).collect();
        // Large enough that no rescale fires and the span condition holds
        // for c = 1/2.
        let threshold = alphabet + 2 * d * (xs.len() as u32 + 1);
        let params = RfdParams::new(alphabet, d, (1, 2), threshold, InitialCounts::AllOnes).unwrap();
        let trace = run_trace(&params, &xs).unwrap();
        prop_assert!(trace.state.rescale_steps().is_empty());
        for k in 0..xs.len() {
            for sym in 0..alphabet {
                let expect = closed_form_predict(&params, &xs[..k], sym).unwrap();
                prop_assert_eq!(trace.predictions[k].prob_ratio(sym), expect);
            }
        }
    }

    /// The rescale partition covers [1, n] with disjoint ordered
    /// intervals, each ending at a rescale step except possibly the last.
    #[test]
    fn partition_covers_everything((params, xs) in arb_params().prop_flat_map(|p| {
        let a = p.alphabet_size();
        (Just(p), vec(0u32..a, 1..600))
    })) {
        let n = xs.len() as u64;
        let trace = run_trace(&params, &xs).unwrap();
        let partition = rescale_partition(&trace.state, n);
        prop_assert_eq!(partition.first().map(|s| s.start), Some(1));
        prop_assert_eq!(partition.last().map(|s| s.end), Some(n));
        for w in partition.windows(2) {
            prop_assert_eq!(w[0].end + 1, w[1].start);
            // Interior boundaries sit on rescale steps.
            prop_assert!(trace.state.rescale_steps().contains(&w[0].end));
        }
    }

    /// Restarting from any reachable state reproduces the original
    /// predictions of the remaining suffix.
    #[test]
    fn restart_reproduces_suffix((params, xs, cut_frac) in arb_params().prop_flat_map(|p| {
        let a = p.alphabet_size();
        (Just(p), vec(0u32..a, 2..300), 0.0f64..1.0)
    })) {
        let cut = ((xs.len() as f64 * cut_frac) as usize).min(xs.len() - 1);
        let trace = run_trace(&params, &xs).unwrap();
        let mut state = RfdState::init(&params);
        for &x in &xs[..cut] {
            state.update(x, &params);
        }
        let restart = state.restart_params(&params).unwrap();
        let tail = run_trace(&restart, &xs[cut..]).unwrap();
        for (i, pred) in tail.predictions.iter().enumerate() {
            prop_assert_eq!(pred, &trace.predictions[cut + i]);
        }
    }

    /// Round trip through the raw coder is the identity and the slack
    /// budget holds.
    #[test]
    fn coder_roundtrip((params, xs) in arb_params().prop_flat_map(|p| {
        let a = p.alphabet_size();
        (Just(p), vec(0u32..a, 0..2000))
    })) {
        let model = RfdModel::new(params.clone());
        let (payload, meter) = encode_with_model(model, xs.iter().copied()).unwrap();
        let decoded = decode_with_model(RfdModel::new(params), &payload, xs.len() as u64).unwrap();
        prop_assert_eq!(decoded, xs);
        prop_assert!(meter.actual_bits as f64 >= meter.ideal_bits);
        prop_assert!(meter.slack() <= 64.0);
    }

    /// Container serialization round-trips losslessly.
    #[test]
    fn container_roundtrip((params, xs) in arb_params().prop_flat_map(|p| {
        let a = p.alphabet_size();
        (Just(p), vec(0u32..a, 0..500))
    })) {
        let (stream, _) = encode_stream(&params, &xs).unwrap();
        let bytes = stream.to_bytes();
        let parsed = CodedStream::from_bytes(&bytes).unwrap();
        prop_assert_eq!(&parsed, &stream);
        prop_assert_eq!(decode_stream(&parsed).unwrap(), xs);
    }

    /// The Laplace baseline codes every sequence it decodes back.
    #[test]
    fn laplace_coder_roundtrip(xs in vec(0u32..4, 0..800)) {
        let (payload, _) = encode_with_model(LaplaceModel::new(4), xs.iter().copied()).unwrap();
        let decoded = decode_with_model(LaplaceModel::new(4), &payload, xs.len() as u64).unwrap();
        prop_assert_eq!(decoded, xs);
    }
}

/// Exact structure checks on one deterministic heavy case: a long
/// skewed stream under a tiny threshold.
#[test]
fn long_skewed_stream_keeps_invariants() {
    let params = RfdParams::new(3, 2, (3, 4), 24, InitialCounts::AllOnes).unwrap();
    let xs: Vec<u32> = (0..20_000)
        .map(|i| if i % 17 == 0 { 1 } else { 0 })
        .collect();
    let trace = run_trace(&params, &xs).unwrap();
    let verdicts = rfd_core::checks::check_trace_structure(&trace, &params, xs.len() as u64);
    assert!(verdicts.all_pass());
    let model = RfdModel::new(params.clone());
    let (payload, meter) = encode_with_model(model, xs.iter().copied()).unwrap();
    let decoded = decode_with_model(RfdModel::new(params), &payload, xs.len() as u64).unwrap();
    assert_eq!(decoded, xs);
    assert!(meter.slack() >= 0.0 && meter.slack() <= 64.0);
}
