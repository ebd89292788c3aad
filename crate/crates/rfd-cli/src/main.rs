//! Command-line surface: compress/decompress files with the
//! discounted-frequency model, evaluate redundancy bounds, and run
//! randomized experiments against piecewise stationary competitors.
//!
//! Exit codes: 0 ok, 1 usage error, 2 runtime error.

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rfd_core::bounds::{
    bounded_pws_redundancy_bound, pws_redundancy_bound, segment_redundancy_bound,
    single_segment_bound, worst_case_rescale_count, BoundInputs,
};
use rfd_core::container::{compress_bytes, decompress_bytes};
use rfd_core::params::{InitialCounts, RfdParams};
use rfd_core::report::{
    example1_sweep, run_pws_trials, sqrt_scale, sweep_csv, trials_csv, TrialConfig,
};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "rfd",
    version,
    about = "Adaptive-frequency compressor and redundancy laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress a file over the byte alphabet (N = 256)
    Compress {
        /// Input file
        #[arg(short, long)]
        input: PathBuf,
        /// Output file
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Decompress a stream produced by `compress`
    Decompress {
        /// Input file
        #[arg(short, long)]
        input: PathBuf,
        /// Output file
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Randomized redundancy trials against piecewise stationary competitors
    Experiment {
        /// Sequence length per trial
        #[arg(long = "n", default_value_t = 10_000)]
        n: u64,
        /// Number of competitor segments
        #[arg(long, default_value_t = 3)]
        segments: u64,
        /// Alphabet size
        #[arg(long, default_value_t = 4)]
        alphabet: u32,
        /// Probability cap: every competitor probability is at most 1 - eps
        #[arg(long)]
        eps: Option<f64>,
        /// Number of trials
        #[arg(long, default_value_t = 20)]
        trials: u64,
        /// Base seed; trial i uses seed + i
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output prefix; writes PREFIX.csv and PREFIX.json
        #[arg(long)]
        out: PathBuf,
        /// Run the square-root scale sweep instead of fixed-n trials
        #[arg(long)]
        example1: bool,
        /// Discount numerator gamma for the sweep (c = gamma / L)
        #[arg(long, default_value_t = 0)]
        gamma: u64,
        /// Comma-separated sequence lengths for the sweep
        #[arg(long = "n-list", default_value = "1000,10000,100000", value_parser = parse_u64_list)]
        n_list: U64List,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Evaluate the redundancy bounds for a parameter set
    Bounds {
        /// Alphabet size
        #[arg(long, default_value_t = 256)]
        alphabet: u32,
        /// Sequence length
        #[arg(long = "n")]
        n: u64,
        /// Competitor segment count |S|
        #[arg(long, default_value_t = 1)]
        segments: u64,
        /// Measured rescale partition size |R| (worst case when omitted)
        #[arg(long)]
        rescales: Option<u64>,
        /// Probability cap parameter of the bounded competitor
        #[arg(long)]
        eps: Option<f64>,
        #[command(flatten)]
        params: ParamArgs,
    },
}

/// Discount flag value `NUM/DEN`.
#[derive(Debug, Clone, Copy)]
struct DiscountArg(u32, u32);

fn parse_discount(s: &str) -> Result<DiscountArg, String> {
    let parse_u32 = |tok: &str| {
        tok.trim()
            .parse::<u32>()
            .map_err(|_| format!("expected NUM/DEN with non-negative integers, got {s:?}"))
    };
    if let Some((num, den)) = s.split_once('/') {
        Ok(DiscountArg(parse_u32(num)?, parse_u32(den)?))
    } else {
        Ok(DiscountArg(parse_u32(s)?, 1))
    }
}

/// Comma-separated list flag value.
#[derive(Debug, Clone)]
struct U32List(Vec<u32>);

fn parse_u32_list(s: &str) -> Result<U32List, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|_| format!("expected comma-separated integers, got {s:?}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(U32List)
}

#[derive(Debug, Clone)]
struct U64List(Vec<u64>);

fn parse_u64_list(s: &str) -> Result<U64List, String> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u64>()
                .map_err(|_| format!("expected comma-separated integers, got {s:?}"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(U64List)
}

/// Estimator parameter flags shared by the subcommands.
#[derive(Args)]
struct ParamArgs {
    /// Per-observation increment d
    #[arg(long = "d")]
    increment: Option<u32>,
    /// Discount c as NUM/DEN (e.g. 1/2; plain 0 means no carry-over)
    #[arg(long = "c", value_parser = parse_discount)]
    discount: Option<DiscountArg>,
    /// Frequency threshold T
    #[arg(long = "T", conflicts_with = "scale")]
    threshold: Option<u32>,
    /// Segment scale L; implies T = N + d * L
    #[arg(long = "L")]
    scale: Option<u32>,
    /// Explicit initial counts, comma-separated (default: all ones)
    #[arg(long = "s0", value_parser = parse_u32_list)]
    initial_counts: Option<U32List>,
}

impl ParamArgs {
    /// Resolves the flags into validated parameters for `alphabet`, using
    /// `d`, `c` and threshold defaults when flags are absent.
    fn build(
        &self,
        alphabet: u32,
        default_increment: u32,
        default_discount: (u32, u32),
        default_threshold: u32,
    ) -> Result<RfdParams> {
        let d = self.increment.unwrap_or(default_increment);
        let c = match self.discount {
            Some(DiscountArg(num, den)) => (num, den),
            None => default_discount,
        };
        let s0 = match &self.initial_counts {
            None => InitialCounts::AllOnes,
            Some(U32List(counts)) => InitialCounts::Explicit(counts.clone()),
        };
        let params = match self.scale {
            Some(scale) => RfdParams::with_scale(alphabet, d, c, scale, s0)?,
            None => RfdParams::new(
                alphabet,
                d,
                c,
                self.threshold.unwrap_or(default_threshold),
                s0,
            )?,
        };
        Ok(params)
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    // `bounds` has no sensible default threshold; demanding the flag is a
    // usage matter, not a runtime failure.
    if let Command::Bounds { params, .. } = &cli.command {
        if params.threshold.is_none() && params.scale.is_none() {
            eprintln!("error: bounds needs --T or --L");
            std::process::exit(1);
        }
    }
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compress {
            input,
            output,
            params,
        } => cmd_compress(&input, &output, &params),
        Command::Decompress { input, output } => cmd_decompress(&input, &output),
        Command::Experiment {
            n,
            segments,
            alphabet,
            eps,
            trials,
            seed,
            out,
            example1,
            gamma,
            n_list,
            params,
        } => {
            if example1 {
                cmd_sweep(segments, &n_list.0, gamma, trials, alphabet, seed, &out)
            } else {
                cmd_experiment(n, segments, alphabet, eps, trials, seed, &out, &params)
            }
        }
        Command::Bounds {
            alphabet,
            n,
            segments,
            rescales,
            eps,
            params,
        } => cmd_bounds(alphabet, n, segments, rescales, eps, &params),
    }
}

fn cmd_compress(input: &Path, output: &Path, params: &ParamArgs) -> Result<()> {
    let data = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let params = params.build(256, 32, (1, 2), 1 << 16)?;
    let (container, meter) = compress_bytes(&params, &data)?;
    fs::write(output, &container).with_context(|| format!("writing {}", output.display()))?;
    println!("original size:   {} bytes", data.len());
    println!("compressed size: {} bytes", container.len());
    println!("ideal bits:      {:.2}", meter.ideal_bits);
    println!("actual bits:     {}", meter.actual_bits);
    println!("coder slack:     {:.2} bits", meter.slack());
    Ok(())
}

fn cmd_decompress(input: &Path, output: &Path) -> Result<()> {
    let container = fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let data = decompress_bytes(&container)?;
    fs::write(output, &data).with_context(|| format!("writing {}", output.display()))?;
    println!("compressed size: {} bytes", container.len());
    println!("original size:   {} bytes", data.len());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_experiment(
    n: u64,
    segments: u64,
    alphabet: u32,
    eps: Option<f64>,
    trials: u64,
    seed: u64,
    out: &Path,
    params: &ParamArgs,
) -> Result<()> {
    // Default parameters follow the square-root recipe: d = 1,
    // L = ceil(sqrt(n)), c = 1/L, T = N + L.
    let scale = sqrt_scale(n);
    let params = if params.threshold.is_none() && params.scale.is_none() {
        let d = params.increment.unwrap_or(1);
        let c = match params.discount {
            Some(DiscountArg(num, den)) => (num, den),
            None => (1, scale),
        };
        RfdParams::with_scale(alphabet, d, c, scale, InitialCounts::AllOnes)?
    } else {
        params.build(alphabet, 1, (1, scale), 0)?
    };
    let cfg = TrialConfig {
        params,
        n,
        segments,
        alphabet,
        eps: eps.unwrap_or(0.0),
        trials,
        base_seed: seed,
    };
    let rows = run_pws_trials(&cfg)?;
    write_outputs(
        out,
        &trials_csv(&rows),
        &serde_json::to_string_pretty(&rows)?,
    )?;
    let all_pass = rows.iter().all(|r| r.verdicts == "pass");
    let max_gap = rows
        .iter()
        .map(|r| r.bound_arbitrary - r.redundancy)
        .fold(f64::INFINITY, f64::min);
    println!("{} trials, n = {}, |S| = {}", rows.len(), n, segments);
    println!("all verdicts pass: {all_pass}");
    println!("min (bound - redundancy): {max_gap:.2} bits");
    Ok(())
}

fn cmd_sweep(
    s_size: u64,
    n_list: &[u64],
    gamma: u64,
    trials: u64,
    alphabet: u32,
    seed: u64,
    out: &Path,
) -> Result<()> {
    let rows = example1_sweep(s_size, n_list, gamma, trials, alphabet, seed)?;
    write_outputs(
        out,
        &sweep_csv(&rows),
        &serde_json::to_string_pretty(&rows)?,
    )?;
    for &n in n_list {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.n == n)
            .map(|r| r.normalized)
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len().max(1) as f64;
        println!(
            "n = {n:>8}: mean normalized redundancy over {} seeds = {mean:.4}",
            vals.len()
        );
    }
    Ok(())
}

fn write_outputs(prefix: &Path, csv: &str, json: &str) -> Result<()> {
    let csv_path = prefix.with_extension("csv");
    let json_path = prefix.with_extension("json");
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    fs::write(&json_path, json).with_context(|| format!("writing {}", json_path.display()))?;
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn cmd_bounds(
    alphabet: u32,
    n: u64,
    segments: u64,
    rescales: Option<u64>,
    eps: Option<f64>,
    params: &ParamArgs,
) -> Result<()> {
    let params = params.build(alphabet, 1, (0, 1), 0)?;
    let derived = params.derived();
    let scale = derived.segment_scale_f64();
    let t0 = params.initial_total();
    let (r_size, r_label) = match rescales {
        Some(r) => (r.max(1), "measured"),
        None => (worst_case_rescale_count(&params, n), "worst case"),
    };
    let inputs = BoundInputs {
        params: &params,
        n,
        s_size: segments,
        r_size,
        t0,
        eps,
    };
    println!("L  (segment scale)     = {scale:.6}");
    println!(
        "A  (carried mass / d)  = {:.6}",
        derived.restart_scale_f64()
    );
    println!("min interior gap       = {}", derived.min_gap);
    println!(
        "r(L+1)                 = {:.6} bits",
        segment_redundancy_bound(&params, scale + 1.0)
    );
    if n >= 1 {
        println!(
            "single-segment bound   = {:.6} bits  (n = {n}, t0 = {t0}; applies when |R| = 1)",
            single_segment_bound(&params, n, t0)
        );
    }
    println!(
        "pws bound              = {:.6} bits  (|S| = {segments}, |R| = {r_size} [{r_label}])",
        pws_redundancy_bound(&inputs)
    );
    match bounded_pws_redundancy_bound(&inputs) {
        Ok(b) => {
            println!("bounded-pws delta      = {:.6}", b.delta);
            println!("bounded-pws rhs        = {:.6} bits", b.rhs_bits);
        }
        Err(e) => println!("bounded-pws bound      = n/a ({e})"),
    }
    Ok(())
}
