//! `leakbound`: entropy measures, share-sum bounds, reference tables, and
//! Monte-Carlo attack simulations from the command line.
//!
//! Exit codes: 0 success, 2 usage error (flag parsing), 3 invalid or
//! out-of-domain input, 4 request beyond a capability guard.

mod commands;
mod config;
mod parse;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{EntropySource, Format, ShareModel, WhichFigure};
use leakbound::Error;

#[derive(Parser)]
#[command(
    name = "leakbound",
    version,
    about = "Bounds on key-recovery success against masked implementations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropy and leakage measures of a pmf, channel, or Gaussian model
    Entropy(EntropyArgs),
    /// Share-sum concentration bounds and success-probability bounds
    Bound(BoundArgs),
    /// Reference tables: iterated convolutions and bound comparisons
    Figures(FiguresArgs),
    /// Monte-Carlo MAP attacks against a masked setup
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON file supplying any of this subcommand's inputs; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output path; stdout when absent
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EntropyArgs {
    /// Pmf literal: JSON array, sparse {"index": mass} object, or uniform:N
    #[arg(long)]
    pmf: Option<String>,
    /// Channel literal: JSON matrix, bsc:<eps>, complement:<M>, identity:<M>
    #[arg(long)]
    channel: Option<String>,
    /// Gaussian model literal: JSON {"leak": [...], "sigma": s},
    /// hw:<bits>:<sigma>, identity:<M>:<sigma>
    #[arg(long)]
    model: Option<String>,
    /// Alphabet size for sparse pmf literals
    #[arg(long = "M")]
    alphabet: Option<usize>,
    /// Comma-separated extra orders for the alpha-indexed measures
    #[arg(long)]
    alpha: Option<String>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BoundArgs {
    /// Alphabet size of the shared secret
    #[arg(long = "M")]
    alphabet: Option<usize>,
    /// Comma-separated per-share maximal masses exp(-H_inf)
    #[arg(long)]
    p: Option<String>,
    /// Trace count for the success-probability columns
    #[arg(long)]
    m: Option<u64>,
    /// Comma-separated per-share mutual informations in bits; defaults to
    /// the per-share maximal leakages
    #[arg(long)]
    mi: Option<String>,
    /// Report the refined bound as valid for conditional use (requires the
    /// near-uniform posterior check on the actual channels)
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    assume_hypothesis: Option<bool>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct FiguresArgs {
    /// Which table to emit
    #[arg(value_enum)]
    which: Option<WhichFigure>,
    /// Last masking order for the z-tables (defaults: z14/z13 14, z5 5)
    #[arg(long)]
    d_max: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SimulateArgs {
    /// Comma-separated cyclic orders, e.g. 14 or 2,2,2,2
    #[arg(long)]
    group: Option<String>,
    /// Masking order; the secret splits into d+1 shares
    #[arg(long)]
    d: Option<usize>,
    /// Gaussian model literal applied to every share
    #[arg(long)]
    model: Option<String>,
    /// Discrete channel literal applied to every share
    #[arg(long)]
    channel: Option<String>,
    /// Comma-separated trace counts to sweep
    #[arg(long)]
    m: Option<String>,
    /// Monte-Carlo trials per sweep point
    #[arg(long)]
    trials: Option<u64>,
    /// Seed for the counter-based generator
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count; 0 uses every available thread (1 without the
    /// parallel feature). The output is identical for any worker count.
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Capability(_) => ExitCode::from(4),
                Error::Validation(_) | Error::Domain(_) => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> leakbound::Result<()> {
    match cli.command {
        Command::Entropy(args) => {
            let cfg: config::EntropyConfig = config::load(args.common.config.as_deref())?;
            let pmf = args.pmf.or(cfg.pmf);
            let channel = args.channel.or(cfg.channel);
            let model = args.model.or(cfg.model);
            let alphabet = args.alphabet.or(cfg.alphabet);
            let selected =
                usize::from(pmf.is_some()) + usize::from(channel.is_some()) + usize::from(model.is_some());
            if selected != 1 {
                return Err(Error::validation(
                    "exactly one of --pmf, --channel, --model is required",
                ));
            }
            let source = if let Some(lit) = pmf {
                EntropySource::Pmf(parse::pmf_literal(&lit, alphabet)?)
            } else if let Some(lit) = channel {
                EntropySource::Channel(parse::channel_literal(&lit)?)
            } else {
                EntropySource::Model(parse::model_literal(&model.expect("selected"))?)
            };
            let alphas = parse::f64_list(&args.alpha.or(cfg.alpha).unwrap_or_default())?;
            let format = args.common.format.or(cfg.format).unwrap_or(Format::Csv);
            let out = commands::entropy(&source, &alphas, format)?;
            emit(args.common.output.or(cfg.output), &out)
        }
        Command::Bound(args) => {
            let cfg: config::BoundConfig = config::load(args.common.config.as_deref())?;
            let m_alphabet = args
                .alphabet
                .or(cfg.alphabet)
                .ok_or_else(|| Error::validation("--M is required"))?;
            let p_lit = args
                .p
                .or(cfg.p)
                .ok_or_else(|| Error::validation("--p is required"))?;
            let p = parse::f64_list(&p_lit)?;
            let m = args.m.or(cfg.m).unwrap_or(1);
            let mi = match args.mi.or(cfg.mi) {
                Some(lit) => Some(parse::f64_list(&lit)?),
                None => None,
            };
            let assume = args
                .assume_hypothesis
                .or(cfg.assume_hypothesis)
                .unwrap_or(false);
            let format = args.common.format.or(cfg.format).unwrap_or(Format::Csv);
            let out = commands::bound(m_alphabet, &p, m, mi.as_deref(), assume, format)?;
            emit(args.common.output.or(cfg.output), &out)
        }
        Command::Figures(args) => {
            let cfg: config::FiguresConfig = config::load(args.common.config.as_deref())?;
            let which = args.which.or(cfg.which).ok_or_else(|| {
                Error::validation("a figure name is required: z14, z13, z5, compare-d1, compare-d2")
            })?;
            let d_max = args.d_max.or(cfg.d_max);
            let format = args.common.format.or(cfg.format).unwrap_or(Format::Csv);
            let out = commands::figures(which, d_max, format)?;
            emit(args.common.output.or(cfg.output), &out)
        }
        Command::Simulate(args) => {
            let cfg: config::SimulateConfig = config::load(args.common.config.as_deref())?;
            let group_lit = args
                .group
                .or(cfg.group)
                .ok_or_else(|| Error::validation("--group is required"))?;
            let group = parse::group_spec(&group_lit)?;
            let d = args
                .d
                .or(cfg.d)
                .ok_or_else(|| Error::validation("--d is required"))?;
            let model = args.model.or(cfg.model);
            let channel = args.channel.or(cfg.channel);
            let share = match (model, channel) {
                (Some(lit), None) => ShareModel::Gaussian(parse::model_literal(&lit)?),
                (None, Some(lit)) => ShareModel::Discrete(parse::channel_literal(&lit)?),
                _ => {
                    return Err(Error::validation(
                        "exactly one of --model, --channel is required",
                    ))
                }
            };
            let m_lit = args
                .m
                .or(cfg.m)
                .ok_or_else(|| Error::validation("--m is required"))?;
            let m_values = parse::usize_list(&m_lit)?;
            let trials = args.trials.or(cfg.trials).unwrap_or(10_000);
            let seed = args.seed.or(cfg.seed).unwrap_or(0);
            let workers = args.workers.or(cfg.workers).unwrap_or(0);
            let format = args.common.format.or(cfg.format).unwrap_or(Format::Csv);
            let out =
                commands::simulate(group, d, share, &m_values, trials, seed, workers, format)?;
            emit(args.common.output.or(cfg.output), &out)
        }
    }
}

fn emit(path: Option<PathBuf>, content: &str) -> leakbound::Result<()> {
    match path {
        Some(path) => std::fs::write(&path, content)
            .map_err(|e| Error::validation(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| Error::validation(format!("writing stdout: {e}"))),
    }
}
