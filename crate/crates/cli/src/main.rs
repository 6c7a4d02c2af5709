//! `aqsv`: anonymous sensing, state verification and q0 optimization from
//! the command line.
//!
//! Exit codes: 0 ok, 1 usage or invalid input, 2 numeric mismatch or
//! internal numeric failure, 3 verification rejected or GHZ collapse,
//! 4 restart cap exhausted.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use aqsv_core::qsv::robust::DEFAULT_RESTART_CAP;
use aqsv_core::ChannelKind;

#[derive(Debug, Parser)]
#[command(name = "aqsv", version, about = "Anonymous quantum sensing with verified GHZ/Dicke resources")]
pub struct Cli {
    /// Flat `key = value` file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outcome probabilities, sampled counts, angle estimates and bounds.
    Sense(SenseArgs),
    /// Verification strategy: spectrum, protocol run, copy count.
    #[command(subcommand)]
    Qsv(QsvCommand),
    /// Sweep of the optimal GHZ weight over n and example angles (CSV).
    Opt(OptArgs),
    /// Sensing rounds each guarded by a verified batch of copies.
    Robust(RobustArgs),
}

#[derive(Debug, Subcommand)]
pub enum QsvCommand {
    Spectrum(SpectrumArgs),
    Verify(VerifyArgs),
    Complexity(ComplexityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Frequency at the first field sensor (rad/s).
    #[arg(long, allow_negative_numbers = true)]
    pub omega_a: Option<f64>,
    /// Frequency at the second field sensor (rad/s).
    #[arg(long, allow_negative_numbers = true)]
    pub omega_b: Option<f64>,
    /// Interaction time (s).
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// 1-based position of the first field sensor.
    #[arg(long, default_value_t = 1)]
    pub t1: usize,
    /// 1-based position of the second field sensor.
    #[arg(long, default_value_t = 2)]
    pub t2: usize,
    /// Take the angles from a named example (A..L) instead of frequencies.
    #[arg(long, conflicts_with_all = ["omega_a", "omega_b"])]
    pub example: Option<char>,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SenseArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q0: f64,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Number of sampled repetitions; 0 gives an analytic-only report.
    #[arg(long, default_value_t = 0)]
    pub shots: u64,
    /// Required whenever `--shots` is positive.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also check that the distribution is the same for every sensor pair.
    #[arg(long)]
    pub audit: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Diagonalize the assembled operators and fail (exit 2) on mismatch.
    #[arg(long)]
    pub check_numeric: bool,
    /// Largest tolerated analytic/numeric difference.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Override the number of copies (defaults to the sufficient count).
    #[arg(long)]
    pub copies: Option<u64>,
    /// Noise on every copy: none, dephase:g, depolarize:p, coherent_mix:e.
    #[arg(long, default_value = "none")]
    pub noise: ChannelKind,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write the per-copy transcript as JSON lines.
    #[arg(long, value_name = "PATH")]
    pub transcript: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ComplexityArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub delta: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct OptArgs {
    #[arg(long, default_value_t = 3)]
    pub n_min: usize,
    #[arg(long, default_value_t = 50)]
    pub n_max: usize,
    /// Example labels: `A..L`, `A-C`, `A,C,K`.
    #[arg(long, default_value = "A..L")]
    pub examples: String,
    /// Exit 2 unless q_G, q_H and H_min increase with n for every example.
    #[arg(long)]
    pub check_monotone: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RobustArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q0: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long)]
    pub rounds: u64,
    #[arg(long, default_value = "none")]
    pub noise: ChannelKind,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_RESTART_CAP)]
    pub restart_cap: u64,
    #[command(flatten)]
    pub field: FieldArgs,
    /// Write one JSON line per verification attempt.
    #[arg(long, value_name = "PATH")]
    pub log: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: config: {e}");
            return ExitCode::from(commands::EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { commands::EXIT_USAGE } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
