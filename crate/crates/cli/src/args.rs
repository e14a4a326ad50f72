//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::report::Format;

#[derive(Debug, Parser)]
#[command(
    name = "mu2amp",
    version,
    about = "Reduced-noise probabilistic linear amplifiers: tables, sweeps and Q-function data"
)]
pub struct Cli {
    /// key=value file supplying defaults for any flag of the command.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Significant digits of every float written.
    #[arg(long, global = true)]
    pub precision: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Stage gains and operating-region radius of a design.
    Design(DesignArgs),
    /// Operating-region properties of the immaculate, perfect and ideal amplifiers.
    Table1(Table1Args),
    /// A figure of merit against the input amplitude.
    Sweep(SweepArgs),
    /// Region PFP over the (μ², G²) plane.
    Contour(ContourArgs),
    /// Q-function of the amplifier output on a phase-space grid.
    Qgrid(QgridArgs),
    /// Quadrature or number signal-to-noise ratios against the input amplitude.
    Snr(SnrArgs),
    /// Oracle-equivalence and invariant checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    /// Thermal quanta of the second-stage ancilla; defaults to max(0, μ² − 1).
    #[arg(long)]
    pub nbar: Option<f64>,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub ncut: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// pfp | pfp-exact | fidelity | psuccess | pfp-bound
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub ncut: Option<usize>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[arg(long)]
    pub ncut: Option<usize>,
    #[arg(long)]
    pub mu2_min: Option<f64>,
    #[arg(long)]
    pub mu2_max: Option<f64>,
    #[arg(long)]
    pub mu2_steps: Option<usize>,
    #[arg(long)]
    pub gain2_min: Option<f64>,
    #[arg(long)]
    pub gain2_max: Option<f64>,
    #[arg(long)]
    pub gain2_steps: Option<usize>,
    /// Space both axes logarithmically.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub log: Option<bool>,
}

#[derive(Debug, Args)]
pub struct QgridArgs {
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub ncut: Option<usize>,
    /// Real part of the input amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    /// re_min,re_max,im_min,im_max,n_re,n_im
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

#[derive(Debug, Args)]
pub struct SnrArgs {
    /// quadrature | number
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub mu2: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    #[arg(long)]
    pub ncut: Option<usize>,
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Include the high-gain (g = 6.403) oracle cases.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", conflicts_with = "quick")]
    pub full: Option<bool>,
    /// Skip the high-gain oracle cases (default).
    #[arg(long)]
    pub quick: bool,
    /// Mix this weight of vacuum into every channel output before comparing.
    #[arg(long)]
    pub inject_fault: Option<f64>,
    /// Force the channel and oracle output cutoff.
    #[arg(long)]
    pub cutoff: Option<usize>,
}
