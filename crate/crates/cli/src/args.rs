use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "sfc",
    version,
    about = "Design, inspect and simulate lattice-based spherical space-frequency codes"
)]
#[command(after_help = "SFC_THREADS caps the number of worker threads.\n\
Exit codes: 0 ok, 2 configuration or input error, 3 construction failure, 4 I/O error.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a codebook from a lattice and write it as JSON.
    Design(DesignArgs),
    /// Diversity report of a codebook file.
    Inspect(InspectArgs),
    /// Monte Carlo symbol error rate of a codebook file, written as CSV.
    Simulate(SimulateArgs),
    /// Render one or more result CSVs as an SVG chart.
    Plot(PlotArgs),
    /// Write an Alamouti baseline codebook.
    Baseline(BaselineArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    /// Subcarriers.
    #[arg(long = "K", default_value_t = 8)]
    pub k: usize,
    /// Channel taps; must divide K.
    #[arg(long = "L", default_value_t = 2)]
    pub l: usize,
    /// Transmit antennas.
    #[arg(long, default_value_t = 2)]
    pub nt: usize,
    /// Lattice family (Zn, An, Dn, AnDual, DnDual, E8, K12, BW16, Leech24).
    #[arg(long, default_value = "K12")]
    pub lattice: String,
    /// Design distance on the sphere, in radians. With --rate this is the
    /// starting point of the search.
    #[arg(long, default_value_t = 0.22)]
    pub dmin: f64,
    /// Rotation angle of the lattice.
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub alpha: f64,
    /// Latitude band width in radians [default: 1.5 × dmin].
    #[arg(long = "band-width")]
    pub band_width: Option<f64>,
    /// Tune dmin until the rate lands in [rate, rate + rate-window].
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long = "rate-window", default_value_t = 0.05)]
    pub rate_window: f64,
    /// Code builds allowed while tuning.
    #[arg(long = "max-builds", default_value_t = 12)]
    pub max_builds: usize,
    /// Keep only the first N codewords.
    #[arg(long = "max-words")]
    pub max_words: Option<usize>,
    /// Take every design parameter from a summary written by an earlier run.
    #[arg(long = "from-summary", conflicts_with_all = ["k", "l", "nt", "lattice", "dmin", "alpha", "band_width", "rate"])]
    pub from_summary: Option<PathBuf>,
    /// Codebook output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the design summary here (it always goes to stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InspectArgs {
    /// Codebook JSON file.
    pub file: PathBuf,
    /// Check this many random pairs instead of all of them.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Seed of the pair sample.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report output path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Ml,
    Lattice,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Codebook JSON file.
    pub file: PathBuf,
    /// SNR sweep in dB as start:step:stop, or a single value.
    #[arg(long, default_value = "0:4:24")]
    pub snr: String,
    /// Trials per SNR point.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Receive antennas.
    #[arg(long, default_value_t = 1)]
    pub nr: usize,
    #[arg(long, value_enum, default_value_t = DecoderArg::Ml)]
    pub decoder: DecoderArg,
    /// Transmit without noise (every block must decode).
    #[arg(long)]
    pub noiseless: bool,
    /// Label of the curve [default: file stem].
    #[arg(long = "code-id")]
    pub code_id: Option<String>,
    /// CSV output path [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Result CSV files.
    #[arg(required = true)]
    pub csv: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "Symbol error rate")]
    pub title: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    #[value(name = "alamouti-qpsk")]
    AlamoutiQpsk,
    #[value(name = "alamouti-8psk")]
    Alamouti8psk,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub scheme: Scheme,
    /// Channel taps; the code uses K = 2L subcarriers.
    #[arg(long = "L", default_value_t = 2)]
    pub l: usize,
    #[arg(long)]
    pub out: PathBuf,
}
