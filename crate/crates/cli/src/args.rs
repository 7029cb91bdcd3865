use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Spectral line of a thermal gas of relativistic monochromatic radiators.
#[derive(Debug, Parser)]
#[command(name = "thermoline", version, about)]
pub struct Cli {
    /// Flat `key=value` file with `#` comments; flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the closed-form intensity or counting spectrum.
    Spectrum(SpectrumArgs),
    /// Draw emitter speeds and line-of-sight cosines.
    Sample(SampleArgs),
    /// Histogram the observed frequency of weighted Monte Carlo events.
    Simulate(SimulateArgs),
    /// Doppler-scan the line with a resonant detector or absorber.
    Scan(ScanArgs),
    /// Mean and variance of the (weighted) spectrum.
    Moments(MomentsArgs),
    /// Modified Bessel functions of the second kind.
    Table(TableArgs),
    /// Run the built-in cross-checks.
    Verify(VerifyArgs),
}

#[derive(Debug, Args, Default)]
pub struct Units {
    /// Proper frequency; rescales frequency columns.
    #[arg(long)]
    pub omega0: Option<f64>,
    /// Rest-frame intensity; rescales intensity columns.
    #[arg(long)]
    pub intensity0: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct SpectrumArgs {
    /// m c^2 / k T.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// intensity | counting
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add a `log_density` column.
    #[arg(long)]
    pub log_density: bool,
    #[command(flatten)]
    pub units: Units,
}

#[derive(Debug, Args, Default)]
pub struct SampleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct SimulateArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// intensity | counting | unweighted
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Lower histogram edge; by default the range covers 99.99% of emitters.
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub units: Units,
}

#[derive(Debug, Args, Default)]
pub struct ScanArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Detector resonance over the proper frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub xd: Option<f64>,
    /// Resonance FWHM in units of the proper frequency.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma_d: Option<f64>,
    /// Registration weight exponent p in (x_d / x)^p.
    #[arg(long)]
    pub exponent: Option<u32>,
    #[arg(long, allow_negative_numbers = true)]
    pub v_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub v_max: Option<f64>,
    #[arg(long)]
    pub v_points: Option<usize>,
    /// detector | absorber
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct MomentsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// intensity | counting
    #[arg(long)]
    pub kind: Option<String>,
    /// Weight exponent p in x^-p.
    #[arg(long, allow_negative_numbers = true)]
    pub exponent: Option<i32>,
}

#[derive(Debug, Args, Default)]
pub struct TableArgs {
    #[arg(long)]
    pub order: Option<u32>,
    /// One or more arguments, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub x: Vec<f64>,
    /// Report exp(x) K_n(x).
    #[arg(long)]
    pub scaled: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct VerifyArgs {
    /// Skip the million-sample statistical checks.
    #[arg(long)]
    pub fast: bool,
}
