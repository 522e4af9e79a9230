use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "spiked", version, about = "Spiked covariance simulation, spike estimation and eigenspace tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report detectability and separation of every spike in a config's model.
    ValidateModel(ConfigArg),
    /// Run the experiment described by a config file and write its artifacts.
    Simulate(SimulateArgs),
    /// Estimate population spikes from a data matrix.
    Estimate(EstimateArgs),
    /// Test a hypothesized leading eigenvector against a data matrix.
    Test(TestArgs),
    /// Simulated type I error of the eigenvector test on the size grid.
    #[command(name = "reproduce-table1")]
    ReproduceTable1(TableArgs),
    /// Simulated power of the eigenvector test on the power grid.
    #[command(name = "reproduce-table2")]
    ReproduceTable2(TableArgs),
    /// Projection-norm histograms for the diagonal and rotated four-spike models.
    ReproduceFigures(FigureArgs),
}

#[derive(Args, Debug)]
pub struct ConfigArg {
    /// TOML experiment config.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Overrides {
    /// Root seed; replicate r uses stream r.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo replicates.
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Output directory for records.csv, summary.json and hist.csv.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Test level in (0, 1].
    #[arg(long)]
    pub level: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    /// CSV with a header row and one row per variable.
    #[arg(long)]
    pub data: PathBuf,
    /// Number of upper spikes to estimate from the largest eigenvalues.
    #[arg(long, default_value_t = 1)]
    pub n_spikes: usize,
    /// Number of lower spikes to estimate from the smallest eigenvalues.
    #[arg(long, default_value_t = 0)]
    pub n_lower_spikes: usize,
    /// Write the JSON result here as well as to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarthetaArg {
    Adaptive,
    Oracle,
}

#[derive(Args, Debug)]
pub struct TestArgs {
    /// CSV with a header row and one row per variable.
    #[arg(long)]
    pub data: PathBuf,
    /// CSV with a header row and one row per variable holding the hypothesized direction.
    #[arg(long)]
    pub basis: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub level: f64,
    /// Bulk population spectrum as `eigenvalue:weight` atoms.
    #[arg(long, value_delimiter = ',', default_value = "1:1")]
    pub bulk: Vec<String>,
    /// E x⁴ of the standardized entries.
    #[arg(long, default_value_t = 3.0)]
    pub fourth_moment: f64,
    /// Spike value entering the variance: the estimate, or a known `--spike`.
    #[arg(long, value_enum, default_value_t = VarthetaArg::Adaptive)]
    pub vartheta: VarthetaArg,
    /// Known spike for `--vartheta oracle`.
    #[arg(long)]
    pub spike: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TableArgs {
    /// One cell, e.g. `d=5,c=0.1,n=200`; the whole grid when absent.
    #[arg(long)]
    pub cell: Option<String>,
    /// 500 replicates per cell instead of 2000.
    #[arg(long)]
    pub fast: bool,
    /// Base settings (distribution, vartheta mode, seed, replicates, level) from a config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    /// 500 replicates per figure instead of 2000.
    #[arg(long)]
    pub fast: bool,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
}
