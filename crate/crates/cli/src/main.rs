mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;
use output::Sink;

#[derive(Parser, Debug)]
#[command(name = "pfdde", version, about = "Normal forms of periodically forced delay equations")]
struct Cli {
    /// Output file (stdout when absent). The run manifest goes to
    /// `<out>.manifest.json`, or to stderr when writing to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record a wall-clock timestamp in output headers.
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    /// H₁₁ from B(φ, φ̄).
    Default,
    /// H₁₁ from B(φ, φ), matching the printed Wright formulas.
    Paper,
}

impl VariantArg {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantArg::Default => "default",
            VariantArg::Paper => "paper",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roots of det Δ(z) in a rectangle, as CSV.
    Spectrum(SpectrumArgs),
    /// Fold normal-form coefficient b, as JSON.
    Fold(FoldArgs),
    /// Hopf coefficient c and l₁ at the root iω, as JSON.
    Hopf(HopfArgs),
    /// l₁ of the forced Wright equation along an Ω₂ grid, as CSV.
    L1Sweep(L1SweepArgs),
    /// Integrate a model and classify the stroboscopic dynamics.
    Simulate(SimulateArgs),
    /// Bifurcation diagram data for the forced Wright equation, as CSV.
    Bifdiag(BifdiagArgs),
    /// Write a model document.
    #[command(subcommand)]
    Model(ModelCommand),
}

#[derive(Args, Debug)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// `re_min,re_max,im_min,im_max`.
    #[arg(long, allow_hyphen_values = true)]
    pub rect: String,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct FoldArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Args, Debug)]
pub struct HopfArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Imaginary part of the critical root.
    #[arg(long, allow_hyphen_values = true)]
    pub omega: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Default)]
    pub variant: VariantArg,
    /// Largest |m| in the resonance scans.
    #[arg(long, default_value_t = pfdde::normal_form::DEFAULT_MODE_CAP)]
    pub mode_cap: u32,
}

#[derive(Args, Debug)]
pub struct L1SweepArgs {
    /// Hopf branch index N.
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, default_value_t = 1.0)]
    pub omega1: f64,
    /// `a:b:count`, count points strictly inside (a, b); defaults to
    /// `0:ω_N:210` (211 is prime, so no grid point is a low-order
    /// resonance).
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, value_enum, default_value_t = VariantArg::Default)]
    pub variant: VariantArg,
    #[arg(long, default_value_t = pfdde::normal_form::DEFAULT_MODE_CAP)]
    pub mode_cap: u32,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 2000.0)]
    pub tmax: f64,
    /// Defaults to 200 strobe periods, capped at half of `tmax`.
    #[arg(long)]
    pub transient: Option<f64>,
    /// Strobe period; defaults to the forcing period (2π when autonomous).
    #[arg(long)]
    pub period: Option<f64>,
    /// Constant initial history, one value per component.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.1")]
    pub history: Vec<f64>,
    /// Constant term added to the right-hand side.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub offset: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1e-5)]
    pub eps_dec: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub eps_cyc: f64,
    /// Forcing periods per amplitude window.
    #[arg(long, default_value_t = 1)]
    pub block: usize,
    /// Keep every stride-th trajectory sample.
    #[arg(long, default_value_t = 10)]
    pub stride: usize,
}

#[derive(Args, Debug)]
pub struct BifdiagArgs {
    #[arg(long, default_value_t = 2)]
    pub n_max: u32,
    #[arg(long, default_value_t = 4)]
    pub s_max: u32,
    #[arg(long, default_value_t = 1.0)]
    pub omega1: f64,
    /// `a:b:count` Ω₂ grid for Hopf rows and sign-change search.
    #[arg(long, default_value = "0:10:400")]
    pub grid: String,
}

#[derive(Subcommand, Debug)]
pub enum ModelCommand {
    /// ẋ = a_N x(t-1)(1 + β(t)x(t)) with β = Ω₁cos(Ω₂t).
    Wright {
        #[arg(long, default_value_t = 0)]
        n: u32,
        /// Autonomous equation with this a and β ≡ 1 instead.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        omega1: f64,
        #[arg(long, default_value_t = 1.0)]
        omega2: f64,
    },
    /// ẋ = β₁(x(t-1) - x(t)) + β₂(t) x(t-1)² with
    /// β₂ = mean + sin·sin(ft) + cos·cos(ft).
    Fold {
        #[arg(long, allow_hyphen_values = true)]
        beta1: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        mean: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        sin: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        cos: f64,
        #[arg(long, default_value_t = 1.0)]
        freq: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::Fold(_) => "fold",
            Command::Hopf(_) => "hopf",
            Command::L1Sweep(_) => "l1-sweep",
            Command::Simulate(_) => "simulate",
            Command::Bifdiag(_) => "bifdiag",
            Command::Model(_) => "model",
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut sink = Sink::new(cli.command.name(), cli.out, cli.stamp);
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a, &mut sink)?,
        Command::Fold(a) => commands::fold(a, &mut sink)?,
        Command::Hopf(a) => commands::hopf(a, &mut sink)?,
        Command::L1Sweep(a) => commands::l1_sweep(a, &mut sink)?,
        Command::Simulate(a) => commands::simulate(a, &mut sink)?,
        Command::Bifdiag(a) => commands::bifdiag(a, &mut sink)?,
        Command::Model(m) => commands::model(m, &mut sink)?,
    }
    sink.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
