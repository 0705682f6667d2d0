use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use urn_engine::frontier::{CycleKind, Mode};

#[derive(Debug, Parser)]
#[command(
    name = "urn-engine",
    version,
    about = "Urn-model heat engines: closed forms, simulation and efficiency frontiers (k_B = 1)"
)]
pub struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the result here instead of standard output
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mean heats, work, efficiency and work variance
    #[command(subcommand)]
    Analytic(AnalyticCommand),
    /// Inverse temperatures, occupancies, entropies, degeneracies
    #[command(subcommand)]
    Thermo(ThermoCommand),
    /// Monte Carlo ensemble of exchange cycles
    Simulate(SimulateArgs),
    /// Continuum (Carnot) limit of the sub-reservoir cycle
    #[command(subcommand)]
    Continuum(ContinuumCommand),
    /// Extremal efficiency over a grid of target works
    Frontier(FrontierArgs),
    /// Random sample of the attainable (W, eta) region
    Region(RegionArgs),
}

#[derive(Debug, Subcommand)]
pub enum AnalyticCommand {
    /// Two-reservoir engine from populations
    Otto(OttoArgs),
    /// Ring of 2m reservoirs
    Ring(RingArgs),
    /// Work mean and variance of a ring, with exact enumeration when small
    Variance(RingArgs),
}

#[derive(Debug, Subcommand)]
pub enum ThermoCommand {
    /// beta = ln(N/n - 1)/eps
    Beta(BetaArgs),
    /// f(x) = 1/(e^x + 1)
    Occupancy(OccupancyArgs),
    /// s(x, y), s(x) or the entropy of an equally spaced ladder
    Entropy(EntropyArgs),
    /// ln C(N, n)
    Degeneracy(DegeneracyArgs),
}

#[derive(Debug, Subcommand)]
pub enum ContinuumCommand {
    /// Heats, work and efficiency for four endpoint altitudes
    Heats(ContinuumHeatsArgs),
    /// Reversible cycle through two cold endpoints
    Reversible(ReversibleArgs),
    /// (T_h - T_l) ln L
    Wmax(WmaxArgs),
}

pub(crate) fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s} is not a finite number"))
    }
}

#[derive(Debug, Args)]
pub struct OttoArgs {
    #[arg(long = "eps-l", value_parser = finite)]
    pub eps_l: f64,
    #[arg(long = "eps-h", value_parser = finite)]
    pub eps_h: f64,
    /// Balls per reservoir
    #[arg(long = "N")]
    pub total: u64,
    /// Weight-one balls in the low reservoir
    #[arg(long = "n-l")]
    pub n_l: u64,
    #[arg(long = "n-h")]
    pub n_h: u64,
}

#[derive(Debug, Args)]
pub struct RingArgs {
    /// Altitudes, low group first (comma separated, even count)
    #[arg(long, value_delimiter = ',', value_parser = finite, required = true, allow_negative_numbers = true)]
    pub eps: Vec<f64>,
    /// Occupancies, one per altitude
    #[arg(long, value_delimiter = ',', value_parser = finite, allow_negative_numbers = true)]
    pub f: Option<Vec<f64>>,
    /// Equilibrium occupancies at these baths instead of --f
    #[arg(long = "beta-l", value_parser = finite, allow_negative_numbers = true)]
    pub beta_l: Option<f64>,
    #[arg(long = "beta-h", value_parser = finite, allow_negative_numbers = true)]
    pub beta_h: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long = "N")]
    pub total: u64,
    #[arg(long, value_parser = finite)]
    pub eps: f64,
}

#[derive(Debug, Args)]
pub struct OccupancyArgs {
    /// Reduced energy beta * eps
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub x: f64,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub x: f64,
    /// Reduced energy setting the occupancy; defaults to x
    #[arg(long, value_parser = finite, allow_negative_numbers = true, conflicts_with = "levels")]
    pub y: Option<f64>,
    /// Number of equally spaced levels (2 is the two-level case)
    #[arg(long)]
    pub levels: Option<u32>,
}

#[derive(Debug, Args)]
pub struct DegeneracyArgs {
    #[arg(long = "N")]
    pub total: u64,
    #[arg(long)]
    pub n: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long = "eps-l", value_parser = finite, requires_all = ["eps_h", "n_l", "n_h"], conflicts_with_all = ["eps", "n"])]
    pub eps_l: Option<f64>,
    #[arg(long = "eps-h", value_parser = finite)]
    pub eps_h: Option<f64>,
    #[arg(long = "n-l")]
    pub n_l: Option<u64>,
    #[arg(long = "n-h")]
    pub n_h: Option<u64>,
    /// Ring altitudes, low group first, instead of the two-reservoir flags
    #[arg(long, value_delimiter = ',', value_parser = finite, requires = "n")]
    pub eps: Option<Vec<f64>>,
    /// Weight-one balls per ring reservoir
    #[arg(long, value_delimiter = ',', requires = "eps")]
    pub n: Option<Vec<u64>>,
    #[arg(long = "N")]
    pub total: u64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on it
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Baths {
    #[arg(long = "beta-l", value_parser = finite, allow_negative_numbers = true)]
    pub beta_l: f64,
    #[arg(long = "beta-h", value_parser = finite, allow_negative_numbers = true)]
    pub beta_h: f64,
}

#[derive(Debug, Args)]
pub struct ContinuumHeatsArgs {
    #[command(flatten)]
    pub baths: Baths,
    /// eps_l1,eps_lm,eps_h1,eps_hm
    #[arg(long, value_delimiter = ',', value_parser = finite, required_unless_present = "reduced", conflicts_with = "reduced")]
    pub eps: Option<Vec<f64>>,
    /// L1,Lm,H1,Hm (beta times altitude)
    #[arg(long, value_delimiter = ',', value_parser = finite, allow_negative_numbers = true)]
    pub reduced: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ReversibleArgs {
    #[command(flatten)]
    pub baths: Baths,
    #[arg(long = "eps-l1", value_parser = finite)]
    pub eps_l1: f64,
    #[arg(long = "eps-lm", value_parser = finite)]
    pub eps_lm: f64,
}

#[derive(Debug, Args)]
pub struct WmaxArgs {
    #[command(flatten)]
    pub baths: Baths,
    #[arg(long, default_value_t = 2)]
    pub levels: u32,
}

/// `start:stop:count`, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl WGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let span = self.stop - self.start;
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + span * i as f64 / last
                }
            })
            .collect()
    }
}

impl FromStr for WGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let count: usize = n.parse().map_err(|e| format!("count: {e}"))?;
        if count == 0 {
            return Err("count must be at least 1".into());
        }
        Ok(WGrid {
            start: finite(a)?,
            stop: finite(b)?,
            count,
        })
    }
}

impl fmt::Display for WGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Max,
    Min,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Max => Mode::Max,
            ModeArg::Min => Mode::Min,
        }
    }
}

fn cycle_kind(s: &str) -> Result<CycleKind, String> {
    s.parse().map_err(|e: urn_engine::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    /// Sub-reservoirs per bath, or "inf" for the continuum cycle
    #[arg(long, value_parser = cycle_kind)]
    pub m: CycleKind,
    #[command(flatten)]
    pub baths: Baths,
    /// Target works as start:stop:count; negative values are heat pumps
    #[arg(long = "w-grid", allow_hyphen_values = true)]
    pub w_grid: WGrid,
    #[arg(long, value_enum, default_value_t = ModeArg::Max)]
    pub mode: ModeArg,
    #[arg(long = "tol-w", value_parser = finite, default_value_t = 1e-4)]
    pub tol_w: f64,
    /// Objective evaluations per start
    #[arg(long, default_value_t = 200_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 16)]
    pub starts: u32,
    /// Altitude bound for finite m
    #[arg(long = "eps-max", value_parser = finite, default_value_t = 10.0)]
    pub eps_max: f64,
    /// Bound on |beta eps| for m = inf
    #[arg(long = "reduced-max", value_parser = finite, default_value_t = 40.0)]
    pub reduced_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    #[arg(long)]
    pub m: usize,
    #[command(flatten)]
    pub baths: Baths,
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long = "eps-max", value_parser = finite, default_value_t = 10.0)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
