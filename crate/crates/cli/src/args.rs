use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exact-arithmetic lattice coverings, evasive sets, and incidence
/// configurations, with verified certificates and reproducible seeds.
#[derive(Debug, Parser)]
#[command(name = "lattice-cover", version, disable_help_subcommand = true)]
pub struct Cli {
    /// Base seed; every randomized construction derives its stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Emit CSV where applicable (reports, exponent tables).
    #[arg(long, global = true)]
    pub csv: bool,

    /// Emit JSON (the default for most commands; kept as an explicit flag).
    #[arg(long, global = true)]
    pub json: bool,

    /// Write a replayable manifest of this run to the given path.
    #[arg(long, global = true, value_name = "out.json")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Successive minima with witness vectors, plus named checks.
    Minima(MinimaArgs),
    /// Cover lattice points in a body by linear or affine flats.
    Cover(CoverArgs),
    /// Build evasive point sets (finite field, grid, or lattice ambient).
    Evasive(EvasiveArgs),
    /// Incidence configurations, freeness checks, and exponent tables.
    #[command(subcommand)]
    Incidence(IncidenceCmd),
    /// Exact brute-force oracles at tiny scale.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Sweep reports comparing constructions to predictions and oracles.
    #[command(subcommand)]
    Report(ReportCmd),
    /// Re-run a recorded manifest; artifacts are reproduced byte for byte.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckKind {
    Minkowski,
    Transference,
    Count,
}

#[derive(Debug, Args)]
pub struct MinimaArgs {
    /// Lattice file: {"dim": d, "basis": [["p/q", ...], ...]}.
    #[arg(long, value_name = "file.json")]
    pub lattice: PathBuf,
    /// Body file: {"ball": {"radius": "p/q"}} or {"ellipsoid": {...}}.
    #[arg(long, value_name = "file.json")]
    pub body: PathBuf,
    /// Checks to run alongside the minima computation.
    #[arg(long, value_enum)]
    pub check: Vec<CheckKind>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoverMode {
    Linear,
    Affine,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    #[arg(long, value_enum, default_value_t = CoverMode::Linear)]
    pub mode: CoverMode,
    #[arg(long, value_name = "file.json")]
    pub lattice: Option<PathBuf>,
    #[arg(long, value_name = "file.json")]
    pub body: Option<PathBuf>,
    #[arg(short, long)]
    pub k: usize,
    /// Shorthand for the integer grid in a ball of this radius.
    #[arg(long, value_name = "n")]
    pub grid: Option<i64>,
    /// Dimension for the --grid shorthand.
    #[arg(short, long)]
    pub d: Option<usize>,
    /// Write the flat list to this file.
    #[arg(long, value_name = "flats.json")]
    pub emit: Option<PathBuf>,
    /// Re-verify the cover against a fresh enumeration.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AmbientKind {
    Fp,
    Grid,
    Lattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrimePolicyArg {
    Strict,
    Auto,
}

#[derive(Debug, Args)]
pub struct EvasiveArgs {
    #[arg(long, value_enum)]
    pub ambient: AmbientKind,
    #[arg(long)]
    pub d: usize,
    #[arg(short, long)]
    pub k: usize,
    /// Rational in (0, 1), e.g. 1/2.
    #[arg(long, value_name = "p/q")]
    pub epsilon: String,
    /// fp: the prime p; grid: the ball radius s; lattice: the ball radius.
    #[arg(long)]
    pub scale: i64,
    /// Prime selection for the lattice ambient.
    #[arg(long, value_enum, default_value_t = PrimePolicyArg::Auto)]
    pub prime_policy: PrimePolicyArg,
}

#[derive(Debug, Subcommand)]
pub enum IncidenceCmd {
    /// Build a point/hyperplane configuration with freeness certificate.
    Build(IncidenceBuildArgs),
    /// Re-check a stored configuration for K_{r1,r2}-freeness.
    Check(IncidenceCheckArgs),
    /// Print the exponent table with exact rationals and decimals.
    Exponents {
        #[arg(long, default_value_t = 6)]
        d_max: u32,
    },
}

#[derive(Debug, Args)]
pub struct IncidenceBuildArgs {
    #[arg(short, long)]
    pub d: usize,
    #[arg(short, long)]
    pub k: usize,
    #[arg(short, long)]
    pub s: i64,
    #[arg(short, long)]
    pub t: i64,
    #[arg(long, value_name = "p/q")]
    pub epsilon: String,
    #[arg(long, value_name = "config.json")]
    pub emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IncidenceCheckArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub r1: u64,
    #[arg(long)]
    pub r2: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleKind {
    Linear,
    Affine,
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Exact minimum number of k-flats covering a grid ball.
    Cover(OracleCoverArgs),
    /// Exact maximum evasive subset size of a grid ball.
    Evasive(OracleEvasiveArgs),
}

#[derive(Debug, Args)]
pub struct OracleCoverArgs {
    #[arg(long, value_name = "n")]
    pub grid: Option<i64>,
    #[arg(short, long)]
    pub d: usize,
    #[arg(short, long)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = OracleKind::Linear)]
    pub kind: OracleKind,
    /// CSV series over an inclusive radius range, e.g. 1..4.
    #[arg(long, value_name = "n1..n2")]
    pub sweep: Option<String>,
}

#[derive(Debug, Args)]
pub struct OracleEvasiveArgs {
    #[arg(long, value_name = "n")]
    pub grid: Option<i64>,
    #[arg(short, long)]
    pub d: usize,
    #[arg(short, long)]
    pub k: usize,
    #[arg(short, long)]
    pub r: u64,
    #[arg(long, value_enum, default_value_t = OracleKind::Linear)]
    pub kind: OracleKind,
    #[arg(long, value_name = "n1..n2")]
    pub sweep: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum ReportCmd {
    /// Covering sizes vs predictions and the exact oracle over a radius sweep.
    CoverSweep(CoverSweepArgs),
}

#[derive(Debug, Args)]
pub struct CoverSweepArgs {
    #[arg(short, long)]
    pub d: usize,
    #[arg(short, long)]
    pub k: usize,
    #[arg(long)]
    pub n_min: i64,
    #[arg(long)]
    pub n_max: i64,
    #[arg(long, value_enum, default_value_t = CoverMode::Linear)]
    pub mode: CoverMode,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
