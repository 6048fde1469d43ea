//! Command-line arguments and the resolved run configuration.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

/// Relative SVD rank tolerance, or `auto` for `max(rows, cols) · ε`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum RankTol {
    #[default]
    Auto,
    Fixed(f64),
}

impl RankTol {
    pub fn value(self) -> Option<f64> {
        match self {
            RankTol::Auto => None,
            RankTol::Fixed(t) => Some(t),
        }
    }
}

impl FromStr for RankTol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(RankTol::Auto);
        }
        positive(s).map(RankTol::Fixed)
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be a finite value > 0"))
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "flg-lab",
    version,
    about = "Admittance-matrix partition and F_LG analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CaseArgs {
    /// Path to a case file.
    pub case: PathBuf,
    /// Leave out line charging and bus shunts.
    #[arg(long)]
    pub no_shunts: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    /// Tolerance for asserted properties.
    #[arg(long, env = "FLG_LAB_TOL", default_value_t = DEFAULT_TOL, value_parser = positive)]
    pub tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admittance matrix with row-sum and symmetry residuals.
    Ybus {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long = "out", value_enum, default_value_t = OutFormat::Json)]
        out: OutFormat,
    },
    /// Generator/load block dimensions and the transpose-check residual.
    Partition {
        #[command(flatten)]
        case: CaseArgs,
    },
    /// Z_LL, F_LG, K_GL and Y_GGM with rank diagnostics.
    Flg {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long = "out", value_enum, default_value_t = OutFormat::Json)]
        out: OutFormat,
        /// `auto` or a relative singular-value cutoff.
        #[arg(long, default_value = "auto")]
        rank_tol: RankTol,
    },
    /// Property report; exits 1 when an asserted property fails.
    Check {
        #[command(flatten)]
        case: CaseArgs,
        /// Replace each row by a single real:imaginary ratio first.
        #[arg(long)]
        homogenize: bool,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, default_value = "auto")]
        rank_tol: RankTol,
    },
    /// `(re, im)` of every nonzero admittance entry.
    Scatter {
        #[command(flatten)]
        case: CaseArgs,
        #[arg(long = "out", value_enum, default_value_t = OutFormat::Csv)]
        out: OutFormat,
    },
    /// Property suite over a seeded population of random networks.
    OracleTest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long, default_value_t = 3)]
        min_buses: usize,
        #[arg(long, default_value_t = 12)]
        max_buses: usize,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Writes a random connected case to stdout.
    GenRandom {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        buses: usize,
        #[arg(long, default_value_t = 3)]
        gens: usize,
        /// Leave out line charging and bus shunts.
        #[arg(long)]
        no_shunts: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Ybus,
    Partition,
    Flg,
    Check,
    Scatter,
    OracleTest,
    GenRandom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub case_path: Option<PathBuf>,
    pub include_shunts: bool,
    pub homogenize: bool,
    pub tol: f64,
    pub rank_tol: RankTol,
    pub out_format: OutFormat,
    pub seed: u64,
    pub buses: usize,
    pub gens: usize,
    pub cases: usize,
    pub min_buses: usize,
}

impl RunConfig {
    fn base(command: CommandKind) -> Self {
        Self {
            command,
            case_path: None,
            include_shunts: true,
            homogenize: false,
            tol: DEFAULT_TOL,
            rank_tol: RankTol::Auto,
            out_format: OutFormat::Json,
            seed: 0,
            buses: 0,
            gens: 0,
            cases: 0,
            min_buses: 0,
        }
    }

    fn with_case(command: CommandKind, case: CaseArgs) -> Self {
        Self {
            case_path: Some(case.case),
            include_shunts: !case.no_shunts,
            ..Self::base(command)
        }
    }
}

impl From<Command> for RunConfig {
    fn from(c: Command) -> Self {
        match c {
            Command::Ybus { case, out } => RunConfig {
                out_format: out,
                ..RunConfig::with_case(CommandKind::Ybus, case)
            },
            Command::Partition { case } => RunConfig::with_case(CommandKind::Partition, case),
            Command::Flg {
                case,
                out,
                rank_tol,
            } => RunConfig {
                out_format: out,
                rank_tol,
                ..RunConfig::with_case(CommandKind::Flg, case)
            },
            Command::Check {
                case,
                homogenize,
                tol,
                rank_tol,
            } => RunConfig {
                homogenize,
                tol: tol.tol,
                rank_tol,
                ..RunConfig::with_case(CommandKind::Check, case)
            },
            Command::Scatter { case, out } => RunConfig {
                out_format: out,
                ..RunConfig::with_case(CommandKind::Scatter, case)
            },
            Command::OracleTest {
                seed,
                cases,
                min_buses,
                max_buses,
                tol,
            } => RunConfig {
                seed,
                cases,
                min_buses,
                buses: max_buses,
                tol: tol.tol,
                ..RunConfig::base(CommandKind::OracleTest)
            },
            Command::GenRandom {
                seed,
                buses,
                gens,
                no_shunts,
            } => RunConfig {
                seed,
                buses,
                gens,
                include_shunts: !no_shunts,
                ..RunConfig::base(CommandKind::GenRandom)
            },
        }
    }
}
