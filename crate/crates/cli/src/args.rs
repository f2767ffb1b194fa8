use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "mpec",
    version,
    about = "Affine MPEC reformulation, global solve and diagnostics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Problem file path or `builtin:<name>`.
#[derive(Args, Debug, Clone)]
pub struct Common {
    pub input: String,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Global solve by complementarity-regime enumeration
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Emit an equivalent reformulated system
    Reformulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// LICQ / MFCQ / CRCQ at a point
    CheckCq {
        #[command(flatten)]
        common: Common,
        /// Stacked (x, y), comma-separated
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 1e-3)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Minimal-norm multipliers along a sequence of lower-level solutions
    ProbeSbcq {
        /// Problem; defaults to builtin:q1 with --builtin-q1
        input: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON array of {"x": [...], "y": [...]}
        #[arg(
            long,
            conflicts_with = "builtin_q1",
            required_unless_present = "builtin_q1"
        )]
        sequence: Option<PathBuf>,
        /// Generated sequence x_k = -1/k, y_k = 0 for k = 1..K
        #[arg(long)]
        builtin_q1: Option<usize>,
    },
    /// Natural-residual merit ½‖min(y, F(x, y))‖²
    Residual {
        #[command(flatten)]
        common: Common,
        /// Stacked (x, y), comma-separated
        #[arg(long, allow_hyphen_values = true)]
        point: String,
    },
    /// Monotonicity class of the lower-level matrix M
    Classify {
        #[command(flatten)]
        common: Common,
    },
    /// Lower-level solution set S(x)
    ReactionMap {
        #[command(flatten)]
        common: Common,
        /// x, comma-separated
        #[arg(
            long,
            allow_hyphen_values = true,
            conflicts_with = "grid",
            required_unless_present = "grid"
        )]
        point: Option<String>,
        /// LO,HI,COUNT for a one-dimensional x
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Enumerate)]
        mode: Mode,
    },
    /// Optimistic and pessimistic leader values over a response set
    Values {
        #[command(flatten)]
        common: Common,
        /// x, comma-separated
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Responses separated by ';', each comma-separated; S(x) when absent
        #[arg(long, allow_hyphen_values = true)]
        responses: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Kkt,
    Fb,
    Normal,
    Implicit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Enumerate,
    Monotone,
}
