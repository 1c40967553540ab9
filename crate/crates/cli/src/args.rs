use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "wchernoff",
    version,
    about = "Weighted Chernoff information and context-weighted hypothesis tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weighted Chernoff information and optimal exponent parameter
    Chernoff(Options),
    /// Tabulate rho_w and the weighted Bhattacharyya distance over [0, 1]
    Curve(Options),
    /// Weighted KL divergences and the Bhattacharyya distance at --alpha
    Divergence(Options),
    /// Monte Carlo loss of the likelihood-ratio test
    Simulate(Options),
    /// Pairwise exponents and loss of an M-ary problem
    Mary(Options),
    /// Concentration bound on the tilted log-likelihood against simulation
    Tailbound(Options),
    /// Residuals of the exponential-family identities
    Identities(Options),
    /// Report problems with a configuration without running it
    Validate {
        #[arg(value_enum)]
        target: CommandKind,
        #[command(flatten)]
        options: Options,
    },
}

impl Command {
    pub fn split(self) -> (bool, CommandKind, Options) {
        match self {
            Command::Chernoff(o) => (false, CommandKind::Chernoff, o),
            Command::Curve(o) => (false, CommandKind::Curve, o),
            Command::Divergence(o) => (false, CommandKind::Divergence, o),
            Command::Simulate(o) => (false, CommandKind::Simulate, o),
            Command::Mary(o) => (false, CommandKind::Mary, o),
            Command::Tailbound(o) => (false, CommandKind::Tailbound, o),
            Command::Identities(o) => (false, CommandKind::Identities, o),
            Command::Validate { target, options } => (true, target, options),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Chernoff,
    Curve,
    Divergence,
    Simulate,
    Mary,
    Tailbound,
    Identities,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Chernoff => "chernoff",
            CommandKind::Curve => "curve",
            CommandKind::Divergence => "divergence",
            CommandKind::Simulate => "simulate",
            CommandKind::Mary => "mary",
            CommandKind::Tailbound => "tailbound",
            CommandKind::Identities => "identities",
        }
    }

    pub fn is_pairwise(self) -> bool {
        self != CommandKind::Mary
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// First hypothesis: a JSON file or inline JSON
    #[arg(long, value_name = "FILE|JSON")]
    pub model_p: Option<String>,
    /// Second hypothesis: a JSON file or inline JSON
    #[arg(long, value_name = "FILE|JSON")]
    pub model_q: Option<String>,
    /// JSON array of hypotheses for `mary`
    #[arg(long, value_name = "FILE|JSON")]
    pub models: Option<String>,
    /// Context weight; defaults to {"kind":"const"}
    #[arg(long, value_name = "FILE|JSON")]
    pub weight: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of grid points on [0, 1] for `curve`
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Sample size
    #[arg(long)]
    pub n: Option<usize>,
    /// Monte Carlo replicates
    #[arg(long, default_value_t = 10_000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-observation threshold of the tilted log-likelihood
    #[arg(long)]
    pub beta: Option<f64>,
    /// Prior weights for `mary`, comma separated
    #[arg(long, value_name = "a,b,...")]
    pub priors: Option<String>,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}
