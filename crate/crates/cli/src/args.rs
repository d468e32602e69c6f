use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "qentropy", version, about = "Nonextensive entropies and their composition laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate entropies on distributions.
    Eval(RunArgs),
    /// Compute residuals of a composition law on sampled or supplied systems.
    Verify(RunArgs),
    /// Assign a functional to a class by randomized residual search.
    Classify(RunArgs),
    /// Check the q -> 1 limit against the Shannon entropy.
    Limit(RunArgs),
    /// Search for a system violating a composition law.
    Search(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eval(_) => "eval",
            Command::Verify(_) => "verify",
            Command::Classify(_) => "classify",
            Command::Limit(_) => "limit",
            Command::Search(_) => "search",
        }
    }

    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Eval(a)
            | Command::Verify(a)
            | Command::Classify(a)
            | Command::Limit(a)
            | Command::Search(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormArg {
    Original,
    Normalized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityArg {
    Shannon,
    Pseudo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    Pass,
    Fail,
    Class1,
    Class2,
    Class3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutFormat {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Functional kinds, comma separated (shannon, tsallis, normalized_tsallis,
    /// class2, class3, n_class2, n_class3).
    #[arg(long, value_delimiter = ',', default_value = "tsallis")]
    pub kind: Vec<String>,
    /// Entropic indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<f64>,
    /// Index grid for sampling; defaults to 0.1,0.5,0.9,0.999,1.001,1.5,2,3,5.
    #[arg(long = "q-grid", value_delimiter = ',')]
    pub q_grid: Vec<f64>,
    /// `paper_example` or polynomial coefficients in (q - 1), comma separated.
    #[arg(long, default_value = "paper_example")]
    pub phi: String,
    /// Inline distribution, comma separated; may be repeated.
    #[arg(long = "p", allow_hyphen_values = true)]
    pub p: Vec<String>,
    /// JSON file with a distribution, refinement, product system, or a list of them.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Defaults to `normalized` for the normalized kinds, else `original`.
    #[arg(long, value_enum)]
    pub form: Option<FormArg>,
    #[arg(long, value_enum, default_value = "pseudo")]
    pub identity: IdentityArg,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, env = "QENTROPY_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub budget: usize,
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
    /// Defaults to `table` for eval and `json` elsewhere.
    #[arg(long, value_enum)]
    pub out: Option<OutFormat>,
    #[arg(long = "pass-tol")]
    pub pass_tol: Option<f64>,
    #[arg(long = "fail-tol")]
    pub fail_tol: Option<f64>,
    /// Exit with status 3 when any result is inconclusive.
    #[arg(long)]
    pub strict: bool,
    #[arg(long = "no-timestamp")]
    pub no_timestamp: bool,
}
