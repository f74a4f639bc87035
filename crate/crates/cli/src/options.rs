//! Command line flags and their resolved, serialisable form.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "mbasis",
    version,
    about = "Markov bases and exact conditional goodness-of-fit tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a Markov basis and write it as a basis file.
    Basis(CommonArgs),
    /// Exact conditional chi-square test of a data file.
    Test(CommonArgs),
    /// List the fiber of a data file.
    Enumerate(CommonArgs),
    /// Dump thinned states of a fiber walk.
    Sample(CommonArgs),
    /// Re-run the command recorded in a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory; defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Independence,
    P1,
    Generic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReciprocityArg {
    Zero,
    Constant,
    Differential,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetArg {
    Uniform,
    Hypergeometric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalArg {
    Basis,
    Dynamic,
}

#[derive(Clone, Debug, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Table dimensions for independence models, e.g. `3,3`.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    /// Node count for p1 models.
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, value_enum)]
    pub reciprocity: Option<ReciprocityArg>,
    /// Design matrix file for generic models.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Table CSV, or an edge list for p1 models.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Basis file to use instead of computing one.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    /// Defaults to a tenth of the steps.
    #[arg(long)]
    pub burnin: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub thin: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = TargetArg::Hypergeometric)]
    pub target: TargetArg,
    #[arg(long, value_enum)]
    pub proposal: Option<ProposalArg>,
    /// Independent chains for `test`, pooled in chain order.
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    /// Fiber size cap for enumeration.
    #[arg(long, default_value_t = 100_000)]
    pub cap: usize,
    #[arg(long, default_value_t = 100_000)]
    pub max_binomials: usize,
    #[arg(long, default_value_t = 40)]
    pub max_degree: i64,
    /// Histogram bin count.
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Every option of a run after defaults are filled in.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Options {
    pub model: ModelKind,
    pub dims: Option<Vec<usize>>,
    pub nodes: Option<usize>,
    pub reciprocity: Option<ReciprocityArg>,
    pub matrix: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub basis: Option<PathBuf>,
    pub steps: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: Option<u64>,
    pub target: TargetArg,
    pub proposal: ProposalArg,
    pub chains: usize,
    pub cap: usize,
    pub max_binomials: usize,
    pub max_degree: i64,
    pub bins: usize,
}

/// Written next to every output; replaying it reproduces the outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub options: Options,
}

impl Manifest {
    pub fn new(command: &str, options: Options) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            options,
        }
    }
}

impl CommonArgs {
    pub fn resolve(&self, command: &str) -> CliResult<Options> {
        let model = match (self.model, &self.matrix) {
            (Some(m), _) => m,
            (None, Some(_)) => ModelKind::Generic,
            (None, None) => return Err(CliError::usage("--model is required (or --matrix for a generic model)")),
        };
        match model {
            ModelKind::Independence if self.dims.is_none() && self.data.is_none() => {
                return Err(CliError::usage("independence models need --dims or --data"));
            }
            ModelKind::P1 if self.nodes.is_none() => return Err(CliError::usage("p1 models need --nodes")),
            ModelKind::Generic if self.matrix.is_none() => return Err(CliError::usage("generic models need --matrix")),
            _ => {}
        }
        if command != "basis" && self.data.is_none() {
            return Err(CliError::usage(format!("{command} needs --data")));
        }
        if matches!(command, "test" | "sample") && self.seed.is_none() {
            return Err(CliError::usage(format!("{command} needs --seed")));
        }
        let proposal = self.proposal.unwrap_or(ProposalArg::Basis);
        if proposal == ProposalArg::Dynamic && model != ModelKind::P1 {
            return Err(CliError::usage("--proposal dynamic is only available for p1 models"));
        }
        Ok(Options {
            model,
            dims: self.dims.clone(),
            nodes: self.nodes,
            reciprocity: match model {
                ModelKind::P1 => Some(self.reciprocity.unwrap_or(ReciprocityArg::Constant)),
                _ => None,
            },
            matrix: self.matrix.clone(),
            data: self.data.clone(),
            basis: self.basis.clone(),
            steps: self.steps,
            burnin: self.burnin.unwrap_or(self.steps / 10),
            thin: self.thin,
            seed: self.seed,
            target: self.target,
            proposal,
            chains: self.chains,
            cap: self.cap,
            max_binomials: self.max_binomials,
            max_degree: self.max_degree,
            bins: self.bins,
        })
    }
}
