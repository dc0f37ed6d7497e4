use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use spectral_witness::OptimizerConfig;

#[derive(Debug, Parser)]
#[command(name = "spectral-witness", version, about = "Schmidt-number witnesses from spectral data")]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Schmidt rank bound of the separable set `S_k`.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: usize,
    /// Relative zero band for eigenvalues and numerical ranks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 1e-7)]
    pub witness_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub defect_tol: f64,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 32)]
    pub starts: usize,
    #[arg(long = "max-iter", global = true, default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    pub report: ReportFormat,
    /// Write per-iteration optimizer values as CSV.
    #[arg(long, global = true)]
    pub trace_out: Option<PathBuf>,
    /// Use a unit-norm maximally entangled reference vector for maps.
    #[arg(long, global = true)]
    pub normalized: bool,
}

impl RunConfig {
    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            seed: self.seed,
            starts: self.starts,
            max_iterations: self.max_iterations,
            defect_tol: self.defect_tol,
            witness_tol: self.witness_tol,
            zero_band: self.tol,
            record_trace: self.trace_out.is_some(),
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schmidt coefficients and rank of a vector.
    Schmidt {
        #[arg(long)]
        input: PathBuf,
    },
    /// Decide whether an observable is a k-Schmidt witness.
    WitnessCheck {
        #[arg(long)]
        input: PathBuf,
    },
    /// Smallest lambda making `lambda W+ - W-` a witness, using the
    /// spectral split of the input observable.
    WitnessBuild {
        #[arg(long)]
        input: PathBuf,
    },
    /// `epsilon I - P_V` for a subspace, with its certification.
    Projector {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Squared sup norm of the coordinate matrices of a subspace.
    Epsmin {
        #[arg(long)]
        input: PathBuf,
    },
    /// Diagonal subspace of dimension (d1-k)(d2-k).
    Vmax {
        #[arg(long, num_args = 2, value_names = ["D1", "D2"])]
        dims: Vec<usize>,
    },
    /// Search a subspace for vectors of Schmidt rank at most k.
    SubspaceCertify {
        #[arg(long)]
        input: PathBuf,
    },
    /// Convert between an observable and its Kraus-Choi map.
    Map {
        #[arg(long)]
        input: PathBuf,
    },
    Experiment {
        #[command(subcommand)]
        which: Experiment,
    },
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Partial-transpose signature of random entangled two-qubit states.
    TwoQubitSignature {
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
}
