//! `loopeq`: command-line front end for loop equations, contour integrals,
//! map series and saddle-point discriminators.

mod cache;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "loopeq", version, about = "Loop equations of matrix models and their contour solutions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Moment-table cache directory (the LOOPEQ_CACHE variable overrides it).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PotentialArg {
    /// Potential JSON file.
    #[arg(long)]
    pub potential: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ClassArgs {
    /// Number of eigenvalues.
    #[arg(long = "N", default_value_t = 1)]
    pub n: usize,
    /// Homology class: a JSON file or inline JSON; defaults to the first basis class gamma_1^N.
    #[arg(long)]
    pub class: Option<String>,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

/// Vertex weights of a map model; only the given degrees are present.
#[derive(Args, Debug, Clone)]
pub struct MapWeights {
    #[arg(long)]
    pub t3: Option<String>,
    #[arg(long)]
    pub t4: Option<String>,
    #[arg(long)]
    pub t5: Option<String>,
    #[arg(long)]
    pub t6: Option<String>,
    /// Keep the vertex weights symbolic instead of substituting their values.
    #[arg(long)]
    pub symbolic: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Loop-equation polynomial Q_mu.
    Gen {
        #[command(flatten)]
        pot: PotentialArg,
        /// Tuple mu_1,mu_2,.. (mu_1 may be 0).
        #[arg(long)]
        mu: String,
        /// Number of eigenvalues; symbolic N when omitted.
        #[arg(long = "N")]
        n: Option<usize>,
        /// Keep the nonzero t_k symbolic.
        #[arg(long)]
        symbolic: bool,
        #[arg(long)]
        json: bool,
    },
    /// Moments E(p_mu) from quadrature on the basis partitions and the reduction.
    Solve {
        #[command(flatten)]
        pot: PotentialArg,
        #[command(flatten)]
        class: ClassArgs,
        /// Largest weight |mu| solved for when --targets is absent.
        #[arg(long, default_value_t = 6)]
        weight: u32,
        /// Partitions to solve for, separated by ';' (e.g. "4;3,1").
        #[arg(long)]
        targets: Option<String>,
        /// Basis values as JSON [{"mu": [..], "re": .., "im": ..}] instead of quadrature on the class.
        #[arg(long)]
        basis: Option<PathBuf>,
        /// Compare against direct quadrature; fail above this relative deviation.
        #[arg(long)]
        check: Option<f64>,
    },
    /// Loop-equation residuals of quadrature moments.
    Residuals {
        #[command(flatten)]
        pot: PotentialArg,
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long, default_value_t = 6)]
        weight: u32,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
    /// Sectors, basis arcs and sampled polylines.
    Contours {
        #[command(flatten)]
        pot: PotentialArg,
        /// Write polylines (arrays of [re, im]) to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 6.0)]
        ray_length: f64,
        #[arg(long, default_value_t = 10)]
        kmax: u32,
    },
    /// Expectations E_Gamma(p_mu) by quadrature.
    Expect {
        #[command(flatten)]
        pot: PotentialArg,
        #[command(flatten)]
        class: ClassArgs,
        /// Partitions, separated by ';' (e.g. "2;1,1"); empty for Z.
        #[arg(long, visible_alias = "poly", default_value = "")]
        mu: String,
        /// Divide by Z = E_Gamma(1).
        #[arg(long)]
        normalize: bool,
        /// Also write the moment table as CSV.
        #[arg(long)]
        moments_csv: Option<PathBuf>,
    },
    /// Moment matrix on the basis classes and its singular values.
    Iso {
        #[command(flatten)]
        pot: PotentialArg,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 1e-8)]
        threshold: f64,
    },
    /// Generating series of maps with marked faces.
    Maps {
        #[command(flatten)]
        weights: MapWeights,
        /// Marked face degrees k_1,k_2,..
        #[arg(long, default_value = "")]
        marked: String,
        #[arg(long, default_value_t = 4)]
        order: u32,
    },
    /// Tutte-equation residual series (exactly zero when the equations hold).
    Tutte {
        #[command(flatten)]
        weights: MapWeights,
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = 4)]
        order: u32,
    },
    /// Saddle-point discriminator ratios.
    Discrim {
        #[command(flatten)]
        pot: PotentialArg,
        #[arg(long)]
        r: u32,
        #[arg(long = "N", default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Fail when a window ratio deviates from delta by this much.
        #[arg(long, default_value_t = 0.2)]
        threshold: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("loopeq: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
