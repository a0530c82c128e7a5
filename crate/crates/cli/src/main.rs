//! `polargirth`: construct COR matrices, check them against exact oracles and
//! run seeded channel and sparse-recovery experiments.
//!
//! Exit codes: 0 success, 1 a checked property does not hold, 2 usage or
//! configuration error, 3 enumeration budget exceeded.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "polargirth", version, about = "High-girth COR matrices, channel simulation and sparse recovery")]
struct Cli {
    /// Worker threads for Monte Carlo trials; results do not depend on it.
    #[arg(long, global = true, env = "POLARGIRTH_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the COR profile as CSV (`index,rho`).
    Profile(ProfileArgs),
    /// Build a COR matrix and write it with a JSON sidecar.
    Construct(ConstructArgs),
    /// Simulate a code over a channel and write a JSON report.
    #[command(subcommand)]
    Simulate(SimulateCommand),
    /// Exact checks, bounds and scans.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Args, Debug)]
struct ProfileArgs {
    #[arg(long)]
    n: usize,
    /// Source parameter, e.g. `1/2` or `0.4`.
    #[arg(long)]
    s: String,
    /// Exact rational leaves (the default up to n = 256).
    #[arg(long, conflicts_with = "float")]
    exact: bool,
    /// Double-precision leaves (only for n > 256).
    #[arg(long)]
    float: bool,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    s: String,
    /// `paper` (threshold 1 - 2^-ceil(n^0.49)), `top:<m>` or `thr:<tau>`.
    #[arg(long, default_value = "paper")]
    select: String,
    /// `gf2`, `gfp:<p>` or `rational`.
    #[arg(long, default_value = "gf2")]
    field: String,
    /// Matrix file; the sidecar goes to `<out>.json`.
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args, Debug)]
struct SimArgs {
    /// Parity-check matrix file; a `<pcm>.json` sidecar is read if present.
    #[arg(long)]
    pcm: std::path::PathBuf,
    #[arg(long)]
    p: String,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SimulateCommand {
    /// Erasure channel with the Gaussian-elimination decoder.
    Mec(SimArgs),
    /// Binary symmetric channel with exhaustive ML decoding.
    Bsc {
        #[command(flatten)]
        sim: SimArgs,
        /// Largest code dimension k for codeword enumeration.
        #[arg(long, default_value_t = 20)]
        max_k: u32,
    },
}

#[derive(Subcommand, Debug)]
enum AnalyzeCommand {
    /// Monte Carlo column-independence curve over a grid of rates (CSV).
    GirthScan {
        #[arg(long)]
        matrix: std::path::PathBuf,
        /// Comma-separated rates, e.g. `0.3,0.35,1/2`.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<String>,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Compare profile leaves with the expected-rank oracle.
    OracleCheck {
        #[arg(long, default_value_t = 8)]
        nmax: usize,
        #[arg(long, value_delimiter = ',', default_value = "1/2,1/3,3/4")]
        s: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "gf2,gfp:3,gfp:5,rational")]
        fields: Vec<String>,
    },
    /// Check that every 2k columns are independent; optionally estimate the
    /// support-failure rate.
    Spark {
        #[arg(long)]
        matrix: std::path::PathBuf,
        #[arg(long)]
        k: usize,
        /// Column subsets the search may test.
        #[arg(long, default_value_t = 1 << 22)]
        budget: u128,
        /// Support model for the failure-rate estimate: `uniform:<k>` or `ber:<p>`.
        #[arg(long, requires_all = ["trials", "seed"])]
        model: Option<String>,
        #[arg(long, requires = "model")]
        trials: Option<u64>,
        #[arg(long, requires = "model")]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Union and Bhattacharyya bounds for ML decoding over BSC(p).
    Bound {
        #[arg(long)]
        pcm: std::path::PathBuf,
        #[arg(long)]
        p: String,
        #[arg(long, default_value_t = 20)]
        max_k: u32,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Sparsest solution of `A x = y` by exhaustive support search.
    L0 {
        #[arg(long)]
        matrix: std::path::PathBuf,
        /// Measurement vector, comma-separated.
        #[arg(long, value_delimiter = ',', required_unless_present = "signal", conflicts_with = "signal")]
        y: Vec<String>,
        /// Dense signal to measure first, comma-separated.
        #[arg(long, value_delimiter = ',')]
        signal: Vec<String>,
        #[arg(long)]
        kmax: usize,
        #[arg(long, default_value_t = 1 << 22)]
        budget: u128,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("polargirth: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
