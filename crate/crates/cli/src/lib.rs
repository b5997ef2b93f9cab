//! The `obcut` command line: fits, parameter sweeps, ablations, the exhaustive
//! cut/trace verifier and the scaling benchmark.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or solver error,
//! 3 verification or invariant failure.

mod commands;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use obcut_core::dataio::NormalizationMode;
use obcut_core::graph_cut::DEFAULT_ENUMERATION_BUDGET;
use obcut_core::{AlmConfig, SolverConfig, Variant};

pub use report::{loglog_slope, mean_std};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Environment variable supplying the default `--out-dir`.
pub const OUT_DIR_ENV: &str = "OBCUT_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "obcut", version, about = "One-step bipartite graph cut clustering")]
pub struct Cli {
    /// Base seed; repeat r uses seed + r.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Fits per configuration.
    #[arg(long, short = 'r', global = true, default_value_t = 1,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Where run records, traces and tables are written. Nothing is written if unset.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads for the row-parallel graph update (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Fit one variant `repeats` times and summarize the scores.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value = "la+lg", value_parser = parse_variant)]
        variant: Variant,
    },
    /// Grid of fits over λ × M.
    Sweep {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// λ values (default 1e-5, 1e-4, …, 1e5).
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        /// Anchor counts (default: the --anchors value).
        #[arg(long, value_delimiter = ',')]
        anchor_grid: Vec<usize>,
    },
    /// All four variants with shared seeds.
    Ablate {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check on random graphs that cut minimizers and trace maximizers coincide.
    Verify {
        #[arg(short = 'n', long, default_value_t = 5)]
        samples: usize,
        #[arg(short = 'm', long, default_value_t = 3)]
        anchors: usize,
        #[arg(short = 'k', long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        /// Largest k^(N+M) enumeration allowed.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u128,
    },
    /// Time fits on synthetic data of growing size and fit a log-log slope.
    Scale {
        #[arg(long, value_delimiter = ',', default_values_t = [10_000usize, 20_000, 40_000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 16)]
        dim: usize,
        #[arg(short = 'k', long, default_value_t = 10)]
        k: usize,
        #[arg(short = 'm', long, default_value_t = 100)]
        anchors: usize,
        /// Outer iterations per fit (convergence test disabled).
        #[arg(long, default_value_t = 10)]
        iters: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
    },
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false, id = "source")]
pub struct DataSource {
    /// Delimited text file, one sample per line.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// `label idx:val …` file with 1-based ascending indices.
    #[arg(long)]
    pub sparse: Option<PathBuf>,
    /// Synthetic Gaussian blobs: `N_PER,K,D`.
    #[arg(long, value_parser = parse_blobs)]
    pub blobs: Option<(usize, usize, usize)>,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    #[command(flatten)]
    pub source: DataSource,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long)]
    pub header: bool,
    /// Zero-based label column of a --data file.
    #[arg(long)]
    pub label_column: Option<usize>,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    /// Seed of the synthetic data, independent of the solver seeds.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    /// min-max, z-score, l2 or none.
    #[arg(long, default_value = "min-max", value_parser = parse_normalization)]
    pub normalize: NormalizationMode,
}

fn defaults() -> SolverConfig {
    SolverConfig::default()
}

fn alm_defaults() -> AlmConfig {
    AlmConfig::default()
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Clusters (default: number of classes in the labels).
    #[arg(short = 'k', long)]
    pub k: Option<usize>,
    #[arg(short = 'm', long, default_value_t = defaults().anchors)]
    pub anchors: usize,
    #[arg(long, default_value_t = defaults().lambda)]
    pub lambda: f64,
    #[arg(long, default_value_t = defaults().epsilon)]
    pub epsilon: f64,
    /// Nearest anchors per sample in the initial graph.
    #[arg(long, default_value_t = defaults().knn_k)]
    pub knn: usize,
    #[arg(long, default_value_t = defaults().max_outer_iters)]
    pub max_iters: usize,
    #[arg(long, default_value_t = defaults().outer_tol)]
    pub tol: f64,
    #[arg(long, default_value_t = defaults().kmeans_iters)]
    pub kmeans_iters: usize,
    #[arg(long, default_value_t = defaults().kmeans_restarts)]
    pub kmeans_restarts: usize,
    #[arg(long, default_value_t = alm_defaults().rho_init)]
    pub alm_rho: f64,
    #[arg(long, default_value_t = alm_defaults().rho_growth)]
    pub alm_growth: f64,
    #[arg(long, default_value_t = alm_defaults().max_iters)]
    pub alm_iters: usize,
    #[arg(long, default_value_t = alm_defaults().tol)]
    pub alm_tol: f64,
}

impl SolverArgs {
    pub fn config(&self, k: usize, seed: u64) -> SolverConfig {
        SolverConfig {
            k,
            anchors: self.anchors,
            lambda: self.lambda,
            epsilon: self.epsilon,
            knn_k: self.knn,
            max_outer_iters: self.max_iters,
            outer_tol: self.tol,
            kmeans_iters: self.kmeans_iters,
            kmeans_restarts: self.kmeans_restarts,
            alm: AlmConfig {
                rho_init: self.alm_rho,
                rho_growth: self.alm_growth,
                max_iters: self.alm_iters,
                tol: self.alm_tol,
            },
            seed,
        }
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: obcut_core::Error| e.to_string())
}

fn parse_normalization(s: &str) -> Result<NormalizationMode, String> {
    s.parse().map_err(|e: obcut_core::Error| e.to_string())
}

fn parse_blobs(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [n, k, d] = parts.as_slice() else {
        return Err(format!("expected N_PER,K,D, got {s:?}"));
    };
    let num = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}"));
    Ok((num(n)?, num(k)?, num(d)?))
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn verify(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VERIFY,
            message: message.into(),
        }
    }
}

impl From<obcut_core::Error> for Failure {
    fn from(e: obcut_core::Error) -> Self {
        use obcut_core::Error as E;
        let code = match e {
            E::InvalidConfig(_) | E::BudgetExceeded { .. } => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parse `args` (including the program name), run the command and return the exit code.
/// Tables go to `out`, diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => {
                let mut buffer = Vec::new();
                let outcome = pool.install(|| commands::dispatch(&cli, &mut buffer));
                match out.write_all(&buffer) {
                    Ok(()) => outcome,
                    Err(e) => Err(Failure::usage(format!("writing output: {e}"))),
                }
            }
            Err(e) => Err(Failure::usage(e.to_string())),
        },
        None => commands::dispatch(&cli, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
