mod commands;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nwidth::TolerancePolicy;
use serde_json::{json, Value};

use crate::io::CliError;

/// n-widths, optimal subspaces and best low-rank approximants of square
/// matrices. Reports are JSON on stdout.
///
/// Exit status: 0 affirmative, 1 negative verdict, 2 input or usage error.
#[derive(Debug, Parser)]
#[command(name = "nwidth", version)]
struct Cli {
    #[command(flatten)]
    tol: TolFlags,

    /// Print the report on a single line.
    #[arg(long, global = true)]
    compact: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TolFlags {
    #[arg(long, global = true, env = "NWIDTH_TOL_ORTH", value_name = "X")]
    tol_orth: Option<f64>,
    #[arg(long, global = true, env = "NWIDTH_TOL_RECON", value_name = "X")]
    tol_recon: Option<f64>,
    #[arg(long, global = true, env = "NWIDTH_TOL_RANK", value_name = "X")]
    tol_rank: Option<f64>,
    #[arg(long, global = true, env = "NWIDTH_TOL_PSD", value_name = "X")]
    tol_psd: Option<f64>,
    #[arg(long, global = true, env = "NWIDTH_TOL_DET", value_name = "X")]
    tol_det: Option<f64>,
    #[arg(long, global = true, env = "NWIDTH_TOL_GAP", value_name = "X")]
    tol_gap: Option<f64>,
}

impl TolFlags {
    fn policy(&self) -> Result<TolerancePolicy, CliError> {
        let d = TolerancePolicy::default();
        let policy = TolerancePolicy {
            tol_orth: self.tol_orth.unwrap_or(d.tol_orth),
            tol_recon: self.tol_recon.unwrap_or(d.tol_recon),
            tol_rank: self.tol_rank.unwrap_or(d.tol_rank),
            tol_psd: self.tol_psd.unwrap_or(d.tol_psd),
            tol_det: self.tol_det.unwrap_or(d.tol_det),
            tol_gap: self.tol_gap.unwrap_or(d.tol_gap),
        };
        Ok(policy.validated()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMethod {
    Psd,
    Minors,
    Complement,
    Distance,
    Karlovitz,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
    Both,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Singular values and vectors, numerical rank and the spectral gap table.
    Svd {
        matrix: PathBuf,
    },
    /// Certify a subspace (an m x n basis file) as an optimal n-dimensional space.
    Check {
        matrix: PathBuf,
        subspace: PathBuf,
        #[arg(long, value_enum, default_value = "psd")]
        method: CheckMethod,
        /// Report every signed-minor index set.
        #[arg(long)]
        verbose: bool,
    },
    /// Build a rank-n approximant and measure its spectral-norm error.
    Approx {
        matrix: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        /// tsvd, left:FILE, right:FILE or eps:E1,E2,...
        #[arg(long, default_value = "tsvd")]
        source: String,
        /// With left:FILE of dimension 1, build scale * x x^T.
        #[arg(long, allow_negative_numbers = true)]
        scale: Option<f64>,
        /// Write the approximant as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Admissible directions for best rank-1 approximants.
    Rank1 {
        matrix: PathBuf,
        /// Sweep K angles from u_1 to u_3 in the (u_1, u_3) plane.
        #[arg(long, value_name = "K", conflicts_with = "w", required_unless_present = "w")]
        angle_sweep: Option<usize>,
        /// Coefficients of the direction in the left singular basis.
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        w: Option<String>,
    },
    /// Total positivity test, sign patterns and optimal spaces built from them.
    Tp {
        matrix: PathBuf,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "left")]
        side: SideArg,
        /// Enumerate every minor instead of the contiguous ones.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Iterate X <- orth(A Y), Y <- orth(A^T X) from seed bases.
    Iterate {
        matrix: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, default_value_t = 5)]
        steps: usize,
        /// Include the bases of every step.
        #[arg(long)]
        bases: bool,
    },
}

/// A command's payload plus the flags that decide the exit status.
pub struct Outcome {
    pub result: Value,
    pub affirmative: bool,
    pub boundary: bool,
}

fn run(cli: &Cli) -> Result<(Value, bool), CliError> {
    let tol = cli.tol.policy()?;
    let (name, path) = match &cli.command {
        Command::Svd { matrix } => ("svd", matrix),
        Command::Check { matrix, .. } => ("check", matrix),
        Command::Approx { matrix, .. } => ("approx", matrix),
        Command::Rank1 { matrix, .. } => ("rank1", matrix),
        Command::Tp { matrix, .. } => ("tp", matrix),
        Command::Iterate { matrix, .. } => ("iterate", matrix),
    };
    let ctx = commands::Context::load(path, tol)?;
    let outcome = match &cli.command {
        Command::Svd { .. } => commands::svd(&ctx)?,
        Command::Check {
            subspace,
            method,
            verbose,
            ..
        } => commands::check(&ctx, subspace, *method, *verbose)?,
        Command::Approx {
            n, source, scale, out, ..
        } => commands::approx(&ctx, *n, source, *scale, out.as_deref())?,
        Command::Rank1 { angle_sweep, w, .. } => commands::rank1(&ctx, *angle_sweep, w.as_deref())?,
        Command::Tp { n, side, exhaustive, .. } => commands::tp(&ctx, *n, *side, *exhaustive)?,
        Command::Iterate {
            x, y, steps, bases, ..
        } => commands::iterate(&ctx, x, y, *steps, *bases)?,
    };
    let report = json!({
        "command": name,
        "input": ctx.digest(),
        "result": outcome.result,
        "tolerances": serde_json::to_value(tol).expect("tolerances serialize"),
        "boundary": outcome.boundary,
        "affirmative": outcome.affirmative,
    });
    Ok((report, outcome.affirmative))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, affirmative)) => {
            let text = if cli.compact {
                serde_json::to_string(&report)
            } else {
                serde_json::to_string_pretty(&report)
            }
            .expect("report serializes");
            if writeln!(std::io::stdout().lock(), "{text}").is_err() {
                return ExitCode::from(2);
            }
            if affirmative {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
