mod commands;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Polyconvexity certificates and Dirichlet solves for double-well energies.
#[derive(Debug, Parser)]
#[command(name = "polywell", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide polyconvexity of the wells and emit a certificate.
    Certify(CertifyArgs),
    /// Build the convex + null-Lagrangian split and check it on random samples.
    DecomposeCheck(SampledArgs),
    /// Sample the rank-one second derivative on a ball of radius 10.
    HessianCheck(SampledArgs),
    /// Run the seeded matrix-identity suite.
    Identities(IdentitiesArgs),
    /// Solve the Dirichlet problem on the unit square.
    Minimize(MinimizeArgs),
    /// Solve from several random starts and compare the minimizers.
    ProbeUniqueness(ProbeArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON file with keys "X1" and "X2".
    #[arg(long)]
    wells: String,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    /// Relative tolerance of the singular-value test.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SampledArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct IdentitiesArgs {
    #[arg(long)]
    out: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    /// Subdivisions per side of the unit square.
    #[arg(long, default_value_t = 8)]
    mesh_m: usize,
    /// Affine boundary data: a matrix JSON or {"M": .., "c": [..]}, inline or as a file path.
    #[arg(long, conflicts_with = "boundary_csv")]
    boundary_affine: Option<String>,
    /// Nodal boundary data as node_index,x,y,y1,y2 CSV.
    #[arg(long)]
    boundary_csv: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    grad_tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct MinimizeArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Start from a seeded random perturbation of the boundary data instead of the data itself.
    #[arg(long)]
    random_start: bool,
    /// CSV of iter,I_C,grad_norm,step.
    #[arg(long)]
    history: Option<String>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value_t = 5)]
    starts: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Certify(a) => commands::certify(&a),
        Command::DecomposeCheck(a) => commands::decompose_check(&a),
        Command::HessianCheck(a) => commands::hessian_check(&a),
        Command::Identities(a) => commands::identities(&a),
        Command::Minimize(a) => commands::minimize(&a),
        Command::ProbeUniqueness(a) => commands::probe_uniqueness(&a),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
