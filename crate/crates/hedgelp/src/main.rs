use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hedgelp::cli::{self, exit_code};
use hedgelp::config::{self, SolveMode};

#[derive(Parser)]
#[command(
    name = "hedgelp",
    version,
    about = "Super-replication pricing under proportional transaction costs on finite path grids"
)]
struct Cli {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Solve in exact rational arithmetic.
    #[arg(long, global = true)]
    exact: bool,
    /// Dump assembled LPs in text format under this path prefix.
    #[arg(long, global = true, value_name = "PATH")]
    dump_lp: Option<PathBuf>,
    /// Seed override for randomized checks and reports.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV artifacts.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve both sides of the hedging duality and report the gap.
    Price,
    /// Constrained hedging versus its penalty dual at a finite bound.
    Penalty,
    /// No-arbitrage feasibility probe, optionally with a path-cell probe.
    Ftap {
        /// Cell spec such as "s1=2" or "s1=2,s2=0.5".
        #[arg(long)]
        cell: Option<String>,
    },
    /// Run a verification harness.
    Verify {
        /// Which check: doob | lift | axioms.
        #[arg(long)]
        which: String,
        /// Sample count (default: 10000 for doob, 1000 otherwise).
        #[arg(long)]
        samples: Option<usize>,
        /// Portfolio CSV artifact (lift check).
        #[arg(long)]
        portfolio: Option<PathBuf>,
    },
    /// Sweep one parameter axis and check monotonicity/budget verdicts.
    Sweep {
        /// Axis: kappa | M | n | J.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values; "unbounded" is allowed for M.
        #[arg(long)]
        values: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // help/version are ordinary exits; anything else is a usage error
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(exit_code::CONFIG as u8);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let code = run(cli);
    ExitCode::from(code as u8)
}

fn run(cli: Cli) -> i32 {
    let Some(config_path) = &cli.config else {
        eprintln!("config error\n  --config: a run configuration is required");
        return exit_code::CONFIG;
    };
    let text = match std::fs::read_to_string(config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("missing artifact: cannot read {}: {e}", config_path.display());
            return exit_code::MISSING_ARTIFACT;
        }
    };
    let mut config = match config::parse_config(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error");
            for issue in e.issues() {
                eprintln!("  {issue}");
            }
            return exit_code::CONFIG;
        }
    };
    if cli.exact {
        config.mode = SolveMode::Exact;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out_dir = Some(out.clone());
    }
    if let Some(dump) = &cli.dump_lp {
        config.dump_lp = Some(dump.clone());
    }
    let base_dir = config_path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));

    let output = match &cli.command {
        Command::Price => cli::cmd_price(&config, &base_dir),
        Command::Penalty => cli::cmd_penalty(&config, &base_dir),
        Command::Ftap { cell } => cli::cmd_ftap(&config, &base_dir, cell.as_deref()),
        Command::Verify { which, samples, portfolio } => {
            cli::cmd_verify(&config, &base_dir, which, *samples, portfolio.as_deref())
        }
        Command::Sweep { axis, values } => cli::cmd_sweep(&config, &base_dir, axis, values),
    };
    print!("{}", output.report);
    if let Err(e) = cli::write_outputs(&output) {
        eprintln!("cannot write outputs: {e}");
        return exit_code::INCONSISTENCY;
    }
    output.code
}
