//! `entgame`: command-line front end for Markov-generator entropy games.

mod commands;
mod error;
mod instance;
mod output;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

/// Environment variable holding the default validation tolerance.
pub const TOL_ENV: &str = "ENTGAME_TOL";

#[derive(Debug, Parser)]
#[command(name = "entgame", version, about = "f-divergences, centroids and minimax equilibria for Markov generators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Instance file (JSON); `-` reads standard input.
    #[arg(value_name = "INSTANCE", required_unless_present = "random")]
    pub instance: Option<PathBuf>,

    /// Generate a random instance with MEMBERSxSTATES (e.g. 2x3) instead of reading a file.
    #[arg(long, value_name = "NxD", conflicts_with = "instance")]
    pub random: Option<String>,

    /// Seed for --random.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Divergence: alpha:<a>, kl, rkl, hellinger2, chi2, tv, tv-half. Overrides the instance.
    #[arg(long, visible_alias = "kind", value_name = "KIND")]
    pub divergence: Option<String>,

    /// Tolerance for generator, distribution and reversibility checks.
    #[arg(long, env = TOL_ENV, default_value_t = entgame::DEFAULT_TOL)]
    pub tol: f64,

    /// Write the report here instead of standard output.
    #[arg(short, long, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Single-line JSON output.
    #[arg(long)]
    pub compact: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the instance and report reversibility of each generator.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Pi-dual of each generator (or of --index).
    Dual {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        index: Option<usize>,
    },
    /// Power-mean reversiblization P_p.
    Reversiblize {
        #[command(flatten)]
        common: Common,
        /// Exponent: a real number, inf or -inf.
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        #[arg(long)]
        index: Option<usize>,
    },
    /// D_f(M || L) between two members.
    Divergence {
        #[command(flatten)]
        common: Common,
        /// Index of M (default 0).
        #[arg(long)]
        m: Option<usize>,
        /// Index of L (default 1).
        #[arg(long)]
        l: Option<usize>,
    },
    /// f-projection of each generator onto the pi-reversible set.
    Project {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        index: Option<usize>,
    },
    /// Weighted information centroid.
    Centroid {
        #[command(flatten)]
        common: Common,
        /// uniform, e:<i>, or a comma-separated list.
        #[arg(long)]
        weights: Option<String>,
        /// closed, generic or auto.
        #[arg(long, default_value = "auto")]
        method: String,
    },
    /// Projected subgradient search for the mixed equilibrium.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Decide whether a pure-strategy saddle point exists.
    PureNash {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solve: SolveArgs,
        /// Tolerance on the minimax/maximin gap.
        #[arg(long)]
        nash_tol: Option<f64>,
    },
    /// Brute-force reference computations.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Convergence of the centroid in total variation as t grows.
    ProbeRate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solve: SolveArgs,
        /// Comma-separated iteration counts.
        #[arg(long)]
        t_list: Option<String>,
        /// Reference run length as a multiple of the largest t.
        #[arg(long)]
        ref_factor: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// Iteration count t.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Stepsize: a positive real or `auto`.
    #[arg(long)]
    pub eta: Option<String>,
    /// Starting weights: uniform, e:<i>, or a comma-separated list.
    #[arg(long)]
    pub w0: Option<String>,
    /// Stop early once the gap falls below this value.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Record a trace row every k iterations (0 disables).
    #[arg(long)]
    pub trace_every: Option<usize>,
    /// Reference member of the subgradient (default: last).
    #[arg(long)]
    pub ref_index: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Grid maximization of the dual over the simplex (at most 3 members).
    Dual {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// Dense per-edge scan for the centroid.
    Edge {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        resolution: Option<f64>,
        #[arg(long)]
        weights: Option<String>,
    },
    /// Maximin value of the pure game.
    Pure {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub(crate) fn common(&self) -> &Common {
        match self {
            Command::Validate { common }
            | Command::Dual { common, .. }
            | Command::Reversiblize { common, .. }
            | Command::Divergence { common, .. }
            | Command::Project { common, .. }
            | Command::Centroid { common, .. }
            | Command::Solve { common, .. }
            | Command::PureNash { common, .. }
            | Command::ProbeRate { common, .. } => common,
            Command::Oracle { which } => match which {
                OracleCommand::Dual { common, .. }
                | OracleCommand::Edge { common, .. }
                | OracleCommand::Pure { common } => common,
            },
        }
    }
}

fn read_input(common: &Common) -> Result<(String, String), CliError> {
    if let Some(shape) = &common.random {
        let (n, d) = instance::parse_shape(shape).map_err(|m| CliError::parse(Some("--random".into()), m))?;
        let doc = instance::random_document(n, d, common.seed);
        return Ok((format!("random:{shape}:seed={}", common.seed), output::to_json(&doc, false)));
    }
    let path = common.instance.as_ref().expect("clap requires an instance");
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::parse(None, format!("reading stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::parse(None, format!("reading {}: {e}", path.display())))?
    };
    Ok((path.display().to_string(), text))
}

fn run(cli: &Cli, argv: &[String]) -> Result<(String, i32), CliError> {
    let common = cli.command.common();
    let (source, text) = read_input(common)?;
    let report = commands::dispatch(&cli.command, &source, &text, argv)?;
    let code = if report.converged { 0 } else { error::Kind::NotConverged.exit_code() };
    Ok((output::to_json(&report.document, !common.compact), code))
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli, &argv[1..]) {
        Ok((text, code)) => {
            let written = match &cli.command.common().output {
                Some(path) => std::fs::write(path, &text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            if let Err(e) = written {
                eprintln!("entgame: writing report: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprint!("{}", output::to_json(&e.to_json(), false));
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
