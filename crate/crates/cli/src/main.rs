mod commands;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use qalink_core::embedder::SearchBudget;

use commands::{CliError, GraphInput};

/// Lattice-embedding obstructions and pretzel classification for
/// quasi-alternating links.
///
/// Exit codes: 0 when a command completes (whatever the verdict), 2 when the
/// obstruction search is inconclusive, 1 on usage or input errors.
#[derive(Parser, Debug)]
#[command(name = "qalink", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct Source {
    /// Builtin graph: 11n50, pretzel:p1,p2,...:q or mirror-pretzel:p1,p2,...:q
    #[arg(long)]
    builtin: Option<String>,
    /// Graph file (`v <id> <weight>` and `e <a> <b>` lines).
    #[arg(long)]
    graph: Option<String>,
    /// Pretzel P(p1,...,pn,-q); uses its star-shaped plumbing.
    #[arg(long)]
    pretzel: Option<String>,
}

impl Source {
    fn input(&self) -> GraphInput {
        match (&self.builtin, &self.graph, &self.pretzel) {
            (Some(b), _, _) => GraphInput::Builtin(b.clone()),
            (_, Some(g), _) => GraphInput::File(g.clone()),
            (_, _, Some(p)) => GraphInput::Pretzel(p.clone()),
            _ => unreachable!("clap enforces exactly one source"),
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search all embeddings into the diagonal lattice and test admissibility.
    Obstruct {
        #[command(flatten)]
        source: Source,
        /// Largest ambient rank searched (default: the completeness bound).
        #[arg(long)]
        max_ambient_rank: Option<usize>,
        /// Search nodes before giving up.
        #[arg(long, default_value_t = 100_000_000)]
        node_limit: u64,
    },
    /// Classify a pretzel link, e.g. "P(2,2,-3)" or "P(-1; -3,-3)".
    Classify {
        pretzel: String,
        /// Write the resolution certificate (JSON) here when there is one.
        #[arg(long)]
        certificate_out: Option<PathBuf>,
    },
    /// Correction terms from characteristic vectors.
    Dinv {
        #[command(flatten)]
        source: Source,
        /// Negate, giving the values for the oppositely oriented boundary.
        #[arg(long)]
        mirror: bool,
    },
    /// Verify a certificate file.
    Certify { file: String },
}

fn run(cli: &Cli) -> Result<report::Output, CliError> {
    match &cli.command {
        Command::Obstruct { source, max_ambient_rank, node_limit } => {
            let budget = SearchBudget {
                max_ambient_rank: *max_ambient_rank,
                node_limit: *node_limit,
                ..SearchBudget::default()
            };
            commands::cmd_obstruct(&source.input(), &budget)
        }
        Command::Classify { pretzel, certificate_out } => {
            commands::cmd_classify(pretzel, certificate_out.as_deref())
        }
        Command::Dinv { source, mirror } => commands::cmd_dinv(&source.input(), *mirror),
        Command::Certify { file } => commands::cmd_certify(file),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            let body = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.report).expect("plain data") + "\n",
                Format::Text => out.text,
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::from(out.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
