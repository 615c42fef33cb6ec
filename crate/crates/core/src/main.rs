use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sorted_montague::cli::{self, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "sorted-montague",
    version,
    about = "Many-sorted Montagovian semantic composition with lexical coercions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a sort inventory and (optionally) a lexicon
    Check {
        /// Sort inventory file (JSON)
        #[arg(long)]
        inventory: PathBuf,
        /// Lexicon file (JSON)
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
    /// Analyze a derivation corpus, one derivation per line
    Analyze {
        /// Sort inventory file (JSON)
        #[arg(long)]
        inventory: PathBuf,
        /// Lexicon file (JSON)
        #[arg(long)]
        lexicon: PathBuf,
        /// Derivation corpus, one s-expression per line
        #[arg(long)]
        input: PathBuf,
        /// Return all readings, not only the minimal-cost ones
        #[arg(long = "all")]
        all: bool,
        /// Maximum modifiers composed per argument slot
        #[arg(long = "max-chain", default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
        max_chain: u64,
        /// Output format
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Exit 4 if any line fails to compose
        #[arg(long)]
        strict: bool,
        /// Lines analyzed concurrently (output stays in input order)
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        /// ASCII connectives instead of Unicode
        #[arg(long)]
        ascii: bool,
    },
    /// List an inventory's sorts, or a noun's classifier sorts
    Sorts {
        /// Sort inventory file (JSON)
        #[arg(long)]
        inventory: PathBuf,
        /// Show the classifiers declared for this noun
        #[arg(long)]
        noun: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
    Raw,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Text => OutputFormat::Text,
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Raw => OutputFormat::Raw,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());

    let result = match cli.command {
        Command::Check { inventory, lexicon } => {
            cli::cmd_check(&inventory, lexicon.as_deref(), &mut out)
        }
        Command::Sorts { inventory, noun } => cli::cmd_sorts(&inventory, noun.as_deref(), &mut out),
        Command::Analyze {
            inventory,
            lexicon,
            input,
            all,
            max_chain,
            format,
            strict,
            jobs,
            ascii,
        } => {
            let mut config = RunConfig::new(inventory, lexicon, input);
            config.all_readings = all;
            config.max_chain = max_chain as usize;
            config.format = format.into();
            config.strict = strict;
            config.jobs = jobs as usize;
            config.ascii = ascii;
            cli::cmd_analyze(&config, &mut out)
        }
    };

    let code = match result {
        Ok(code) => code,
        Err(err) => {
            let _ = out.flush();
            eprintln!("sorted-montague: {}", err.message);
            err.code
        }
    };
    if out.flush().is_err() {
        return ExitCode::from(cli::EXIT_PARSE as u8);
    }
    ExitCode::from(code as u8)
}
