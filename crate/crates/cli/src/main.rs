//! `quantarrow` command-line front end.

mod commands;
mod fixtures;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{CliError, CliResult, EXIT_VALIDATION};

#[derive(Parser, Debug)]
#[command(name = "quantarrow", version, about = "Exact and sampled analysis of social choice constitutions")]
struct Cli {
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Cap on weighted states visited by exact enumeration.
    #[arg(long, global = true, default_value_t = quantarrow::enumerate::DEFAULT_BUDGET)]
    budget: u64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Print exact rationals as plain floats.
    #[arg(long, global = true)]
    float_only: bool,

    /// Write the canonical fixture files into this directory.
    #[arg(long, value_name = "DIR")]
    emit_fixtures: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Paradox and transitivity probabilities, Kalai terms and influences.
    Analyze(AnalyzeArgs),
    /// Normal form of a transitive constitution, or a paradox profile.
    Structure(ConstitutionArg),
    /// Round each pair function to a nearby constant or dictator.
    Project(ProjectArgs),
    /// Build a cyclic profile from two pivotal voters.
    Barbera(ConstitutionArg),
    /// Enumerate the transitive three-alternative constitutions on n voters.
    EnumerateFamily(EnumerateArgs),
    /// Monte Carlo paradox probability or distance.
    Mc(McArgs),
    /// Gaussian threshold triples: closed form, sampling and the Arrow bound.
    Gauss(GaussArgs),
    /// Reverse hypercontractivity on random set pairs.
    Hyper(HyperArgs),
    /// Randomized instance suites for the pivotal, projection and hypercontractive bounds.
    Bounds(BoundsArgs),
}

#[derive(Args, Debug)]
pub struct ConstitutionArg {
    #[arg(long)]
    pub constitution: PathBuf,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub constitution: PathBuf,
    /// Vote distribution; uniform when omitted.
    #[arg(long)]
    pub distribution: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[arg(long)]
    pub constitution: PathBuf,
    #[arg(long)]
    pub distribution: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long, conflicts_with = "majority", required_unless_present = "majority")]
    pub constitution: Option<PathBuf>,
    /// Counting majority on this many voters (odd).
    #[arg(long)]
    pub majority: Option<usize>,
    /// Alternatives for `--majority`.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long)]
    pub distribution: Option<PathBuf>,
    /// Estimate the distance to this constitution instead.
    #[arg(long)]
    pub distance_to: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GaussArgs {
    #[arg(long, default_value_t = -1.0 / 3.0, allow_negative_numbers = true)]
    pub rho: f64,
    /// Three thresholds; `inf` and `-inf` give constants.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.0, 0.0, 0.0], allow_negative_numbers = true)]
    pub thresholds: Vec<f64>,
    /// Monte Carlo samples; 0 skips sampling.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Check the Arrow bound at this epsilon.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct HyperArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1.0 / 3.0, allow_negative_numbers = true)]
    pub rho: f64,
    /// random, balls, subcubes or lex; cycles through all when omitted.
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = 2000)]
    pub pivot_instances: usize,
    #[arg(long, default_value_t = 5)]
    pub pivot_max_n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub hc_pairs: usize,
    #[arg(long, default_value_t = 12)]
    pub hc_max_n: usize,
    #[arg(long, default_value_t = 200)]
    pub projection_instances: usize,
}

/// Settings shared by every subcommand.
pub struct Globals {
    pub budget: u64,
    pub seed: u64,
    pub format: Format,
    pub float_only: bool,
}

fn run(cli: Cli) -> CliResult<String> {
    if cli.budget < 1 {
        return Err(CliError::Validation("budget must be at least 1".into()));
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Validation("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot size thread pool: {e}")))?;
    }
    let g = Globals { budget: cli.budget, seed: cli.seed, format: cli.format, float_only: cli.float_only };
    let mut out = String::new();
    if let Some(dir) = &cli.emit_fixtures {
        let written = fixtures::emit(dir)?;
        if cli.command.is_none() {
            for path in written {
                out.push_str(&format!("{}\n", path.display()));
            }
            return Ok(out);
        }
    }
    let Some(command) = cli.command else {
        return Err(CliError::Validation("a subcommand is required unless --emit-fixtures is given".into()));
    };
    let report = match command {
        Command::Analyze(a) => commands::analyze(&g, &a),
        Command::Structure(a) => commands::structure(&g, &a),
        Command::Project(a) => commands::project(&g, &a),
        Command::Barbera(a) => commands::barbera(&g, &a),
        Command::EnumerateFamily(a) => commands::enumerate_family(&g, &a),
        Command::Mc(a) => commands::mc(&g, &a),
        Command::Gauss(a) => commands::gauss(&g, &a),
        Command::Hyper(a) => commands::hyper(&g, &a),
        Command::Bounds(a) => commands::bounds(&g, &a),
    }?;
    out.push_str(&report);
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Validation(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    match run(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
