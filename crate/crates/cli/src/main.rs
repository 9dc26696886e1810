mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::CliError;

#[derive(Parser)]
#[command(name = "ffdef", version, about = "Orbit criteria, formula builders and evaluators over F_q(t)")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the result here instead of standard output. Relative paths
    /// resolve against FFDEF_OUT_DIR when it is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Clone)]
pub struct FieldArgs {
    /// Characteristic.
    #[arg(long)]
    pub p: u64,
    /// Extension degree of the constant field.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
}

#[derive(Subcommand)]
enum Command {
    /// List the first monic irreducibles of degree d over F_q.
    IrrPolys {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        d: usize,
        /// How many to list; all of them by default.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Tabulate M(g, d, p); each flag takes a value or an inclusive range `a..b`.
    MBound {
        #[arg(long, default_value = "0")]
        genus: String,
        #[arg(long)]
        d: String,
        #[arg(long)]
        p: String,
    },
    /// The criterion configuration (d, M and the F_j) for a genus bound.
    Config {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 0)]
        genus: u64,
        /// Use this degree instead of the least workable one.
        #[arg(long)]
        d: Option<u32>,
    },
    /// Decide h^2 + h = c in characteristic 2.
    AsSolve {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        c: String,
    },
    /// Decide whether f is a square in F_q(t).
    Square {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        f: String,
    },
    /// Run the orbit criterion and the direct oracle on one pair.
    OrbitCheck {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0)]
        genus: u64,
        #[arg(long)]
        d: Option<u32>,
    },
    /// Compare criterion and oracle on all pairs of bounded degree.
    Sweep(SweepArgs),
    /// Serialize one of the formula builders.
    BuildFormula {
        #[arg(value_enum)]
        which: Builder,
        #[arg(long, default_value_t = 0)]
        genus: u64,
        /// Characteristic, for pi-root.
        #[arg(long, default_value_t = 2)]
        p: u64,
        /// Exponent m of t = w^{p^m}, for pi-root.
        #[arg(long, default_value_t = 0)]
        m: u32,
    },
    /// Lower a formula to a prenex system or one polynomial.
    Lower {
        #[arg(value_enum)]
        target: LowerTarget,
        /// Formula text or JSON, or `@path` to read it from a file.
        formula: String,
        /// Characteristic, for the single-polynomial form.
        #[arg(long, default_value_t = 2)]
        p: u64,
    },
    /// Work with sentences of (N; 0, 1, +, |_p).
    Pheidas {
        #[arg(value_enum)]
        action: PheidasAction,
        /// Sentence text, or `@path`.
        sentence: String,
        #[arg(long)]
        p: u64,
        /// Search bound for natural-number witnesses.
        #[arg(long, default_value_t = 32)]
        bound: u64,
        #[arg(long, default_value_t = 0)]
        genus: u64,
    },
    /// Evaluate a positive-existential formula under an interpretation.
    Eval(EvalArgs),
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 0)]
    pub genus: u64,
    #[arg(long)]
    pub d: Option<u32>,
    /// Bound on numerator and denominator degrees.
    #[arg(long, default_value_t = 2)]
    pub max_degree: usize,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Check a random sample of this many pairs.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Formula text or JSON, or `@path`.
    pub formula: String,
    /// Interpretation JSON, or `@path`.
    #[arg(long)]
    pub interp: String,
    #[arg(long, default_value_t = 1)]
    pub max_num_deg: usize,
    #[arg(long, default_value_t = 1)]
    pub max_den_deg: usize,
    #[arg(long, default_value_t = 4)]
    pub hint_depth: u32,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Builder {
    Phi,
    Pi,
    PiRoot,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum LowerTarget {
    System,
    Single,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum PheidasAction {
    Parse,
    Eval,
    Translate,
    Roundtrip,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let sink = output::Sink::new(cli.format, cli.out)?;
    match cli.command {
        Command::IrrPolys { field, d, count } => commands::irr_polys(&sink, &field, d, count),
        Command::MBound { genus, d, p } => commands::m_bound(&sink, &genus, &d, &p),
        Command::Config { field, genus, d } => commands::config(&sink, &field, genus, d),
        Command::AsSolve { field, c } => commands::as_solve(&sink, &field, &c),
        Command::Square { field, f } => commands::square(&sink, &field, &f),
        Command::OrbitCheck { field, f, g, genus, d } => commands::orbit_check(&sink, &field, &f, &g, genus, d),
        Command::Sweep(args) => commands::sweep(&sink, &args),
        Command::BuildFormula { which, genus, p, m } => commands::build_formula(&sink, which, genus, p, m),
        Command::Lower { target, formula, p } => commands::lower(&sink, target, &formula, p),
        Command::Pheidas { action, sentence, p, bound, genus } => {
            commands::pheidas(&sink, action, &sentence, p, bound, genus)
        }
        Command::Eval(args) => commands::eval(&sink, &args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::Usage(e.to_string().trim().to_string()).report(),
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => e.report(),
    }
}
