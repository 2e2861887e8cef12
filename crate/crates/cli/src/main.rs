use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use semimod::{Error, Flavor, MorphismClass};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "semimod", version, about = "Finite B-modules and F_inf-modules: constructions, hom search, certificates")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Search budget (search nodes per hom-set search).
    #[arg(long, global = true, default_value_t = semimod::hom::DEFAULT_BUDGET)]
    pub budget: u64,
    /// Worker threads for parallel search (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a module: D, E (with --n), D0, E0, free (with --flavor, --rank),
    /// or a name such as D4, E_3, M3, free:Finf:2.
    Construct {
        what: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, value_parser = parse_flavor)]
        flavor: Option<Flavor>,
        /// Sort elements by name in JSON output.
        #[arg(long)]
        canonical: bool,
    },
    /// Check the module axioms of a module document ("-" reads stdin).
    Validate { module: String },
    /// Enumerate homs between two modules (names or files).
    Homs {
        source: String,
        target: String,
        /// Constraints document: {"pins": [[a, b]], "restrict": [[a, [b..]]], "injective": bool}.
        #[arg(long)]
        pins: Option<PathBuf>,
        #[arg(long)]
        injective: bool,
        /// Print only the number of homs.
        #[arg(long)]
        count: bool,
    },
    /// Corner-pinned injective homs D_n -> D_m (or E_n -> E_m).
    Rigidity {
        #[arg(long, value_parser = parse_flavor)]
        flavor: Flavor,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Search a one-sided inverse for a morphism document.
    SplitCheck { morphism: String },
    /// Decide projectivity by splitting the canonical free cover.
    Projective { module: String },
    /// Distinct-rows factorization of a matrix document.
    FactorMatrix {
        matrix: String,
        #[arg(long, value_parser = parse_flavor, default_value = "B")]
        flavor: Flavor,
    },
    /// Dual of a hom between free B-modules; with --factor, the dual
    /// factorization of a splittable injection.
    Dualize {
        morphism: String,
        #[arg(long)]
        factor: bool,
    },
    /// Check the corner-embedding non-Noetherianity witness up to --max-n.
    Witness {
        #[arg(long, value_parser = parse_flavor, default_value = "B")]
        flavor: Flavor,
        #[arg(long, default_value_t = 2)]
        max_n: usize,
        #[arg(long, value_parser = parse_class, default_value = "injections")]
        class: MorphismClass,
        /// JSON spec {"flavor", "class", "max_n", "extra": [family names]}; overrides the flags.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Hasse diagram of a module in DOT.
    ExportDot { module: String },
}

fn parse_flavor(s: &str) -> Result<Flavor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_class(s: &str) -> Result<MorphismClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// How a command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Verified,
    Negative,
    Inconclusive,
}

impl Outcome {
    fn code(self) -> u8 {
        match self {
            Outcome::Verified => 0,
            Outcome::Negative => 1,
            Outcome::Inconclusive => 2,
        }
    }
}

const INPUT_ERROR: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 || rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("error: invalid thread count {t}");
            return ExitCode::from(INPUT_ERROR);
        }
    }
    let mut out = std::io::stdout().lock();
    match commands::run(&cli, &mut out) {
        Ok(outcome) => {
            let _ = out.flush();
            ExitCode::from(outcome.code())
        }
        Err(Error::BudgetExceeded(b)) => {
            let _ = out.flush();
            eprintln!("inconclusive: search budget of {b} exceeded");
            ExitCode::from(Outcome::Inconclusive.code())
        }
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
