mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "eigenpaths", version, about = "Track, classify and rip eigenvalue paths of matrix paths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Input JSON file.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Perturbation size for rip and perturb.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of perturbation trials.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Tracker overrides: a JSON file, or an inline JSON object.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::All)]
    pub format: Format,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Track the eigenvalues of a matrix path.
    Track,
    /// Closed-form pairing verdict for a 2x2 pair {"a": .., "b": ..}.
    Classify2x2 {
        /// Fail with exit code 4 unless the verdict is this one.
        #[arg(long)]
        expect: Option<String>,
    },
    /// Ambiguity-free perturbation of a matrix path.
    Rip {
        /// Reproduce endpoints with distinct eigenvalues exactly.
        #[arg(long)]
        preserve: bool,
    },
    /// Track the roots of a monic polynomial path.
    Polytrack,
    /// Check that convex pairings survive in f A + g B: {"a","b","f","g"}.
    Reduce,
    /// Seeded perturbation trials searching for splice witnesses.
    Perturb,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
    All,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::All)
    }
    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::All)
    }
    pub fn svg(self) -> bool {
        matches!(self, Format::Svg | Format::All)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
