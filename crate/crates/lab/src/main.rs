use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use iwalab_core::lambda_poly::LevelVector;
use iwalab_lab::catalog::{catalog_list, catalog_module};
use iwalab_lab::fileformat::parse_module_file;
use iwalab_lab::report::{to_json, to_text};
use iwalab_lab::verify::{exit_code, run_verify, Checks, VerifyOptions};

const EXIT_INPUT_ERROR: u8 = 3;

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Finite-level duality lab for modules over the Iwasawa algebra.
#[derive(Parser)]
#[command(name = "iwalab", disable_help_subcommand = true)]
struct Cli {
    /// Path to a JSON module description.
    #[arg(long, conflicts_with = "catalog")]
    module: Option<PathBuf>,

    /// Name of a built-in catalog module (see --list).
    #[arg(long)]
    catalog: Option<String>,

    /// List the built-in catalog and exit.
    #[arg(long)]
    list: bool,

    /// Prime p for catalog modules (module files carry their own).
    #[arg(long, default_value_t = 2)]
    p: u64,

    /// Level bound n_1[,n_2,...]; defaults to 2 for d = 1 and 1,...,1 above.
    #[arg(long)]
    max_level: Option<String>,

    /// Initial working precision for the coinvariant computations.
    #[arg(long, env = "IWALAB_PRECISION", default_value_t = 4)]
    precision: u32,

    /// Seed for the sampled naturality checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Comma-separated subset of duality,naturality,colimit,growth,char
    /// (or "all").
    #[arg(long, default_value = "all")]
    checks: String,
}

fn parse_checks(s: &str) -> Result<Checks, String> {
    let mut checks = Checks::none();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part {
            "all" => checks = Checks::all(),
            "duality" => checks.duality = true,
            "naturality" => checks.naturality = true,
            "colimit" => checks.colimit = true,
            "growth" => checks.growth = true,
            "char" => checks.char = true,
            other => return Err(format!("unknown check {other:?}")),
        }
    }
    Ok(checks)
}

fn parse_max_level(s: &str, d: usize) -> Result<LevelVector, String> {
    let parts: Result<Vec<u32>, _> = s.split(',').map(|x| x.trim().parse::<u32>()).collect();
    let parts = parts.map_err(|_| format!("cannot parse level bound {s:?}"))?;
    if parts.len() != d {
        return Err(format!(
            "level bound has {} components but the module has d = {d}",
            parts.len()
        ));
    }
    Ok(LevelVector(parts))
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT_ERROR)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are not input errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(EXIT_INPUT_ERROR);
        }
    };

    if cli.list {
        println!("{}", catalog_list());
        return ExitCode::SUCCESS;
    }

    let (name, presentation) = if let Some(path) = &cli.module {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return input_error(format!("cannot read {}: {e}", path.display())),
        };
        match parse_module_file(&text) {
            Ok(f) => {
                let fallback = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "module".into());
                (f.name.unwrap_or(fallback), f.presentation)
            }
            Err(e) => return input_error(format!("{}: {e}", path.display())),
        }
    } else if let Some(name) = &cli.catalog {
        if !iwalab_lab::fileformat::is_prime(cli.p) {
            return input_error(format!("p = {} is not prime", cli.p));
        }
        match catalog_module(name, cli.p) {
            Some(m) => (name.clone(), m),
            None => {
                return input_error(format!(
                    "no catalog module named {name:?}; try --list"
                ))
            }
        }
    } else {
        return input_error("one of --module, --catalog, or --list is required");
    };

    let checks = match parse_checks(&cli.checks) {
        Ok(c) => c,
        Err(e) => return input_error(e),
    };
    let max_level = match &cli.max_level {
        Some(s) => match parse_max_level(s, presentation.d) {
            Ok(l) => l,
            Err(e) => return input_error(e),
        },
        None => {
            if presentation.d == 1 {
                LevelVector(vec![2])
            } else {
                LevelVector(vec![1; presentation.d])
            }
        }
    };
    if cli.precision == 0 {
        return input_error("precision must be at least 1");
    }

    let opts = VerifyOptions {
        max_level,
        precision: cli.precision,
        seed: cli.seed,
        checks,
    };
    let report = match run_verify(&name, &presentation, &opts) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    match cli.format {
        Format::Json => println!("{}", to_json(&report)),
        Format::Text => print!("{}", to_text(&report)),
    }
    ExitCode::from(exit_code(&report.verdict) as u8)
}
