use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use orthospline_harness::checks;
use orthospline_harness::config::{parse_p_list, ExperimentConfig};
use orthospline_harness::experiment::run_checks;
use orthospline_harness::families;
use orthospline_harness::report::{self, Format, Status};

const EXIT_EXACT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "orthospline",
    version,
    about = "Orthonormal spline system experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the check battery and write summary.csv, checks/ and meta.json.
    Run(RunArgs),
    /// Run the battery and print verdicts; files only with --out.
    Verify {
        #[command(flatten)]
        args: RunArgs,
        /// Exact checks only.
        #[arg(long)]
        quick: bool,
    },
    /// Print the summary of a finished run.
    Report {
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        /// Output directory of the run.
        #[arg(long, default_value = "out")]
        dir: PathBuf,
    },
    /// List sequence families and checks.
    List,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// key = value config file; flags below override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma separated exponents.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long = "n-k")]
    n_k: Option<usize>,
    #[arg(long)]
    sequence_file: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run only the named checks (repeatable).
    #[arg(long = "check")]
    checks: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn build_config(a: &RunArgs) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(v) = a.k {
        cfg.k = v;
    }
    if let Some(v) = &a.family {
        cfg.family = v.clone();
    }
    if let Some(v) = a.n {
        cfg.n = v;
    }
    if let Some(v) = &a.p {
        cfg.p_list = parse_p_list(v)?;
    }
    if let Some(v) = a.trials {
        cfg.trials = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.m {
        cfg.m = v;
    }
    if let Some(v) = a.n_k {
        cfg.n_k_override = Some(v);
    }
    if let Some(v) = &a.sequence_file {
        cfg.sequence_file = Some(v.clone());
    }
    if let Some(v) = &a.out {
        cfg.output_dir = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(args: &RunArgs, exact_only: bool, write: bool, verbose: bool) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let selected = match checks::select(&args.checks, exact_only) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let start = Instant::now();
    let report = match run_checks(&cfg, &selected) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    };
    if verbose {
        for c in &report.checks {
            let value = c.value.map_or("-".to_string(), |v| format!("{v:.6e}"));
            let fit = c
                .fit
                .map_or(String::new(), |f| format!(" C={:.4e} q={:.4}", f.c, f.q));
            println!(
                "{:<24} {:<8} {:<8} {value}{fit}",
                c.name,
                c.tier.as_str(),
                c.status.as_str()
            );
        }
    }
    if write {
        if let Err(e) = report::emit(&report, &cfg, &cfg.output_dir) {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
        eprintln!("wrote {}", cfg.output_dir.display());
    }
    eprintln!(
        "{} checks in {:.2}s",
        report.checks.len(),
        start.elapsed().as_secs_f64()
    );
    let failed = report.exact_failures();
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("exact checks failed: {}", failed.join(", "));
        ExitCode::from(EXIT_EXACT_FAILURE)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => execute(&args, false, true, true),
        Command::Verify { args, quick } => {
            let write = args.out.is_some();
            execute(&args, quick, write, true)
        }
        Command::Report { format, dir } => {
            let meta = match report::load_meta(&dir) {
                Ok(m) => m,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_RUNTIME);
                }
            };
            let fmt = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
            };
            match report::render(&meta.report, fmt) {
                Ok(s) => {
                    print!("{s}");
                    if fmt == Format::Json {
                        println!();
                    }
                    let failed = meta.report.checks.iter().any(|c| c.status == Status::Fail);
                    if failed {
                        ExitCode::from(EXIT_EXACT_FAILURE)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_RUNTIME)
                }
            }
        }
        Command::List => {
            println!("families: {}", families::names().join(", "));
            for c in checks::registry() {
                println!("{:<24} {}", c.name(), c.tier().as_str());
            }
            ExitCode::SUCCESS
        }
    }
}
