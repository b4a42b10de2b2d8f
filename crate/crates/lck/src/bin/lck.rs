use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lck::report::{parse_complex_list, run, OutputFormat, RunConfig, RunOptions};
use lck::{Error, Result};

#[derive(Parser)]
#[command(name = "lck", version, about = "Verify l.c.K. structures on Hopf manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites from a config file and flag overrides.
    Run(RunArgs),
    /// Run every suite on the standard diagonal example and print a summary.
    Demo {
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated weights, e.g. 1,2
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    /// Comma-separated complex numbers, e.g. 1,0.6+0.8i
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    points: Option<usize>,
    /// Comma-separated suite names or `all`
    #[arg(long)]
    suites: Option<String>,
    #[arg(long)]
    format: Option<String>,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Record wall time in the report
    #[arg(long)]
    timing: bool,
}

fn list(text: &str) -> Vec<String> {
    text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn build_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(n) = args.n {
        if n != cfg.n {
            // weights and constants sized for another n are dropped unless given
            cfg.a.clear();
            cfg.c.clear();
        }
        cfg.n = n;
    }
    if let Some(a) = &args.a {
        cfg.a = list(a)
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad weight {s:?}"))))
            .collect::<Result<_>>()?;
        if args.n.is_none() {
            cfg.n = cfg.a.len();
        }
    }
    if let Some(s) = args.s {
        cfg.s = s;
    }
    if let Some(c) = &args.c {
        cfg.c = parse_complex_list(c)?;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(p) = args.points {
        cfg.points = p;
    }
    if let Some(s) = &args.suites {
        cfg.suites = list(s);
    }
    if let Some(f) = &args.format {
        cfg.output_format = f.parse::<OutputFormat>()?;
    }
    Ok(cfg)
}

fn execute(cfg: &RunConfig, options: RunOptions) -> ExitCode {
    match run(cfg, options) {
        Ok(report) => {
            print!("{}", report.render(cfg.output_format));
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(args) => {
            if args.parallel == 0 {
                eprintln!("error: --parallel must be at least 1");
                return ExitCode::from(2);
            }
            match build_config(&args) {
                Ok(cfg) => execute(
                    &cfg,
                    RunOptions {
                        threads: args.parallel,
                        timing: args.timing,
                    },
                ),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Demo { parallel } => {
            let cfg = RunConfig {
                output_format: OutputFormat::Text,
                ..RunConfig::default()
            };
            match cfg.resolved() {
                Ok((_, data)) => {
                    let spectrum: Vec<String> = data.lambda.iter().map(|l| format!("{l:.6}")).collect();
                    println!("Λ spectrum: [{}]", spectrum.join(", "));
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            execute(
                &cfg,
                RunOptions {
                    threads: parallel.max(1),
                    timing: false,
                },
            )
        }
    }
}
