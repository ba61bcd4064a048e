use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use bellbound_cli::commands::{self, ScanSpec, DEFAULT_TOL};
use bellbound_cli::format::{csv_table, json, opt_num, Format};
use bellbound_cli::grid::GridSpec;
use bellbound_cli::suites::{render_text, run_suite, Suite};
use bellbound_cli::{exit, CliError, Output, PMAX_ENV};
use bellbound_core::applications::{parse_instances, VerifyConfig};
use bellbound_core::bounds::{BoundOptions, KMinusChoice};
use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bounds, approximations and checks for the moments of Poisson variables.
#[derive(Parser)]
#[command(name = "bellbound", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate B(p, beta) by the series, with its tail certificate.
    #[command(allow_negative_numbers = true)]
    Eval {
        #[command(flatten)]
        query: Query,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Lower and upper bounds on B(p, beta)^(1/p), with witnesses.
    #[command(allow_negative_numbers = true)]
    Bounds {
        #[command(flatten)]
        query: Query,
        /// Constant for the large-beta lower bound.
        #[arg(long, value_enum, default_value_t = KMinus::Formula)]
        k_minus: KMinus,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Tabulate series, bounds and ratios over a (p, beta) grid.
    #[command(allow_negative_numbers = true)]
    Scan {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Supremum of E(sum eta)^p given the sum of means a and of p-th moments b.
    #[command(allow_negative_numbers = true)]
    Extremal {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the self-verification suites; exits 4 on any failure.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Extra distributions to check, one `v:p,v:p,...` per line.
        #[arg(long, value_name = "FILE")]
        instances: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args)]
struct Query {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    beta: f64,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    p_start: f64,
    /// Defaults to --p-start.
    #[arg(long)]
    p_stop: Option<f64>,
    #[arg(long, default_value_t = 1)]
    p_count: usize,
    #[arg(long)]
    p_log: bool,
    #[arg(long, default_value_t = 1.0)]
    beta_start: f64,
    /// Defaults to --beta-start.
    #[arg(long)]
    beta_stop: Option<f64>,
    #[arg(long, default_value_t = 1)]
    beta_count: usize,
    #[arg(long)]
    beta_log: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KMinus {
    Formula,
    Printed,
}

fn run(command: Command) -> Result<Output, CliError> {
    let pmax = std::env::var(PMAX_ENV).ok();
    let series = commands::series_config(pmax.as_deref())?;
    match command {
        Command::Eval { query, tol, format } => {
            commands::eval(query.p, query.beta, tol, &series, format)
        }
        Command::Bounds {
            query,
            k_minus,
            format,
        } => {
            let opts = BoundOptions {
                k_minus: match k_minus {
                    KMinus::Formula => KMinusChoice::Formula,
                    KMinus::Printed => KMinusChoice::Printed,
                },
                series,
                ..BoundOptions::default()
            };
            commands::bounds(query.p, query.beta, &opts, format)
        }
        Command::Scan { grid, tol, format } => {
            let spec = ScanSpec {
                p_grid: GridSpec::new(
                    grid.p_start,
                    grid.p_stop.unwrap_or(grid.p_start),
                    grid.p_count,
                    grid.p_log,
                )?,
                beta_grid: GridSpec::new(
                    grid.beta_start,
                    grid.beta_stop.unwrap_or(grid.beta_start),
                    grid.beta_count,
                    grid.beta_log,
                )?,
                tol,
            };
            commands::scan(&spec, &series, format)
        }
        Command::Extremal { a, b, p, format } => commands::extremal(a, b, p, format),
        Command::Verify {
            suite,
            seed,
            trials,
            instances,
            format,
        } => {
            let instances = match instances {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        CliError::domain(format!("cannot read {}: {e}", path.display()))
                    })?;
                    parse_instances(&text)?
                }
                None => Vec::new(),
            };
            let cfg = VerifyConfig {
                trials,
                seed,
                ..VerifyConfig::default()
            };
            let reports = run_suite(suite, &cfg, &instances);
            let body = match format {
                Format::Text => render_text(&reports),
                Format::Json => json(&reports),
                Format::Csv => csv_table(
                    &["suite", "check", "passed", "value", "limit", "detail"],
                    reports.iter().flat_map(|r| {
                        r.checks.iter().map(|c| {
                            vec![
                                r.suite.clone(),
                                c.name.clone(),
                                c.passed.to_string(),
                                opt_num(c.value),
                                opt_num(c.limit),
                                c.detail.clone(),
                            ]
                        })
                    }),
                ),
            };
            let code = if reports.iter().all(|r| r.passed) {
                exit::SUCCESS
            } else {
                exit::VERIFY_FAILED
            };
            Ok(Output { body, code })
        }
    }
}

fn emit(body: &str, out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, body),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(output) => {
            if let Err(e) = emit(&output.body, cli.out.as_ref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(exit::DOMAIN as u8);
            }
            ExitCode::from(output.code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
