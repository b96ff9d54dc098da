use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Parser, ValueEnum};
use log::LevelFilter;

use sparsecut::bnc::{solve_detailed, Instance, SolverConfig};
use sparsecut::io::{looks_like_qubo, parse_maxcut, parse_qubo, write_report, ReportFormat, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Mc,
    Bq,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

/// Exact branch-and-cut solver for sparse max-cut and QUBO instances.
///
/// Logging is controlled by SOLVER_LOG=quiet|info|debug (default info).
/// Exit status: 0 when optimality is proven, 2 when a limit stops the
/// search, 1 on errors.
#[derive(Debug, Parser)]
#[command(name = "sparsecut", version)]
struct Cli {
    /// Instance file: weighted edge list (.mc) or QUBO matrix (.bq).
    input: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    format: InputFormat,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    /// Relative primal-dual gap at which to stop (0.01 = 1%).
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    /// Threads; more than one runs the racing solver.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Blocks with at most this many vertices are enumerated.
    #[arg(long, default_value_t = 10)]
    enum_threshold: usize,
    #[arg(long)]
    node_limit: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the 0/1 solution vector, one entry per line.
    #[arg(long)]
    write_solution: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    output_format: OutputFormat,
    /// Print presolve statistics to stderr.
    #[arg(long)]
    presolve_stats: bool,
    #[arg(long)]
    no_presolve: bool,
    #[arg(long)]
    no_propagation: bool,
    #[arg(long, default_value_t = 8)]
    heur_restarts: usize,
    #[arg(long)]
    heur_off: bool,
    /// Merge vertices joined by zero-weight arcs in the separation graph.
    #[arg(long)]
    sepa_contract_zeros: bool,
    #[arg(long, default_value_t = 50_000)]
    sepa_triangle_budget: usize,
    /// Defaults to twice the number of vertices.
    #[arg(long)]
    sepa_max_cuts_per_round: Option<usize>,
}

impl Cli {
    fn solver_config(&self) -> Result<SolverConfig> {
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            bail!("--time-limit must be a positive number of seconds");
        }
        if !(self.gap >= 0.0 && self.gap.is_finite()) {
            bail!("--gap must be non-negative");
        }
        if self.threads == 0 {
            bail!("--threads must be at least 1");
        }
        let mut cfg = SolverConfig {
            time_limit: Some(Duration::from_secs_f64(self.time_limit)),
            gap: self.gap,
            node_limit: self.node_limit,
            enum_threshold: self.enum_threshold,
            seed: self.seed,
            threads: self.threads,
            presolve: !self.no_presolve,
            propagation: !self.no_propagation,
            heuristics: !self.heur_off,
            heur_restarts: self.heur_restarts.max(1),
            ..SolverConfig::default()
        };
        cfg.separation.contract_zeros = self.sepa_contract_zeros;
        cfg.separation.triangle_budget = self.sepa_triangle_budget;
        cfg.separation.max_cuts_per_round = self.sepa_max_cuts_per_round;
        Ok(cfg)
    }
}

fn init_logging() {
    let level = match std::env::var("SOLVER_LOG").as_deref() {
        Ok("quiet") => LevelFilter::Off,
        Ok("debug") => LevelFilter::Debug,
        _ => LevelFilter::Info,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .target(env_logger::Target::Stderr)
        .init();
}

fn load(path: &Path, format: InputFormat) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let qubo = match format {
        InputFormat::Mc => false,
        InputFormat::Bq => true,
        InputFormat::Auto => match path.extension().and_then(|e| e.to_str()) {
            Some("mc") => false,
            Some("bq") => true,
            _ => looks_like_qubo(&text),
        },
    };
    let name = path.display();
    Ok(if qubo {
        Instance::Qubo(parse_qubo(&text).with_context(|| format!("parsing {name} as QUBO"))?)
    } else {
        Instance::MaxCut(parse_maxcut(&text).with_context(|| format!("parsing {name} as max-cut"))?)
    })
}

fn run(cli: &Cli) -> Result<SolveStatus> {
    let cfg = cli.solver_config()?;
    let instance = load(&cli.input, cli.format)?;
    let (report, outcome) = solve_detailed(&instance, &cfg);
    if cli.presolve_stats {
        match &outcome.presolve {
            Some(s) => eprintln!("{s}"),
            None => eprintln!("presolve disabled"),
        }
    }
    let format = match cli.output_format {
        OutputFormat::Json => ReportFormat::Json,
        OutputFormat::Text => ReportFormat::Text,
    };
    let text = write_report(&report, format);
    match &cli.out {
        Some(p) => std::fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let Some(p) = &cli.write_solution {
        let lines: String = report.partition.iter().map(|b| format!("{b}\n")).collect();
        std::fs::write(p, lines).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(report.status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    init_logging();
    match run(&cli) {
        Ok(SolveStatus::Optimal) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
