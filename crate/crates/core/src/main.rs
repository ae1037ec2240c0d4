use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metamax::bench::BenchmarkSpec;
use metamax::harness::{
    emit_csv, instance_growth_report, read_rounds_csv, run_experiment, verify_theorems, ExperimentConfig, Overrides,
};
use metamax::strategy::StrategyKind;
use metamax::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "metamax", version, about = "Multi-start local search experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write curves.csv, traces.csv and rounds.csv.
    Run(RunArgs),
    /// Summaries of earlier runs.
    Report {
        #[command(subcommand)]
        what: ReportKind,
    },
    /// Self-checks.
    Verify {
        #[command(subcommand)]
        what: VerifyKind,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON or key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated strategy kinds, replacing the configured list.
    #[arg(long)]
    strategy: Option<String>,
    /// Benchmark, e.g. `griewank_mod:2` or `clustering:builtin:gmm:10`.
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Instance count for fixed-pool strategies.
    #[arg(long)]
    k: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ReportKind {
    /// Instance growth `r ln t / t` from a rounds.csv.
    Growth {
        #[arg(long = "in")]
        input: PathBuf,
        /// Smallest total step count included in the tail band.
        #[arg(long, default_value_t = metamax::harness::growth::TAIL_FROM)]
        tail_from: u64,
    },
}

#[derive(Subcommand)]
enum VerifyKind {
    /// Synthetic checks of the METAMAX guarantees.
    Theorems {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn overrides(a: &RunArgs) -> Result<Overrides, Error> {
    let strategies = a
        .strategy
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|k| StrategyKind::parse(k).ok_or_else(|| Error::Config(format!("unknown strategy {k:?}"))))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;
    Ok(Overrides {
        strategies,
        benchmark: a.benchmark.as_deref().map(BenchmarkSpec::parse).transpose()?,
        budget: a.budget,
        runs: a.runs,
        seed: a.seed,
        k: a.k,
        out: a.out.clone(),
    })
}

fn load_config(a: &RunArgs) -> Result<ExperimentConfig, Error> {
    let o = overrides(a)?;
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::from_overrides(&o)?,
    };
    cfg.apply(&o);
    cfg.validate()?;
    Ok(cfg)
}

fn run(a: RunArgs) -> ExitCode {
    let cfg = match load_config(&a) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let result = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e @ (Error::Config(_) | Error::Parse { .. })) => return fail(EXIT_CONFIG, e),
        Err(e) => return fail(EXIT_RUNTIME, e),
    };
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    if let Err(e) = emit_csv(&out, &result.curves, &result.trace_rows(), &result.round_rows()) {
        return fail(EXIT_RUNTIME, e);
    }
    let metric = if result.known_max.is_some() {
        "mean error"
    } else {
        "mean best"
    };
    for c in &result.curves {
        match c.last() {
            Some(p) => println!(
                "{:<12} {metric} {:.6e} at {} evals ({} runs{})",
                c.strategy,
                p.mean,
                p.evals,
                p.runs,
                p.ci99_halfwidth
                    .map(|h| format!(", 99% ci +/- {h:.2e}"))
                    .unwrap_or_default()
            ),
            None => println!("{:<12} no valid runs", c.strategy),
        }
    }
    println!("wrote {}", out.display());

    let violations: Vec<_> = result.violations().collect();
    let contract = result.invalid_runs().any(|o| {
        o.trace
            .error
            .as_deref()
            .is_some_and(|e| e.starts_with("contract violation"))
    });
    if !violations.is_empty() || contract {
        for (o, v) in violations.iter().take(20) {
            eprintln!("{} run {}: {v}", o.strategy, o.run);
        }
        return fail(EXIT_INVARIANT, format!("{} invariant violations", violations.len()));
    }
    let invalid = result.invalid_runs().count();
    if invalid > 0 {
        for o in result.invalid_runs().take(5) {
            eprintln!(
                "{} run {}: {}",
                o.strategy,
                o.run,
                o.trace.error.as_deref().unwrap_or("?")
            );
        }
        return fail(EXIT_RUNTIME, format!("{invalid} runs failed and were left out"));
    }
    ExitCode::SUCCESS
}

fn report_growth(input: PathBuf, tail_from: u64) -> ExitCode {
    let rows = match read_rounds_csv(&input) {
        Ok(r) => r,
        Err(e @ Error::Io { .. }) => return fail(EXIT_RUNTIME, e),
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    let rep = match instance_growth_report(&rows, tail_from) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, e),
    };
    println!("strategy,run,round,total_steps,ratio");
    for r in &rep.rows {
        println!("{},{},{},{},{:.6}", r.strategy, r.run, r.round, r.total_steps, r.ratio);
    }
    for (s, (lo, hi)) in &rep.tail {
        eprintln!("{s}: r ln t / t in [{lo:.4}, {hi:.4}] for t >= {}", rep.tail_from);
    }
    ExitCode::SUCCESS
}

fn verify(seed: u64) -> ExitCode {
    let outcomes = verify_theorems(seed);
    let mut failed = 0;
    for o in &outcomes {
        let status = if o.passed() { "ok" } else { "FAILED" };
        println!("{:<26} {status:<6} {} runs  {}", o.name, o.runs, o.detail);
        for v in o.violations.iter().take(5) {
            println!("    {v}");
        }
        failed += usize::from(!o.passed());
    }
    if failed > 0 {
        return fail(EXIT_INVARIANT, format!("{failed} probes failed"));
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run(a) => run(a),
        Command::Report {
            what: ReportKind::Growth { input, tail_from },
        } => report_growth(input, tail_from),
        Command::Verify {
            what: VerifyKind::Theorems { seed },
        } => verify(seed),
    }
}
