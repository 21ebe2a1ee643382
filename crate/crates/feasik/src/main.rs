use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use feasik::config::Document;
use feasik::report::{self, summary_line};
use feasik::sweep::{self, GridConfig};
use feasik::trace::write_trace;
use feasik_core::certificates;
use feasik_core::{CounterMode, RunResult, Solver};

/// Finitely convergent overrelaxed projection methods for convex feasibility.
#[derive(Debug, Parser)]
#[command(name = "feasik", version)]
struct Cli {
    /// More output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    /// Suppress warnings.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a configured solve and write its trace.
    Solve {
        config: PathBuf,
        /// Trace CSV path.
        #[arg(short, long, default_value = "trace.csv")]
        output: PathBuf,
        /// Seed for random and shuffled controls.
        #[arg(long, env = "FEASIK_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        max_iter: Option<u64>,
    },
    /// Solve, then check the descent inequality along the trace.
    Certify {
        config: PathBuf,
        /// JSON report path; the summary goes to stdout either way.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, env = "FEASIK_SEED")]
        seed: Option<u64>,
        /// Boundary samples for the interior-ball spot check.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Rerun one of the built-in non-terminating examples.
    Reproduce {
        which: Example,
        #[arg(long)]
        max_iter: Option<u64>,
        /// Table rows to print.
        #[arg(long, default_value_t = 10)]
        rows: usize,
        /// Trace CSV of the direct run.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a grid of seeded instances in parallel.
    Sweep {
        grid: PathBuf,
        /// Results CSV; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write `-` instead of wall times so reruns are byte-identical.
        #[arg(long)]
        no_timing: bool,
        #[arg(long, env = "FEASIK_SEED")]
        seed: Option<u64>,
    },
    /// Parse and validate a config without solving.
    Validate {
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Example {
    A1,
    A2,
    #[value(name = "a1-bracketed")]
    A1Bracketed,
    #[value(name = "a2-bracketed")]
    A2Bracketed,
}

/// Config and usage errors.
const EXIT_ERROR: u8 = 1;
/// Ran fine but did not terminate, or a check failed.
const EXIT_UNMET: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ERROR) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn warn(cli: &Cli, res: &RunResult) {
    if !cli.quiet {
        for w in &res.warnings {
            eprintln!("warning: {w}");
        }
    }
}

fn write_trace_file(path: &Path, res: &RunResult, dim: usize) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    write_trace(BufWriter::new(file), dim, &res.trace)?;
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<Document> {
    Document::load(path).with_context(|| format!("{}", path.display()))
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Solve {
            config,
            output,
            seed,
            max_iter,
        } => {
            let doc = load(config)?;
            let mut cfg = doc.run_config(*seed).with_context(|| config.display().to_string())?;
            if let Some(n) = max_iter {
                cfg.max_iter = *n;
            }
            let dim = cfg.problem.dim();
            let res = Solver::new(cfg)?.solve()?;
            warn(cli, &res);
            write_trace_file(output, &res, dim)?;
            println!("{}", summary_line(&res));
            if cli.verbose > 0 {
                eprintln!("final x = {:?}", res.final_x.as_slice());
            }
            Ok(if res.k_feasible().is_some() { 0 } else { EXIT_UNMET })
        }
        Command::Certify {
            config,
            output,
            seed,
            samples,
        } => {
            let doc = load(config)?;
            let cfg = doc.run_config(*seed).with_context(|| config.display().to_string())?;
            let (res, rep) = report::certify(cfg, *samples, seed.unwrap_or(0))?;
            warn(cli, &res);
            if let Some(path) = output {
                let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                serde_json::to_writer_pretty(BufWriter::new(file), &rep)?;
            }
            println!("{}", summary_line(&res));
            print!("{}", report::render_certificate(&rep));
            Ok(if rep.passed { 0 } else { EXIT_UNMET })
        }
        Command::Reproduce {
            which,
            max_iter,
            rows,
            output,
        } => reproduce(cli, *which, *max_iter, *rows, output.as_deref()),
        Command::Sweep {
            grid,
            output,
            jobs,
            no_timing,
            seed,
        } => {
            let text = std::fs::read_to_string(grid).with_context(|| format!("cannot read {}", grid.display()))?;
            let de = &mut serde_json::Deserializer::from_str(&text);
            let mut g: GridConfig = serde_path_to_error::deserialize(de)
                .with_context(|| format!("{}", grid.display()))?;
            if let Some(s) = seed {
                g.seed = *s;
            }
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = jobs {
                pool = pool.num_threads(*n);
            }
            let rows = pool.build()?.install(|| sweep::run_grid(&g))?;
            match output {
                Some(path) => {
                    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                    sweep::write_rows(BufWriter::new(file), &rows, !no_timing)?;
                }
                None => sweep::write_rows(io::stdout().lock(), &rows, !no_timing)?,
            }
            let unmet = rows.iter().filter(|r| r.k_feasible.is_none()).count();
            if !cli.quiet {
                eprintln!("{} runs, {} without termination", rows.len(), unmet);
            }
            Ok(if unmet == 0 { 0 } else { EXIT_UNMET })
        }
        Command::Validate { config, samples } => {
            let doc = load(config)?;
            let problem = doc.problem().with_context(|| config.display().to_string())?;
            if doc.run.is_some() {
                doc.run_config(None).with_context(|| config.display().to_string())?;
            }
            let mut line = format!(
                "ok: dim={} constraints={} run={}",
                problem.dim(),
                doc.constraints.len(),
                if doc.run.is_some() { "yes" } else { "no" }
            );
            if problem.interior().is_some() {
                let window = problem.full_window()?;
                let check = problem.spot_check_interior(&window, *samples, 0)?;
                if !check.passed() {
                    println!("interior ball failed the spot check at {} samples", check.failures.len());
                    return Ok(EXIT_UNMET);
                }
                line.push_str(&format!(" interior=spot-checked({samples})"));
            }
            println!("{line}");
            Ok(0)
        }
    }
}

fn reproduce(cli: &Cli, which: Example, max_iter: Option<u64>, rows: usize, output: Option<&Path>) -> anyhow::Result<u8> {
    let mut out = io::stdout().lock();
    match which {
        Example::A1 | Example::A2 => {
            let rep = match which {
                Example::A1 => certificates::reproduce_a1(max_iter.unwrap_or(10_000))?,
                _ => certificates::reproduce_a2(max_iter.unwrap_or(100_000), 30)?,
            };
            write!(out, "{}", report::render_reproduction(&rep, rows))?;
            if let Some(path) = output {
                let cfg = match which {
                    Example::A1 => certificates::a1_config(CounterMode::Raw, rep.steps)?,
                    _ => certificates::a2_config(CounterMode::Raw, rep.steps)?,
                };
                let dim = cfg.problem.dim();
                write_trace_file(path, &Solver::new(cfg)?.solve()?, dim)?;
            }
            writeln!(out, "{}", if rep.passed() { "PASS" } else { "FAIL" })?;
            Ok(if rep.passed() { 0 } else { EXIT_UNMET })
        }
        Example::A1Bracketed | Example::A2Bracketed => {
            let n = max_iter.unwrap_or(100_000);
            let cfg = match which {
                Example::A1Bracketed => certificates::a1_config(CounterMode::Bracketed, n)?,
                _ => certificates::a2_config(CounterMode::Bracketed, n)?,
            };
            let dim = cfg.problem.dim();
            let res = Solver::new(cfg)?.solve()?;
            warn(cli, &res);
            if let Some(path) = output {
                write_trace_file(path, &res, dim)?;
            }
            writeln!(out, "{}", summary_line(&res))?;
            writeln!(out, "final x = {:?}", res.final_x.as_slice())?;
            let ok = res.k_feasible().is_some();
            writeln!(out, "{}", if ok { "PASS" } else { "FAIL" })?;
            Ok(if ok { 0 } else { EXIT_UNMET })
        }
    }
}
