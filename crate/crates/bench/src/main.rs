use std::path::{Path, PathBuf};
use std::process::ExitCode;

use accreg_bench::checks::{comparison, dt_trend, format_checks, tau_trend, CheckOutcome};
use accreg_bench::config::{ProblemKind, SweepParameter};
use accreg_bench::error::{BenchError, Result};
use accreg_bench::output::{format_csv, format_series, format_table, write_text};
use accreg_bench::rates::{format_rates_csv, format_rates_table, rate_report};
use accreg_bench::run::only_divergence;
use accreg_bench::{run_config, ExperimentConfig, Record, RunOptions};
use accreg_fem::io::read_mesh;
use accreg_fem::{disk_mesh, BltSetup, Mesh};
use clap::{Parser, Subcommand};

const EXIT_DIVERGENCE: u8 = 3;
const EXIT_CHECK: u8 = 4;

/// Accelerated iterative regularization experiments.
#[derive(Debug, Parser)]
#[command(name = "accreg", version)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// CSV destination; overrides `output.csv`. Without either, CSV goes to stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Overrides `noise.seed`.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    workers: usize,
    /// Assert the trends the command is meant to show; exit 4 if one fails.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every (noise level, method) pair of a config.
    Run,
    /// Run a config with a `[sweep]` table.
    Sweep,
    /// Run several methods side by side.
    Compare,
    /// Convergence-rate slopes on the diagonal model problem.
    Rates,
    /// Print statistics of a mesh file, a refinement level or a config's meshes.
    MeshInfo {
        #[arg(long, value_name = "PATH", conflicts_with = "level")]
        mesh: Option<PathBuf>,
        /// Level of the uniformly refined unit-disk mesh.
        #[arg(long)]
        level: Option<u32>,
    },
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| BenchError::Config("--config PATH is required".into()))?;
    ExperimentConfig::load(path)
}

fn emit(cli: &Cli, cfg_csv: Option<&Path>, csv: &str, table: &str) -> Result<()> {
    match cli.out.as_deref().or(cfg_csv) {
        Some(path) => {
            write_text(path, csv)?;
            print!("{table}");
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn experiment(cli: &Cli) -> Result<u8> {
    let cfg = load(cli)?;
    match (&cli.command, &cfg.sweep) {
        (Command::Sweep, None) => {
            return Err(BenchError::Config("sweep: missing table".into()));
        }
        (Command::Compare, _) if cfg.solver()?.methods.len() < 2 => {
            return Err(BenchError::Config(
                "solver.methods: compare needs at least two methods".into(),
            ));
        }
        _ => {}
    }
    let opts = RunOptions {
        workers: cli.workers,
        seed: cli.seed,
    };
    let records = run_config(&cfg, &opts)?;
    emit(
        cli,
        cfg.output.csv.as_deref(),
        &format_csv(&records),
        &format_table(&records),
    )?;
    if let Some(path) = &cfg.output.series {
        write_text(path, &format_series(&records))?;
    }
    if only_divergence(&records) {
        eprintln!("every run diverged");
        return Ok(EXIT_DIVERGENCE);
    }
    if cli.check {
        let outcomes = checks_for(&cli.command, &cfg, &records);
        return Ok(report_checks(&outcomes));
    }
    Ok(0)
}

fn checks_for(command: &Command, cfg: &ExperimentConfig, records: &[Record]) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    match cfg.sweep.as_ref().map(|s| s.parameter) {
        Some(SweepParameter::Tau) => out.extend(tau_trend(records)),
        Some(SweepParameter::Dt | SweepParameter::Omega) => out.extend(dt_trend(records)),
        _ => {}
    }
    if matches!(command, Command::Compare) {
        out.extend(comparison(records));
    }
    out
}

fn report_checks(outcomes: &[CheckOutcome]) -> u8 {
    eprint!("{}", format_checks(outcomes));
    if outcomes.is_empty() {
        eprintln!("no checks apply to this command and config");
    }
    if outcomes.iter().all(|c| c.passed) {
        0
    } else {
        EXIT_CHECK
    }
}

fn rates(cli: &Cli) -> Result<u8> {
    let cfg = load(cli)?;
    let rows = rate_report(cfg.validate_rates()?)?;
    emit(
        cli,
        cfg.output.csv.as_deref(),
        &format_rates_csv(&rows),
        &format_rates_table(&rows),
    )?;
    if cli.check {
        let outcomes: Vec<CheckOutcome> = rows
            .iter()
            .map(|r| CheckOutcome {
                name: format!("rates μ={} {}", r.mu, r.flow.name()),
                passed: r.passed(),
                detail: format!(
                    "E slope {:.3} (theory {:.3}), stop slope {:.3} (theory {:.3})",
                    r.fit.error_slope,
                    r.error_theory(),
                    r.fit.stop_slope,
                    r.stop_theory()
                ),
            })
            .collect();
        return Ok(report_checks(&outcomes));
    }
    Ok(0)
}

fn describe(label: &str, mesh: &Mesh) {
    println!("{label}");
    println!("  nodes           {}", mesh.n_nodes());
    println!("  triangles       {}", mesh.n_triangles());
    println!("  boundary edges  {}", mesh.boundary_edges().len());
    println!("  source nodes    {}", mesh.omega0_nodes().len());
    println!("  source elements {}", mesh.omega0_elements().len());
    println!("  mesh size h     {:.4e}", mesh.mesh_size());
    println!("  area            {:.6}", mesh.total_area());
}

fn mesh_info(cli: &Cli, mesh: Option<&Path>, level: Option<u32>) -> Result<u8> {
    if let Some(path) = mesh {
        describe(&path.display().to_string(), &read_mesh(path)?);
    } else if let Some(level) = level {
        describe(&format!("unit disk, level {level}"), &disk_mesh(level)?);
    } else {
        let cfg = load(cli)?;
        let problem = cfg.problem()?;
        if problem.kind != ProblemKind::Blt {
            return Err(BenchError::Config(
                "problem.kind: mesh-info needs \"blt\", or pass --mesh or --level".into(),
            ));
        }
        let example = problem.example()?;
        let coeff = problem
            .coefficients
            .clone()
            .unwrap_or_default()
            .to_coefficients();
        let m = problem.mesh.clone().unwrap_or_default();
        let setup = match (&m.coarse, &m.fine) {
            (Some(c), Some(f)) => {
                BltSetup::from_meshes(example, read_mesh(c)?, read_mesh(f)?, coeff)?
            }
            _ => BltSetup::disk(example, m.core, m.layers, m.fine_factor, coeff)?,
        };
        describe("reconstruction mesh", setup.coarse.mesh());
        describe("data mesh", setup.fine.mesh());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run | Command::Sweep | Command::Compare => experiment(&cli),
        Command::Rates => rates(&cli),
        Command::MeshInfo { mesh, level } => mesh_info(&cli, mesh.as_deref(), *level),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
