use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ricci_mcf::driver::plot::{emit_plots, PlotSpec, Table, DECAY_COLUMNS};
use ricci_mcf::driver::sweep::{boundary_check, sweep, sweep_csv, SWEEP_CSV};
use ricci_mcf::driver::{parse_config, run_scenario, Checkpoint, Checks, FlowConfig, RunStatus, ScenarioResult};
use ricci_mcf::error::Result;
use ricci_mcf::hypersurface::Outcome;

/// Environment variable naming the output directory.
const OUT_ENV: &str = "RMCF_OUT_DIR";
const DEFAULT_OUT: &str = "out";

const EXIT_ERROR: u8 = 1;
const EXIT_UNDETERMINED: u8 = 2;
const EXIT_ABORTED: u8 = 3;

/// Coupled normalized Ricci flow and mean curvature flow in rotationally
/// symmetric spheres. Outputs go to $RMCF_OUT_DIR (default `out`).
#[derive(Parser)]
#[command(name = "ricci-mcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario with the run-time checks.
    Run {
        config: PathBuf,
        /// Continue from a checkpoint written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run one scenario with every verification suite.
    Verify { config: PathBuf },
    /// Classify every cell of the rho0 x amplitude grid.
    Sweep { config: PathBuf },
    /// Plot columns of a monitor CSV against t.
    Plot {
        csv: PathBuf,
        /// Comma-separated columns; all but `t` by default.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Log scale for every column instead of only the decay columns.
        #[arg(long)]
        log: bool,
    },
}

fn out_dir() -> PathBuf {
    std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from(DEFAULT_OUT), PathBuf::from)
}

fn load_config(path: &Path) -> Result<FlowConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn single(config: &Path, resume: Option<&Path>, checks: Checks) -> Result<u8> {
    let cfg = load_config(config)?;
    let ck = resume.map(|p| Checkpoint::from_text(&std::fs::read_to_string(p)?)).transpose()?;
    let dir = out_dir();
    let r = run_scenario(&cfg, Some(&dir), checks, ck)?;
    for line in &r.log {
        eprintln!("{line}");
    }
    print!("{}", r.report.to_text());
    print!("{}", r.summary(&cfg));
    Ok(exit_code(&cfg, &r, checks))
}

fn exit_code(cfg: &FlowConfig, r: &ScenarioResult, checks: Checks) -> u8 {
    if matches!(r.status, RunStatus::Aborted(_)) {
        EXIT_ABORTED
    } else if cfg.require_determinate && r.outcome == Outcome::Undetermined {
        EXIT_UNDETERMINED
    } else if checks == Checks::Full && !r.report.all_pass() {
        EXIT_ERROR
    } else {
        0
    }
}

fn run_sweep(config: &Path) -> Result<u8> {
    let cfg = load_config(config)?;
    let dir = out_dir();
    let rows = sweep(&cfg, Some(&dir), Checks::None);
    let csv = sweep_csv(&rows);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join(SWEEP_CSV), &csv)?;
    print!("{csv}");
    let b = boundary_check(&rows);
    println!("aborted = {}\nundetermined = {}\nmonotone_boundary = {}", b.aborted, b.undetermined, b.monotone);
    Ok(if b.aborted > 0 {
        EXIT_ABORTED
    } else if cfg.require_determinate && b.undetermined > 0 {
        EXIT_UNDETERMINED
    } else {
        0
    })
}

fn run_plot(csv: &Path, columns: &[String], log: bool) -> Result<u8> {
    let text = std::fs::read_to_string(csv)?;
    let table = Table::parse(&text)?;
    let specs: Vec<PlotSpec> = if columns.is_empty() {
        table.default_specs().into_iter().map(|s| PlotSpec { log: log || s.log, ..s }).collect()
    } else {
        columns.iter().map(|c| PlotSpec::new(c.clone(), log || DECAY_COLUMNS.contains(&c.as_str()))).collect()
    };
    let stem = csv.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
    for p in emit_plots(&text, &specs, &out_dir().join("plots"), stem)? {
        println!("{}", p.display());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    let res = match &cli.command {
        Command::Run { config, resume } => single(config, resume.as_deref(), Checks::Run),
        Command::Verify { config } => single(config, None, Checks::Full),
        Command::Sweep { config } => run_sweep(config),
        Command::Plot { csv, columns, log } => run_plot(csv, columns, *log),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
