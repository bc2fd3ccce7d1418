use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use motion_camouflage::scenario::{build_engagement, ccl_times, export_ccls, run_and_write, Mode, ScenarioConfig};
use motion_camouflage::{Error, Result};

#[derive(Parser)]
#[command(name = "mcam", version, about = "Motion camouflage engagement solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form or ODE ratio path plus shadower reconstruction
    Solve(Common),
    /// Closed-loop guidance simulation
    Simulate(Common),
    /// Optimal path vs straight-line camouflaged baseline
    Energy(Common),
    /// Constraint-line segments every `ccl_interval` seconds
    Ccls(Common),
    /// Check configs without running them
    Validate(Common),
    /// Run each config in whatever mode it declares
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file; repeat for several
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the step size of every scenario
    #[arg(long)]
    dt: Option<f64>,
    /// Run the scenarios concurrently
    #[arg(long)]
    batch: bool,
}

#[derive(Clone, Copy)]
enum Verb {
    Solve,
    Simulate,
    Energy,
    Ccls,
    Validate,
    Run,
}

fn check_mode(verb: Verb, mode: Mode) -> Result<()> {
    let ok = match verb {
        Verb::Solve => matches!(mode, Mode::Analytic | Mode::Ode | Mode::Infinity),
        Verb::Simulate => mode == Mode::Guidance,
        Verb::Energy => mode == Mode::EnergyCompare,
        Verb::Ccls | Verb::Validate | Verb::Run => true,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "mode {} is not handled by this command; use `mcam run`",
            mode.as_str()
        )))
    }
}

fn run_one(verb: Verb, path: &Path, common: &Common) -> std::result::Result<String, String> {
    let label = path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into());
    let cfg = ScenarioConfig::from_path(path).map_err(|e| e.to_string())?;
    let name = cfg.name.clone();
    let go = || -> Result<String> {
        let cfg = match common.dt {
            Some(dt) => cfg.with_step(dt)?,
            None => cfg,
        };
        check_mode(verb, cfg.mode)?;
        match verb {
            Verb::Validate => {
                build_engagement(&cfg)?;
                Ok(format!("{}: ok", cfg.name))
            }
            Verb::Ccls => {
                let interval = cfg
                    .ccl_interval
                    .ok_or_else(|| Error::InvalidInput("ccl_interval: missing".into()))?;
                let engagement = build_engagement(&cfg)?;
                std::fs::create_dir_all(&common.out)?;
                let file = common.out.join(
                    cfg.outputs
                        .ccls
                        .clone()
                        .unwrap_or_else(|| format!("{}_ccls.csv", cfg.name)),
                );
                let times = ccl_times(cfg.tf, interval);
                export_ccls(&engagement, &times, File::create(&file)?)?;
                Ok(format!("{}: {} segments -> {}", cfg.name, times.len(), file.display()))
            }
            _ => {
                let (result, written) = run_and_write(&cfg, &common.out)?;
                let capture = result
                    .summary
                    .capture_time
                    .map_or_else(|| "none".to_string(), |t| format!("{t:.6}"));
                Ok(format!(
                    "{}: capture {capture}, J {:.6e}, {} files",
                    cfg.name,
                    result.summary.energy_j,
                    written.files.len()
                ))
            }
        }
    };
    go().map_err(|e| format!("scenario {}: {e}", if name.is_empty() { &label } else { &name }))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, common) = match &cli.command {
        Command::Solve(c) => (Verb::Solve, c),
        Command::Simulate(c) => (Verb::Simulate, c),
        Command::Energy(c) => (Verb::Energy, c),
        Command::Ccls(c) => (Verb::Ccls, c),
        Command::Validate(c) => (Verb::Validate, c),
        Command::Run(c) => (Verb::Run, c),
    };
    let results: Vec<_> = if common.batch {
        std::thread::scope(|s| {
            let handles: Vec<_> = common
                .configs
                .iter()
                .map(|p| s.spawn(move || run_one(verb, p, common)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err("worker panicked".into())))
                .collect()
        })
    } else {
        common.configs.iter().map(|p| run_one(verb, p, common)).collect()
    };
    let mut failed = false;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(msg) => {
                eprintln!("error: {msg}");
                failed = true;
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
