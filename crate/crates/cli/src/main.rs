use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use pmqkd::sifting::PhaseOffsetClass;
use pmqkd::{IntensityGrid, ProtocolParams};
use pmqkd_cli::check::mc_check;
use pmqkd_cli::output::{sidecar_path, write_atomic, Provenance};
use pmqkd_cli::sweep::render_csv;
use pmqkd_cli::{parse_config, render_table, run_sweep, Mode, SweepSpec};

#[derive(Parser)]
#[command(name = "pmqkd", version, about = "Phase-matching QKD key-rate sweeps and checks")]
struct Cli {
    /// Configuration file of key=value lines; omitted keys use defaults
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Master random seed
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key rate versus distance, one CSV row per distance
    Sweep {
        #[arg(long, default_value_t = 0.0)]
        start: f64,
        #[arg(long, default_value_t = 500.0)]
        end: f64,
        #[arg(long, default_value_t = 10.0)]
        step: f64,
        #[arg(long, value_enum, default_value_t = Mode::Analytic)]
        mode: Mode,
        /// Rounds per distance in Monte Carlo modes
        #[arg(long, default_value_t = 1_000_000)]
        rounds: u64,
        /// Worker threads (results do not depend on it)
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Use this mean photon number per party instead of optimizing
        #[arg(long)]
        mu: Option<f64>,
        /// Number of log-spaced intensities searched in [1e-4, 1]
        #[arg(long, default_value_t = 40)]
        grid_points: usize,
    },
    /// Key-correspondence table for one random-phase offset class
    Table {
        #[arg(long, default_value_t = 3)]
        n: usize,
        /// Random phases differ by 2πs/n
        #[arg(long, default_value_t = 2)]
        s: usize,
    },
    /// Compare simulated gain and error rate with the closed-form model
    McCheck {
        #[arg(long, default_value_t = 10_000_000)]
        rounds: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 0.05)]
        mu: f64,
        #[arg(long, value_delimiter = ',', default_value = "50,100,200")]
        distances: Vec<f64>,
        /// Allowed deviation in standard errors
        #[arg(long, default_value_t = 3.0)]
        sigmas: f64,
    },
}

fn load_params(path: Option<&PathBuf>) -> Result<ProtocolParams> {
    match path {
        None => Ok(ProtocolParams::default()),
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_config(&text).with_context(|| format!("in {}", p.display()))
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes())
            .with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let params = load_params(cli.config.as_ref())?;
    match cli.command {
        Command::Sweep {
            start,
            end,
            step,
            mode,
            rounds,
            workers,
            mu,
            grid_points,
        } => {
            let spec = SweepSpec {
                l_start: start,
                l_end: end,
                l_step: step,
                mode,
                rounds,
                seed: cli.seed,
                optimize_mu: mu.is_none(),
                fixed_mu: mu,
                grid: IntensityGrid::Log {
                    lo: 1e-4,
                    hi: 1.0,
                    points: grid_points,
                },
                workers,
            };
            let rows = run_sweep(&params, &spec)?;
            let csv = render_csv(&rows, spec.mode);
            if let Some(out) = cli.out.as_ref() {
                let sidecar = serde_json::to_string_pretty(&Provenance::new(&params, &spec))?;
                write_atomic(&sidecar_path(out), sidecar.as_bytes())?;
            }
            emit(cli.out.as_ref(), &csv)?;
            Ok(true)
        }
        Command::Table { n, s } => {
            if s >= n {
                bail!("offset class s = {s} must be below n = {n}");
            }
            emit(cli.out.as_ref(), &render_table(n, PhaseOffsetClass(s))?)?;
            Ok(true)
        }
        Command::McCheck {
            rounds,
            workers,
            mu,
            distances,
            sigmas,
        } => {
            let params = params.with_mu(mu);
            let results = mc_check(&params, &distances, rounds, cli.seed, workers)?;
            let mut report = String::new();
            let mut ok = true;
            for (_, lines) in &results {
                for line in lines {
                    let pass = line.passes(sigmas);
                    ok &= pass;
                    report.push_str(&format!("{} {line}\n", if pass { "PASS" } else { "FAIL" }));
                }
            }
            emit(cli.out.as_ref(), &report)?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
