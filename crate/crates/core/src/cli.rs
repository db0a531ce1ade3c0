//! Command-line front end. `main.rs` only forwards to [`run`].

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::dynamics::evolve;
use crate::error::{Error, Result};
use crate::output::{self, OptimizeDocument, Provenance, SweepDocument};
use crate::photonstats::{g2_corrected, g2_raw, hom_visibility, CorrelationHistogram};
use crate::sweep::{delay_series, find_maximum, normalize, rabi_curve, refine_maximum, run_sweep};

#[derive(Debug, Parser)]
#[command(name = "swingup", version, about = "Swing-up excitation simulator and photon-statistics analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    pub config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(short, long, env = "SWINGUP_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    /// Worker thread cap for parallel evaluation.
    #[arg(short = 'j', long, env = "SWINGUP_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time-resolved occupation: trace.csv
    Trace(Common),
    /// Fidelity map over pulse-2 detuning and area ratio: sweep.csv, sweep.json, sweep.pgm
    Sweep(Common),
    /// Resonant Rabi curve: rabi.csv
    Rabi(Common),
    /// Final population versus pulse-2 delay: delay.csv
    Delay(Common),
    /// Refined optimum of the fidelity map: optimize.json
    Optimize(Common),
    /// Raw and background-corrected g²(0): g2_raw.json, g2_corrected.json
    G2(Common),
    /// Two-photon interference visibility: hom.json
    Hom(Common),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Trace(c)
            | Command::Sweep(c)
            | Command::Rabi(c)
            | Command::Delay(c)
            | Command::Optimize(c)
            | Command::G2(c)
            | Command::Hom(c) => c,
        }
    }
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 4,
        e if e.is_numerical() => 3,
        _ => 2,
    }
}

/// Parses arguments, runs the command and maps errors to exit codes.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(written) => {
            for path in written {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("swingup: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Runs one subcommand and returns the files it wrote.
pub fn run(command: &Command) -> Result<Vec<PathBuf>> {
    let common = command.common();
    let cfg = RunConfig::load(&common.config)?;
    let out_dir = common.out_dir.clone().unwrap_or_else(|| cfg.output_dir());
    let plan = Plan::new(command, &cfg)?;
    prepare_dir(&out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?;
    let files = pool.install(|| plan.execute(&cfg))?;
    files.into_iter().map(|(name, bytes)| write_file(&out_dir.join(name), &bytes)).collect()
}

/// Everything a command needs, validated before any computation.
enum Plan {
    Trace(crate::SimConfig),
    Sweep { grid: crate::SweepGrid, normalize: bool, image: bool },
    Rabi { areas: Vec<f64>, base: crate::SimConfig },
    Delay { delays: Vec<f64>, base: crate::SimConfig },
    Optimize { seed: Option<(f64, f64)>, grid: Option<crate::SweepGrid>, base: crate::SimConfig },
    G2 { hist: CorrelationHistogram, win: crate::WindowSpec },
    Hom { hist: CorrelationHistogram, win: crate::WindowSpec, jitter: f64 },
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    }
}

impl Plan {
    fn new(command: &Command, cfg: &RunConfig) -> Result<Self> {
        Ok(match command {
            Command::Trace(_) => Plan::Trace(cfg.sim_config()?),
            Command::Sweep(_) => {
                let grid = cfg.sweep_grid()?;
                let s = cfg.sweep.as_ref().expect("sweep_grid checked the section");
                Plan::Sweep { grid, normalize: s.normalize, image: s.image }
            }
            Command::Rabi(_) => Plan::Rabi { areas: cfg.rabi_areas()?, base: cfg.sim_config()? },
            Command::Delay(_) => Plan::Delay { delays: cfg.delays()?, base: cfg.sim_config()? },
            Command::Optimize(_) => {
                let base = cfg.sim_config()?;
                let seed = cfg.optimize.as_ref().and_then(|o| o.seed).map(|[d, r]| (d, r));
                let grid = if seed.is_none() {
                    Some(cfg.sweep_grid().map_err(|_| {
                        Error::Config("optimize needs `[optimize] seed` or a `[sweep]` grid to seed from".into())
                    })?)
                } else {
                    None
                };
                Plan::Optimize { seed, grid, base }
            }
            Command::G2(_) => Plan::G2 { hist: load_histogram(cfg)?, win: cfg.g2_windows() },
            Command::Hom(_) => Plan::Hom { hist: load_histogram(cfg)?, win: cfg.hom_windows()?, jitter: cfg.jitter() },
        })
    }

    fn execute(self, cfg: &RunConfig) -> Result<Vec<(&'static str, Vec<u8>)>> {
        let provenance = || Provenance::new(cfg.hash());
        let mut files = Vec::new();
        match self {
            Plan::Trace(sim) => {
                let traj = evolve(&sim)?;
                files.push(("trace.csv", csv_bytes(|w| output::write_trace_csv(w, &traj))?));
            }
            Plan::Sweep { grid, normalize: norm, image } => {
                let mut result = run_sweep(&grid)?;
                if norm {
                    result = normalize(&result)?;
                }
                files.push(("sweep.csv", csv_bytes(|w| output::write_sweep_csv(w, &result))?));
                files.push(("sweep.json", output::to_json(&SweepDocument::new(&result, provenance()))?.into_bytes()));
                if image {
                    files.push(("sweep.pgm", output::sweep_pgm(&result)));
                }
            }
            Plan::Rabi { areas, base } => {
                let curve = rabi_curve(&areas, &base).map_err(as_config)?;
                files.push(("rabi.csv", csv_bytes(|w| output::write_rabi_csv(w, &curve))?));
            }
            Plan::Delay { delays, base } => {
                let series = delay_series(&delays, &base).map_err(as_config)?;
                files.push(("delay.csv", csv_bytes(|w| output::write_delay_csv(w, &series))?));
            }
            Plan::Optimize { seed, grid, base } => {
                let (seed, grid_maximum) = match (seed, grid) {
                    (Some(s), _) => (s, None),
                    (None, Some(grid)) => {
                        let m = find_maximum(&run_sweep(&grid)?);
                        ((m.detuning, m.ratio), Some(m))
                    }
                    (None, None) => unreachable!("plan requires a seed or a grid"),
                };
                let refined = refine_maximum(seed, &base).map_err(as_config)?;
                let doc = OptimizeDocument::new(seed, grid_maximum, &refined, base, provenance());
                files.push(("optimize.json", output::to_json(&doc)?.into_bytes()));
            }
            Plan::G2 { hist, win } => {
                files.push(("g2_raw.json", output::to_json(&g2_raw(&hist, &win).map_err(as_config)?)?.into_bytes()));
                let corrected = g2_corrected(&hist, &win).map_err(as_config)?;
                files.push(("g2_corrected.json", output::to_json(&corrected)?.into_bytes()));
            }
            Plan::Hom { hist, win, jitter } => {
                let hom = hom_visibility(&hist, &win, jitter).map_err(as_config)?;
                files.push(("hom.json", output::to_json(&hom)?.into_bytes()));
            }
        }
        Ok(files)
    }
}

fn load_histogram(cfg: &RunConfig) -> Result<CorrelationHistogram> {
    let h = cfg.histogram()?;
    let path = cfg.histogram_path()?;
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    output::read_histogram_csv(std::io::BufReader::new(file), h.bin_width, h.rep_period)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

/// Creates the output directory and checks it accepts files.
fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".swingup-write-check");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}
