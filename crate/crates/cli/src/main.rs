use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crystal_hydro::pde::{solve_fd, TorusGrid};
use crystal_hydro::realization::DiffusionMatrix;
use crystal_hydro::stochastic::{DensityEstimator, RateFunction};
use crystal_hydro_cli::config::{build_process, load_lattice};
use crystal_hydro_cli::converge::{response_of, sample_profile};
use crystal_hydro_cli::{
    parse_profile, realize, report_realization, run_convergence, run_sweep, ExperimentConfig, HarnessError,
    ProcessKind, RealizationMode, SweepParams,
};

#[derive(Parser)]
#[command(name = "crystal-hydro", version, about = "Hydrodynamic limits of particle systems on crystal lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RateKind {
    Linear,
    Indicator,
}

impl From<RateKind> for RateFunction {
    fn from(k: RateKind) -> Self {
        match k {
            RateKind::Linear => RateFunction::Linear,
            RateKind::Indicator => RateFunction::Indicator,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a lattice spec (bundled name or path).
    Validate { spec: String },
    /// Report a realization: positions, diffusion matrix, energy.
    Realize {
        spec: String,
        #[arg(long, value_enum, default_value = "harmonic")]
        mode: RealizationMode,
        /// Write the per-vertex CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Diffusion matrix of the harmonic realization on the lattice's basis.
    Diffusion { spec: String },
    /// Run replicas at one scale and export trajectories and densities.
    Simulate {
        spec: String,
        #[arg(long, value_enum)]
        process: ProcessKind,
        #[arg(long, value_enum)]
        rate: Option<RateKind>,
        #[arg(long = "N")]
        scale: usize,
        #[arg(long = "t", num_args = 1.., required = true)]
        times: Vec<f64>,
        #[arg(long)]
        rho0: String,
        #[arg(long, default_value_t = 1)]
        replicas: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "harmonic")]
        mode: RealizationMode,
        /// Density grid resolution; defaults to max(4, N/4).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Solve the limiting PDE and print the field as CSV.
    Pde {
        spec: String,
        #[arg(long)]
        grid: usize,
        #[arg(long = "t")]
        time: f64,
        #[arg(long)]
        rho0: String,
        #[arg(long, value_enum, default_value = "sep")]
        process: ProcessKind,
        #[arg(long, value_enum)]
        rate: Option<RateKind>,
        #[arg(long, value_enum, default_value = "harmonic")]
        mode: RealizationMode,
        #[arg(long)]
        dt: Option<f64>,
        /// Write the field here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a convergence experiment from a config file.
    Converge {
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn rate_for(process: ProcessKind, rate: Option<RateKind>) -> Result<Option<RateFunction>, HarnessError> {
    match (process, rate) {
        (ProcessKind::Sep, Some(_)) => Err(HarnessError::Invalid("--rate applies to zero range only".into())),
        (_, r) => Ok(r.map(Into::into)),
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Validate { spec } => {
            let s = load_lattice(&spec, None)?;
            let g = s.quotient_graph()?;
            if s.positions.is_some() {
                realize(&s, None, RealizationMode::Given)?;
            }
            writeln!(
                stdout,
                "ok: dimension {}, {} vertices, {} edges",
                g.dimension(),
                g.vertex_count(),
                g.darts().len() / 2
            )?;
        }
        Command::Realize { spec, mode, csv } => {
            let report = report_realization(&load_lattice(&spec, None)?, mode)?;
            write!(stdout, "{}", report.to_text())?;
            match csv {
                Some(path) => report.write_csv(std::fs::File::create(path)?)?,
                None => {
                    writeln!(stdout)?;
                    report.write_csv(&mut stdout)?;
                }
            }
        }
        Command::Diffusion { spec } => {
            let rl = realize(&load_lattice(&spec, None)?, None, RealizationMode::Harmonic)?;
            let d = rl.harmonic_diffusion.matrix();
            for i in 0..d.nrows() {
                let row: Vec<String> = d.row(i).iter().map(|v| format!("{v:?}")).collect();
                writeln!(stdout, "{}", row.join(" "))?;
            }
        }
        Command::Simulate { spec, process, rate, scale, times, rho0, replicas, seed, out, mode, grid } => {
            let rl = realize(&load_lattice(&spec, None)?, None, mode)?;
            let proc = build_process(process, rate_for(process, rate)?)?;
            let profile = parse_profile(&rho0)?;
            let resolution = grid.unwrap_or((scale / 4).max(4));
            let params = SweepParams {
                scale,
                times,
                replicas,
                seed,
                estimator: DensityEstimator::Grid { resolution },
            };
            let result = run_sweep(&rl, &proc, &profile, &params)?;
            result.write_outputs(&out)?;
            let events: u64 = result.runs.iter().map(|r| r.event_count).sum();
            eprintln!("{} replicas, {events} events, written to {}", replicas, out.display());
        }
        Command::Pde { spec, grid, time, rho0, process, rate, mode, dt, out } => {
            let rl = realize(&load_lattice(&spec, None)?, None, mode)?;
            let proc = build_process(process, rate_for(process, rate)?)?;
            let profile = parse_profile(&rho0)?;
            let g = TorusGrid::new(rl.realization.basis().clone(), grid)?;
            let rho0 = sample_profile(&g, &profile)?;
            let d = DiffusionMatrix::new(rl.harmonic_diffusion.matrix() * proc.diffusion_factor())?;
            let field = solve_fd(&rho0, &d, response_of(&proc), time, dt)?;
            eprintln!("mass {:?} -> {:?}, range [{:?}, {:?}]", rho0.mass(), field.mass(), field.min(), field.max());
            match out {
                Some(path) => field.write_csv(std::fs::File::create(path)?)?,
                None => field.write_csv(&mut stdout)?,
            }
        }
        Command::Converge { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            // the command-line directory is relative to the working directory,
            // the configured one to the config file
            let dir = out.or_else(|| match (&cfg.output, &cfg.base_dir) {
                (Some(dir), Some(base)) if dir.is_relative() => Some(base.join(dir)),
                (dir, _) => dir.clone(),
            });
            let report = run_convergence(&cfg)?;
            write!(stdout, "{}", report.to_text())?;
            if let Some(dir) = dir {
                report.write_outputs(&dir)?;
                writeln!(stdout, "written to {}", dir.display())?;
            }
        }
    }
    stdout.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(HarnessError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
