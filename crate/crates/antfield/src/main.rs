use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use antfield::config::{load, MeanfieldConfig, ParticlesConfig, StationaryFileConfig, SweepSpec};
use antfield::runs::{
    adiabatic_line_rows, line_rows, linspace, run_meanfield, run_particles, run_stationary, write_eigenfunction,
};
use antfield::sweep::{overlay_instability_line, run_sweep};
use antfield::tables::{read_csv, write_csv, LineRow};
use antfield_core::linstab::{Bracket, DispersionParams};

#[derive(Parser)]
#[command(name = "antfield", version, about = "Chemotactic active particles with look-ahead sensing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Particle SDE trajectories.
    Particles {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-volume kinetic solver from a seeded random initial condition.
    Meanfield {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Linear stability of the homogeneous state.
    Linstab {
        #[command(subcommand)]
        command: Linstab,
    },
    /// y-independent stationary state.
    Stationary {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// (γ, Pe, seed) sweep with per-pair phase labels.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: PathBuf,
        /// Instability line CSV (`Pe,gamma_star,n`) joined into `phase_overlay.csv`.
        #[arg(long)]
        line: Option<PathBuf>,
    },
}

#[derive(Args, Clone, Copy)]
struct Model {
    #[arg(long = "d-t", default_value_t = 0.01)]
    d_t: f64,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// Truncation order.
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = std::f64::consts::TAU)]
    omega: f64,
}

impl Model {
    fn base(&self, gamma: f64, pe: f64) -> DispersionParams {
        DispersionParams {
            omega: self.omega,
            d_t: self.d_t,
            alpha: self.alpha,
            lambda: self.lambda,
            gamma,
            pe,
            n: self.n,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct LineArgs {
    #[arg(long = "pe-min", default_value_t = 0.5)]
    pe_min: f64,
    #[arg(long = "pe-max", default_value_t = 5.0)]
    pe_max: f64,
    #[arg(long = "pe-steps", default_value_t = 46)]
    pe_steps: usize,
    #[arg(long = "gamma-lo", default_value_t = Bracket::default().lo)]
    gamma_lo: f64,
    #[arg(long = "gamma-hi", default_value_t = Bracket::default().hi)]
    gamma_hi: f64,
    #[arg(long, default_value_t = Bracket::default().tol)]
    tol: f64,
}

impl LineArgs {
    fn bracket(&self) -> Bracket {
        Bracket { lo: self.gamma_lo, hi: self.gamma_hi, tol: self.tol }
    }
}

#[derive(Subcommand)]
enum Linstab {
    /// γ*(Pe) of the truncated system, CSV `Pe,gamma_star,n`.
    Line {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        line: LineArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Leading eigenfunction as a grid dump; `--out` is the file stem.
    Eigfun {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        pe: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 256)]
        nx: usize,
        #[arg(long, default_value_t = 256)]
        nth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// γ*(Pe) of the adiabatic closure, CSV `Pe,gamma_star,n`.
    Adiabatic {
        #[command(flatten)]
        model: Model,
        #[command(flatten)]
        line: LineArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Particles { config, out } => {
            let cfg: ParticlesConfig = load(&config)?;
            let rec = run_particles(&cfg, &out)?;
            eprintln!("{} frames, {} near-singular kernel evaluations", rec.frames.len(), rec.near_singular);
        }
        Command::Meanfield { config, seed, out } => {
            let mut cfg: MeanfieldConfig = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let s = run_meanfield(&cfg, &out)?;
            eprintln!("t={} mass={} d_fstar={} P2={} label={}", s.time, s.mass, s.d_fstar, s.p2, s.label);
        }
        Command::Linstab { command } => match command {
            Linstab::Line { model, line, out } => {
                let pes = linspace(line.pe_min, line.pe_max, line.pe_steps);
                let rows = line_rows(&pes, &model.base(0.0, 0.0), line.bracket())?;
                write_csv(&out, &rows)?;
            }
            Linstab::Adiabatic { model, line, out } => {
                let pes = linspace(line.pe_min, line.pe_max, line.pe_steps);
                let rows = adiabatic_line_rows(&pes, &model.base(0.0, 0.0), line.bracket())?;
                write_csv(&out, &rows)?;
            }
            Linstab::Eigfun { model, pe, gamma, nx, nth, out } => {
                let dr = write_eigenfunction(&out, &model.base(gamma, pe), nx, nth)?;
                eprintln!("sigma_max = {} {:+}i", dr.sigma_max.re, dr.sigma_max.im);
            }
        },
        Command::Stationary { config, out } => {
            let cfg: StationaryFileConfig = load(&config)?;
            let s = run_stationary(&cfg, &out)?;
            eprintln!("residual={:e} iterations={} converged={}", s.residual, s.iterations, s.converged);
        }
        Command::Sweep { config, jobs, out, line } => {
            let spec: SweepSpec = load(&config)?;
            let res = run_sweep(&spec, jobs, Some(&out))?;
            let failed = res.runs.iter().filter(|r| r.error.is_some()).count();
            if let Some(path) = line {
                let line: Vec<LineRow> = read_csv(&path).with_context(|| format!("reading {}", path.display()))?;
                write_csv(&out.join("phase_overlay.csv"), &overlay_instability_line(&res.pairs, &line))?;
            }
            eprintln!("{} runs, {} failed, {} pairs", res.runs.len(), failed, res.pairs.len());
        }
    }
    Ok(())
}
