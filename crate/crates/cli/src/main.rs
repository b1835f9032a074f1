//! `waverom`: synthetic experiments, inversions and diagnostics from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Invert2dArgs, InvertArgs, SweepArgs};
use config::{ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "waverom", version, about = "Direct wave-speed estimation from boundary transfer data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct ExperimentFlags {
    /// key=value file; flags given here take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in model name or path to a model file.
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    tau_over_sigma: Option<f64>,
    /// Number of snapshots; 2n samples are written.
    #[arg(long)]
    n: Option<usize>,
    /// Solver grid nodes (1D).
    #[arg(long)]
    m: Option<usize>,
    /// 1d or 2d.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Number of sources (2D).
    #[arg(long)]
    sources: Option<usize>,
    /// Source array width on the line x = 0 (2D).
    #[arg(long)]
    aperture: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    /// Half-width of the 2D domain (default 4x the aperture).
    #[arg(long)]
    ymax: Option<f64>,
}

impl ExperimentFlags {
    fn resolve(self) -> waverom::Result<ExperimentConfig> {
        let file = self.config.clone();
        ExperimentConfig::resolve(
            file.as_deref(),
            Overrides {
                model: self.model,
                sigma: self.sigma,
                tau_over_sigma: self.tau_over_sigma,
                n: self.n,
                m: self.m,
                mode: self.mode,
                output: self.output,
                sources: self.sources,
                aperture: self.aperture,
                nx: self.nx,
                ny: self.ny,
                ymax: self.ymax,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate transfer data for a model.
    Synthesize(ExperimentFlags),
    /// Estimate the wave speed from a 1D data file.
    Invert {
        #[arg(long)]
        data: PathBuf,
        /// Reference model (built-in or file); defaults to a constant speed --v0.
        #[arg(long)]
        reference: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        v0: f64,
        /// Domain length of the constant reference; defaults to the data's.
        #[arg(long)]
        xmax: Option<f64>,
        #[arg(long, default_value_t = waverom::forward1d::DEFAULT_NODES)]
        m: usize,
        /// Use only the first n snapshots.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "out")]
        output: PathBuf,
    },
    /// Conditioning and accuracy over a list of time steps.
    TauSweep {
        #[arg(long, default_value = "two-layer")]
        model: String,
        #[arg(long, default_value_t = 0.01)]
        sigma: f64,
        /// Comma-separated tau/sigma ratios.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 2.5, 3.5])]
        taus: Vec<f64>,
        #[arg(long, default_value_t = 23)]
        n: usize,
        #[arg(long, default_value_t = waverom::forward1d::DEFAULT_NODES)]
        m: usize,
        /// Parallel sweep entries.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Omit the reconstruction error against the model.
        #[arg(long)]
        no_truth: bool,
        /// CSV destination; the table is also printed.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Plot-ready CSVs from an invert output directory.
    PlotData {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value = "plots")]
        output: PathBuf,
    },
    /// Ray-coordinate estimates from 2D block data.
    Invert2d {
        /// Directory written by `synthesize --mode 2d`.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        v0: Option<f64>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        #[arg(long)]
        xmax: Option<f64>,
        #[arg(long)]
        ymax: Option<f64>,
        #[arg(long, default_value_t = waverom::forward1d::DEFAULT_NODES)]
        reference_nodes: usize,
        #[arg(long, default_value = "out")]
        output: PathBuf,
    },
    /// Gram matrices, spectral measure and Jacobi matrix of a data file.
    Rom {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "out")]
        output: PathBuf,
    },
}

fn run(cli: Cli) -> waverom::Result<()> {
    match cli.command {
        Command::Synthesize(flags) => {
            let cfg = flags.resolve()?;
            let path = commands::synthesize_cmd(&cfg)?;
            println!("wrote {}", path.display());
        }
        Command::Invert {
            data,
            reference,
            v0,
            xmax,
            m,
            n,
            output,
        } => {
            let r = commands::invert_cmd(&InvertArgs {
                data,
                reference,
                v0,
                xmax,
                m,
                n,
                output: output.clone(),
            })?;
            let d = &r.diagnostics;
            println!(
                "n = {}, cond(U*U) = {:.3e}, monotone = {}; results in {}",
                d.n,
                d.cond_uu,
                d.monotone,
                output.display()
            );
        }
        Command::TauSweep {
            model,
            sigma,
            taus,
            n,
            m,
            workers,
            no_truth,
            output,
        } => {
            let rows = commands::tau_sweep_cmd(&SweepArgs {
                model,
                sigma,
                taus,
                n,
                m,
                workers,
                with_truth: !no_truth,
                output,
            })?;
            println!("tau/sigma  cond(U*U)   residual   monotone  error      status");
            for r in rows {
                println!(
                    "{:<10} {:<11.3e} {:<10.2e} {:<9} {:<10} {}",
                    r.tau_over_sigma,
                    r.cond_uu,
                    r.residual,
                    r.monotone.map_or("-".into(), |b| b.to_string()),
                    r.error.map_or("-".into(), |e| format!("{e:.2e}")),
                    r.status
                );
            }
        }
        Command::PlotData { results, output } => {
            for p in commands::plot_data_cmd(&results, &output)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Invert2d {
            data,
            v0,
            nx,
            ny,
            xmax,
            ymax,
            reference_nodes,
            output,
        } => {
            let path = commands::invert2d_cmd(&Invert2dArgs {
                data,
                v0,
                nx,
                ny,
                xmax,
                ymax,
                reference_nodes,
                output,
            })?;
            println!("wrote {}", path.display());
        }
        Command::Rom { data, output } => {
            for p in commands::rom_cmd(&data, &output)? {
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
