//! Command-line front end: excitation spectra, plasmon dispersion,
//! correlation-energy reports, exact pair counts and the invariant suite.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Parser)]
#[command(
    name = "bosonize",
    about = "Bosonic effective-mode spectra, plasmon dispersion and RPA correlation energy \
             for the high-density Fermi gas",
    version
)]
struct Cli {
    /// Flat key=value configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Particle number N (sets hbar = N^(-1/3)).
    #[arg(long, global = true)]
    n_particles: Option<usize>,

    /// Fermi-ball radius overriding N for lattice commands.
    #[arg(long, global = true)]
    k_fermi: Option<f64>,

    /// Even number of Fermi-surface patches M.
    #[arg(long, global = true)]
    m_patches: Option<usize>,

    /// Cutoff exponent delta (patches with k.w < N^-delta drop out).
    #[arg(long, global = true)]
    delta: Option<f64>,

    /// Potential: zero | coulomb | compact:<radius>:<amplitude> | table:<path>.
    #[arg(long, global = true)]
    potential: Option<String>,

    /// Smallest |k| of the sweep.
    #[arg(long, global = true)]
    k_min: Option<f64>,

    /// Largest |k| of the sweep.
    #[arg(long, global = true)]
    k_max: Option<f64>,

    /// Number of |k| samples.
    #[arg(long, global = true)]
    k_steps: Option<usize>,

    /// Sweep direction as "x,y,z".
    #[arg(long, global = true)]
    k_dir: Option<String>,

    /// Lattice-sum cutoff (required for Coulomb energy totals).
    #[arg(long, global = true)]
    k_cutoff: Option<f64>,

    /// Integer mode momentum for paircount, as "kx,ky,kz".
    #[arg(long, global = true)]
    k_lattice: Option<String>,

    /// Corridor half-width for lattice pair counting.
    #[arg(long, global = true)]
    corridor: Option<f64>,

    /// Lower edge of the dispersion fit window.
    #[arg(long, global = true)]
    fit_k_min: Option<f64>,

    /// Upper edge of the dispersion fit window.
    #[arg(long, global = true)]
    fit_k_max: Option<f64>,

    /// Output format: csv | json.
    #[arg(long, global = true)]
    format: Option<String>,

    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<String>,

    /// Seed for the randomized validation modes.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Residual bound for the validate checks.
    #[arg(long, global = true)]
    tol_residual: Option<f64>,

    /// Number of randomized modes in validate (0 = vacuous pass).
    #[arg(long, global = true)]
    modes: Option<usize>,

    /// Write the patch set (one line per patch: center, area) to this path.
    #[arg(long, global = true)]
    dump_patches: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Excitation branches of the per-mode Hamiltonian over a |k| sweep.
    Spectrum,
    /// Continuum plasmon dispersion curve and its two-term fit.
    Plasmon,
    /// Correlation-energy totals: finite M against the continuum bracket.
    Energy,
    /// Exact lattice pair counts per patch vs the interpolation formula.
    Paircount,
    /// Cross-module invariant suite; non-zero exit on any failure.
    Validate,
}

impl Overrides {
    fn apply(&self, config: &mut RunConfig) -> anyhow::Result<()> {
        if let Some(v) = self.n_particles {
            config.n_particles = v;
        }
        if let Some(v) = self.k_fermi {
            config.k_fermi = Some(v);
        }
        if let Some(v) = self.m_patches {
            config.m_patches = v;
        }
        if let Some(v) = self.delta {
            config.delta = v;
        }
        if let Some(v) = &self.potential {
            config.potential = v.clone();
        }
        if let Some(v) = self.k_min {
            config.k_min = v;
        }
        if let Some(v) = self.k_max {
            config.k_max = v;
        }
        if let Some(v) = self.k_steps {
            config.k_steps = v;
        }
        if let Some(v) = &self.k_dir {
            config.k_dir = v.clone();
        }
        if let Some(v) = self.k_cutoff {
            config.k_cutoff = Some(v);
        }
        if let Some(v) = &self.k_lattice {
            config.k_lattice = v.clone();
        }
        if let Some(v) = self.corridor {
            config.corridor = v;
        }
        if let Some(v) = self.fit_k_min {
            config.fit_k_min = v;
        }
        if let Some(v) = self.fit_k_max {
            config.fit_k_max = v;
        }
        if let Some(v) = &self.format {
            config.set("format", v)?;
        }
        if let Some(v) = &self.out {
            config.out = Some(v.clone());
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.tol_residual {
            config.tol_residual = v;
        }
        if let Some(v) = self.modes {
            config.modes = v;
        }
        if let Some(v) = &self.dump_patches {
            config.dump_patches = Some(v.clone());
        }
        Ok(())
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config.load_file(path)?;
    }
    cli.overrides.apply(&mut config)?;
    config.validate()?;
    match cli.command {
        Command::Spectrum => commands::spectrum::run(&config).map(|_| true),
        Command::Plasmon => commands::plasmon::run(&config).map(|_| true),
        Command::Energy => commands::energy::run(&config).map(|_| true),
        Command::Paircount => commands::paircount::run(&config).map(|_| true),
        Command::Validate => commands::validate::run(&config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            // A closed pipe (e.g. piping into head) is not a failure.
            if let Some(io) = err.root_cause().downcast_ref::<std::io::Error>() {
                if io.kind() == std::io::ErrorKind::BrokenPipe {
                    return ExitCode::SUCCESS;
                }
            }
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
