//! Command-line driver: `gate`, `sweep`, `optimum` and `fiber`.

pub mod error;
pub mod fiber_cmd;
pub mod gate_cmd;
pub mod metrics;
pub mod optimum_cmd;
pub mod output;
pub mod sweep_cmd;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use cqed_gates::constants::{CS_EXCITED_OFFSET, CS_QUBIT_SPLITTING};
use cqed_gates::scenario::{FiberSection, Scenario};

pub use error::{CliError, Result};
use fiber_cmd::ProfileGrid;
use optimum_cmd::OptimumInput;
use output::{emit, Format, Output};

#[derive(Debug, Parser)]
#[command(name = "cqed", version, about = "Photon-mediated CZ gates in nanofiber cavity QED")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for <command>.csv and <command>.json.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print this format to stdout instead of the text report.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for the Monte Carlo fidelity estimate.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one gate.
    Gate {
        #[arg(long)]
        scenario: PathBuf,
        /// Haar-random input states for a Monte Carlo cross-check of F_avg.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Evaluate the gate over the [sweep] grid of a scenario.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Optimal cooperativity, loss ratio and qubit-splitting bounds.
    Optimum {
        /// Take cavity rates, γ and the residual coupling from a scenario;
        /// explicit flags override it.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long = "kappa-r-2pi-mhz")]
        kappa_r: Option<f64>,
        #[arg(long = "kappa-t-2pi-mhz")]
        kappa_t: Option<f64>,
        #[arg(long = "kappa-m-2pi-mhz")]
        kappa_m: Option<f64>,
        #[arg(long = "gamma-2pi-mhz")]
        gamma: Option<f64>,
        #[arg(long = "qubit-splitting-2pi-mhz")]
        qubit_splitting: Option<f64>,
        #[arg(long = "excited-offset-2pi-mhz")]
        excited_offset: Option<f64>,
        #[arg(long)]
        dipole_ratio_sq: Option<f64>,
        /// Also report the cooperativity and loss ratio needed for this F_e.
        #[arg(long)]
        target_fidelity: Option<f64>,
    },
    /// Fiber mode, mode volumes and the radial coupling profile.
    Fiber {
        /// Scenario or a file with only a [fiber] table.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 1500.0)]
        r_max_nm: f64,
        #[arg(long, default_value_t = 130)]
        points: usize,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.into(), source })
}

fn stem_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| "scenario".into(), |s| s.to_string_lossy().into_owned())
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    Ok(Scenario::from_toml_str(&read(path)?)?)
}

#[allow(clippy::too_many_arguments)]
fn optimum_input(
    scenario: Option<&Scenario>,
    kappa_r: Option<f64>,
    kappa_t: Option<f64>,
    kappa_m: Option<f64>,
    gamma: Option<f64>,
    qubit_splitting: Option<f64>,
    excited_offset: Option<f64>,
    dipole_ratio_sq: Option<f64>,
    target_fidelity: Option<f64>,
) -> Result<OptimumInput> {
    let mut input = match scenario {
        Some(s) => OptimumInput {
            kappa_r: s.cavity.kappa_r_2pi_mhz,
            kappa_t: s.cavity.kappa_t_2pi_mhz,
            kappa_m: s.cavity.kappa_m_2pi_mhz,
            gamma: s.gate.gamma_2pi_mhz,
            effective_splitting: s.gate.residual_splitting_2pi_mhz,
            dipole_ratio_sq: s.gate.residual_dipole_ratio_sq,
            target_fidelity: None,
        },
        None => {
            let kr = kappa_r.ok_or_else(|| {
                CliError::Usage("optimum needs --scenario or --kappa-r-2pi-mhz".into())
            })?;
            OptimumInput::cesium(kr, 0.0, 0.0)
        }
    };
    if let Some(x) = kappa_r {
        input.kappa_r = x;
    }
    if let Some(x) = kappa_t {
        input.kappa_t = x;
    }
    if let Some(x) = kappa_m {
        input.kappa_m = x;
    }
    if let Some(x) = gamma {
        input.gamma = x;
    }
    if qubit_splitting.is_some() || excited_offset.is_some() {
        input.effective_splitting = qubit_splitting.unwrap_or(CS_QUBIT_SPLITTING)
            - excited_offset.unwrap_or(CS_EXCITED_OFFSET);
    }
    if let Some(x) = dipole_ratio_sq {
        input.dipole_ratio_sq = x;
    }
    input.target_fidelity = target_fidelity;
    Ok(input)
}

fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Gate { scenario, samples } => {
            let s = load_scenario(scenario)?;
            gate_cmd::run(&stem_name(scenario), &s, samples.map(|n| (n, cli.seed)))
        }
        Command::Sweep { scenario } => {
            let s = load_scenario(scenario)?;
            sweep_cmd::run(&stem_name(scenario), &s)
        }
        Command::Optimum {
            scenario,
            kappa_r,
            kappa_t,
            kappa_m,
            gamma,
            qubit_splitting,
            excited_offset,
            dipole_ratio_sq,
            target_fidelity,
        } => {
            let s = scenario.as_deref().map(load_scenario).transpose()?;
            let input = optimum_input(
                s.as_ref(),
                *kappa_r,
                *kappa_t,
                *kappa_m,
                *gamma,
                *qubit_splitting,
                *excited_offset,
                *dipole_ratio_sq,
                *target_fidelity,
            )?;
            optimum_cmd::run(&input)
        }
        Command::Fiber { scenario, r_max_nm, points } => {
            let section = match scenario {
                Some(p) => fiber_cmd::section_from_toml(&read(p)?)?,
                None => FiberSection::default(),
            };
            fiber_cmd::run(&section, ProfileGrid { r_max_nm: *r_max_nm, points: *points })
        }
    }
}

/// Runs one parsed command line and writes its output.
pub fn run(cli: &Cli) -> Result<()> {
    let output = match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| execute(cli))?
        }
        None => execute(cli)?,
    };
    emit(&output, cli.format, cli.out.as_deref())
}
