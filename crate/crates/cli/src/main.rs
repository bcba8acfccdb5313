mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;

/// Biphoton X-correlation runs for a type-I down-converter.
#[derive(Debug, Parser)]
#[command(name = "xent", version)]
struct Cli {
    /// Run configuration (key-value file with [run], [grid], [filter.*]).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// |V(q, omega)| phase-matching map.
    PmMap,
    /// |psi(r, t)| near field with on-axis and t = 0 cuts.
    Xcorr {
        /// Add quadratic-model columns to the map.
        #[arg(long)]
        quadratic_oracle: bool,
    },
    /// Resolved vs position-integrated coincidence.
    Coincidence,
    /// On-axis profile for each far-field aperture in sweep_alpha_deg.
    FilterSweep,
    /// Plane-wave-pump validity for the configured pump.
    ValidatePwp,
    /// Fit the spectral-filter bandwidth to target_fwhm_fs.
    Calibrate,
}

/// Config keys settable from the command line; each overrides the file.
/// Values are parsed with the file's rules, so negatives are accepted here
/// and rejected by validation.
#[derive(Debug, Args)]
struct Overrides {
    #[arg(long, global = true, value_name = "PATH")]
    crystal_file: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gain: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    output_dir: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pump_waist_um: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pump_duration_ps: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pwp_threshold: Option<String>,
    /// Comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    sweep_alpha_deg: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    target_fwhm_fs: Option<String>,
    /// Number or `off`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    delta0_override: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    map_stride: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    map_r_max_um: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    map_t_max_fs: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    n_q: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    n_omega: Option<String>,
    /// rad/m or `auto`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    q_max: Option<String>,
    /// rad/s or `auto`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    omega_max: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    order: Option<String>,
    /// rad/s or `off`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    bandwidth: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    center_offset: Option<String>,
    /// Degrees or `off`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha_max_deg: Option<String>,
    /// photon-frequency or degenerate.
    #[arg(long, global = true, allow_hyphen_values = true)]
    mapping: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, String)> {
        let all = [
            ("crystal_file", &self.crystal_file),
            ("gain", &self.gain),
            ("output_dir", &self.output_dir),
            ("pump_waist_um", &self.pump_waist_um),
            ("pump_duration_ps", &self.pump_duration_ps),
            ("pwp_threshold", &self.pwp_threshold),
            ("sweep_alpha_deg", &self.sweep_alpha_deg),
            ("target_fwhm_fs", &self.target_fwhm_fs),
            ("delta0_override", &self.delta0_override),
            ("map_stride", &self.map_stride),
            ("map_r_max_um", &self.map_r_max_um),
            ("map_t_max_fs", &self.map_t_max_fs),
            ("n_q", &self.n_q),
            ("n_omega", &self.n_omega),
            ("q_max", &self.q_max),
            ("omega_max", &self.omega_max),
            ("order", &self.order),
            ("bandwidth", &self.bandwidth),
            ("center_offset", &self.center_offset),
            ("alpha_max_deg", &self.alpha_max_deg),
            ("mapping", &self.mapping),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v.clone())))
            .collect()
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(cli.config.as_deref(), &cli.overrides.pairs())?;
    let ctx = Context::new(cfg)?;
    log::info!("writing to {}", ctx.out_dir().display());
    let files = match &cli.command {
        Command::PmMap => commands::pm_map(&ctx)?,
        Command::Xcorr { quadratic_oracle } => commands::xcorr(&ctx, *quadratic_oracle)?,
        Command::Coincidence => commands::coincidence(&ctx)?,
        Command::FilterSweep => commands::filter_sweep(&ctx)?,
        Command::ValidatePwp => commands::validate_pwp(&ctx)?,
        Command::Calibrate => commands::calibrate_filter(&ctx)?,
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xent: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
