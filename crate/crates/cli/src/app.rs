use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::commands::{cmd_ensemble, cmd_perturb, cmd_trajectory};
use crate::config::{ErrorPolicyName, OutputFormat, RunConfig};
use crate::error::CliError;
use crate::plot;
use crate::verify::cmd_verify;

#[derive(Debug, Parser)]
#[command(
    name = "qhj-impulse",
    version,
    about = "Trajectory and Copenhagen energy transfer for a wall-band impulse on the square-well ground state"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Ensemble RNG seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "QHJ_IMPULSE_THREADS")]
    pub threads: Option<usize>,
    /// Output file; CSV goes to stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Impulse strength F.
    #[arg(long = "F", global = true, allow_negative_numbers = true)]
    pub force: Option<f64>,
    /// Wall band width.
    #[arg(long = "eps", global = true)]
    pub epsilon: Option<f64>,
    /// Impulse time.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    /// Integrated time weight of the impulse.
    #[arg(long = "T", global = true)]
    pub time_weight: Option<f64>,
    /// Ensemble size.
    #[arg(long, global = true)]
    pub n: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the invariant suites.
    Verify {
        #[arg(long)]
        group: Option<String>,
    },
    /// Sample the particle position over whole cycles.
    Trajectory {
        #[arg(long, allow_negative_numbers = true)]
        tau0: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        cycles: Option<f64>,
    },
    /// Energy transfer for a single impulse.
    Perturb {
        #[arg(long, allow_negative_numbers = true)]
        tau0: Option<f64>,
    },
    /// Uniform-epoch ensemble average of the energy transfer.
    Ensemble {
        /// Comma-separated band widths, one summary row each.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<f64>>,
        /// Per-sample CSV output.
        #[arg(long, value_name = "PATH")]
        samples: Option<PathBuf>,
        /// Draw this many random microstates instead of using a, b, c.
        #[arg(long)]
        random_microstates: Option<usize>,
        /// Leave failing samples out instead of aborting.
        #[arg(long)]
        skip_errors: bool,
    },
    /// Print the effective configuration.
    Config,
}

impl Cli {
    /// Effective configuration: file (or defaults) with flag overrides.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut cfg.microstate.a, self.a);
        set(&mut cfg.microstate.b, self.b);
        set(&mut cfg.microstate.c, self.c);
        set(&mut cfg.impulse.force, self.force);
        set(&mut cfg.impulse.epsilon, self.epsilon);
        set(&mut cfg.impulse.gamma, self.gamma);
        set(&mut cfg.impulse.time_weight, self.time_weight);
        if let Some(n) = self.n {
            cfg.ensemble.n = n;
        }
        if let Some(s) = self.seed {
            cfg.ensemble.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output.path = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.output.format = f;
        }
        match &self.command {
            Command::Trajectory { tau0, points, cycles } => {
                set(&mut cfg.trajectory.tau0, *tau0);
                set(&mut cfg.trajectory.n_cycles, *cycles);
                if let Some(p) = points {
                    cfg.trajectory.n_points = *p;
                }
            }
            Command::Perturb { tau0 } => set(&mut cfg.perturb.tau0, *tau0),
            Command::Ensemble {
                sweep,
                samples,
                random_microstates,
                skip_errors,
            } => {
                if let Some(s) = sweep {
                    cfg.sweep.epsilons = s.clone();
                }
                if let Some(s) = samples {
                    cfg.output.samples = Some(s.clone());
                }
                if let Some(r) = random_microstates {
                    cfg.ensemble.random_microstates = *r;
                }
                if *skip_errors {
                    cfg.ensemble.error_policy = ErrorPolicyName::Skip;
                }
            }
            Command::Verify { .. } | Command::Config => {}
        }
        Ok(cfg)
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = cli.resolve_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli, &cfg))
}

fn dispatch(cli: &Cli, cfg: &RunConfig) -> Result<i32, CliError> {
    let out = cfg.output.path.as_deref();
    match &cli.command {
        Command::Config => {
            emit(out, &cfg.to_toml())?;
            Ok(0)
        }
        Command::Verify { group } => {
            let report = cmd_verify(cfg, group.as_deref())?;
            emit(out, &report.render())?;
            Ok(if report.passed() { 0 } else { 2 })
        }
        Command::Trajectory { .. } => {
            let csv = cmd_trajectory(cfg)?;
            emit(out, &csv)?;
            if let Some(p) = out {
                write_file(&plot::script_path(p), &plot::trajectory_script(p))?;
            }
            Ok(0)
        }
        Command::Perturb { .. } => {
            let r = cmd_perturb(cfg)?;
            print!("{}", r.text);
            if let Some(p) = out {
                write_file(p, &r.csv)?;
            }
            Ok(0)
        }
        Command::Ensemble { .. } => {
            let keep = cfg.output.samples.is_some();
            let r = cmd_ensemble(cfg, &cfg.sweep.epsilons, keep)?;
            emit(out, &r.summary_csv)?;
            if let (Some(path), Some(text)) = (cfg.output.samples.as_deref(), r.samples_csv.as_deref()) {
                write_file(path, text)?;
            }
            if let Some(p) = out {
                write_file(&plot::script_path(p), &plot::ensemble_script(p))?;
            }
            eprint!("{}", r.text);
            Ok(0)
        }
    }
}
