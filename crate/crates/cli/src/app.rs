//! Argument parsing and subcommand dispatch.
//!
//! Exit codes: 0 when every check passed, 1 for usage and setup errors,
//! 2 when a run completed but one of its acceptance checks failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{load_config_file, seed_from_env, Experiment, ExperimentConfig, Overrides};
use crate::output::{read_report, render_text, summary_json, write_csv, write_report};
use crate::runner::run_experiment;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "denselab",
    version,
    about = "Experiments on dense random subgroups of Lie groups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide density of the subgroup of R^n generated by the vectors in a file.
    Densecheck {
        file: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a seeded batch of one experiment.
    Simulate {
        /// theorem, abelian, nilpotent, example5, zradius, regularity, optimality or densecheck.
        experiment: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Measure a Z-neighbourhood radius and spot-check it.
    Zradius {
        #[arg(value_name = "MODEL")]
        target: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Print a saved report.
    Report {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// Group model, e.g. euclidean2, torus2, heisenberg, filiform4, sl2r, so3.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of trials.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Master seed; per-trial seeds derive from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Longest word explored by the closure search.
    #[arg(long)]
    pub word_length: Option<usize>,
    /// Only words within this distance of the identity contribute logarithms.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Distance to the identity treated as convergence.
    #[arg(long)]
    pub eps_id: Option<f64>,
    /// Iteration cap for commutator orbits.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Gap between the ping-pong arcs on the circle.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Generator count, or number of pieces for optimality.
    #[arg(long)]
    pub n: Option<usize>,
    /// Config file with one section per experiment.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            model: self.model.clone(),
            trials: self.trials,
            seed: self.seed,
            out: self.out.clone(),
            word_length: self.word_length,
            rho: self.rho,
            eps_id: self.eps_id,
            max_iter: self.max_iter,
            delta: self.delta,
            n: self.n,
            input: None,
        }
    }
}

/// Resolve the layered configuration for one experiment.
pub fn resolve(
    experiment: Experiment,
    flags: &Flags,
    extra: Overrides,
    env_seed: Option<String>,
) -> Result<ExperimentConfig, crate::config::ConfigError> {
    let file = match &flags.config {
        Some(path) => load_config_file(path)?.remove(experiment.name()),
        None => None,
    };
    let env = seed_from_env(env_seed)?;
    ExperimentConfig::resolve(experiment, extra.or(flags.overrides()), env, file)
}

fn simulate<O: Write, E: Write>(config: &ExperimentConfig, out: &mut O, err: &mut E) -> i32 {
    let report = match run_experiment(config) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = write_report(&report, &config.out) {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    let _ = write!(out, "{}", render_text(&report));
    if config.experiment == Experiment::Densecheck {
        if let Some(r) = report.records.first() {
            let verdict = r
                .row
                .get("verdict")
                .map(|c| c.render())
                .unwrap_or_else(|| "error".into());
            let certificate = serde_json::to_string_pretty(&r.detail).unwrap_or_default();
            let _ = writeln!(out, "verdict: {verdict}\n{certificate}");
        }
    }
    let _ = writeln!(out, "  report written to {}", config.out.display());
    if report.aggregate.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

/// Run the program on `args` (including the program name) with the given
/// `LAB_SEED` value, writing to `out` and `err`. Returns the exit code.
pub fn run<I, T, O, E>(args: I, env_seed: Option<String>, out: &mut O, err: &mut E) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
    O: Write,
    E: Write,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let resolved = match &cli.command {
        Command::Densecheck { file, flags } => {
            let extra = Overrides {
                input: Some(file.clone()),
                ..Overrides::default()
            };
            resolve(Experiment::Densecheck, flags, extra, env_seed)
        }
        Command::Simulate { experiment, flags } => experiment
            .parse::<Experiment>()
            .and_then(|e| resolve(e, flags, Overrides::default(), env_seed)),
        Command::Zradius { target, flags } => {
            let extra = Overrides {
                model: Some(target.clone()),
                ..Overrides::default()
            };
            resolve(Experiment::Zradius, flags, extra, env_seed)
        }
        Command::Report { path, format } => return report(path, *format, out, err),
    };
    match resolved {
        Ok(config) => simulate(&config, out, err),
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn report<O: Write, E: Write>(path: &std::path::Path, format: Format, out: &mut O, err: &mut E) -> i32 {
    let report = match read_report(path) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match format {
        Format::Text => write!(out, "{}", render_text(&report)).map_err(|e| e.to_string()),
        Format::Json => write!(out, "{}", summary_json(&report)).map_err(|e| e.to_string()),
        Format::Csv => write_csv(&report.columns, &report.records, &mut *out).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if report.aggregate.passed {
        EXIT_OK
    } else {
        EXIT_FAILED
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }
}
