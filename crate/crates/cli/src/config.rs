//! Experiment configuration and its layering: command-line flags, then the
//! `LAB_SEED` environment variable (seed only), then the config file
//! section for the experiment, then built-in defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use denselab::group::ModelKind;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable that overrides the master seed.
pub const SEED_ENV: &str = "LAB_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{SEED_ENV}={0:?} is not an unsigned integer")]
    BadSeed(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Theorem,
    Abelian,
    Nilpotent,
    Example5,
    Zradius,
    Regularity,
    Optimality,
    Densecheck,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Theorem,
        Experiment::Abelian,
        Experiment::Nilpotent,
        Experiment::Example5,
        Experiment::Zradius,
        Experiment::Regularity,
        Experiment::Optimality,
        Experiment::Densecheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Theorem => "theorem",
            Experiment::Abelian => "abelian",
            Experiment::Nilpotent => "nilpotent",
            Experiment::Example5 => "example5",
            Experiment::Zradius => "zradius",
            Experiment::Regularity => "regularity",
            Experiment::Optimality => "optimality",
            Experiment::Densecheck => "densecheck",
        }
    }

    fn default_model(self) -> &'static str {
        match self {
            Experiment::Theorem | Experiment::Abelian | Experiment::Densecheck => "euclidean2",
            Experiment::Nilpotent | Experiment::Example5 => "filiform4",
            Experiment::Zradius | Experiment::Regularity | Experiment::Optimality => "sl2r",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| ConfigError::UnknownExperiment(s.to_string()))
    }
}

/// A fully resolved experiment. Its serialized form is echoed into every
/// report and is enough to re-run the experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub model: String,
    pub trials: u64,
    pub seed: u64,
    pub out: PathBuf,
    pub word_length: usize,
    pub rho: f64,
    pub eps_id: f64,
    pub max_iter: usize,
    pub delta: f64,
    /// Generator count (abelian, nilpotent) or number of pieces (optimality).
    pub n: Option<usize>,
    /// Generator file for `densecheck`.
    pub input: Option<PathBuf>,
}

/// Partial settings from one layer; later layers fill only what is unset.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub model: Option<String>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub word_length: Option<usize>,
    pub rho: Option<f64>,
    pub eps_id: Option<f64>,
    pub max_iter: Option<usize>,
    pub delta: Option<f64>,
    pub n: Option<usize>,
    pub input: Option<PathBuf>,
}

impl Overrides {
    /// `self` with every unset field taken from `lower`.
    pub fn or(self, lower: Overrides) -> Overrides {
        Overrides {
            model: self.model.or(lower.model),
            trials: self.trials.or(lower.trials),
            seed: self.seed.or(lower.seed),
            out: self.out.or(lower.out),
            word_length: self.word_length.or(lower.word_length),
            rho: self.rho.or(lower.rho),
            eps_id: self.eps_id.or(lower.eps_id),
            max_iter: self.max_iter.or(lower.max_iter),
            delta: self.delta.or(lower.delta),
            n: self.n.or(lower.n),
            input: self.input.or(lower.input),
        }
    }
}

/// Sections of a config file, keyed by experiment name.
pub fn parse_config_file(text: &str, path: &Path) -> Result<BTreeMap<String, Overrides>, ConfigError> {
    let sections: BTreeMap<String, Overrides> = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    if let Some(bad) = sections.keys().find(|k| k.parse::<Experiment>().is_err()) {
        return Err(ConfigError::Parse {
            path: path.to_path_buf(),
            message: format!("unknown section [{bad}]"),
        });
    }
    Ok(sections)
}

pub fn load_config_file(path: &Path) -> Result<BTreeMap<String, Overrides>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_file(&text, path)
}

pub fn seed_from_env(value: Option<String>) -> Result<Option<u64>, ConfigError> {
    match value {
        None => Ok(None),
        Some(v) => v.trim().parse().map(Some).map_err(|_| ConfigError::BadSeed(v)),
    }
}

impl ExperimentConfig {
    /// Merge the layers (`flags` win, then `env_seed`, then `file`) over the
    /// defaults and validate the result.
    pub fn resolve(
        experiment: Experiment,
        flags: Overrides,
        env_seed: Option<u64>,
        file: Option<Overrides>,
    ) -> Result<Self, ConfigError> {
        let env = Overrides {
            seed: env_seed,
            ..Overrides::default()
        };
        let merged = flags.or(env).or(file.unwrap_or_default());
        let n = merged.n;
        let config = ExperimentConfig {
            experiment,
            model: merged.model.unwrap_or_else(|| experiment.default_model().to_string()),
            trials: merged.trials.unwrap_or(100),
            seed: merged.seed.unwrap_or(42),
            out: merged
                .out
                .unwrap_or_else(|| PathBuf::from("lab-out").join(experiment.name())),
            word_length: merged.word_length.unwrap_or(12),
            rho: merged.rho.unwrap_or(0.2),
            eps_id: merged.eps_id.unwrap_or(1e-9),
            max_iter: merged.max_iter.unwrap_or(200),
            delta: merged.delta.unwrap_or(if n.unwrap_or(2) <= 2 { 0.1 } else { 0.05 }),
            n,
            input: merged.input,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn model_kind(&self) -> Result<ModelKind, ConfigError> {
        self.model
            .parse()
            .map_err(|e: denselab::group::GroupError| ConfigError::Invalid(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.trials == 0 {
            return bad("trial count must be at least 1".into());
        }
        if self.word_length == 0 || self.max_iter == 0 {
            return bad("word length and max_iter must be at least 1".into());
        }
        for (name, v) in [("rho", self.rho), ("eps_id", self.eps_id), ("delta", self.delta)] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        let kind = self.model_kind()?;
        let name = self.experiment;
        match self.experiment {
            Experiment::Abelian if !kind.is_abelian() => {
                bad(format!("{name} needs a euclidean or torus model, got {kind}"))
            }
            Experiment::Nilpotent if !kind.is_nilpotent() => bad(format!("{name} needs a nilpotent model, got {kind}")),
            Experiment::Example5 if kind != ModelKind::Filiform4 => {
                bad(format!("{name} runs on filiform4, got {kind}"))
            }
            Experiment::Optimality if kind != ModelKind::Sl2r => bad(format!("{name} runs on sl2r, got {kind}")),
            Experiment::Optimality if self.n.is_some_and(|n| n < 2) => bad("optimality needs n ≥ 2".into()),
            Experiment::Densecheck if self.input.is_none() => bad("densecheck needs a generator file".into()),
            _ if self.n == Some(0) => bad("n must be at least 1".into()),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(seed: Option<u64>, trials: Option<u64>) -> Overrides {
        Overrides {
            seed,
            trials,
            ..Overrides::default()
        }
    }

    #[test]
    fn precedence_is_flags_env_file_defaults() {
        let file = Some(layer(Some(1), Some(10)));
        let c = ExperimentConfig::resolve(Experiment::Theorem, layer(None, None), None, file.clone()).unwrap();
        assert_eq!((c.seed, c.trials), (1, 10));
        let c = ExperimentConfig::resolve(Experiment::Theorem, layer(None, None), Some(2), file.clone()).unwrap();
        assert_eq!((c.seed, c.trials), (2, 10));
        let c = ExperimentConfig::resolve(Experiment::Theorem, layer(Some(3), Some(5)), Some(2), file).unwrap();
        assert_eq!((c.seed, c.trials), (3, 5));
        let c = ExperimentConfig::resolve(Experiment::Theorem, Overrides::default(), None, None).unwrap();
        assert_eq!((c.seed, c.trials, c.word_length), (42, 100, 12));
    }

    #[test]
    fn file_sections_parse() {
        let text = "[theorem]\nmodel = \"filiform4\"\ntrials = 7\n\n[optimality]\nn = 3\ndelta = 0.05\n";
        let s = parse_config_file(text, Path::new("lab.toml")).unwrap();
        assert_eq!(s["theorem"].trials, Some(7));
        assert_eq!(s["optimality"].n, Some(3));
        assert!(parse_config_file("[nope]\ntrials = 1\n", Path::new("x")).is_err());
        assert!(parse_config_file("[theorem]\nbogus = 1\n", Path::new("x")).is_err());
    }

    #[test]
    fn incompatible_model_is_rejected() {
        let flags = Overrides {
            model: Some("filiform4".into()),
            ..Overrides::default()
        };
        assert!(ExperimentConfig::resolve(Experiment::Optimality, flags, None, None).is_err());
        let zero = layer(None, Some(0));
        assert!(ExperimentConfig::resolve(Experiment::Theorem, zero, None, None).is_err());
    }

    #[test]
    fn env_seed_must_be_numeric() {
        assert_eq!(seed_from_env(Some("17".into())).unwrap(), Some(17));
        assert!(seed_from_env(Some("x".into())).is_err());
        assert_eq!(seed_from_env(None).unwrap(), None);
    }
}
