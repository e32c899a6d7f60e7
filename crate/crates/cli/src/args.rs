//! Command-line flags, the optional `key=value` config file, and the rules
//! for merging them: flag, then config file, then `FDCI_SEED` (seed only),
//! then the built-in default.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::UsageError;

pub const DEFAULT_SEED: u64 = 1;
pub const SEED_ENV: &str = "FDCI_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "fdci",
    version,
    about = "Finite difference solutions with Bayesian credible bands"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// u'' = sin x on [0, π]
    LinearBvp(LinearArgs),
    /// θ'' = −sin θ on [0, 2π], θ(0) = θ(2π) = 1.2
    Pendulum(PendulumArgs),
    /// δu'' + u(u' − 1) = 0 on [0, 1], u(0) = −1, u(1) = 1.5
    InteriorLayer(InteriorArgs),
    /// European call, implicit steps in time to expiry
    BlackScholes(BlackScholesArgs),
    /// Allele fixation probability, Crank–Nicolson in generations
    Fixation(FixationArgs),
    /// Band-driven grid refinement loop
    Refine(RefineArgs),
}

impl Command {
    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::LinearBvp(a) => &a.common,
            Command::Pendulum(a) => &a.common,
            Command::InteriorLayer(a) => &a.common,
            Command::BlackScholes(a) => &a.common,
            Command::Fixation(a) => &a.common,
            Command::Refine(a) => &a.common,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridKind {
    Uniform,
    Piecewise,
    Clustered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefineModel {
    Pendulum,
    InteriorLayer,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Posterior draws, burn-in included [default: 50500]
    #[arg(long)]
    pub draws: Option<usize>,
    /// Leading draws to discard [default: 500]
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// Random seed [default: $FDCI_SEED, else 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Inverse-gamma shape [default: m/2]
    #[arg(long)]
    pub a: Option<f64>,
    /// Inverse-gamma scale [default: a + 1]
    #[arg(long)]
    pub b: Option<f64>,
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: json]
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Sample on one thread
    #[arg(long)]
    pub single_thread: bool,
    /// Leave the timestamp out of the metadata
    #[arg(long)]
    pub no_timestamp: bool,
    /// key=value file; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct LinearArgs {
    /// Interior points [default: 99]
    #[arg(long)]
    pub m: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PendulumArgs {
    /// Interior points on the uniform grid [default: 124]
    #[arg(long)]
    pub m: Option<usize>,
    /// Grid layout [default: uniform]
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    /// Normal-clustered points added to the uniform grid [default: 200]
    #[arg(long)]
    pub extra_points: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct InteriorArgs {
    /// Perturbation parameter [default: 0.01]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Interior points of the uniform base grid [default: 200]
    #[arg(long)]
    pub m: Option<usize>,
    /// Grid layout [default: uniform]
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    /// Normal-clustered points added to the base grid [default: 200]
    #[arg(long)]
    pub extra_points: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BlackScholesArgs {
    /// Time step whose regression is banded; values are for step + 1 [default: 10]
    #[arg(long)]
    pub step: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FixationArgs {
    /// Generation to report [default: 1000]
    #[arg(long)]
    pub generations: Option<usize>,
    /// Initial allele frequency to report [default: 0.1]
    #[arg(long)]
    pub p0: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct RefineArgs {
    /// Model to refine [default: interior-layer]
    #[arg(long, value_enum)]
    pub model: Option<RefineModel>,
    /// Interior points of the starting uniform grid [default: 200, or 124 for the pendulum]
    #[arg(long)]
    pub m: Option<usize>,
    /// Perturbation parameter for the interior-layer model [default: 0.01]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Flag intervals whose band exceeds this multiple of the median width [default: 2]
    #[arg(long)]
    pub flag_ratio: Option<f64>,
    /// Nodes inserted into each flagged interval [default: 1]
    #[arg(long)]
    pub points_per_interval: Option<usize>,
    /// Maximum solve/refine rounds [default: 5]
    #[arg(long)]
    pub max_rounds: Option<usize>,
    /// Stop when max/median width falls to this [default: 1.5]
    #[arg(long)]
    pub stop_ratio: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Parsed `key=value` file. Blank lines and `#` comments are ignored; keys
/// are the long flag names without dashes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "draws",
    "burn-in",
    "seed",
    "a",
    "b",
    "out",
    "format",
    "m",
    "delta",
    "p0",
    "generations",
    "grid",
    "extra-points",
    "step",
    "model",
    "flag-ratio",
    "points-per-interval",
    "max-rounds",
    "stop-ratio",
];

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, UsageError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| UsageError(format!("config line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(UsageError(format!("config line {}: unknown key `{key}`", lineno + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, UsageError> {
        self.values
            .get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| UsageError(format!("config key `{key}`: cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn get_enum<T: ValueEnum>(&self, key: &str) -> Result<Option<T>, UsageError> {
        self.values
            .get(key)
            .map(|v| T::from_str(v, true).map_err(|_| UsageError(format!("config key `{key}`: invalid value `{v}`"))))
            .transpose()
    }
}

/// Merges a flag with the config file and a default.
pub struct Resolver {
    config: ConfigFile,
}

impl Resolver {
    pub fn new(common: &CommonArgs) -> Result<Self, UsageError> {
        let config = match &common.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        Ok(Self { config })
    }

    pub fn from_config(config: ConfigFile) -> Self {
        Self { config }
    }

    pub fn value<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, UsageError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.config.get(key),
        }
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, UsageError> {
        Ok(self.value(flag, key)?.unwrap_or(default))
    }

    pub fn choice<T: ValueEnum>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, UsageError> {
        match flag {
            Some(v) => Ok(v),
            None => Ok(self.config.get_enum(key)?.unwrap_or(default)),
        }
    }

    /// Flag, config file, `FDCI_SEED`, default.
    pub fn seed(&self, flag: Option<u64>, env: Option<&str>) -> Result<u64, UsageError> {
        if let Some(seed) = self.value(flag, "seed")? {
            return Ok(seed);
        }
        match env {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| UsageError(format!("{SEED_ENV}: cannot parse `{v}` as a seed"))),
            None => Ok(DEFAULT_SEED),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = ConfigFile::parse("# comment\n\ndraws = 1000\nburn_in=10\nformat=csv\n").unwrap();
        assert_eq!(c.get::<usize>("draws").unwrap(), Some(1000));
        assert_eq!(c.get::<usize>("burn-in").unwrap(), Some(10));
        assert_eq!(c.get_enum::<Format>("format").unwrap(), Some(Format::Csv));
        assert_eq!(c.get::<f64>("delta").unwrap(), None);
        assert!(ConfigFile::parse("bogus=1").is_err());
        assert!(ConfigFile::parse("draws").is_err());
        assert!(c.get::<f64>("format").is_err());
    }

    #[test]
    fn precedence() {
        let r = Resolver::from_config(ConfigFile::parse("seed=7\nm=50").unwrap());
        assert_eq!(r.or(Some(3usize), "m", 99).unwrap(), 3);
        assert_eq!(r.or(None::<usize>, "m", 99).unwrap(), 50);
        assert_eq!(r.or(None::<f64>, "delta", 0.01).unwrap(), 0.01);
        assert_eq!(r.seed(Some(5), Some("9")).unwrap(), 5);
        assert_eq!(r.seed(None, Some("9")).unwrap(), 7);
        let r = Resolver::from_config(ConfigFile::default());
        assert_eq!(r.seed(None, Some("9")).unwrap(), 9);
        assert_eq!(r.seed(None, None).unwrap(), DEFAULT_SEED);
        assert!(r.seed(None, Some("x")).is_err());
    }
}
