//! Experiment configuration: flags, an optional flat TOML file, and the
//! resolved settings echoed into every report.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tim_core::channel::{ChannelError, StateDistribution, StateId, NUM_STATES};
use tim_core::codec::{MessageMode, Seeds, TraceMode};
use tim_core::gf::{FieldError, FieldSpec, DEFAULT_P};

pub const DEFAULT_N: usize = 900;
pub const DEFAULT_STEPS: usize = 11;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad config file {path}: {source}")]
    File {
        path: PathBuf,
        source: Box<toml::de::Error>,
    },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RunMode {
    MonteCarlo,
    Proportional,
    JessDemo,
}

impl RunMode {
    pub fn trace_mode(self) -> Option<TraceMode> {
        match self {
            RunMode::MonteCarlo => Some(TraceMode::MonteCarlo),
            RunMode::Proportional => Some(TraceMode::Proportional),
            RunMode::JessDemo => None,
        }
    }
}

/// Parses `"2/9"`, `"0.25"` or `"1"` into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Rational64, ConfigError> {
    let s = s.trim();
    let bad = || invalid(format!("cannot parse {s:?} as a fraction or decimal"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(invalid(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational64::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty())
        || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())
        || frac.len() > 15
    {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let r = Rational64::new(num, 10i64.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

pub fn format_ratio(r: Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Seven comma-separated probabilities in state order A..G.
pub fn parse_dist(s: &str) -> Result<StateDistribution, ConfigError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != NUM_STATES {
        return Err(invalid(format!(
            "--dist needs {NUM_STATES} comma-separated values, got {}",
            parts.len()
        )));
    }
    let mut probs = [Rational64::zero(); NUM_STATES];
    for (p, part) in probs.iter_mut().zip(parts) {
        *p = parse_ratio(part)?;
    }
    Ok(StateDistribution::new(probs)?)
}

pub fn format_dist(d: &StateDistribution) -> String {
    d.probs()
        .iter()
        .map(|&p| format_ratio(p))
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_msg_mode(s: &str) -> Result<MessageMode, String> {
    match s {
        "random" => Ok(MessageMode::Random),
        "counter" => Ok(MessageMode::Counter),
        _ => Err(format!("expected random or counter, got {s:?}")),
    }
}

fn parse_state(s: &str) -> Result<StateId, ConfigError> {
    let mut chars = s.trim().chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(StateId::from_tag(c.to_ascii_uppercase())?),
        _ => Err(invalid(format!("expected a state letter A..G, got {s:?}"))),
    }
}

/// Serde helpers that write rationals as `"num/den"` strings.
mod ratio_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_ratio(*r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational64, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

mod dist_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &StateDistribution, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = d.probs().iter().map(|&p| format_ratio(p)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<StateDistribution, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        parse_dist(&v.join(",")).map_err(serde::de::Error::custom)
    }
}

/// Grid over one state probability; the rest are rescaled to keep the sum 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub vary: StateId,
    #[serde(with = "ratio_str")]
    pub from: Rational64,
    #[serde(with = "ratio_str")]
    pub to: Rational64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(
        vary: StateId,
        from: Rational64,
        to: Rational64,
        steps: usize,
    ) -> Result<Self, ConfigError> {
        let unit = |r: Rational64| r >= Rational64::zero() && r <= Rational64::one();
        if !unit(from) || !unit(to) {
            return Err(invalid("sweep endpoints must lie in [0, 1]"));
        }
        if steps == 0 {
            return Err(invalid("--steps must be at least 1"));
        }
        Ok(SweepSpec {
            vary,
            from,
            to,
            steps,
        })
    }

    pub fn grid(&self) -> Vec<Rational64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = Rational64::from_integer(self.steps as i64 - 1);
        (0..self.steps)
            .map(|k| self.from + (self.to - self.from) * Rational64::from_integer(k as i64) / last)
            .collect()
    }
}

/// Replaces the probability of `vary` with `x`, rescaling the others.
pub fn renormalize(
    base: &StateDistribution,
    vary: StateId,
    x: Rational64,
) -> Result<StateDistribution, ConfigError> {
    Ok(base.reweighted(vary, x)?)
}

/// Fully resolved settings, echoed verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub p: u32,
    #[serde(with = "dist_str")]
    pub dist: StateDistribution,
    pub n: usize,
    pub mode: RunMode,
    pub seeds: Seeds,
    pub messages: MessageMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn field(&self) -> FieldSpec {
        FieldSpec::new(self.p).expect("validated at resolve time")
    }
}

/// Keys accepted in a `--config` file; names match the long flags with
/// dashes replaced by underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub p: Option<u32>,
    pub dist: Option<String>,
    pub n: Option<usize>,
    pub mode: Option<RunMode>,
    pub seed_trace: Option<u64>,
    pub seed_channel: Option<u64>,
    pub seed_msg: Option<u64>,
    pub msg_mode: Option<MessageMode>,
    pub out: Option<PathBuf>,
    pub vary: Option<String>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub steps: Option<usize>,
    pub csv: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        toml::from_str(&text).map_err(|source| ConfigError::File {
            path: path.to_owned(),
            source: Box::new(source),
        })
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat TOML file with the same keys as the flags; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field size, a prime >= 3.
    #[arg(long)]
    pub p: Option<u32>,
    /// Seven probabilities for states A..G, as fractions or decimals.
    #[arg(long, allow_hyphen_values = true)]
    pub dist: Option<String>,
    /// Number of channel uses.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<RunMode>,
    #[arg(long)]
    pub seed_trace: Option<u64>,
    #[arg(long)]
    pub seed_channel: Option<u64>,
    #[arg(long)]
    pub seed_msg: Option<u64>,
    /// Message symbols: seeded uniform draws or a deterministic counter.
    #[arg(long, value_parser = parse_msg_mode)]
    pub msg_mode: Option<MessageMode>,
    /// JSON report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// State whose probability is swept (A..G).
    #[arg(long)]
    pub vary: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<String>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    pub steps: Option<usize>,
    /// CSV table path; stdout when absent.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Where results go.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outputs {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl RunArgs {
    fn file(&self) -> Result<FileConfig, ConfigError> {
        match &self.config {
            Some(path) => FileConfig::load(path),
            None => Ok(FileConfig::default()),
        }
    }

    pub fn resolve(&self) -> Result<(ExperimentConfig, Outputs), ConfigError> {
        let file = self.file()?;
        resolve_run(self, &file)
    }
}

fn resolve_run(
    args: &RunArgs,
    file: &FileConfig,
) -> Result<(ExperimentConfig, Outputs), ConfigError> {
    let p = args.p.or(file.p).unwrap_or(DEFAULT_P);
    FieldSpec::new(p)?;
    let dist = match args.dist.as_deref().or(file.dist.as_deref()) {
        Some(s) => parse_dist(s)?,
        None => StateDistribution::balanced(),
    };
    let d = Seeds::default();
    let cfg = ExperimentConfig {
        p,
        dist,
        n: args.n.or(file.n).unwrap_or(DEFAULT_N),
        mode: args.mode.or(file.mode).unwrap_or(RunMode::MonteCarlo),
        seeds: Seeds {
            trace: args.seed_trace.or(file.seed_trace).unwrap_or(d.trace),
            channel: args.seed_channel.or(file.seed_channel).unwrap_or(d.channel),
            message: args.seed_msg.or(file.seed_msg).unwrap_or(d.message),
        },
        messages: args
            .msg_mode
            .or(file.msg_mode)
            .unwrap_or(MessageMode::Random),
        sweep: None,
    };
    let out = Outputs {
        json: args.out.clone().or(file.out.clone()),
        csv: None,
    };
    Ok((cfg, out))
}

impl SweepArgs {
    pub fn resolve(&self) -> Result<(ExperimentConfig, Outputs), ConfigError> {
        let file = self.run.file()?;
        let (mut cfg, mut out) = resolve_run(&self.run, &file)?;
        if cfg.mode == RunMode::JessDemo {
            return Err(invalid("sweep supports monte-carlo or proportional mode"));
        }
        let need = |flag: Option<&String>, key: &Option<String>, name: &str| {
            flag.or(key.as_ref())
                .cloned()
                .ok_or_else(|| invalid(format!("sweep needs --{name}")))
        };
        let vary = parse_state(&need(self.vary.as_ref(), &file.vary, "vary")?)?;
        let from = parse_ratio(&need(self.from.as_ref(), &file.from, "from")?)?;
        let to = parse_ratio(&need(self.to.as_ref(), &file.to, "to")?)?;
        let steps = self.steps.or(file.steps).unwrap_or(DEFAULT_STEPS);
        cfg.sweep = Some(SweepSpec::new(vary, from, to, steps)?);
        out.csv = self.csv.clone().or(file.csv.clone());
        Ok((cfg, out))
    }
}
