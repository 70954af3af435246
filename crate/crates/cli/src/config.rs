//! Sweep configuration.
//!
//! Files are plain `key = value` lines; `#` starts a comment. Recognised keys:
//!
//! | key | meaning |
//! |-----|---------|
//! | `theory` | `entanglement`, `athermality` or `noisy` |
//! | `gamma` | reference weights, comma separated |
//! | `energies`, `beta` | reference from energy levels |
//! | `source`, `target` | explicit distributions, comma separated |
//! | `dim` | system dimension for sampled families |
//! | `h_ini`, `h_fin` | contour entropies, in the display base |
//! | `samples` | number of sampled states |
//! | `target_direction` | unnormalised direction of the target from uniform |
//! | `eps`, `n_min`, `n_max`, `seed`, `base`, `workers` | as the CLI flags |
//! | `out`, `svg` | output paths |
//!
//! `CATALYSIS_OUT_DIR`, when set, is the directory relative output paths are
//! resolved against.

use std::path::{Path, PathBuf};

use catalysis::second_order::TheoryKind;
use catalysis::spectra::Base;
use catalysis::{GibbsSpec, ProbVec};

use crate::error::{CliError, CliResult};

pub const OUT_DIR_ENV: &str = "CATALYSIS_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoryName {
    Entanglement,
    Athermality,
    Noisy,
}

impl std::str::FromStr for TheoryName {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s.trim() {
            "entanglement" | "locc" => Ok(TheoryName::Entanglement),
            "athermality" | "thermal" => Ok(TheoryName::Athermality),
            "noisy" | "unitary-noisy" => Ok(TheoryName::Noisy),
            other => Err(CliError::Config(format!("unknown theory `{other}`"))),
        }
    }
}

/// Where the states of a sweep come from.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Explicit {
        source: ProbVec,
        target: ProbVec,
    },
    /// Seeded sample of states with entropy `h_ini`, against one target with
    /// entropy `h_fin` (both in nats).
    Contour {
        dim: usize,
        h_ini: f64,
        h_fin: f64,
        samples: usize,
        direction: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Unset means the command's default theory.
    pub theory: Option<TheoryName>,
    pub gamma: Option<GibbsSpec>,
    pub source: Option<StateSource>,
    pub eps: f64,
    pub n_min: usize,
    pub n_max: Option<usize>,
    pub base: Base,
    pub seed: Option<u64>,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

pub const DEFAULT_DIRECTION: [f64; 3] = [0.775, 0.225, 0.0];
pub const DEFAULT_SAMPLES: usize = 50;

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            theory: None,
            gamma: None,
            source: None,
            eps: 0.03,
            n_min: 1,
            n_max: None,
            base: Base::Two,
            seed: None,
            workers: 1,
            out: None,
            svg: None,
        }
    }
}

fn parse_list(key: &str, value: &str) -> CliResult<Vec<f64>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("bad value for `{key}`: `{value}`")))
}

#[derive(Default)]
struct Raw {
    source: Option<Vec<f64>>,
    target: Option<Vec<f64>>,
    energies: Option<Vec<f64>>,
    beta: Option<f64>,
    dim: Option<usize>,
    h_ini: Option<f64>,
    h_fin: Option<f64>,
    samples: Option<usize>,
    direction: Option<Vec<f64>>,
}

impl SweepConfig {
    /// Parses a config file body. Entropies are read in the file's `base`.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = SweepConfig::default();
        let mut raw = Raw::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "theory" => cfg.theory = Some(value.parse()?),
                "gamma" => {
                    cfg.gamma = Some(GibbsSpec::from_weights(parse_list(key, value)?)?);
                }
                "energies" => raw.energies = Some(parse_list(key, value)?),
                "beta" => raw.beta = Some(parse_num(key, value)?),
                "source" => raw.source = Some(parse_list(key, value)?),
                "target" => raw.target = Some(parse_list(key, value)?),
                "dim" => raw.dim = Some(parse_num(key, value)?),
                "h_ini" => raw.h_ini = Some(parse_num(key, value)?),
                "h_fin" => raw.h_fin = Some(parse_num(key, value)?),
                "samples" => raw.samples = Some(parse_num(key, value)?),
                "target_direction" => raw.direction = Some(parse_list(key, value)?),
                "eps" => cfg.eps = parse_num(key, value)?,
                "n_min" => cfg.n_min = parse_num(key, value)?,
                "n_max" => cfg.n_max = Some(parse_num(key, value)?),
                "seed" => cfg.seed = Some(parse_num(key, value)?),
                "base" => cfg.base = value.parse()?,
                "workers" => cfg.workers = parse_num(key, value)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "svg" => cfg.svg = Some(PathBuf::from(value)),
                other => return Err(CliError::Config(format!("unknown key `{other}`"))),
            }
        }
        if let Some(e) = raw.energies {
            cfg.gamma = Some(GibbsSpec::from_energies(&e, raw.beta.unwrap_or(0.0))?);
        }
        cfg.source = match (raw.source, raw.target, raw.h_ini) {
            (Some(s), Some(t), None) => Some(StateSource::Explicit {
                source: ProbVec::new(s)?,
                target: ProbVec::new(t)?,
            }),
            (None, None, Some(h)) => Some(
                cfg.contour(
                    raw.dim.unwrap_or(3),
                    h,
                    raw.h_fin
                        .ok_or_else(|| CliError::Config("`h_ini` needs `h_fin`".into()))?,
                    raw.samples.unwrap_or(DEFAULT_SAMPLES),
                    raw.direction,
                ),
            ),
            (None, None, None) => None,
            _ => {
                return Err(CliError::Config(
                    "give either `source` and `target`, or `h_ini` and `h_fin`".into(),
                ))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(&text)
    }

    /// A contour source with entropies given in this config's base.
    pub fn contour(
        &self,
        dim: usize,
        h_ini: f64,
        h_fin: f64,
        samples: usize,
        direction: Option<Vec<f64>>,
    ) -> StateSource {
        let direction = direction.unwrap_or_else(|| {
            let mut d = DEFAULT_DIRECTION.to_vec();
            d.resize(dim, 0.0);
            d
        });
        StateSource::Contour {
            dim,
            h_ini: self.base.to_nats(h_ini),
            h_fin: self.base.to_nats(h_fin),
            samples,
            direction,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(CliError::Config(format!(
                "eps must lie in (0, 1), got {}",
                self.eps
            )));
        }
        if self.n_min == 0 || self.n_max.is_some_and(|m| m < self.n_min) {
            return Err(CliError::Config("need 1 <= n_min <= n_max".into()));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be >= 1".into()));
        }
        if let Some(StateSource::Contour {
            dim,
            direction,
            samples,
            ..
        }) = &self.source
        {
            if self.seed.is_none() {
                return Err(CliError::Config("sampled sweeps need a `seed`".into()));
            }
            if *dim < 2 || direction.len() != *dim {
                return Err(CliError::Config(format!(
                    "target direction has {} entries for dimension {dim}",
                    direction.len()
                )));
            }
            if *samples == 0 {
                return Err(CliError::Config("samples must be >= 1".into()));
            }
        }
        Ok(())
    }

    /// The resource theory for a `d`-dimensional system.
    pub fn theory_kind(&self, d: usize, default: TheoryName) -> CliResult<TheoryKind> {
        Ok(match self.theory.unwrap_or(default) {
            TheoryName::Entanglement => TheoryKind::Entanglement,
            TheoryName::Noisy => TheoryKind::UnitaryNoisy(d),
            TheoryName::Athermality => match &self.gamma {
                Some(g) => TheoryKind::Athermality(g.clone()),
                None => TheoryKind::Athermality(GibbsSpec::uniform(d)?),
            },
        })
    }
}

/// `path` resolved against `CATALYSIS_OUT_DIR`; with no path, the default
/// file name inside that directory, or `None` (stdout) when it is unset.
pub fn resolve_output(path: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match (path, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.to_owned()),
        (None, Some(d)) => Some(d.join(default_name)),
        (None, None) => None,
    }
}

/// Suffix for entropy-valued display columns.
pub fn unit(base: Base) -> &'static str {
    match base {
        Base::E => "nats",
        Base::Two => "bits",
    }
}
