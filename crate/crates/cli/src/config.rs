//! Typed experiment configurations shared by the subcommands and `run --config`.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, ensure, Context, Result};
use drspec::experiments::oscillatory::{OscillatoryTolerance, RadiusPair};
use drspec::spherical::{Backend, DEFAULT_R0};
use drspec::transform::{PropagatorSpec, SpectralShape};
use drspec::SpaceParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    /// Geometric between `start` and `stop`.
    Log,
    /// `start * 2^k` for `k = 0..count`; must stay below `stop`.
    Dyadic,
}

/// `count` points from `start` to `stop`. Written `a:b:n` or `a:b:n:log` on
/// the command line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.count > 0, "grid {self:?} is empty");
        ensure!(
            self.start.is_finite() && self.stop.is_finite(),
            "grid {self:?} has non-finite ends"
        );
        ensure!(self.stop >= self.start, "grid {self:?} runs backwards");
        match self.spacing {
            Spacing::Linear => {}
            Spacing::Log => ensure!(self.start > 0.0, "log grid {self:?} needs start > 0"),
            Spacing::Dyadic => {
                ensure!(self.start > 0.0, "dyadic grid {self:?} needs start > 0");
                let last = self.start * 2f64.powi(self.count as i32 - 1);
                ensure!(last <= self.stop * (1.0 + 1e-12), "dyadic grid {self:?} passes stop");
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        let frac = |k: usize| if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
        (0..n)
            .map(|k| match self.spacing {
                Spacing::Linear => self.start + (self.stop - self.start) * frac(k),
                Spacing::Log => self.start * (self.stop / self.start).powf(frac(k)),
                Spacing::Dyadic => self.start * 2f64.powi(k as i32),
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        ensure!(
            parts.len() == 3 || parts.len() == 4,
            "grid {s:?} is not of the form a:b:n[:spacing]"
        );
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {p:?} in grid {s:?}"))
        };
        let spacing = match parts.get(3).map(|p| p.trim()) {
            None | Some("linear") => Spacing::Linear,
            Some("log") => Spacing::Log,
            Some("dyadic") => Spacing::Dyadic,
            Some(other) => bail!("unknown spacing {other:?} in grid {s:?}"),
        };
        let grid = GridSpec {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            count: parts[2]
                .trim()
                .parse()
                .with_context(|| format!("bad count in grid {s:?}"))?,
            spacing,
        };
        grid.validate()?;
        Ok(grid)
    }
}

pub fn parse_space(s: &str) -> Result<SpaceParams> {
    serde_json::from_str(s).with_context(|| format!("invalid space {s:?}"))
}

/// `builtin:gaussian`, `builtin:moment:K`, `builtin:band:N`, inline JSON, or
/// a path to a JSON file.
pub fn parse_fhat(s: &str) -> Result<SpectralShape> {
    let shape = if let Some(rest) = s.strip_prefix("builtin:") {
        let parts: Vec<&str> = rest.split(':').collect();
        match parts.as_slice() {
            ["gaussian"] => SpectralShape::gaussian(),
            ["moment", k] => SpectralShape::GaussianMoment {
                width: 1.0,
                power: k.parse().with_context(|| format!("bad moment power in {s:?}"))?,
            },
            ["band", n] => SpectralShape::dyadic_band(n.parse().with_context(|| format!("bad band start in {s:?}"))?),
            _ => bail!("unknown builtin spectral profile {s:?}"),
        }
    } else if s.trim_start().starts_with('{') {
        serde_json::from_str(s).with_context(|| format!("invalid spectral profile {s:?}"))?
    } else {
        let text = std::fs::read_to_string(s).with_context(|| format!("cannot read spectral profile file {s:?}"))?;
        serde_json::from_str(&text).with_context(|| format!("invalid spectral profile in {s:?}"))?
    };
    shape.validate().map_err(|e| anyhow!(e))?;
    Ok(shape)
}

fn default_r0() -> f64 {
    DEFAULT_R0
}

fn default_ball() -> f64 {
    2.0
}

fn default_draws() -> usize {
    200
}

fn default_s_max() -> f64 {
    5.0
}

fn default_seed() -> u64 {
    42
}

fn default_h3_times() -> Vec<f64> {
    vec![0.1, 0.3, 0.9]
}

fn default_h3_radii() -> GridSpec {
    GridSpec {
        start: 0.0,
        stop: 3.0,
        count: 61,
        spacing: Spacing::Linear,
    }
}

fn gaussian() -> SpectralShape {
    SpectralShape::gaussian()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    pub space: SpaceParams,
    pub lambda_grid: GridSpec,
    pub s_grid: GridSpec,
    pub backend: Backend,
    #[serde(default = "default_r0")]
    pub r0: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialShape {
    /// `e^{-s^2}`.
    #[default]
    Gaussian,
    /// `s^2 e^{-s^2}`.
    Moment,
    /// `e^{-3 s^2 / 2} cos(2 s)`.
    Oscillating,
}

impl RadialShape {
    pub fn value(self, s: f64) -> f64 {
        match self {
            RadialShape::Gaussian => (-s * s).exp(),
            RadialShape::Moment => s * s * (-s * s).exp(),
            RadialShape::Oscillating => (-1.5 * s * s).exp() * (2.0 * s).cos(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundtripConfig {
    pub space: SpaceParams,
    #[serde(default)]
    pub profile: RadialShape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub space: SpaceParams,
    pub fhat: SpectralShape,
    pub t_grid: GridSpec,
    pub s_grid: GridSpec,
    #[serde(default)]
    pub propagator: PropagatorSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximalConfig {
    pub space: SpaceParams,
    pub fhat: SpectralShape,
    pub alphas: Vec<f64>,
    #[serde(rename = "R", default = "default_ball")]
    pub r: f64,
}

/// Radius/time pairs inline or in a CSV file with header `s,s_prime,t_s,t_s_prime`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairSource {
    Inline(Vec<RadiusPair>),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatoryConfig {
    pub space: SpaceParams,
    /// Explicit pairs; seeded random draws when absent.
    #[serde(default)]
    pub pairs: Option<PairSource>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_s_max")]
    pub s_max: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default)]
    pub tolerance: OscillatoryTolerance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharpnessConfig {
    pub alphas: Vec<f64>,
    #[serde(rename = "N")]
    pub n: Vec<f64>,
    #[serde(rename = "R", default = "default_ball")]
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct H3CheckConfig {
    #[serde(default = "gaussian")]
    pub fhat: SpectralShape,
    #[serde(default = "default_h3_times")]
    pub t: Vec<f64>,
    #[serde(default = "default_h3_radii")]
    pub s_grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    Phi(PhiConfig),
    Roundtrip(RoundtripConfig),
    Evolve(EvolveConfig),
    MaximalSweep(MaximalConfig),
    Oscillatory(OscillatoryConfig),
    Sharpness(SharpnessConfig),
    H3Check(H3CheckConfig),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Phi(_) => "phi",
            Experiment::Roundtrip(_) => "roundtrip",
            Experiment::Evolve(_) => "evolve",
            Experiment::MaximalSweep(_) => "maximal-sweep",
            Experiment::Oscillatory(_) => "oscillatory",
            Experiment::Sharpness(_) => "sharpness",
            Experiment::H3Check(_) => "h3-check",
        }
    }

    /// Check invariants and load referenced files, so that the hash covers
    /// their contents.
    pub fn resolve(mut self) -> Result<Self> {
        let positive = |v: &[f64], what: &str| -> Result<()> {
            ensure!(!v.is_empty(), "{what} must not be empty");
            ensure!(
                v.iter().all(|x| x.is_finite() && *x >= 0.0),
                "{what} must be finite and >= 0"
            );
            Ok(())
        };
        match &mut self {
            Experiment::Phi(c) => {
                c.lambda_grid.validate()?;
                c.s_grid.validate()?;
                ensure!(c.r0 > 0.0 && c.r0 < 2.0, "r0 = {} must lie in (0, 2)", c.r0);
            }
            Experiment::Roundtrip(_) => {}
            Experiment::Evolve(c) => {
                c.t_grid.validate()?;
                c.s_grid.validate()?;
                c.fhat.validate().map_err(|e| anyhow!(e))?;
                PropagatorSpec::new(c.propagator.a, c.propagator.shifted).map_err(|e| anyhow!(e))?;
            }
            Experiment::MaximalSweep(c) => {
                positive(&c.alphas, "alphas")?;
                ensure!(c.r > 0.0, "R must be > 0");
                c.fhat.validate().map_err(|e| anyhow!(e))?;
            }
            Experiment::Oscillatory(c) => {
                ensure!(c.tolerance.abs > 0.0 && c.tolerance.rel > 0.0, "tolerances must be > 0");
                ensure!(c.s_max > 0.0 && c.draws > 0, "need s_max > 0 and draws > 0");
                ensure!(c.r0 > 0.0 && c.r0 < 2.0, "r0 = {} must lie in (0, 2)", c.r0);
                if let Some(PairSource::File(path)) = &c.pairs {
                    c.pairs = Some(PairSource::Inline(read_pairs(path)?));
                }
            }
            Experiment::Sharpness(c) => {
                positive(&c.alphas, "alphas")?;
                positive(&c.n, "N")?;
                ensure!(c.r > 0.0, "R must be > 0");
            }
            Experiment::H3Check(c) => {
                positive(&c.t, "t")?;
                c.s_grid.validate()?;
                c.fhat.validate().map_err(|e| anyhow!(e))?;
            }
        }
        Ok(self)
    }

    /// SHA-256 of the canonical JSON form; the output path is not part of it.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configs serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

pub fn read_pairs(path: &Path) -> Result<Vec<RadiusPair>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot read pairs file {path:?}"))?;
    let pairs = reader
        .deserialize()
        .collect::<std::result::Result<Vec<RadiusPair>, _>>()
        .with_context(|| format!("invalid pairs file {path:?}"))?;
    ensure!(!pairs.is_empty(), "pairs file {path:?} is empty");
    Ok(pairs)
}

/// A `run --config` file: an experiment plus the output path.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct ConfigFile {
    pub out: PathBuf,
    #[serde(flatten)]
    pub experiment: Experiment,
}

pub fn load_config(path: &Path) -> Result<ConfigFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {path:?}"))?;
    let file: ConfigFile = serde_json::from_str(&text).with_context(|| format!("invalid config {path:?}"))?;
    Ok(ConfigFile {
        out: file.out,
        experiment: file.experiment.resolve()?,
    })
}
