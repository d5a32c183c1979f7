use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{LambdaPolicy, Method, RateFunction};
use crate::error::{Error, Result};
use crate::game::{
    classify, load, random_ergodic_game, validate, GameClass, GameDims, NoiseSpec, PayoffModel,
    StochasticGame,
};
use crate::learners::Schedule;
use crate::regularizers::{RegularizerKind, Temperature};

/// Which system an experiment runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Sfp,
    Mfp,
    Sbrd,
    Mbrd,
}

impl AlgorithmKind {
    pub fn is_discrete(self) -> bool {
        matches!(self, Self::Sfp | Self::Mfp)
    }
}

impl fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Sfp => "sfp",
            Self::Mfp => "mfp",
            Self::Sbrd => "sbrd",
            Self::Mbrd => "mbrd",
        })
    }
}

/// Payoff structure requested from the generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassSpec {
    ZeroSum,
    IdenticalInterest,
    Team,
    General,
}

impl FromStr for ClassSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-sum" => Ok(Self::ZeroSum),
            "identical-interest" => Ok(Self::IdenticalInterest),
            "team" => Ok(Self::Team),
            "general" => Ok(Self::General),
            other => Err(Error::InvalidParameter(format!(
                "unknown class `{other}` (expected zero-sum, identical-interest, team or general)"
            ))),
        }
    }
}

impl ClassSpec {
    /// Class descriptor for the generator; team offsets default to zero.
    pub fn to_class(self, offsets: &[f64], players: usize) -> GameClass<f64> {
        match self {
            Self::ZeroSum => GameClass::ZeroSum,
            Self::IdenticalInterest => GameClass::IdenticalInterest,
            Self::Team => GameClass::Team {
                offsets: if offsets.is_empty() {
                    vec![0.0; players]
                } else {
                    offsets.to_vec()
                },
            },
            Self::General => GameClass::General,
        }
    }
}

fn default_mixing() -> f64 {
    0.3
}

/// Parameters of a seeded random ergodic game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub num_states: usize,
    pub action_counts: Vec<usize>,
    pub discount: f64,
    pub class: ClassSpec,
    #[serde(default)]
    pub offsets: Vec<f64>,
    #[serde(default = "default_mixing")]
    pub mixing: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<StochasticGame<f64>> {
        let dims = GameDims {
            num_states: self.num_states,
            action_counts: self.action_counts.clone(),
            discount: self.discount,
        };
        let class = self.class.to_class(&self.offsets, self.action_counts.len());
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        random_ergodic_game(&dims, &class, self.mixing, &mut rng)
    }
}

/// Where the game comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameSource {
    Path(PathBuf),
    Generate(GeneratorSpec),
}

/// Pass condition on the final value of one metric: at least
/// `min_pass_fraction` of the seeds must end with `metric ≤ max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    pub metric: String,
    pub max: f64,
    #[serde(default = "one")]
    pub min_pass_fraction: f64,
}

fn one() -> f64 {
    1.0
}

fn default_temperature() -> f64 {
    0.1
}

fn default_step_size() -> f64 {
    0.01
}

fn harmonic() -> RateFunction<f64> {
    RateFunction::Harmonic
}

/// Full description of an experiment, read from TOML.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub algorithm: AlgorithmKind,
    pub game: GameSource,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default)]
    pub regularizer: RegularizerKind,
    /// Reward noise for model-free learners.
    #[serde(default)]
    pub noise: NoiseSpec<f64>,
    /// Steps of a discrete run.
    pub steps: Option<u64>,
    /// Horizon of a continuous run.
    pub t_end: Option<f64>,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
    #[serde(default)]
    pub method: Method,
    /// Steps (discrete or integration) between metric rows.
    pub cadence: u64,
    #[serde(default)]
    pub master_seed: u64,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Value-rate schedule of discrete runs.
    #[serde(default)]
    pub schedule: Schedule<f64>,
    /// Value rate of continuous runs.
    #[serde(default = "harmonic")]
    pub rate: RateFunction<f64>,
    #[serde(default)]
    pub lambda: LambdaPolicy<f64>,
    #[serde(default)]
    pub initial_state: usize,
    /// Continuous runs: draw the initial profile from the seed's stream
    /// instead of starting uniform.
    #[serde(default)]
    pub random_initial_profile: bool,
    #[serde(default)]
    pub thresholds: Vec<Threshold>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, source_name: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            source_name: source_name.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn temperature(&self) -> Result<Temperature<f64>> {
        Temperature::new(self.temperature)
    }

    /// Loads or generates the game and checks it.
    pub fn resolve_game(&self) -> Result<StochasticGame<f64>> {
        let game = match &self.game {
            GameSource::Path(path) => {
                if !path.exists() {
                    return Err(Error::Config(format!(
                        "game file {} does not exist",
                        path.display()
                    )));
                }
                load(path)?
            }
            GameSource::Generate(spec) => spec.generate()?,
        };
        let report = validate(&game);
        if !report.is_valid() {
            return Err(Error::Config(format!("invalid game: {report}")));
        }
        Ok(game)
    }

    /// Number of integration steps of a continuous run.
    pub fn integration_steps(&self) -> Option<u64> {
        self.t_end.map(|t| (t / self.step_size).round() as u64)
    }

    /// Checks everything that can be checked before running; returns the
    /// game on success.
    pub fn validate(&self) -> Result<StochasticGame<f64>> {
        let bad = |m: String| Err(Error::Config(m));
        if self.seeds.is_empty() {
            return bad("seed list is empty".into());
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return bad("seed list has duplicates".into());
        }
        if self.cadence == 0 {
            return bad("cadence must be positive".into());
        }
        self.temperature()?;
        self.noise.validate()?;
        for t in &self.thresholds {
            if !(0.0..=1.0).contains(&t.min_pass_fraction) {
                return bad(format!(
                    "threshold on {} has min_pass_fraction outside [0, 1]",
                    t.metric
                ));
            }
        }
        let window = if self.algorithm.is_discrete() {
            self.schedule.validate()?;
            match self.steps {
                Some(n) if n > 0 => n,
                _ => return bad(format!("{} needs a positive `steps`", self.algorithm)),
            }
        } else {
            self.rate.validate()?;
            self.lambda.validate()?;
            if !(self.step_size > 0.0) {
                return bad("step_size must be positive".into());
            }
            match (self.t_end, self.integration_steps()) {
                (Some(t), Some(n)) if t > 0.0 && n > 0 => {
                    if ((n as f64) * self.step_size - t).abs() > 1e-9 * t.max(1.0) {
                        return bad(format!(
                            "t_end {t} is not a multiple of step_size {}",
                            self.step_size
                        ));
                    }
                    n
                }
                _ => {
                    return bad(format!(
                        "{} needs t_end of at least one step",
                        self.algorithm
                    ))
                }
            }
        };
        if window % self.cadence != 0 {
            return bad(format!(
                "cadence {} does not divide the run length {window}",
                self.cadence
            ));
        }
        let game = self.resolve_game()?;
        if self.initial_state >= game.num_states() {
            return bad(format!("initial_state {} out of range", self.initial_state));
        }
        if self.schedule.doubling().is_some()
            && self.algorithm.is_discrete()
            && !classify(&game).is_zero_sum()
        {
            return bad("the doubling schedule needs a zero-sum game".into());
        }
        Ok(game)
    }
}
