//! Scenario files: one JSON document per run or sweep.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use jeffreys_core::sceptic::{
    Level1Sceptic, Level2Config, Level2Sceptic, Level3Config, Level3Lift, SaturatingShape,
    DEFAULT_K_MAX, DEFAULT_SHAPE_SCALE,
};
use jeffreys_core::{
    Check, Game, GameKind, MixabilityParams, Nature, OutcomeGrid, Prediction, Predictor,
    ScepticStrategy, Thresholds,
};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub game: GameConfig,
    pub predictor1: PredictorConfig,
    pub predictor2: PredictorConfig,
    pub sceptic: ScepticConfig,
    pub nature: NatureConfig,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub thresholds: ThresholdConfig,
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub kind: String,
    /// Number of outcomes, log-loss only.
    #[serde(default)]
    pub outcomes: Option<usize>,
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub grid_size: Option<usize>,
    #[serde(default)]
    pub outcome_grid: Option<usize>,
}

impl GameConfig {
    pub fn named(kind: &str) -> Self {
        GameConfig {
            kind: kind.to_string(),
            outcomes: None,
            window: None,
            grid_size: None,
            outcome_grid: None,
        }
    }

    pub fn kind(&self) -> anyhow::Result<GameKind> {
        Ok(match self.kind.as_str() {
            "absolute" => GameKind::AbsoluteLoss,
            "square" => GameKind::SquareLoss,
            "bounded_square" => GameKind::BoundedSquareLoss,
            "bounded_absolute" => GameKind::BoundedAbsoluteLoss,
            "quartic" => GameKind::QuarticLoss,
            "log_loss" => GameKind::LogLoss {
                outcomes: self.outcomes.unwrap_or(2),
            },
            other => bail!("unknown game kind `{other}`"),
        })
    }

    pub fn build(&self) -> anyhow::Result<Game> {
        let kind = self.kind()?;
        if self.outcomes.is_some() && !kind.is_log_loss() {
            bail!("`outcomes` only applies to log-loss games");
        }
        let mut b = Game::builder(kind);
        if let Some((lo, hi)) = self.window {
            b = b.window(lo, hi);
        }
        if let Some(n) = self.grid_size {
            b = b.grid_size(n);
        }
        if let Some(n) = self.outcome_grid {
            b = b.outcome_grid(OutcomeGrid::Uniform(n));
        }
        b.build().context("invalid game")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PredictorConfig {
    /// A scalar, or the probability of outcome 1 in binary log-loss.
    Constant {
        #[serde(default)]
        value: Option<f64>,
        #[serde(default)]
        distribution: Option<Vec<f64>>,
    },
    RunningMean {
        #[serde(default = "half")]
        initial: f64,
    },
    NoisyTarget {
        target: f64,
        sigma0: f64,
        #[serde(default = "one")]
        power: f64,
    },
    Drift {
        start: f64,
        delta: f64,
    },
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

fn default_epsilon() -> f64 {
    1e-3
}

impl PredictorConfig {
    pub fn build(&self, game: &Game) -> anyhow::Result<Predictor> {
        let p = match self {
            PredictorConfig::Constant {
                value,
                distribution,
            } => match (value, distribution) {
                (Some(x), None) => {
                    Predictor::Constant(jeffreys_core::strategies::scalar_prediction(game, *x))
                }
                (None, Some(d)) => Predictor::Constant(Prediction::Distribution(d.clone())),
                _ => bail!("constant predictor needs exactly one of `value` or `distribution`"),
            },
            PredictorConfig::RunningMean { initial } => Predictor::running_mean(*initial),
            PredictorConfig::NoisyTarget {
                target,
                sigma0,
                power,
            } => Predictor::noisy_target(*target, *sigma0, *power)?,
            PredictorConfig::Drift { start, delta } => Predictor::Drift {
                start: *start,
                delta: *delta,
            },
        };
        if let PredictorConfig::Constant { value: Some(x), .. } = self {
            if !game.kind().is_log_loss() {
                game.validate_prediction(&Prediction::Scalar(*x))
                    .context("constant predictor")?;
            }
        }
        p.check(game)?;
        Ok(p)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScepticConfig {
    Level1 {
        #[serde(default = "default_scale")]
        scale: f64,
    },
    Level2 {
        #[serde(default)]
        alpha: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    Level3 {
        #[serde(default = "default_k_max")]
        k_max: u32,
        #[serde(default)]
        eta: Option<f64>,
        #[serde(default)]
        c: Option<f64>,
        base: Box<ScepticConfig>,
    },
}

fn default_scale() -> f64 {
    DEFAULT_SHAPE_SCALE
}

fn default_k_max() -> u32 {
    DEFAULT_K_MAX
}

impl ScepticConfig {
    pub fn build(&self, game: &Game) -> anyhow::Result<Box<dyn ScepticStrategy>> {
        Ok(match self {
            ScepticConfig::Level1 { scale } => {
                if game.kind().is_log_loss() {
                    bail!("the level-1 Sceptic needs finite losses; use a scalar game");
                }
                Box::new(Level1Sceptic::new(game, SaturatingShape::new(*scale)?))
            }
            ScepticConfig::Level2 { alpha, epsilon } => Box::new(Level2Sceptic::new(
                game,
                Level2Config::new(*alpha, *epsilon)?,
            )),
            ScepticConfig::Level3 {
                k_max,
                eta,
                c,
                base,
            } => {
                if matches!(**base, ScepticConfig::Level3 { .. }) {
                    bail!("level-3 lifts do not nest");
                }
                let params = match (eta, c) {
                    (Some(eta), Some(c)) => MixabilityParams::new(*eta, *c)?,
                    (None, None) => match MixabilityParams::for_game(game.kind()) {
                        Some(p) => p,
                        None => {
                            return Err(jeffreys_core::Error::MixabilityViolation {
                                excess: f64::INFINITY,
                            })
                            .context(format!(
                                "the {} game has no mixability constants; the level-3 lift needs a perfectly mixable game",
                                game.kind()
                            ))
                        }
                    },
                    _ => bail!("give both `eta` and `c` or neither"),
                };
                let base = base.build(game)?;
                Box::new(
                    Level3Lift::new(game, base, params, Level3Config::new(*k_max)?)
                        .context("the level-3 lift needs a perfectly mixable game")?,
                )
            }
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NatureConfig {
    IidBernoulli {
        p: f64,
    },
    IidUniform {
        lo: f64,
        hi: f64,
    },
    IidCategorical {
        probs: Vec<f64>,
    },
    Constant {
        omega: f64,
    },
    /// Outcomes inline, or one per line in `file` (relative to the config).
    Replay {
        #[serde(default)]
        outcomes: Option<Vec<f64>>,
        #[serde(default)]
        file: Option<PathBuf>,
    },
    AdversarialGreedy {
        #[serde(default)]
        candidates: Option<Vec<f64>>,
    },
}

impl NatureConfig {
    pub fn build(&self, game: &Game, base_dir: &Path) -> anyhow::Result<Nature> {
        let n = match self {
            NatureConfig::IidBernoulli { p } => Nature::bernoulli(*p)?,
            NatureConfig::IidUniform { lo, hi } => Nature::uniform(*lo, *hi)?,
            NatureConfig::IidCategorical { probs } => Nature::categorical(probs.clone())?,
            NatureConfig::Constant { omega } => Nature::constant(*omega),
            NatureConfig::Replay { outcomes, file } => match (outcomes, file) {
                (Some(o), None) => Nature::replay(o.clone()),
                (None, Some(f)) => {
                    let path = base_dir.join(f);
                    let text = std::fs::read_to_string(&path)
                        .with_context(|| format!("reading replay file {}", path.display()))?;
                    let values = text
                        .split(|c: char| c.is_whitespace() || c == ',')
                        .filter(|s| !s.is_empty())
                        .map(|s| s.parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .with_context(|| format!("parsing replay file {}", path.display()))?;
                    Nature::replay(values)
                }
                _ => bail!("replay needs exactly one of `outcomes` or `file`"),
            },
            NatureConfig::AdversarialGreedy { candidates } => {
                Nature::adversarial_greedy(candidates.clone())?
            }
        };
        n.check(game)
            .context("nature produces outcomes outside the game")?;
        Ok(n)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ThresholdConfig {
    #[serde(default = "gap_sum_max")]
    pub gap_sum_max: f64,
    #[serde(default = "loss_gap_min")]
    pub loss_gap_min: f64,
}

fn gap_sum_max() -> f64 {
    Thresholds::default().gap_sum_max
}

fn loss_gap_min() -> f64 {
    Thresholds::default().loss_gap_min
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        ThresholdConfig {
            gap_sum_max: t.gap_sum_max,
            loss_gap_min: t.loss_gap_min,
        }
    }
}

impl From<ThresholdConfig> for Thresholds {
    fn from(t: ThresholdConfig) -> Self {
        Thresholds {
            gap_sum_max: t.gap_sum_max,
            loss_gap_min: t.loss_gap_min,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub trace_csv: Option<PathBuf>,
    #[serde(default)]
    pub report_json: Option<PathBuf>,
    #[serde(default)]
    pub aggregate_json: Option<PathBuf>,
}

/// A config whose strategies have all been built once against its game.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: RunConfig,
    pub game: Game,
    pub checks: Vec<Check>,
    pub base_dir: PathBuf,
}

/// Strategies for a single run.
pub struct Players {
    pub predictor1: Predictor,
    pub predictor2: Predictor,
    pub sceptic: Box<dyn ScepticStrategy>,
    pub nature: Nature,
}

impl Scenario {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(config, base_dir)
    }

    /// Validates everything a run needs, so that failures surface before any
    /// run starts.
    pub fn new(config: RunConfig, base_dir: PathBuf) -> anyhow::Result<Self> {
        if config.format_version != FORMAT_VERSION {
            bail!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                config.format_version
            );
        }
        if config.horizon == 0 {
            bail!("horizon must be at least 1");
        }
        let game = config.game.build()?;
        let checks = config
            .checks
            .iter()
            .map(|c| {
                c.parse::<Check>()
                    .map_err(|_| anyhow::anyhow!("unknown check `{c}`"))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        let t = config.thresholds;
        if !(t.gap_sum_max >= 0.0 && t.loss_gap_min.is_finite()) {
            bail!("thresholds must be finite and gap_sum_max non-negative");
        }
        let scenario = Scenario {
            config,
            game,
            checks,
            base_dir,
        };
        scenario.players()?;
        Ok(scenario)
    }

    pub fn players(&self) -> anyhow::Result<Players> {
        let c = &self.config;
        Ok(Players {
            predictor1: c.predictor1.build(&self.game).context("predictor1")?,
            predictor2: c.predictor2.build(&self.game).context("predictor2")?,
            sceptic: c.sceptic.build(&self.game).context("sceptic")?,
            nature: c
                .nature
                .build(&self.game, &self.base_dir)
                .context("nature")?,
        })
    }

    /// Output paths in the config are relative to the config file.
    pub fn resolve(&self, path: &Option<PathBuf>) -> Option<PathBuf> {
        path.as_ref().map(|p| self.base_dir.join(p))
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.config
            .seeds
            .clone()
            .unwrap_or_else(|| vec![self.config.seed])
    }
}
