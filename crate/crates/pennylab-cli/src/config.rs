//! The key = value experiment grammar: parsing, validation with defaults,
//! canonical serialization, and the config hash.
//!
//! A config document is a sequence of `key = value` lines; blank lines and
//! `#` comments are skipped, later assignments win, unknown keys are errors.
//! The same assignments can arrive as `--set key=value` flags, which are
//! applied after the file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pennylab::dynamics::{FeedbackMode, TelepathicUpdate};
use pennylab::format_float17;
use pennylab::games::{Game2x2, GameError, Player};
use pennylab::strategies::{SpecError, StrategySpec};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Environment variable supplying the default `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "PENNYLAB_OUT";

const KEYS: &[&str] = &[
    "game",
    "strategy1",
    "strategy2",
    "mode",
    "steps",
    "n_runs",
    "master_seed",
    "checkpoint_base",
    "checkpoint_ratio",
    "tail_window",
    "telepathic_start",
    "telepathic_update",
    "delta",
    "gamma",
    "window_coeff",
    "alpha_coeff",
    "output_dir",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {key:?}; known keys: {}", KEYS.join(", "))]
    UnknownKey { key: String },
    #[error("key {key:?}: value {value:?} does not parse; expected {expected}")]
    BadValue { key: &'static str, value: String, expected: &'static str },
    #[error("key {key:?}")]
    Strategy {
        key: &'static str,
        #[source]
        source: SpecError,
    },
    #[error("key \"game\"")]
    Game {
        #[source]
        source: GameError,
    },
    #[error("key \"game\": cannot read {path}: {reason}")]
    GameFile { path: String, reason: String },
}

/// How the game arrived in the config; round-trips through [`Self::text`].
#[derive(Clone, Debug, PartialEq)]
pub enum GameDescriptor {
    MatchingPennies,
    Family { alpha: f64, beta: f64 },
    ZsEquivalent { alpha: f64, beta: f64 },
    /// Explicit payoff matrices, row-major `g` then `h`. JSON game files
    /// normalize to this form so the config hash tracks the payoffs rather
    /// than the file path.
    Custom { g: [[f64; 2]; 2], h: [[f64; 2]; 2] },
}

impl GameDescriptor {
    pub fn parse(value: &str) -> Result<Self, ConfigError> {
        let bad = |expected| ConfigError::BadValue { key: "game", value: value.into(), expected };
        if value == "matching-pennies" {
            return Ok(Self::MatchingPennies);
        }
        if let Some(args) = value.strip_prefix("family:") {
            let (alpha, beta) = parse_pair(args)
                .ok_or_else(|| bad("family:alpha,beta with positive reals"))?;
            return Ok(Self::Family { alpha, beta });
        }
        if let Some(args) = value.strip_prefix("zs-equivalent:") {
            let (alpha, beta) = parse_pair(args)
                .ok_or_else(|| bad("zs-equivalent:alpha,beta with positive reals"))?;
            return Ok(Self::ZsEquivalent { alpha, beta });
        }
        if let Some(args) = value.strip_prefix("custom:") {
            let nums: Vec<f64> = args.split(',').map(|s| s.trim().parse().ok()).collect::<Option<_>>()
                .ok_or_else(|| bad("custom:g00,g01,g10,g11,h00,h01,h10,h11"))?;
            if nums.len() != 8 {
                return Err(bad("custom:g00,g01,g10,g11,h00,h01,h10,h11"));
            }
            return Ok(Self::Custom {
                g: [[nums[0], nums[1]], [nums[2], nums[3]]],
                h: [[nums[4], nums[5]], [nums[6], nums[7]]],
            });
        }
        if value.ends_with(".json") {
            return Self::from_json_file(Path::new(value));
        }
        Err(bad(
            "matching-pennies | family:alpha,beta | zs-equivalent:alpha,beta | \
             custom:8 payoffs | path to a {\"g\": .., \"h\": ..} JSON file",
        ))
    }

    fn from_json_file(path: &Path) -> Result<Self, ConfigError> {
        let err = |reason: String| ConfigError::GameFile {
            path: path.display().to_string(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let game: Game2x2<f64> =
            serde_json::from_str(&text).map_err(|e| err(e.to_string()))?;
        Ok(Self::Custom { g: game.g, h: game.h })
    }

    pub fn build(&self) -> Result<Game2x2<f64>, ConfigError> {
        let game = match *self {
            Self::MatchingPennies => Ok(pennylab::games::make_matching_pennies()),
            Self::Family { alpha, beta } => {
                pennylab::games::make_competitive_family(alpha, beta)
            }
            Self::ZsEquivalent { alpha, beta } => {
                pennylab::games::make_zero_sum_equivalent(alpha, beta)
            }
            Self::Custom { g, h } => Game2x2::new(g, h),
        };
        game.map_err(|source| ConfigError::Game { source })
    }

    pub fn text(&self) -> String {
        match *self {
            Self::MatchingPennies => "matching-pennies".into(),
            Self::Family { alpha, beta } => {
                format!("family:{},{}", format_float17(alpha), format_float17(beta))
            }
            Self::ZsEquivalent { alpha, beta } => {
                format!("zs-equivalent:{},{}", format_float17(alpha), format_float17(beta))
            }
            Self::Custom { g, h } => format!(
                "custom:{}",
                g.iter()
                    .chain(h.iter())
                    .flatten()
                    .map(|&x| format_float17(x))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
        }
    }
}

fn parse_pair(args: &str) -> Option<(f64, f64)> {
    let (a, b) = args.split_once(',')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

/// A fully validated experiment description. Every field has a default, so
/// the empty document is a valid config.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub game: GameDescriptor,
    pub strategy1: StrategySpec,
    pub strategy2: StrategySpec,
    pub mode: FeedbackMode,
    pub steps: u64,
    pub n_runs: u64,
    pub master_seed: u64,
    pub checkpoint_base: f64,
    pub checkpoint_ratio: f64,
    pub tail_window: usize,
    pub telepathic_start: Option<(f64, f64)>,
    pub telepathic_update: TelepathicUpdate,
    /// Oscillation half-width |P_t - p*| >= delta.
    pub delta: f64,
    /// Window halfwidth in sqrt(t) units for pmf and count checks.
    pub gamma: f64,
    /// Window coefficient for the change-of-measure and local-normal
    /// certificates.
    pub window_coeff: f64,
    /// Sensitivity scan cap: s grid runs up to alpha_coeff * sqrt(t).
    pub alpha_coeff: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let output_dir = std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("pennylab-out"));
        Self {
            game: GameDescriptor::MatchingPennies,
            strategy1: StrategySpec::hedge(0.5).unwrap().with_role(Player::One),
            strategy2: StrategySpec::hedge(0.5).unwrap().with_role(Player::Two),
            mode: FeedbackMode::Realization,
            steps: 10_000,
            n_runs: 100,
            master_seed: 0,
            checkpoint_base: 10.0,
            checkpoint_ratio: 1.25,
            tail_window: 0,
            telepathic_start: None,
            telepathic_update: TelepathicUpdate::MeanBased,
            delta: 0.1,
            gamma: 1.0,
            window_coeff: 1.0,
            alpha_coeff: 2.0,
            output_dir,
        }
    }
}

impl ExperimentConfig {
    /// Parses a document, then applies `overrides` (from `--set` flags) on
    /// top. Defaults fill everything not assigned.
    pub fn from_sources(document: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut assignments: BTreeMap<&'static str, String> = BTreeMap::new();
        for (idx, raw) in document.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            assignments.insert(known_key(key.trim())?, value.trim().to_string());
        }
        for item in overrides {
            let (key, value) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: 0,
                text: item.clone(),
            })?;
            assignments.insert(known_key(key.trim())?, value.trim().to_string());
        }

        let mut config = Self::default();
        for (key, value) in &assignments {
            config.apply(key, value)?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_sources(&text, overrides)
    }

    fn apply(&mut self, key: &'static str, value: &str) -> Result<(), ConfigError> {
        let bad = |expected: &'static str| ConfigError::BadValue {
            key,
            value: value.to_string(),
            expected,
        };
        match key {
            "game" => self.game = GameDescriptor::parse(value)?,
            "strategy1" => {
                self.strategy1 = StrategySpec::parse(value, Player::One)
                    .map_err(|source| ConfigError::Strategy { key, source })?;
            }
            "strategy2" => {
                self.strategy2 = StrategySpec::parse(value, Player::Two)
                    .map_err(|source| ConfigError::Strategy { key, source })?;
            }
            "mode" => {
                self.mode = match value {
                    "realization" => FeedbackMode::Realization,
                    "telepathic" => FeedbackMode::Telepathic,
                    _ => return Err(bad("realization | telepathic")),
                };
            }
            "steps" => {
                self.steps = value.parse().ok().filter(|&s| s >= 1).ok_or(bad("integer >= 1"))?;
            }
            "n_runs" => self.n_runs = value.parse().map_err(|_| bad("non-negative integer"))?,
            "master_seed" => {
                self.master_seed = value.parse().map_err(|_| bad("unsigned 64-bit integer"))?;
            }
            "checkpoint_base" => {
                self.checkpoint_base =
                    value.parse().ok().filter(|&b: &f64| b >= 1.0).ok_or(bad("real >= 1"))?;
            }
            "checkpoint_ratio" => {
                self.checkpoint_ratio =
                    value.parse().ok().filter(|&r: &f64| r > 1.0).ok_or(bad("real > 1"))?;
            }
            "tail_window" => {
                self.tail_window = value.parse().map_err(|_| bad("non-negative integer"))?;
            }
            "telepathic_start" => {
                self.telepathic_start = if value == "none" {
                    None
                } else {
                    let (p, q) = parse_pair(value)
                        .filter(|&(p, q)| {
                            p > 0.0 && p < 1.0 && q > 0.0 && q < 1.0
                        })
                        .ok_or(bad("p,q with both in (0, 1), or none"))?;
                    Some((p, q))
                };
            }
            "telepathic_update" => {
                self.telepathic_update = match value {
                    "mean-based" => TelepathicUpdate::MeanBased,
                    "incremental" => TelepathicUpdate::Incremental,
                    _ => return Err(bad("mean-based | incremental")),
                };
            }
            "delta" => {
                self.delta =
                    value.parse().ok().filter(|d: &f64| d.is_finite()).ok_or(bad("real"))?;
            }
            "gamma" => {
                self.gamma = value
                    .parse()
                    .ok()
                    .filter(|g: &f64| g.is_finite() && *g > 0.0)
                    .ok_or(bad("positive real"))?;
            }
            "window_coeff" => {
                self.window_coeff = value
                    .parse()
                    .ok()
                    .filter(|w: &f64| w.is_finite() && *w > 0.0)
                    .ok_or(bad("positive real"))?;
            }
            "alpha_coeff" => {
                self.alpha_coeff = value
                    .parse()
                    .ok()
                    .filter(|a: &f64| a.is_finite() && *a > 0.0)
                    .ok_or(bad("positive real"))?;
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            _ => unreachable!("key validated by known_key"),
        }
        Ok(())
    }

    /// Canonical document: every key, fixed order, floats at 17 significant
    /// digits. Parsing it back yields an equal config.
    pub fn canonical(&self) -> String {
        let mut out = self.semantic_text();
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        out
    }

    /// The hashed portion of the canonical form. `output_dir` is excluded:
    /// it relocates outputs without changing any computed number.
    fn semantic_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("game", self.game.text());
        line("strategy1", self.strategy1.descriptor());
        line("strategy2", self.strategy2.descriptor());
        line(
            "mode",
            match self.mode {
                FeedbackMode::Realization => "realization".into(),
                FeedbackMode::Telepathic => "telepathic".into(),
            },
        );
        line("steps", self.steps.to_string());
        line("n_runs", self.n_runs.to_string());
        line("master_seed", self.master_seed.to_string());
        line("checkpoint_base", format_float17(self.checkpoint_base));
        line("checkpoint_ratio", format_float17(self.checkpoint_ratio));
        line("tail_window", self.tail_window.to_string());
        if let Some((p, q)) = self.telepathic_start {
            line(
                "telepathic_start",
                format!("{},{}", format_float17(p), format_float17(q)),
            );
        }
        line(
            "telepathic_update",
            match self.telepathic_update {
                TelepathicUpdate::MeanBased => "mean-based".into(),
                TelepathicUpdate::Incremental => "incremental".into(),
            },
        );
        line("delta", format_float17(self.delta));
        line("gamma", format_float17(self.gamma));
        line("window_coeff", format_float17(self.window_coeff));
        line("alpha_coeff", format_float17(self.alpha_coeff));
        out
    }

    /// SHA-256 of the semantic canonical form, hex-encoded. Stable across
    /// platforms because the canonical text is byte-identical everywhere.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.semantic_text().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

fn known_key(key: &str) -> Result<&'static str, ConfigError> {
    KEYS.iter()
        .find(|&&k| k == key)
        .copied()
        .ok_or_else(|| ConfigError::UnknownKey { key: key.to_string() })
}
