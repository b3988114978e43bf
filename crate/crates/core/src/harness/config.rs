//! Experiment configuration: TOML in, validated struct out.
//!
//! Every key is optional in the file; omitted keys fall back to defaults,
//! some of which depend on the chosen environment (episode count, seed
//! list, network width, RRT step). Unknown keys are rejected so typos fail
//! loudly, and every range violation names the offending key.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::agent::DqnParams;
use crate::embed::TsneParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvId {
    Cartpole,
    Highway,
}

impl fmt::Display for EnvId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvId::Cartpole => "cartpole",
            EnvId::Highway => "highway",
        })
    }
}

impl std::str::FromStr for EnvId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cartpole" => Ok(EnvId::Cartpole),
            "highway" => Ok(EnvId::Highway),
            other => Err(format!("unknown environment '{other}' (cartpole | highway)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("config syntax: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), message: message.into() }
}

/// Initial-state scheduler knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximizerConfig {
    /// RRT step length in abstraction space.
    pub rrt_dist: f64,
    /// Multiplicative epsilon decay per scheduled episode.
    pub epsilon_decay: f64,
    /// Perturbation std as a fraction of each component's bound range.
    pub sigma_fraction: f64,
}

/// Fully resolved, validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub environment: EnvId,
    /// Training episodes per run (N).
    pub episodes: usize,
    /// Episodes per coverage batch (k).
    pub batch_episodes: usize,
    /// Grid resolution G (G×G cells).
    pub grid_cells: usize,
    /// Cap on states fed to one embedding.
    pub subsample_max: usize,
    /// Train the online network every this many environment steps.
    pub train_every: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub tsne: TsneParams,
    pub dqn: DqnParams,
    pub maximizer: MaximizerConfig,
}

// ---------------------------------------------------------------------------
// Raw (file-shaped) layer: everything optional, unknown keys rejected.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    environment: Option<EnvId>,
    episodes: Option<usize>,
    batch_episodes: Option<usize>,
    grid_cells: Option<usize>,
    subsample_max: Option<usize>,
    seeds: Option<Vec<u64>>,
    out_dir: Option<String>,
    tsne: RawTsne,
    dqn: RawDqn,
    maximizer: RawMaximizer,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawTsne {
    perplexity: Option<f64>,
    iterations: Option<usize>,
    learning_rate: Option<f64>,
    early_exaggeration: Option<f64>,
    exaggeration_fraction: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDqn {
    hidden: Option<Vec<usize>>,
    learning_rate: Option<f64>,
    gamma: Option<f64>,
    batch_size: Option<usize>,
    buffer_capacity: Option<usize>,
    target_sync: Option<usize>,
    eps_start: Option<f64>,
    eps_end: Option<f64>,
    eps_decay_episodes: Option<usize>,
    grad_clip: Option<f64>,
    train_every: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawMaximizer {
    rrt_dist: Option<f64>,
    epsilon_decay: Option<f64>,
    sigma_fraction: Option<f64>,
}

impl ExperimentConfig {
    /// Defaults for an environment, before any file overrides.
    pub fn defaults(environment: EnvId) -> Self {
        let (episodes, seeds, hidden, rrt_dist) = match environment {
            EnvId::Cartpole => (600, (0..10).collect(), vec![64, 64], 0.05),
            EnvId::Highway => (300, (0..3).collect(), vec![128, 128], 5.0),
        };
        let dqn = DqnParams { hidden, ..DqnParams::default() };
        Self {
            environment,
            episodes,
            batch_episodes: 100,
            grid_cells: 50,
            subsample_max: 750,
            train_every: 2,
            seeds,
            out_dir: PathBuf::from("runs"),
            tsne: TsneParams::default(),
            dqn,
            maximizer: MaximizerConfig {
                rrt_dist,
                epsilon_decay: 0.998,
                sigma_fraction: 0.02,
            },
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::resolve(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    fn resolve(raw: RawConfig) -> Result<Self, ConfigError> {
        let environment = raw.environment.unwrap_or(EnvId::Cartpole);
        let mut cfg = Self::defaults(environment);

        if let Some(v) = raw.episodes {
            cfg.episodes = v;
        }
        if let Some(v) = raw.batch_episodes {
            cfg.batch_episodes = v;
        }
        if let Some(v) = raw.grid_cells {
            cfg.grid_cells = v;
        }
        if let Some(v) = raw.subsample_max {
            cfg.subsample_max = v;
        }
        if let Some(v) = raw.seeds {
            cfg.seeds = v;
        }
        if let Some(v) = raw.out_dir {
            cfg.out_dir = PathBuf::from(v);
        }

        if let Some(v) = raw.tsne.perplexity {
            cfg.tsne.perplexity = v;
        }
        if let Some(v) = raw.tsne.iterations {
            cfg.tsne.iterations = v;
        }
        if let Some(v) = raw.tsne.learning_rate {
            cfg.tsne.learning_rate = v;
        }
        if let Some(v) = raw.tsne.early_exaggeration {
            cfg.tsne.early_exaggeration = v;
        }
        if let Some(v) = raw.tsne.exaggeration_fraction {
            cfg.tsne.exaggeration_fraction = v;
        }

        if let Some(v) = raw.dqn.hidden {
            cfg.dqn.hidden = v;
        }
        if let Some(v) = raw.dqn.learning_rate {
            cfg.dqn.lr = v;
        }
        if let Some(v) = raw.dqn.gamma {
            cfg.dqn.gamma = v;
        }
        if let Some(v) = raw.dqn.batch_size {
            cfg.dqn.batch_size = v;
        }
        if let Some(v) = raw.dqn.buffer_capacity {
            cfg.dqn.buffer_capacity = v;
        }
        if let Some(v) = raw.dqn.target_sync {
            cfg.dqn.target_sync = v;
        }
        if let Some(v) = raw.dqn.eps_start {
            cfg.dqn.eps_start = v;
        }
        if let Some(v) = raw.dqn.eps_end {
            cfg.dqn.eps_end = v;
        }
        if let Some(v) = raw.dqn.eps_decay_episodes {
            cfg.dqn.eps_decay_episodes = v;
        }
        if let Some(v) = raw.dqn.grad_clip {
            cfg.dqn.grad_clip = v;
        }
        if let Some(v) = raw.dqn.train_every {
            cfg.train_every = v;
        }

        if let Some(v) = raw.maximizer.rrt_dist {
            cfg.maximizer.rrt_dist = v;
        }
        if let Some(v) = raw.maximizer.epsilon_decay {
            cfg.maximizer.epsilon_decay = v;
        }
        if let Some(v) = raw.maximizer.sigma_fraction {
            cfg.maximizer.sigma_fraction = v;
        }

        cfg.validate()?;
        Ok(cfg)
    }

    // Float bounds are written as negated comparisons so that NaN fails
    // validation instead of slipping through a `<=` that is false for it.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.episodes == 0 {
            return Err(invalid("episodes", "must be at least 1"));
        }
        if self.batch_episodes == 0 {
            return Err(invalid("batch_episodes", "must be at least 1"));
        }
        if self.episodes < self.batch_episodes {
            return Err(invalid(
                "episodes",
                format!(
                    "must be at least batch_episodes ({}), got {}",
                    self.batch_episodes, self.episodes
                ),
            ));
        }
        if self.grid_cells < 2 {
            return Err(invalid("grid_cells", "grid needs at least 2 cells per axis"));
        }
        if self.subsample_max < 4 {
            return Err(invalid("subsample_max", "an embedding needs at least 4 states"));
        }
        if self.train_every == 0 {
            return Err(invalid("dqn.train_every", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "need at least one seed"));
        }
        {
            let mut sorted = self.seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != self.seeds.len() {
                return Err(invalid("seeds", "seeds must be distinct"));
            }
        }

        if !(self.tsne.perplexity >= 1.0) || !self.tsne.perplexity.is_finite() {
            return Err(invalid("tsne.perplexity", "must be a finite value ≥ 1"));
        }
        if self.tsne.perplexity >= self.subsample_max as f64 {
            return Err(invalid(
                "tsne.perplexity",
                format!("must be below subsample_max ({})", self.subsample_max),
            ));
        }
        if self.tsne.iterations == 0 {
            return Err(invalid("tsne.iterations", "must be at least 1"));
        }
        if !(self.tsne.learning_rate > 0.0) {
            return Err(invalid("tsne.learning_rate", "must be positive"));
        }
        if !(self.tsne.early_exaggeration >= 1.0) {
            return Err(invalid("tsne.early_exaggeration", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.tsne.exaggeration_fraction) {
            return Err(invalid("tsne.exaggeration_fraction", "must lie in [0, 1]"));
        }

        if self.dqn.hidden.is_empty() || self.dqn.hidden.contains(&0) {
            return Err(invalid("dqn.hidden", "need at least one nonzero hidden width"));
        }
        if !(self.dqn.lr > 0.0) || !self.dqn.lr.is_finite() {
            return Err(invalid("dqn.learning_rate", "must be a finite positive value"));
        }
        if !(0.0..=1.0).contains(&self.dqn.gamma) {
            return Err(invalid("dqn.gamma", "must lie in [0, 1]"));
        }
        if self.dqn.batch_size == 0 {
            return Err(invalid("dqn.batch_size", "must be at least 1"));
        }
        if self.dqn.buffer_capacity < self.dqn.batch_size {
            return Err(invalid(
                "dqn.buffer_capacity",
                format!("must be at least batch_size ({})", self.dqn.batch_size),
            ));
        }
        if self.dqn.target_sync == 0 {
            return Err(invalid("dqn.target_sync", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.dqn.eps_start) || !(0.0..=1.0).contains(&self.dqn.eps_end) {
            return Err(invalid("dqn.eps_start", "epsilons must lie in [0, 1]"));
        }
        if self.dqn.eps_end > self.dqn.eps_start {
            return Err(invalid("dqn.eps_end", "must not exceed eps_start"));
        }
        if self.dqn.eps_decay_episodes == 0 {
            return Err(invalid("dqn.eps_decay_episodes", "must be at least 1"));
        }
        if !(self.dqn.grad_clip > 0.0) {
            return Err(invalid("dqn.grad_clip", "must be positive"));
        }

        if !(self.maximizer.rrt_dist > 0.0) || !self.maximizer.rrt_dist.is_finite() {
            return Err(invalid("maximizer.rrt_dist", "must be a finite positive value"));
        }
        if !(self.maximizer.epsilon_decay > 0.0 && self.maximizer.epsilon_decay <= 1.0) {
            return Err(invalid("maximizer.epsilon_decay", "must lie in (0, 1]"));
        }
        if !(self.maximizer.sigma_fraction >= 0.0) || !self.maximizer.sigma_fraction.is_finite() {
            return Err(invalid("maximizer.sigma_fraction", "must be a finite value ≥ 0"));
        }
        Ok(())
    }

    /// Canonical TOML form: every resolved key written explicitly, floats
    /// always with a decimal point so the text re-parses to this exact value.
    pub fn to_toml(&self) -> String {
        let mut out = String::new();
        let p = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        p(&mut out, format!("environment = \"{}\"", self.environment));
        p(&mut out, format!("episodes = {}", self.episodes));
        p(&mut out, format!("batch_episodes = {}", self.batch_episodes));
        p(&mut out, format!("grid_cells = {}", self.grid_cells));
        p(&mut out, format!("subsample_max = {}", self.subsample_max));
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        p(&mut out, format!("seeds = [{}]", seeds.join(", ")));
        p(&mut out, format!("out_dir = \"{}\"", self.out_dir.display()));
        out.push('\n');
        p(&mut out, "[tsne]".into());
        p(&mut out, format!("perplexity = {}", toml_float(self.tsne.perplexity)));
        p(&mut out, format!("iterations = {}", self.tsne.iterations));
        p(&mut out, format!("learning_rate = {}", toml_float(self.tsne.learning_rate)));
        p(&mut out, format!("early_exaggeration = {}", toml_float(self.tsne.early_exaggeration)));
        p(
            &mut out,
            format!("exaggeration_fraction = {}", toml_float(self.tsne.exaggeration_fraction)),
        );
        out.push('\n');
        p(&mut out, "[dqn]".into());
        let hidden: Vec<String> = self.dqn.hidden.iter().map(usize::to_string).collect();
        p(&mut out, format!("hidden = [{}]", hidden.join(", ")));
        p(&mut out, format!("learning_rate = {}", toml_float(self.dqn.lr)));
        p(&mut out, format!("gamma = {}", toml_float(self.dqn.gamma)));
        p(&mut out, format!("batch_size = {}", self.dqn.batch_size));
        p(&mut out, format!("buffer_capacity = {}", self.dqn.buffer_capacity));
        p(&mut out, format!("target_sync = {}", self.dqn.target_sync));
        p(&mut out, format!("eps_start = {}", toml_float(self.dqn.eps_start)));
        p(&mut out, format!("eps_end = {}", toml_float(self.dqn.eps_end)));
        p(&mut out, format!("eps_decay_episodes = {}", self.dqn.eps_decay_episodes));
        p(&mut out, format!("grad_clip = {}", toml_float(self.dqn.grad_clip)));
        p(&mut out, format!("train_every = {}", self.train_every));
        out.push('\n');
        p(&mut out, "[maximizer]".into());
        p(&mut out, format!("rrt_dist = {}", toml_float(self.maximizer.rrt_dist)));
        p(&mut out, format!("epsilon_decay = {}", toml_float(self.maximizer.epsilon_decay)));
        p(&mut out, format!("sigma_fraction = {}", toml_float(self.maximizer.sigma_fraction)));
        out
    }
}

/// Format an f64 so TOML reads it back as a float (never a bare integer).
fn toml_float(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_full_cartpole_defaults() {
        let cfg = ExperimentConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, ExperimentConfig::defaults(EnvId::Cartpole));
        assert_eq!(cfg.episodes, 600);
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.dqn.hidden, vec![64, 64]);
        assert_eq!(cfg.maximizer.rrt_dist, 0.05);
    }

    #[test]
    fn environment_switches_dependent_defaults() {
        let cfg = ExperimentConfig::from_toml_str("environment = \"highway\"").unwrap();
        assert_eq!(cfg.episodes, 300);
        assert_eq!(cfg.seeds, vec![0, 1, 2]);
        assert_eq!(cfg.dqn.hidden, vec![128, 128]);
        assert_eq!(cfg.maximizer.rrt_dist, 5.0);
    }

    #[test]
    fn explicit_keys_override_environment_defaults() {
        let cfg = ExperimentConfig::from_toml_str(
            "environment = \"highway\"\nepisodes = 42\nbatch_episodes = 21\n\
             [maximizer]\nrrt_dist = 1.5\n",
        )
        .unwrap();
        assert_eq!(cfg.episodes, 42);
        assert_eq!(cfg.batch_episodes, 21);
        assert_eq!(cfg.maximizer.rrt_dist, 1.5);
        // Untouched keys keep their environment defaults.
        assert_eq!(cfg.dqn.hidden, vec![128, 128]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::from_toml_str("grid_size = 10").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)), "{err}");
        let err = ExperimentConfig::from_toml_str("[dqn]\nlearning_rat = 0.1").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)), "{err}");
    }

    #[test]
    fn range_violations_name_the_key() {
        let err = ExperimentConfig::from_toml_str("grid_cells = 1").unwrap_err();
        assert!(err.to_string().contains("grid_cells"), "{err}");

        let err = ExperimentConfig::from_toml_str("episodes = 50").unwrap_err();
        assert!(err.to_string().contains("episodes"), "{err}");

        let err = ExperimentConfig::from_toml_str("seeds = [1, 2, 1]").unwrap_err();
        assert!(err.to_string().contains("seeds"), "{err}");

        let err = ExperimentConfig::from_toml_str("[dqn]\ngamma = 1.5").unwrap_err();
        assert!(err.to_string().contains("dqn.gamma"), "{err}");

        let err =
            ExperimentConfig::from_toml_str("[maximizer]\nepsilon_decay = 0.0").unwrap_err();
        assert!(err.to_string().contains("maximizer.epsilon_decay"), "{err}");
    }

    #[test]
    fn canonical_form_round_trips() {
        for env in ["cartpole", "highway"] {
            let cfg =
                ExperimentConfig::from_toml_str(&format!("environment = \"{env}\"")).unwrap();
            let text = cfg.to_toml();
            let reparsed = ExperimentConfig::from_toml_str(&text).unwrap();
            assert_eq!(reparsed, cfg);
            assert_eq!(reparsed.to_toml(), text);
        }
    }

    #[test]
    fn overridden_config_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(
            "episodes = 200\nseeds = [7]\n[tsne]\nperplexity = 12.5\n[dqn]\ntrain_every = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.train_every, 4);
        let reparsed = ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(reparsed, cfg);
    }
}
