use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{AgentConfig, AgentKind};
use crate::envs::make_env;
use crate::error::{Error, Result};
use crate::shaping::ShapingConfig;

/// A full experiment description. Parsed from TOML; unknown keys are errors.
///
/// ```toml
/// env = "chain"
/// agent = "tabular"
/// total_steps = 20000
/// eval_every = 2000
/// seeds = [0, 1, 2]
/// outdir = "runs/chain"
///
/// [shaping]
/// epsilon = 0.2
///
/// [agent_config]
/// learning_rate = 0.2
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub env: String,
    pub agent: AgentKind,
    pub total_steps: u64,
    pub eval_every: u64,
    #[serde(default = "default_eval_episodes")]
    pub eval_episodes: usize,
    pub seeds: Vec<u64>,
    #[serde(default = "default_outdir")]
    pub outdir: PathBuf,
    #[serde(default)]
    pub shaping: ShapingConfig,
    #[serde(default)]
    pub agent_config: AgentConfig,
}

fn default_eval_episodes() -> usize {
    10
}

fn default_outdir() -> PathBuf {
    PathBuf::from("runs")
}

impl RunConfig {
    pub fn new(
        env: &str,
        agent: AgentKind,
        total_steps: u64,
        eval_every: u64,
        seeds: Vec<u64>,
    ) -> Self {
        Self {
            env: env.into(),
            agent,
            total_steps,
            eval_every,
            eval_episodes: default_eval_episodes(),
            seeds,
            outdir: default_outdir(),
            shaping: ShapingConfig::default(),
            agent_config: AgentConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 {
            return Err(Error::Config("total_steps must be >= 1".into()));
        }
        if self.eval_every == 0 || self.eval_every > self.total_steps {
            return Err(Error::Config(format!(
                "eval_every must lie in [1, total_steps = {}], got {}",
                self.total_steps, self.eval_every
            )));
        }
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must not be empty".into()));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        self.shaping.validate()?;
        self.agent_config.validate()?;
        let env = make_env(&self.env)?;
        let spec = env.spec();
        match (self.agent, spec.is_discrete_action()) {
            (AgentKind::Tabular, false) => Err(Error::Config(format!(
                "agent tabular needs discrete actions; {} is continuous",
                spec.name
            ))),
            (AgentKind::Td3 | AgentKind::Ddpg, true) => Err(Error::Config(format!(
                "agent {} needs continuous actions; {} is discrete",
                self.agent, spec.name
            ))),
            _ => Ok(()),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    RunConfig::parse(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::MeasureMode;

    const MINIMAL: &str = r#"
env = "chain"
agent = "tabular"
total_steps = 100
eval_every = 50
seeds = [1, 2]
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.eval_episodes, 10);
        assert_eq!(c.shaping, ShapingConfig::default());
        assert_eq!(c.agent_config, AgentConfig::default());
    }

    #[test]
    fn sections_override_fields() {
        let text = format!("{MINIMAL}\n[shaping]\npattern_len = 1\nmeasure_mode = \"qvalue\"\n");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.shaping.pattern_len, 1);
        assert_eq!(c.shaping.measure_mode, MeasureMode::QValue);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(&format!("{MINIMAL}\ntotal_step = 5\n")).is_err());
        assert!(RunConfig::parse(&format!("{MINIMAL}\n[shaping]\nepsilom = 0.1\n")).is_err());
        assert!(RunConfig::parse(&format!("{MINIMAL}\n[agent_config]\ngama = 0.9\n")).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let zero = MINIMAL.replace("total_steps = 100", "total_steps = 0");
        assert!(matches!(RunConfig::parse(&zero), Err(Error::Config(_))));
        assert!(RunConfig::parse(&MINIMAL.replace("[1, 2]", "[]")).is_err());
        assert!(RunConfig::parse(&MINIMAL.replace("[1, 2]", "[1, 1]")).is_err());
        assert!(RunConfig::parse(&MINIMAL.replace("\"chain\"", "\"walker\"")).is_err());
        assert!(RunConfig::parse(&MINIMAL.replace("\"tabular\"", "\"td3\"")).is_err());
        assert!(RunConfig::parse(&MINIMAL.replace("eval_every = 50", "eval_every = 500")).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(RunConfig::parse(&c.to_toml().unwrap()).unwrap(), c);
    }
}
