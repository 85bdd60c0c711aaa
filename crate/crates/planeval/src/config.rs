//! Experiment configuration, loaded from TOML and overridable from the CLI.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use planeval_core::agents::ScriptedKind;
use planeval_core::course::{Difficulty, DEFAULT_DELTA};
use planeval_core::eval::ShotMode;
use planeval_core::fitness::EpisodeConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::client::ChatEndpointConfig;
use crate::error::{Error, Result};
use crate::prompt::{hex, templates_hash, PromptMode, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Environment {
    Fitness,
    Course,
}

impl Environment {
    pub fn name(self) -> &'static str {
        match self {
            Environment::Fitness => "fitness",
            Environment::Course => "course",
        }
    }
}

impl FromStr for Environment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fitness" => Ok(Environment::Fitness),
            "course" => Ok(Environment::Course),
            other => Err(Error::Config(format!("unknown environment {other:?}"))),
        }
    }
}

impl Role {
    pub fn name(self) -> &'static str {
        match self {
            Role::Solver => "solver",
            Role::Verifier => "verifier",
            Role::HeuristicRanker => "heuristic_ranker",
        }
    }
}

/// Who answers the tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Scripted { name: ScriptedKind },
    Endpoint(ChatEndpointConfig),
}

impl AgentSpec {
    /// Name used in records and report rows.
    pub fn label(&self) -> String {
        match self {
            AgentSpec::Scripted { name } => name.name().to_string(),
            AgentSpec::Endpoint(c) => c.model_name.clone(),
        }
    }

    /// Parses `random`, `oracle`, ... into a scripted agent.
    pub fn scripted(name: &str) -> Result<Self> {
        let name = name.parse::<ScriptedKind>().map_err(Error::Config)?;
        Ok(AgentSpec::Scripted { name })
    }
}

fn default_instances() -> usize {
    100
}

fn default_candidates() -> usize {
    4
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_max_reps() -> u32 {
    5
}

fn default_parallelism() -> usize {
    1
}

/// One evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub environment: Environment,
    pub role: Role,
    /// Defaults per role and environment when absent.
    #[serde(default)]
    pub mode: Option<PromptMode>,
    /// Difficulty of generated course instances (ignored with `dataset`).
    #[serde(default)]
    pub difficulty: Option<Difficulty>,
    /// Fitness episode parameters; `episode.seed` is replaced per instance.
    #[serde(default)]
    pub episode: EpisodeConfig,
    #[serde(default = "default_instances")]
    pub n_instances: usize,
    #[serde(default = "default_candidates")]
    pub n_candidates: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub agent: AgentSpec,
    #[serde(default)]
    pub seed: u64,
    pub output_path: PathBuf,
    /// Directory of course instance files; generated on the fly when absent.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub exercises: Option<PathBuf>,
    #[serde(default)]
    pub emergencies: Option<PathBuf>,
    /// Fixed user profiles cycled across fitness episodes; sampled when absent.
    #[serde(default)]
    pub users: Option<PathBuf>,
    #[serde(default = "default_max_reps")]
    pub max_reps: u32,
    /// Report label; derived from difficulty or iteration count when absent.
    #[serde(default)]
    pub condition: Option<String>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Store wall time and timestamps (breaks byte-identical output).
    #[serde(default)]
    pub record_timing: bool,
    /// Ask once more after an unparseable reply.
    #[serde(default)]
    pub allow_reask: bool,
}

impl ExperimentConfig {
    pub fn new(environment: Environment, role: Role, agent: AgentSpec, output_path: PathBuf) -> Self {
        Self {
            environment,
            role,
            mode: None,
            difficulty: None,
            episode: EpisodeConfig::default(),
            n_instances: default_instances(),
            n_candidates: default_candidates(),
            delta: default_delta(),
            agent,
            seed: 0,
            output_path,
            dataset: None,
            exercises: None,
            emergencies: None,
            users: None,
            max_reps: default_max_reps(),
            condition: None,
            parallelism: default_parallelism(),
            record_timing: false,
            allow_reask: false,
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&crate::format::read_text(path)?, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn effective_mode(&self) -> PromptMode {
        self.mode.unwrap_or(match (self.role, self.environment) {
            (Role::Solver, _) => PromptMode::Direct,
            (Role::Verifier, Environment::Course) => PromptMode::Direct,
            _ => PromptMode::ZeroShot,
        })
    }

    /// Context mode handed to the task builders.
    pub fn shot_mode(&self) -> ShotMode {
        match self.effective_mode() {
            PromptMode::FewShot => ShotMode::FewShot,
            PromptMode::OneShot => ShotMode::OneShot,
            _ => ShotMode::ZeroShot,
        }
    }

    pub fn effective_difficulty(&self) -> Difficulty {
        self.difficulty.unwrap_or(Difficulty::Easy)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_instances == 0 {
            return bad("n_instances must be at least 1".into());
        }
        if self.parallelism == 0 {
            return bad("parallelism must be at least 1".into());
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta {} must be positive", self.delta));
        }
        let mode = self.effective_mode();
        use PromptMode::*;
        let allowed: &[PromptMode] = match (self.role, self.environment) {
            (Role::Solver, _) => &[Direct, CoT],
            (Role::Verifier, Environment::Fitness) => &[ZeroShot, FewShot],
            (Role::Verifier, Environment::Course) => &[Direct, CoT, ZeroShot],
            (Role::HeuristicRanker, Environment::Fitness) => &[ZeroShot, FewShot],
            (Role::HeuristicRanker, Environment::Course) => &[ZeroShot, OneShot],
        };
        if !allowed.contains(&mode) {
            return bad(format!(
                "mode {} is not available for the {} {}",
                mode.name(),
                self.environment.name(),
                self.role.name()
            ));
        }
        if self.role == Role::HeuristicRanker {
            let range = match self.environment {
                Environment::Course => 2..=4,
                Environment::Fitness => 2..=26,
            };
            if !range.contains(&self.n_candidates) {
                return bad(format!("n_candidates {} outside {range:?}", self.n_candidates));
            }
        }
        if self.environment == Environment::Fitness {
            self.episode.validate()?;
        }
        match &self.agent {
            AgentSpec::Endpoint(c) => c.validate().map_err(Error::Config)?,
            AgentSpec::Scripted { name } => {
                let fitness_only = matches!(name, ScriptedKind::HillClimb | ScriptedKind::Zero);
                if fitness_only && !(self.environment == Environment::Fitness && self.role == Role::Solver) {
                    return bad(format!("scripted agent {} only plays the fitness solver", name.name()));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over every setting that affects results, plus the templates.
    /// Output location, parallelism and timing are excluded.
    pub fn config_hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.output_path = PathBuf::new();
        semantic.parallelism = 1;
        semantic.record_timing = false;
        semantic.mode = Some(self.effective_mode());
        let canonical = serde_json::to_string(&semantic).expect("configuration serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        h.update([0]);
        h.update(templates_hash().as_bytes());
        hex(&h.finalize())
    }
}
