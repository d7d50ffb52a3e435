use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sleeper_core::agent::PersonaFile;
use sleeper_core::disinfo::{default_claims, validate_claims, Claim};
use sleeper_core::lm::BackendSpec;
use sleeper_core::social::{is_valid_handle, AccountKind, Millis};

const BUNDLED_DEFAULT: &str = include_str!("../scenarios/default/scenario.json");

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    /// Jump straight to the next due item.
    #[default]
    Virtual,
    /// Sleep until each item is due.
    Realtime,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HumanKind {
    Human,
    Facilitator,
}

impl From<HumanKind> for AccountKind {
    fn from(k: HumanKind) -> Self {
        match k {
            HumanKind::Human => AccountKind::Human,
            HumanKind::Facilitator => AccountKind::Facilitator,
        }
    }
}

/// A scripted human action. Targets are handles; `reply` and `favourite`
/// act on that account's most recent post at the time the action runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScriptAction {
    Post { body: String },
    Reply { to: String, body: String },
    Favourite { of: String },
    Follow { handle: String },
}

impl ScriptAction {
    fn target(&self) -> Option<&str> {
        match self {
            ScriptAction::Post { .. } => None,
            ScriptAction::Reply { to, .. } => Some(to),
            ScriptAction::Favourite { of } => Some(of),
            ScriptAction::Follow { handle } => Some(handle),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptedAction {
    pub at_ms: Millis,
    pub action: ScriptAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanSpec {
    pub handle: String,
    #[serde(default)]
    pub display_name: Option<String>,
    pub kind: HumanKind,
    #[serde(default)]
    pub script: Vec<ScriptedAction>,
}

impl HumanSpec {
    pub fn display_name(&self) -> &str {
        self.display_name.as_deref().unwrap_or(&self.handle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BotSpec {
    pub persona: PersonaFile,
    pub backend: BackendSpec,
}

/// On-disk bot entry: an inline persona or a path to a persona file.
#[derive(Debug, Clone, Deserialize)]
struct BotEntry {
    #[serde(default)]
    persona: Option<PersonaFile>,
    #[serde(default)]
    persona_file: Option<PathBuf>,
    backend: BackendSpec,
}

#[derive(Debug, Clone, Deserialize)]
struct ScenarioFile {
    name: String,
    proposition_text: String,
    #[serde(default)]
    claims: Option<Vec<Claim>>,
    #[serde(default)]
    bots: Vec<BotEntry>,
    #[serde(default)]
    humans: Vec<HumanSpec>,
    duration_ms: Millis,
    seed: u64,
    #[serde(default)]
    clock_mode: ClockMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub proposition_text: String,
    pub claims: Vec<Claim>,
    pub bots: Vec<BotSpec>,
    pub humans: Vec<HumanSpec>,
    pub duration_ms: Millis,
    pub seed: u64,
    pub clock_mode: ClockMode,
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn read(path: &Path) -> Result<String, ScenarioError> {
    std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, path: &Path) -> Result<T, ScenarioError> {
    serde_json::from_str(text).map_err(|source| ScenarioError::Parse {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads and validates a scenario. Persona files and replay scripts are
/// resolved relative to the scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile = parse(&read(path)?, path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve(file, base)
}

/// The bundled five-bot, five-facilitator, twenty-minute room.
pub fn default_scenario() -> Scenario {
    let file: ScenarioFile = parse(BUNDLED_DEFAULT, Path::new("default/scenario.json"))
        .expect("bundled scenario parses");
    resolve(file, Path::new(".")).expect("bundled scenario is valid")
}

fn resolve(file: ScenarioFile, base: &Path) -> Result<Scenario, ScenarioError> {
    let mut bots = Vec::with_capacity(file.bots.len());
    for (i, entry) in file.bots.into_iter().enumerate() {
        let persona = match (entry.persona, entry.persona_file) {
            (Some(p), None) => p,
            (None, Some(rel)) => {
                let path = base.join(rel);
                parse(&read(&path)?, &path)?
            }
            _ => {
                return Err(ScenarioError::Invalid(format!(
                    "bot {i} needs exactly one of persona or persona_file"
                )))
            }
        };
        let backend = match entry.backend {
            BackendSpec::Replay { script } => BackendSpec::Replay {
                script: base.join(script),
            },
            other => other,
        };
        bots.push(BotSpec { persona, backend });
    }
    let scenario = Scenario {
        name: file.name,
        proposition_text: file.proposition_text,
        claims: file.claims.unwrap_or_else(default_claims),
        bots,
        humans: file.humans,
        duration_ms: file.duration_ms,
        seed: file.seed,
        clock_mode: file.clock_mode,
    };
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let invalid = |m: String| Err(ScenarioError::Invalid(m));
        if self.duration_ms == 0 {
            return invalid("duration_ms must be positive".into());
        }
        validate_claims(&self.claims).map_err(|e| ScenarioError::Invalid(e.to_string()))?;

        let mut handles = HashSet::new();
        let all = self
            .bots
            .iter()
            .map(|b| b.persona.persona.handle.as_str())
            .chain(self.humans.iter().map(|h| h.handle.as_str()));
        for h in all {
            if !is_valid_handle(&h.to_ascii_lowercase()) {
                return invalid(format!("invalid handle {h:?}"));
            }
            if !handles.insert(h.to_ascii_lowercase()) {
                return invalid(format!("duplicate handle {h:?}"));
            }
        }
        for b in &self.bots {
            b.persona
                .validate(&self.claims)
                .map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        }
        for h in &self.humans {
            if !h.script.windows(2).all(|w| w[0].at_ms <= w[1].at_ms) {
                return invalid(format!("script for {} is not sorted by at_ms", h.handle));
            }
            for step in &h.script {
                if let Some(t) = step.action.target() {
                    if !handles.contains(&t.to_ascii_lowercase()) {
                        return invalid(format!("script for {} targets unknown handle {t:?}", h.handle));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether every bot backend is reproducible from the seed.
    pub fn is_deterministic(&self) -> bool {
        self.bots.iter().all(|b| b.backend.is_deterministic())
    }
}
