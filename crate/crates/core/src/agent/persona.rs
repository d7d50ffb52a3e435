use serde::{Deserialize, Serialize};

use super::schedule::Cadence;
use crate::disinfo::Claim;
use crate::social::is_valid_handle;

pub const MIN_PERSONA_WORDS: usize = 60;
pub const MAX_PERSONA_WORDS: usize = 140;

/// A bot's fictional identity and instructions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub name: String,
    pub handle: String,
    pub description: String,
    #[serde(default)]
    pub style_rules: Vec<String>,
    pub stance: String,
    #[serde(default)]
    pub claims: Vec<u32>,
}

/// On-disk persona document: the persona plus its posting cadence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersonaFile {
    #[serde(flatten)]
    pub persona: Persona,
    pub base_interval_ms: u64,
    pub jitter_fraction: f64,
}

impl PersonaFile {
    pub fn cadence(&self) -> Cadence {
        Cadence {
            base_interval_ms: self.base_interval_ms,
            jitter_fraction: self.jitter_fraction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PersonaError {
    #[error("persona {handle}: description has {words} words, expected {MIN_PERSONA_WORDS}-{MAX_PERSONA_WORDS}")]
    DescriptionLength { handle: String, words: usize },
    #[error("persona handle {0:?} is not a valid handle")]
    InvalidHandle(String),
    #[error("persona {handle}: unknown claim {claim}")]
    UnknownClaim { handle: String, claim: u32 },
    #[error("persona {handle}: {reason}")]
    InvalidCadence { handle: String, reason: String },
}

impl Persona {
    pub fn word_count(&self) -> usize {
        self.description.split_whitespace().count()
    }

    pub fn validate(&self, registered: &[Claim]) -> Result<(), PersonaError> {
        if !is_valid_handle(&self.handle) {
            return Err(PersonaError::InvalidHandle(self.handle.clone()));
        }
        let words = self.word_count();
        if !(MIN_PERSONA_WORDS..=MAX_PERSONA_WORDS).contains(&words) {
            return Err(PersonaError::DescriptionLength {
                handle: self.handle.clone(),
                words,
            });
        }
        if let Some(&claim) = self
            .claims
            .iter()
            .find(|id| !registered.iter().any(|c| c.id == **id))
        {
            return Err(PersonaError::UnknownClaim {
                handle: self.handle.clone(),
                claim,
            });
        }
        Ok(())
    }
}

impl PersonaFile {
    pub fn validate(&self, registered: &[Claim]) -> Result<(), PersonaError> {
        self.persona.validate(registered)?;
        self.cadence()
            .validate()
            .map_err(|reason| PersonaError::InvalidCadence {
                handle: self.persona.handle.clone(),
                reason,
            })
    }
}
