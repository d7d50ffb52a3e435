//! Bot runtime: personas, cadence, memory, focus selection and the
//! inspect/think/act cycle. Bots reach the network only through [`ApiClient`].

mod client;
pub(crate) mod focus;
pub(crate) mod memory;
mod persona;
mod runtime;
mod schedule;

pub use client::{decode, ApiClient, ApiFailure, LocalClient, SharedServer};
pub use focus::{select_focus, FocusItem, FocusKind};
pub use memory::{AgentMemory, WindowEntry, DEFAULT_WINDOW_CAPACITY};
pub use persona::{Persona, PersonaError, PersonaFile, MAX_PERSONA_WORDS, MIN_PERSONA_WORDS};
pub use runtime::{
    action_addresses, Action, Agent, AgentConfig, AgentState, PerformedAction, Phase, StepOutcome,
    ThoughtRecord, ALLOWED_TRANSITIONS,
};
pub use schedule::{schedule_delay, Cadence};

/// Chronological key with numeric ids ordered numerically.
pub(crate) fn order_key(created_at: u64, id: &str) -> (u64, u64, String) {
    (created_at, id.parse().unwrap_or(u64::MAX), id.to_string())
}
