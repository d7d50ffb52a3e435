//! Prompt assembly, context building, generation backends and parsing of
//! model output into actions.

mod action;
mod backend;
mod context;
mod prompt;

pub use action::{first_json_object, parse_action, ActionEnvelope, ActionKind, ParseError};
pub use backend::{
    BackendError, BackendSpec, GenerationBackend, MockBackend, ReplayBackend, MOCK_TEMPLATE_VERSION,
};
pub use context::{build_context, focus_hint};
pub use prompt::{
    assemble_system_prompt, Message, PromptBundle, Role, LOWERCASE_I_INSTRUCTION,
    OUTPUT_FORMAT_VERSION, SHORTHAND_INSTRUCTION,
};
