use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::social::{char_len, MAX_POST_CHARS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Post,
    Reply,
    Favourite,
    Follow,
    None,
}

/// The structured output expected from the model each cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEnvelope {
    pub thought: String,
    pub action: ActionKind,
    pub target: Option<String>,
    pub body: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("no JSON object in model output")]
    NoObject,
    #[error("malformed JSON object: {0}")]
    Json(String),
    #[error("unknown action {0:?}")]
    UnknownAction(String),
    #[error("invalid envelope: {0}")]
    Invalid(String),
}

#[derive(Deserialize)]
struct RawEnvelope {
    #[serde(default)]
    thought: Option<String>,
    action: String,
    #[serde(default)]
    target: Option<Value>,
    #[serde(default)]
    body: Option<String>,
}

impl ActionEnvelope {
    pub fn validate(&self) -> Result<(), ParseError> {
        let invalid = |m: &str| Err(ParseError::Invalid(m.to_string()));
        let needs_body = matches!(self.action, ActionKind::Post | ActionKind::Reply);
        let needs_target = matches!(
            self.action,
            ActionKind::Reply | ActionKind::Favourite | ActionKind::Follow
        );
        if needs_body {
            match self.body.as_deref().map(char_len) {
                None | Some(0) => return invalid("post and reply need a body"),
                Some(n) if n > MAX_POST_CHARS => {
                    return Err(ParseError::Invalid(format!("body is {n} characters")))
                }
                _ => {}
            }
        }
        if needs_target && self.target.as_deref().is_none_or(str::is_empty) {
            return invalid("reply, favourite and follow need a target");
        }
        if self.action == ActionKind::None && (self.body.is_some() || self.target.is_some()) {
            return invalid("none carries no body or target");
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("envelope serializes")
    }
}

/// Returns the first balanced top-level `{...}` in `raw`, honouring JSON
/// string escapes.
pub fn first_json_object(raw: &str) -> Option<&str> {
    let start = raw.find('{')?;
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in raw[start..].char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(&raw[start..start + i + 1]);
                }
            }
            _ => {}
        }
    }
    None
}

/// Extracts and validates the action envelope from raw model text. Prose
/// around the object is ignored.
pub fn parse_action(raw: &str) -> Result<ActionEnvelope, ParseError> {
    let object = first_json_object(raw).ok_or(ParseError::NoObject)?;
    let env: RawEnvelope =
        serde_json::from_str(object).map_err(|e| ParseError::Json(e.to_string()))?;
    let action = match env.action.to_ascii_lowercase().as_str() {
        "post" => ActionKind::Post,
        "reply" => ActionKind::Reply,
        "favourite" | "favorite" | "like" => ActionKind::Favourite,
        "follow" => ActionKind::Follow,
        "none" => ActionKind::None,
        _ => return Err(ParseError::UnknownAction(env.action)),
    };
    let target = match env.target {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(Value::Number(n)) => Some(n.to_string()),
        Some(other) => return Err(ParseError::Invalid(format!("target {other} is not an id"))),
    };
    let envelope = ActionEnvelope {
        thought: env.thought.unwrap_or_default(),
        action,
        target,
        body: env.body,
    };
    envelope.validate()?;
    Ok(envelope)
}
