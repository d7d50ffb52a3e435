use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::Mutex;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::action::{ActionEnvelope, ActionKind};
use super::prompt::{PromptBundle, Role};
use crate::disinfo::Claim;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BackendError {
    #[error("replay script exhausted")]
    Exhausted,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("backend returned {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected backend response: {0}")]
    Response(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
}

#[async_trait]
pub trait GenerationBackend: Send + Sync {
    async fn generate(&self, bundle: &PromptBundle) -> Result<String, BackendError>;
}

fn default_temperature() -> f64 {
    1.0
}

fn default_timeout_ms() -> u64 {
    30_000
}

/// Backend configuration for one bot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendSpec {
    Mock {
        seed: u64,
    },
    /// Line-delimited JSON file, one raw response string per line.
    Replay {
        script: PathBuf,
    },
    /// Any chat-completion shaped HTTP endpoint.
    Remote {
        endpoint: String,
        model: String,
        api_key_env: String,
        #[serde(default = "default_temperature")]
        temperature: f64,
        #[serde(default = "default_timeout_ms")]
        timeout_ms: u64,
    },
}

impl BackendSpec {
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, BackendSpec::Remote { .. })
    }
}

/// Pops canned responses in order; fails once the script runs out.
#[derive(Debug, Default)]
pub struct ReplayBackend {
    responses: Mutex<VecDeque<String>>,
}

impl ReplayBackend {
    pub fn new(responses: impl IntoIterator<Item = String>) -> Self {
        ReplayBackend {
            responses: Mutex::new(responses.into_iter().collect()),
        }
    }

    pub fn from_jsonl(script: &str) -> Result<Self, BackendError> {
        let mut responses = Vec::new();
        for (i, line) in script.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let text: String = serde_json::from_str(line)
                .map_err(|e| BackendError::Config(format!("replay line {}: {e}", i + 1)))?;
            responses.push(text);
        }
        Ok(Self::new(responses))
    }

    pub fn remaining(&self) -> usize {
        self.responses.lock().map(|r| r.len()).unwrap_or(0)
    }
}

#[async_trait]
impl GenerationBackend for ReplayBackend {
    async fn generate(&self, _bundle: &PromptBundle) -> Result<String, BackendError> {
        self.responses
            .lock()
            .map_err(|_| BackendError::Config("replay cursor poisoned".into()))?
            .pop_front()
            .ok_or(BackendError::Exhausted)
    }
}

pub const MOCK_TEMPLATE_VERSION: &str = "mock-v1";

/// Fixed phrasings per shipped claim id. Each one carries its claim's keywords.
const MOCK_TEMPLATES: [(u32, [&str; 3]); 5] = [
    (1, [
        "honestly prop 86 would make platforms hand minors' data straight to the government. that's not safety, that's surveillance",
        "i keep coming back to this: under prop 86 social media companies have to share minors' data with the government. who signed up for that",
        "ngl the part where kids' data gets passed to the government is what gets me about prop 86",
    ]),
    (2, [
        "prop 86 means school admins could see students' social media bc school ids get used for the age check. hard pass",
        "so if your school id is how you verify age, the school admin gets a window into your accounts?? prop 86 is wild",
        "school admins peeking at students' feeds because of prop 86 age checks... no thanks",
    ]),
    (3, [
        "do we really want a national database of everyone's government id just to post memes? that's where prop 86 goes",
        "prop 86 = upload your id to every app = one giant database of all social media users. privacy nightmare",
        "every user submitting government id means a permanent database somewhere. prop 86 is a breach waiting to happen",
    ]),
    (4, [
        "prop 86 basically ends being anonymous online. some ppl need that to stay safe",
        "tbh anonymity is the whole reason a lot of us can be honest here, and prop 86 kills it",
        "if your account is tied to your real id under prop 86 you can't post anonymously anymore. think about who that hurts",
    ]),
    (5, [
        "prop 86 would literally keep kids under 13 off the internet. like all of it. that's not the answer",
        "my little cousin uses the internet for homework and prop 86 would block anyone under 13 from it entirely",
        "cutting children off from the internet isn't protecting them, it's isolating them. prop 86 goes way too far",
    ]),
];

const MOCK_FALLBACK: &str = "still reading through this thread, lots of opinions on prop 86 today";

/// Deterministic stand-in for a language model.
///
/// The output depends only on the seed and the bundle. It cycles through the
/// bot's claims (by the number of its own messages in context), addresses
/// the author of the latest message from someone else, and always answers a
/// focused post with a reply.
#[derive(Debug, Clone)]
pub struct MockBackend {
    seed: u64,
    claims: Vec<Claim>,
}

impl MockBackend {
    /// `claims` are the bot's assigned claims; order is normalized to id order.
    pub fn new(seed: u64, mut claims: Vec<Claim>) -> Self {
        claims.sort_by_key(|c| c.id);
        claims.dedup_by_key(|c| c.id);
        MockBackend { seed, claims }
    }

    fn digest(&self, bundle: &PromptBundle) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(MOCK_TEMPLATE_VERSION.as_bytes());
        h.update(self.seed.to_le_bytes());
        h.update(serde_json::to_vec(bundle).expect("bundle serializes"));
        h.finalize().into()
    }

    fn talking_point(&self, turn: usize, variant: u8) -> (Option<u32>, String) {
        if self.claims.is_empty() {
            return (None, MOCK_FALLBACK.to_string());
        }
        let claim = &self.claims[turn % self.claims.len()];
        let text = MOCK_TEMPLATES
            .iter()
            .find(|(id, _)| *id == claim.id)
            .map(|(_, variants)| variants[variant as usize % variants.len()].to_string())
            .unwrap_or_else(|| claim.canonical_text.to_lowercase());
        (Some(claim.id), text)
    }

    pub fn respond(&self, bundle: &PromptBundle) -> ActionEnvelope {
        let d = self.digest(bundle);
        let own_turns = bundle.messages.iter().filter(|m| m.role == Role::Agent).count();
        let (claim, point) = self.talking_point(own_turns, d[0]);
        let point_label = claim.map_or_else(|| "the thread".to_string(), |id| format!("point {id}"));
        let last_other = bundle.messages.iter().rev().find(|m| m.role == Role::Other);
        let addressed = |handle: &str| format!("@{handle} {point}");

        if bundle.focus_hint.is_some() {
            // the focused post, when there is one, is the final message
            return match bundle.messages.last() {
                Some(m) if m.role == Role::Other && m.post_id.is_some() => ActionEnvelope {
                    thought: format!("@{} is talking to me. answer them and tie it to {point_label}.", m.author_handle),
                    action: ActionKind::Reply,
                    target: m.post_id.clone(),
                    body: Some(addressed(&m.author_handle)),
                },
                _ => ActionEnvelope {
                    thought: "nothing to say back to that.".into(),
                    action: ActionKind::None,
                    target: None,
                    body: None,
                },
            };
        }

        match (last_other, d[1] % 10) {
            (Some(m), 0) if m.post_id.is_some() => ActionEnvelope {
                thought: format!("@{} has a point worth a like, keeps me looking friendly.", m.author_handle),
                action: ActionKind::Favourite,
                target: m.post_id.clone(),
                body: None,
            },
            (Some(m), 1..=4) if m.post_id.is_some() => ActionEnvelope {
                thought: format!("jump into @{}'s post and bring up {point_label}.", m.author_handle),
                action: ActionKind::Reply,
                target: m.post_id.clone(),
                body: Some(addressed(&m.author_handle)),
            },
            (Some(m), _) => ActionEnvelope {
                thought: format!("start a new post about {point_label}, nod at @{}.", m.author_handle),
                action: ActionKind::Post,
                target: None,
                body: Some(addressed(&m.author_handle)),
            },
            (None, _) => ActionEnvelope {
                thought: format!("quiet room. open with {point_label}."),
                action: ActionKind::Post,
                target: None,
                body: Some(point),
            },
        }
    }
}

#[async_trait]
impl GenerationBackend for MockBackend {
    async fn generate(&self, bundle: &PromptBundle) -> Result<String, BackendError> {
        Ok(self.respond(bundle).to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disinfo::{default_claims, tag_text};
    use crate::lm::{parse_action, Message};
    use crate::social::PostId;

    fn bundle(messages: Vec<(Role, &str, &str)>, hint: Option<&str>) -> PromptBundle {
        PromptBundle {
            system_text: "sys".into(),
            messages: messages
                .into_iter()
                .map(|(role, handle, id)| Message {
                    role,
                    author_handle: handle.into(),
                    post_id: Some(id.into()),
                    text: "some text".into(),
                })
                .collect(),
            focus_hint: hint.map(String::from),
        }
    }

    fn claims(ids: &[u32]) -> Vec<Claim> {
        default_claims().into_iter().filter(|c| ids.contains(&c.id)).collect()
    }

    #[test]
    fn every_template_carries_its_claim() {
        let registry = default_claims();
        for (id, variants) in MOCK_TEMPLATES {
            for v in variants {
                let tagged: Vec<u32> = tag_text(PostId(1), v, &registry).iter().map(|m| m.claim).collect();
                assert!(tagged.contains(&id), "{v:?} does not carry claim {id}");
                assert!(v.chars().count() < 400);
            }
        }
    }

    #[tokio::test]
    async fn deterministic_per_seed_and_bundle() {
        let m = MockBackend::new(7, default_claims());
        let b = bundle(vec![(Role::Other, "paul", "3")], None);
        assert_eq!(m.generate(&b).await.unwrap(), m.generate(&b).await.unwrap());
    }

    #[tokio::test]
    async fn mentions_last_other_and_claim_phrase() {
        let m = MockBackend::new(11, claims(&[3]));
        for seed_msgs in 0..8 {
            let mut msgs = vec![(Role::Agent, "diego", "1"), (Role::Other, "paul", "2")];
            for _ in 0..seed_msgs {
                msgs.insert(0, (Role::Agent, "diego", "0"));
            }
            let raw = m.generate(&bundle(msgs, None)).await.unwrap();
            let env = parse_action(&raw).unwrap();
            if env.action == ActionKind::Favourite {
                assert_eq!(env.target.as_deref(), Some("2"));
                continue;
            }
            let body = env.body.unwrap();
            assert!(body.contains("@paul"), "{body}");
            assert!(body.contains("database"), "{body}");
        }
    }

    #[tokio::test]
    async fn focused_post_gets_a_reply() {
        let m = MockBackend::new(1, default_claims());
        let b = bundle(
            vec![(Role::Other, "yejin", "4"), (Role::Other, "paul", "9")],
            Some("@paul mentioned you in post 9 (notification 2)"),
        );
        let env = parse_action(&m.generate(&b).await.unwrap()).unwrap();
        assert_eq!(env.action, ActionKind::Reply);
        assert_eq!(env.target.as_deref(), Some("9"));
        assert!(env.body.unwrap().starts_with("@paul "));

        let follow_only = bundle(vec![], Some("@paul (account 2) followed you (notification 3)"));
        let env = parse_action(&m.generate(&follow_only).await.unwrap()).unwrap();
        assert_eq!(env.action, ActionKind::None);
    }

    #[tokio::test]
    async fn cycles_through_claims() {
        let m = MockBackend::new(5, default_claims());
        let mut seen = std::collections::BTreeSet::new();
        for turns in 0..5 {
            let msgs: Vec<_> = (0..turns).map(|_| (Role::Agent, "luca", "1")).collect();
            let env = m.respond(&bundle(msgs, None));
            let body = env.body.unwrap();
            let tags = tag_text(PostId(1), &body, &default_claims());
            assert!(tags.iter().any(|t| t.claim == turns as u32 + 1), "{body}");
            seen.insert(turns);
        }
        assert_eq!(seen.len(), 5);
    }

    #[tokio::test]
    async fn replay_pops_then_exhausts() {
        let r = ReplayBackend::from_jsonl("\"a\"\n\"b\"\n\n\"c\"\n").unwrap();
        let b = bundle(vec![], None);
        for want in ["a", "b", "c"] {
            assert_eq!(r.generate(&b).await.unwrap(), want);
        }
        assert_eq!(r.generate(&b).await, Err(BackendError::Exhausted));
        assert!(ReplayBackend::from_jsonl("not json").is_err());
    }

    #[test]
    fn spec_serde_shapes() {
        let s: BackendSpec = serde_json::from_str(r#"{"kind":"mock","seed":7}"#).unwrap();
        assert_eq!(s, BackendSpec::Mock { seed: 7 });
        let r: BackendSpec = serde_json::from_str(
            r#"{"kind":"remote","endpoint":"http://x/v1/chat/completions","model":"m","api_key_env":"KEY"}"#,
        )
        .unwrap();
        assert!(matches!(r, BackendSpec::Remote { temperature, timeout_ms: 30_000, .. } if temperature == 1.0));
        assert!(!r.is_deterministic());
    }
}
