use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::client::{ApiClient, ApiFailure};
use super::focus::{select_focus, FocusItem};
use super::memory::{AgentMemory, DEFAULT_WINDOW_CAPACITY};
use super::persona::Persona;
use super::schedule::{schedule_delay, Cadence};
use crate::api::{NotificationView, StatusView, DEFAULT_TIMELINE_LIMIT};
use crate::disinfo::{Claim, ClaimError};
use crate::lm::{
    assemble_system_prompt, build_context, parse_action, ActionEnvelope, ActionKind,
    GenerationBackend, OUTPUT_FORMAT_VERSION,
};
use crate::social::Millis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Inspect,
    Think,
    Act,
    Idle,
}

/// The only transitions a bot may take.
pub const ALLOWED_TRANSITIONS: [(Phase, Phase); 5] = [
    (Phase::Inspect, Phase::Think),
    (Phase::Think, Phase::Act),
    (Phase::Think, Phase::Inspect),
    (Phase::Act, Phase::Idle),
    (Phase::Idle, Phase::Inspect),
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Action {
    Post { body: String },
    Reply { target: String, body: String },
    Favourite { post: String },
    Follow { account: String },
    None,
}

impl From<ActionEnvelope> for Action {
    fn from(e: ActionEnvelope) -> Self {
        // envelopes are validated on parse
        match e.action {
            ActionKind::Post => Action::Post {
                body: e.body.unwrap_or_default(),
            },
            ActionKind::Reply => Action::Reply {
                target: e.target.unwrap_or_default(),
                body: e.body.unwrap_or_default(),
            },
            ActionKind::Favourite => Action::Favourite {
                post: e.target.unwrap_or_default(),
            },
            ActionKind::Follow => Action::Follow {
                account: e.target.unwrap_or_default(),
            },
            ActionKind::None => Action::None,
        }
    }
}

/// Whether `action` answers notification `n`: it replies to or favourites the
/// notification's post, or follows the notifying account.
pub fn action_addresses(action: &Action, n: &NotificationView) -> bool {
    let status = n.status.as_ref().map(|s| s.id.as_str());
    match action {
        Action::Reply { target, .. } => Some(target.as_str()) == status,
        Action::Favourite { post } => Some(post.as_str()) == status,
        Action::Follow { account } => *account == n.account.id,
        Action::Post { .. } | Action::None => false,
    }
}

/// Rewrites a decided action so that it answers the focused notification.
fn aim_at(action: Action, n: &NotificationView) -> Action {
    let follow_back = Action::Follow {
        account: n.account.id.clone(),
    };
    match (action, &n.status) {
        (Action::None, _) => Action::None,
        (Action::Post { body } | Action::Reply { body, .. }, Some(s)) => Action::Reply {
            target: s.id.clone(),
            body,
        },
        (Action::Favourite { .. }, Some(s)) => Action::Favourite { post: s.id.clone() },
        (Action::Follow { .. }, _) | (_, None) => follow_back,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThoughtRecord {
    pub reasoning: String,
    pub decided: Action,
    pub produced_at: Millis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub current: Phase,
    pub pending_focus: Option<FocusItem>,
    pub last_action_at: Millis,
    pub next_wake_at: Millis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub timeline_limit: usize,
    pub context_messages: usize,
    pub window_capacity: usize,
    /// Extra attempts after a backend or parse failure before staying silent.
    pub max_retries: u32,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            timeline_limit: DEFAULT_TIMELINE_LIMIT,
            context_messages: DEFAULT_WINDOW_CAPACITY,
            window_capacity: DEFAULT_WINDOW_CAPACITY,
            max_retries: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PerformedAction {
    Posted { status: StatusView },
    Favourited { status_id: String },
    Followed { account_id: String },
}

/// Trace of one cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub at: Millis,
    pub handle: String,
    pub transitions: Vec<(Phase, Phase)>,
    pub focus_notification: Option<String>,
    pub thought: Option<ThoughtRecord>,
    pub performed: Option<PerformedAction>,
    /// Set when the backend or parser failed on every attempt.
    pub degraded: Option<String>,
    /// Set when an API call failed and the cycle was abandoned.
    pub error: Option<String>,
    pub next_wake_at: Millis,
}

impl StepOutcome {
    pub fn mutated(&self) -> bool {
        self.performed.is_some()
    }
}

/// One bot: persona, state machine, memory and its own seeded generator.
pub struct Agent {
    persona: Persona,
    cadence: Cadence,
    config: AgentConfig,
    system_prompt: String,
    state: AgentState,
    memory: AgentMemory,
    rng: ChaCha8Rng,
}

impl Agent {
    /// Creates an idle agent whose first wake is one cadence delay after `start_at`.
    pub fn new(
        persona: Persona,
        cadence: Cadence,
        claims: &[Claim],
        config: AgentConfig,
        seed: u64,
        start_at: Millis,
    ) -> Result<Self, ClaimError> {
        let system_prompt = assemble_system_prompt(&persona, claims, OUTPUT_FORMAT_VERSION)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = start_at + schedule_delay(&cadence, &mut rng);
        Ok(Agent {
            memory: AgentMemory::new(persona.handle.clone(), config.window_capacity),
            persona,
            cadence,
            config,
            system_prompt,
            state: AgentState {
                current: Phase::Idle,
                pending_focus: None,
                last_action_at: start_at,
                next_wake_at: first,
            },
            rng,
        })
    }

    pub fn persona(&self) -> &Persona {
        &self.persona
    }

    pub fn handle(&self) -> &str {
        &self.persona.handle
    }

    pub fn state(&self) -> &AgentState {
        &self.state
    }

    pub fn memory(&self) -> &AgentMemory {
        &self.memory
    }

    pub fn memory_mut(&mut self) -> &mut AgentMemory {
        &mut self.memory
    }

    pub fn system_prompt(&self) -> &str {
        &self.system_prompt
    }

    pub fn next_wake_at(&self) -> Millis {
        self.state.next_wake_at
    }

    fn reschedule(&mut self, now: Millis) -> Millis {
        self.state.next_wake_at = now + schedule_delay(&self.cadence, &mut self.rng);
        self.state.next_wake_at
    }

    /// Runs one inspect → think → act cycle at virtual time `now`.
    ///
    /// The caller only steps agents that are due (`now >= next_wake_at`).
    pub async fn step(
        &mut self,
        api: &dyn ApiClient,
        backend: &dyn GenerationBackend,
        now: Millis,
    ) -> StepOutcome {
        let mut out = StepOutcome {
            at: now,
            handle: self.persona.handle.clone(),
            transitions: Vec::new(),
            focus_notification: None,
            thought: None,
            performed: None,
            degraded: None,
            error: None,
            next_wake_at: self.state.next_wake_at,
        };

        // inspect
        let polled = match self.poll(api).await {
            Ok(p) => p,
            Err(e) => {
                out.error = Some(e.to_string());
                out.next_wake_at = self.reschedule(now);
                return out;
            }
        };
        if self.state.current == Phase::Idle {
            out.transitions.push((Phase::Idle, Phase::Inspect));
        }
        self.state.current = Phase::Inspect;
        let (timeline, notifications) = polled;
        self.memory.update(&timeline, None);
        let focus = select_focus(&notifications, &timeline, &self.memory);
        let focused = focus.notification.clone();
        out.focus_notification = focused.as_ref().map(|n| n.id.clone());

        // think
        out.transitions.push((Phase::Inspect, Phase::Think));
        self.state.current = Phase::Think;
        let bundle = build_context(
            &self.system_prompt,
            &self.memory,
            &focus,
            self.config.context_messages,
        );
        self.state.pending_focus = Some(focus);
        let (envelope, failure) = self.think(backend, &bundle).await;
        out.degraded = failure;
        let (reasoning, mut decided) = match envelope {
            Some(e) => (e.thought.clone(), Action::from(e)),
            None => (String::new(), Action::None),
        };
        if let Some(n) = &focused {
            decided = aim_at(decided, n);
        }
        out.thought = Some(ThoughtRecord {
            reasoning,
            decided: decided.clone(),
            produced_at: now,
        });

        if decided == Action::None {
            out.transitions.push((Phase::Think, Phase::Inspect));
            self.state.current = Phase::Inspect;
            self.state.pending_focus = None;
            // a deliberate "nothing to add" settles the notification; a
            // degraded silence leaves it for the next cycle
            if let (Some(n), None) = (&focused, &out.degraded) {
                self.memory.mark_addressed(&n.id);
            }
            out.next_wake_at = self.reschedule(now);
            return out;
        }

        // act
        out.transitions.push((Phase::Think, Phase::Act));
        let performed = match self.perform(api, &decided).await {
            Ok(p) => p,
            Err(e) => {
                // abandon the cycle; the state machine stays where the cycle began
                out.error = Some(e.to_string());
                self.state.current = if out.transitions.first() == Some(&(Phase::Idle, Phase::Inspect)) {
                    Phase::Idle
                } else {
                    Phase::Inspect
                };
                self.state.pending_focus = None;
                out.next_wake_at = self.reschedule(now);
                return out;
            }
        };
        if let Some(n) = &focused {
            self.memory.mark_addressed(&n.id);
        }
        if let PerformedAction::Posted { status } = &performed {
            self.memory.update(&[], Some(status));
        }
        out.performed = Some(performed);
        out.transitions.push((Phase::Act, Phase::Idle));
        self.state.current = Phase::Idle;
        self.state.pending_focus = None;
        self.state.last_action_at = now;
        out.next_wake_at = self.reschedule(now);
        out
    }

    async fn poll(
        &self,
        api: &dyn ApiClient,
    ) -> Result<(Vec<StatusView>, Vec<NotificationView>), ApiFailure> {
        let timeline = api.home_timeline(self.config.timeline_limit).await?;
        let notifications = api.notifications(true).await?;
        Ok((timeline, notifications))
    }

    async fn think(
        &self,
        backend: &dyn GenerationBackend,
        bundle: &crate::lm::PromptBundle,
    ) -> (Option<ActionEnvelope>, Option<String>) {
        let mut failure = None;
        for _ in 0..=self.config.max_retries {
            match backend.generate(bundle).await {
                Err(e) => failure = Some(format!("backend: {e}")),
                Ok(raw) => match parse_action(&raw) {
                    Ok(env) => return (Some(env), None),
                    Err(e) => failure = Some(format!("parse: {e}")),
                },
            }
        }
        (None, failure)
    }

    async fn perform(&self, api: &dyn ApiClient, action: &Action) -> Result<PerformedAction, ApiFailure> {
        Ok(match action {
            Action::Post { body } => PerformedAction::Posted {
                status: api.post_status(body, None).await?,
            },
            Action::Reply { target, body } => PerformedAction::Posted {
                status: api.post_status(body, Some(target)).await?,
            },
            Action::Favourite { post } => PerformedAction::Favourited {
                status_id: api.favourite(post).await?.id,
            },
            Action::Follow { account } => PerformedAction::Followed {
                account_id: api.follow(account).await?.id,
            },
            Action::None => unreachable!("none is handled before acting"),
        })
    }
}
