use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sleeper_client::RemoteBackend;
use sleeper_core::agent::{Agent, AgentConfig, ApiClient, ApiFailure, LocalClient, SharedServer, StepOutcome};
use sleeper_core::api::{ApiServer, RegisterError};
use sleeper_core::disinfo::{tag_post, Claim, ClaimError, RunReport};
use sleeper_core::lm::{BackendError, BackendSpec, GenerationBackend, MockBackend, ReplayBackend};
use sleeper_core::social::{AccountKind, LogEntry, Millis, ReplayError, Store};

use crate::scenario::{BotSpec, ClockMode, HumanSpec, Scenario, ScriptAction};
use crate::transcript::render_transcript;

pub const EVENTS_FILE: &str = "events.jsonl";
pub const TRANSCRIPT_FILE: &str = "transcript.txt";
pub const REPORT_FILE: &str = "report.json";
pub const AGENTS_FILE: &str = "agents.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("bot {handle}: {source}")]
    Backend {
        handle: String,
        source: BackendError,
    },
    #[error("bot {handle}: cannot read replay script {path}: {source}")]
    Script {
        handle: String,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Register(#[from] RegisterError),
    #[error(transparent)]
    Claims(#[from] ClaimError),
    #[error(transparent)]
    Serve(#[from] sleeper_server::ServeError),
    #[error("writing artifacts: {0}")]
    Io(#[from] std::io::Error),
}

/// Post counts recomputable from an event log alone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSummary {
    pub posts_total: usize,
    pub bot_posts: usize,
    pub human_posts: usize,
    /// Carrying posts per claim id; multi-claim posts count once per claim.
    pub per_claim: BTreeMap<u32, usize>,
    pub off_message_posts: usize,
    pub wall_time_ms: u64,
}

impl RunSummary {
    pub fn from_store(store: &Store, claims: &[Claim]) -> Self {
        let mut per_claim: BTreeMap<u32, usize> = claims.iter().map(|c| (c.id, 0)).collect();
        let (mut bot_posts, mut off_message_posts) = (0, 0);
        for p in store.posts() {
            let is_bot = store.account(p.author).is_some_and(|a| a.kind.is_bot());
            let tags = tag_post(p, claims);
            bot_posts += usize::from(is_bot);
            off_message_posts += usize::from(is_bot && tags.is_empty());
            for t in tags {
                *per_claim.entry(t.claim).or_default() += 1;
            }
        }
        RunSummary {
            posts_total: store.posts().len(),
            bot_posts,
            human_posts: store.posts().len() - bot_posts,
            per_claim,
            off_message_posts,
            wall_time_ms: 0,
        }
    }

    pub fn from_log(log: &[LogEntry], claims: &[Claim]) -> Result<Self, ReplayError> {
        Ok(Self::from_store(&Store::replay(log)?, claims))
    }
}

/// Everything a finished run produced, before it is written to disk.
pub struct RunOutput {
    pub store: Store,
    pub outcomes: Vec<StepOutcome>,
    pub warnings: Vec<String>,
    pub summary: RunSummary,
    pub report: RunReport,
}

impl RunOutput {
    pub fn events_jsonl(&self) -> String {
        self.store.log().to_jsonl()
    }

    pub fn degraded_steps(&self) -> usize {
        self.outcomes.iter().filter(|o| o.degraded.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub event_log: PathBuf,
    pub transcript: PathBuf,
    pub report: PathBuf,
    pub summary: RunSummary,
}

pub(crate) struct BotRuntime {
    pub agent: Agent,
    pub backend: Box<dyn GenerationBackend>,
    pub token: String,
}

pub(crate) struct Room {
    pub server: SharedServer,
    pub bots: Vec<BotRuntime>,
    pub humans: Vec<(HumanSpec, String)>,
}

fn mix(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn build_backend(bot: &BotSpec, claims: &[Claim], seed: u64) -> Result<Box<dyn GenerationBackend>, RunError> {
    let handle = bot.persona.persona.handle.clone();
    Ok(match &bot.backend {
        BackendSpec::Mock { seed: own } => {
            let mine: Vec<Claim> = claims
                .iter()
                .filter(|c| bot.persona.persona.claims.contains(&c.id))
                .cloned()
                .collect();
            Box::new(MockBackend::new(mix(seed, *own), mine))
        }
        BackendSpec::Replay { script } => {
            let text = fs::read_to_string(script).map_err(|source| RunError::Script {
                handle: handle.clone(),
                path: script.clone(),
                source,
            })?;
            Box::new(ReplayBackend::from_jsonl(&text).map_err(|source| RunError::Backend { handle, source })?)
        }
        remote @ BackendSpec::Remote { .. } => {
            Box::new(RemoteBackend::from_spec(remote).map_err(|source| RunError::Backend { handle, source })?)
        }
    })
}

/// Creates accounts, sessions, agents and backends. `token` chooses the
/// bearer token for each handle.
pub(crate) fn setup(
    scenario: &Scenario,
    seed: u64,
    token: impl Fn(&str) -> String,
) -> Result<Room, RunError> {
    let mut server = ApiServer::new();
    let mut bots = Vec::with_capacity(scenario.bots.len());
    for (i, bot) in scenario.bots.iter().enumerate() {
        let p = &bot.persona.persona;
        let t = token(&p.handle);
        server.register(&p.handle, &p.name, AccountKind::Bot, &t)?;
        let agent = Agent::new(
            p.clone(),
            bot.persona.cadence(),
            &scenario.claims,
            AgentConfig::default(),
            mix(seed, 1_000 + i as u64),
            0,
        )?;
        bots.push(BotRuntime {
            agent,
            backend: build_backend(bot, &scenario.claims, seed)?,
            token: t,
        });
    }
    let mut humans = Vec::with_capacity(scenario.humans.len());
    for h in &scenario.humans {
        let t = token(&h.handle);
        server.register(&h.handle, h.display_name(), h.kind.into(), &t)?;
        humans.push((h.clone(), t));
    }
    Ok(Room {
        server: Arc::new(Mutex::new(server)),
        bots,
        humans,
    })
}

/// Performs one scripted human action through `api`.
pub(crate) async fn run_script_action(
    server: &SharedServer,
    api: &dyn ApiClient,
    action: &ScriptAction,
) -> Result<(), String> {
    let latest_by = |handle: &str| -> Result<String, String> {
        let s = server.lock().map_err(|_| "server lock poisoned".to_string())?;
        let store = s.store();
        let author = store
            .account_by_handle(handle)
            .ok_or_else(|| format!("unknown handle {handle}"))?
            .id;
        store
            .posts()
            .iter()
            .rev()
            .find(|p| p.author == author)
            .map(|p| p.id.to_string())
            .ok_or_else(|| format!("{handle} has not posted yet"))
    };
    let failed = |e: ApiFailure| e.to_string();
    match action {
        ScriptAction::Post { body } => api.post_status(body, None).await.map(drop).map_err(failed),
        ScriptAction::Reply { to, body } => {
            let target = latest_by(to)?;
            api.post_status(body, Some(&target)).await.map(drop).map_err(failed)
        }
        ScriptAction::Favourite { of } => {
            let target = latest_by(of)?;
            api.favourite(&target).await.map(drop).map_err(failed)
        }
        ScriptAction::Follow { handle } => {
            let id = {
                let s = server.lock().map_err(|_| "server lock poisoned".to_string())?;
                s.store()
                    .account_by_handle(handle)
                    .map(|a| a.id.to_string())
                    .ok_or_else(|| format!("unknown handle {handle}"))?
            };
            api.follow(&id).await.map(drop).map_err(failed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Due {
    Script { human: usize, step: usize },
    Wake { bot: usize },
}

/// Runs a scenario in scripted mode: one dispatcher drives scripted humans
/// and bot wakes from a single time-ordered queue, ties broken by
/// registration order. `seed` overrides the scenario seed.
pub async fn run_scripted(scenario: &Scenario, seed: Option<u64>) -> Result<RunOutput, RunError> {
    let started = Instant::now();
    let seed = seed.unwrap_or(scenario.seed);
    let mut warnings = Vec::new();
    if !scenario.is_deterministic() {
        let w = "remote backends make scripted runs non-reproducible".to_string();
        tracing::warn!("{w}");
        warnings.push(w);
    }
    let mut room = setup(scenario, seed, |h| format!("scripted-{h}"))?;

    let mut queue = BinaryHeap::new();
    let mut order = 0u64;
    let mut push = |queue: &mut BinaryHeap<_>, at: Millis, due: Due| {
        queue.push(Reverse((at, order, due)));
        order += 1;
    };
    for (h, (spec, _)) in room.humans.iter().enumerate() {
        for (step, s) in spec.script.iter().enumerate() {
            push(&mut queue, s.at_ms, Due::Script { human: h, step });
        }
    }
    for (b, bot) in room.bots.iter().enumerate() {
        push(&mut queue, bot.agent.next_wake_at(), Due::Wake { bot: b });
    }

    let mut outcomes = Vec::new();
    let mut last = 0;
    while let Some(Reverse((at, _, due))) = queue.pop() {
        if at >= scenario.duration_ms {
            break;
        }
        debug_assert!(at >= last, "dispatch went back in time");
        last = at;
        if scenario.clock_mode == ClockMode::Realtime {
            tokio::time::sleep_until(tokio::time::Instant::from_std(started) + Duration::from_millis(at)).await;
        }
        room.server
            .lock()
            .expect("server lock")
            .store_mut()
            .advance_to(at)
            .expect("queue is time ordered");
        match due {
            Due::Script { human, step } => {
                let (spec, token) = &room.humans[human];
                let api = LocalClient::new(room.server.clone(), token.clone());
                let action = &spec.script[step].action;
                if let Err(e) = run_script_action(&room.server, &api, action).await {
                    warnings.push(format!("[{at}] {} script step {step} skipped: {e}", spec.handle));
                }
            }
            Due::Wake { bot } => {
                let rt = &mut room.bots[bot];
                let api = LocalClient::new(room.server.clone(), rt.token.clone());
                let outcome = rt.agent.step(&api, rt.backend.as_ref(), at).await;
                if let Some(d) = &outcome.degraded {
                    warnings.push(format!("[{at}] {} degraded: {d}", outcome.handle));
                }
                if let Some(e) = &outcome.error {
                    warnings.push(format!("[{at}] {} cycle abandoned: {e}", outcome.handle));
                }
                push(&mut queue, outcome.next_wake_at, Due::Wake { bot });
                outcomes.push(outcome);
            }
        }
    }

    let store = Arc::try_unwrap(room.server)
        .ok()
        .and_then(|m| m.into_inner().ok())
        .map(ApiServer::into_store)
        .expect("no other handles to the server remain");
    Ok(finish(store, outcomes, warnings, &scenario.claims, started))
}

pub(crate) fn finish(
    store: Store,
    outcomes: Vec<StepOutcome>,
    warnings: Vec<String>,
    claims: &[Claim],
    started: Instant,
) -> RunOutput {
    let mut summary = RunSummary::from_store(&store, claims);
    summary.wall_time_ms = started.elapsed().as_millis() as u64;
    let report = RunReport::from_store(&store, claims);
    RunOutput {
        store,
        outcomes,
        warnings,
        summary,
        report,
    }
}

/// Writes the event log, transcript, report, agent traces and summary.
pub fn write_artifacts(output: &RunOutput, out_dir: &Path) -> Result<RunResult, RunError> {
    fs::create_dir_all(out_dir)?;
    let event_log = out_dir.join(EVENTS_FILE);
    output.store.log().write_jsonl(fs::File::create(&event_log)?)?;
    let transcript = out_dir.join(TRANSCRIPT_FILE);
    fs::write(&transcript, render_transcript(&output.store, false))?;
    let report = out_dir.join(REPORT_FILE);
    fs::write(&report, to_pretty(&output.report))?;
    let mut agents = fs::File::create(out_dir.join(AGENTS_FILE))?;
    for o in &output.outcomes {
        writeln!(agents, "{}", serde_json::to_string(o).expect("outcome serializes"))?;
    }
    fs::write(out_dir.join(SUMMARY_FILE), to_pretty(&output.summary))?;
    Ok(RunResult {
        event_log,
        transcript,
        report,
        summary: output.summary.clone(),
    })
}

fn to_pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Scripted run followed by artifact export.
pub async fn run_scenario(scenario: &Scenario, seed: Option<u64>, out_dir: &Path) -> Result<RunResult, RunError> {
    let output = run_scripted(scenario, seed).await?;
    write_artifacts(&output, out_dir)
}
