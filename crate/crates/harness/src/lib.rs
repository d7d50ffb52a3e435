//! Scenario loading, run orchestration and artifact export for the
//! bot-in-the-room experiments.

mod live;
mod runner;
mod scenario;
mod transcript;

pub use live::{run_live, LiveOptions, LiveSession};
pub use runner::{
    run_scenario, run_scripted, write_artifacts, RunError, RunOutput, RunResult, RunSummary, AGENTS_FILE,
    EVENTS_FILE, REPORT_FILE, SUMMARY_FILE, TRANSCRIPT_FILE,
};
pub use scenario::{
    default_scenario, load_scenario, BotSpec, ClockMode, HumanKind, HumanSpec, Scenario, ScenarioError,
    ScriptAction, ScriptedAction,
};
pub use transcript::{export_transcript, render_transcript};
