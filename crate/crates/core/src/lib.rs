//! Core of the sleeper-bot testbed: the social store, the Mastodon-style
//! request layer, the bot runtime, prompt/backends, and disinformation tracing.

pub mod social;
pub mod api;
pub mod disinfo;
pub mod agent;
pub mod lm;
