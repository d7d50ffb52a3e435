//! Append-only event log and its line-delimited JSON form.
//!
//! Each line is `{"seq":int,"at":int,"event":string,"data":object}`.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use super::types::{AccountId, AccountKind, Millis, NotificationId, NotificationKind, PostId};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", content = "data", rename_all = "snake_case")]
pub enum Event {
    AccountCreated {
        id: AccountId,
        handle: String,
        display_name: String,
        kind: AccountKind,
    },
    PostCreated {
        id: PostId,
        author: AccountId,
        body: String,
        in_reply_to: Option<PostId>,
        mentions: Vec<AccountId>,
    },
    Favourited {
        actor: AccountId,
        post: PostId,
    },
    Followed {
        actor: AccountId,
        target: AccountId,
    },
    NotificationCreated {
        id: NotificationId,
        recipient: AccountId,
        kind: NotificationKind,
        source: AccountId,
        post: Option<PostId>,
    },
    NotificationRead {
        id: NotificationId,
    },
    TimelineFetched {
        account: AccountId,
        posts: Vec<PostId>,
    },
    NotificationsFetched {
        account: AccountId,
        notifications: Vec<NotificationId>,
    },
}

impl Event {
    pub fn name(&self) -> &'static str {
        match self {
            Event::AccountCreated { .. } => "account_created",
            Event::PostCreated { .. } => "post_created",
            Event::Favourited { .. } => "favourited",
            Event::Followed { .. } => "followed",
            Event::NotificationCreated { .. } => "notification_created",
            Event::NotificationRead { .. } => "notification_read",
            Event::TimelineFetched { .. } => "timeline_fetched",
            Event::NotificationsFetched { .. } => "notifications_fetched",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub seq: u64,
    pub at: Millis,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, thiserror::Error)]
pub enum LogReadError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventLog {
    entries: Vec<LogEntry>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last_at(&self) -> Option<Millis> {
        self.entries.last().map(|e| e.at)
    }

    pub(crate) fn push(&mut self, at: Millis, event: Event) -> u64 {
        let seq = self.entries.len() as u64 + 1;
        self.entries.push(LogEntry { seq, at, event });
        seq
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for entry in &self.entries {
            serde_json::to_writer(&mut out, entry)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    /// Parses a JSONL log. Blank lines are skipped; structural checks (seq,
    /// ordering, references) happen on replay, not here.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<LogEntry>, LogReadError> {
        let mut entries = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(&line)
                .map_err(|source| LogReadError::Malformed { line: idx + 1, source })?;
            entries.push(entry);
        }
        Ok(entries)
    }

    pub fn from_jsonl_str(s: &str) -> Result<Vec<LogEntry>, LogReadError> {
        Self::read_jsonl(s.as_bytes())
    }
}
