use std::fmt::Write as _;

use sleeper_core::social::{LogEntry, ReplayError, Store};

/// Renders every post as `[mm:ss] handle: body (↩ parent-handle)`, oldest
/// first. Account kinds are only shown when `unblinded` is set.
pub fn render_transcript(store: &Store, unblinded: bool) -> String {
    let mut out = String::new();
    for p in store.posts() {
        let author = store.account(p.author).expect("replayed posts have authors");
        let secs = p.created_at / 1000;
        let body = p.body.replace(['\r', '\n'], " ");
        let _ = write!(out, "[{:02}:{:02}] {}: {}", secs / 60, secs % 60, author.handle, body);
        if let Some(parent) = p.in_reply_to.and_then(|id| store.post(id)) {
            let parent_author = store.account(parent.author).expect("parent author");
            let _ = write!(out, " (↩ {})", parent_author.handle);
        }
        if unblinded {
            let _ = write!(out, " [{}]", author.kind.as_str());
        }
        out.push('\n');
    }
    out
}

pub fn export_transcript(log: &[LogEntry], unblinded: bool) -> Result<String, ReplayError> {
    Ok(render_transcript(&Store::replay(log)?, unblinded))
}
