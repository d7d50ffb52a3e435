use super::prompt::{Message, PromptBundle, Role};
use crate::agent::{AgentMemory, FocusItem, FocusKind, WindowEntry};
use crate::api::NotificationView;
use crate::social::NotificationKind;

fn message(entry: &WindowEntry, own_handle: &str) -> Message {
    Message {
        role: if entry.author_handle == own_handle {
            Role::Agent
        } else {
            Role::Other
        },
        author_handle: entry.author_handle.clone(),
        post_id: Some(entry.post_id.clone()),
        text: entry.body.clone(),
    }
}

pub fn focus_hint(n: &NotificationView) -> String {
    let what = match n.kind {
        NotificationKind::Mention => "mentioned you",
        NotificationKind::Reply => "replied to you",
        NotificationKind::Favourite => "liked your post",
        NotificationKind::Follow => "followed you",
    };
    match &n.status {
        Some(s) => format!("@{} {what} in post {} (notification {})", n.account.handle, s.id, n.id),
        None => format!(
            "@{} (account {}) {what} (notification {})",
            n.account.handle, n.account.id, n.id
        ),
    }
}

/// Conversation context for one think step: the most recent `max_messages`
/// window entries, oldest first. A focused notification's post is always the
/// final message, re-injected if it fell out of the window.
pub fn build_context(
    system_text: &str,
    memory: &AgentMemory,
    focus: &FocusItem,
    max_messages: usize,
) -> PromptBundle {
    let own = memory.own_handle();
    let window = memory.window();
    let skip = window.len().saturating_sub(max_messages);
    let mut messages: Vec<Message> = window.iter().skip(skip).map(|e| message(e, own)).collect();

    let mut hint = None;
    if focus.kind == FocusKind::Notification {
        if let Some(n) = &focus.notification {
            hint = Some(focus_hint(n));
            if let Some(status) = &n.status {
                messages.retain(|m| m.post_id.as_deref() != Some(status.id.as_str()));
                messages.push(message(&WindowEntry::of(status), own));
            }
        }
    }

    PromptBundle {
        system_text: system_text.to_string(),
        messages,
        focus_hint: hint,
    }
}
