use serde::{Deserialize, Serialize};

use super::memory::AgentMemory;
use super::order_key;
use crate::api::{NotificationView, StatusView};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocusKind {
    Notification,
    Timeline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusItem {
    pub kind: FocusKind,
    pub notification: Option<NotificationView>,
    pub context_posts: Vec<StatusView>,
}

/// Picks what the bot attends to this cycle: the oldest notification it has
/// not yet addressed, otherwise the timeline.
pub fn select_focus(
    notifications: &[NotificationView],
    timeline: &[StatusView],
    memory: &AgentMemory,
) -> FocusItem {
    let oldest = notifications
        .iter()
        .filter(|n| !memory.is_addressed(&n.id))
        .min_by(|a, b| order_key(a.created_at, &a.id).cmp(&order_key(b.created_at, &b.id)));
    FocusItem {
        kind: if oldest.is_some() {
            FocusKind::Notification
        } else {
            FocusKind::Timeline
        },
        notification: oldest.cloned(),
        context_posts: timeline.to_vec(),
    }
}
