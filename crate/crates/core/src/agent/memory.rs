use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::order_key;
use crate::api::StatusView;

pub const DEFAULT_WINDOW_CAPACITY: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub author_handle: String,
    pub body: String,
    pub post_id: String,
}

impl WindowEntry {
    pub fn of(status: &StatusView) -> Self {
        WindowEntry {
            author_handle: status.account.handle.clone(),
            body: status.content.clone(),
            post_id: status.id.clone(),
        }
    }
}

/// What a bot remembers between cycles: posts it has seen, notifications it
/// has dealt with, and a bounded conversation window (oldest evicted first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentMemory {
    own_handle: String,
    seen_post_ids: BTreeSet<String>,
    addressed_notification_ids: BTreeSet<String>,
    window: VecDeque<WindowEntry>,
    capacity: usize,
}

impl AgentMemory {
    pub fn new(own_handle: impl Into<String>, capacity: usize) -> Self {
        AgentMemory {
            own_handle: own_handle.into(),
            seen_post_ids: BTreeSet::new(),
            addressed_notification_ids: BTreeSet::new(),
            window: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn own_handle(&self) -> &str {
        &self.own_handle
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn window(&self) -> &VecDeque<WindowEntry> {
        &self.window
    }

    pub fn has_seen(&self, post_id: &str) -> bool {
        self.seen_post_ids.contains(post_id)
    }

    pub fn is_addressed(&self, notification_id: &str) -> bool {
        self.addressed_notification_ids.contains(notification_id)
    }

    pub fn mark_addressed(&mut self, notification_id: &str) {
        self.addressed_notification_ids.insert(notification_id.to_string());
    }

    /// Folds a polled timeline (any order) and, optionally, the bot's own new
    /// status into the window. Already-seen posts are skipped.
    pub fn update(&mut self, timeline: &[StatusView], own: Option<&StatusView>) {
        let mut fresh: Vec<&StatusView> = timeline
            .iter()
            .filter(|s| !self.seen_post_ids.contains(&s.id))
            .collect();
        fresh.sort_by(|a, b| order_key(a.created_at, &a.id).cmp(&order_key(b.created_at, &b.id)));
        fresh.dedup_by(|a, b| a.id == b.id);
        for status in fresh.into_iter().chain(own) {
            if self.seen_post_ids.insert(status.id.clone()) {
                self.push(WindowEntry::of(status));
            }
        }
    }

    fn push(&mut self, entry: WindowEntry) {
        self.window.push_back(entry);
        while self.window.len() > self.capacity {
            self.window.pop_front();
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::api::AccountView;

    pub(crate) fn status(id: u64, handle: &str, at: u64, body: &str) -> StatusView {
        StatusView {
            id: id.to_string(),
            account: AccountView {
                id: "1".into(),
                handle: handle.into(),
                display_name: handle.into(),
            },
            content: body.into(),
            created_at: at,
            in_reply_to_id: None,
            mentions: vec![],
            favourites_count: 0,
        }
    }

    fn ids(m: &AgentMemory) -> Vec<String> {
        m.window().iter().map(|e| e.post_id.clone()).collect()
    }

    #[test]
    fn fifo_eviction() {
        let mut m = AgentMemory::new("luca", 3);
        let abc: Vec<_> = (1..=3).map(|i| status(i, "paul", i * 10, "x")).collect();
        m.update(&abc, None);
        m.update(&[status(4, "paul", 40, "d")], None);
        assert_eq!(ids(&m), vec!["2", "3", "4"]);
    }

    #[test]
    fn seen_posts_do_not_reenter() {
        let mut m = AgentMemory::new("luca", 3);
        let tl: Vec<_> = (1..=3).map(|i| status(i, "paul", i * 10, "x")).collect();
        m.update(&tl, None);
        let before = m.clone();
        m.update(&tl, None);
        assert_eq!(m, before);
    }

    #[test]
    fn newest_first_input_lands_oldest_first() {
        let mut m = AgentMemory::new("luca", 50);
        let mut tl: Vec<_> = (1..=60).map(|i| status(i, "paul", i * 10, "x")).collect();
        tl.reverse();
        m.update(&tl, None);
        let expected: Vec<String> = (11..=60).map(|i| i.to_string()).collect();
        assert_eq!(ids(&m), expected);
    }

    #[test]
    fn own_action_is_recorded_once() {
        let mut m = AgentMemory::new("luca", 10);
        let mine = status(7, "luca", 70, "mine");
        m.update(&[status(6, "paul", 60, "theirs")], Some(&mine));
        assert_eq!(ids(&m), vec!["6", "7"]);
        m.update(&[mine.clone()], None);
        assert_eq!(ids(&m), vec!["6", "7"]);
        assert!(m.has_seen("7"));
    }

    #[test]
    fn addressed_tracking() {
        let mut m = AgentMemory::new("luca", 1);
        assert!(!m.is_addressed("3"));
        m.mark_addressed("3");
        assert!(m.is_addressed("3"));
    }
}
