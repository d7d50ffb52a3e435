use std::collections::{BTreeSet, HashMap, HashSet};

use super::event::{Event, EventLog, LogEntry};
use super::mentions::parse_mentions;
use super::types::*;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("post body is empty")]
    BodyEmpty,
    #[error("post body is {len} characters, limit is {MAX_POST_CHARS}")]
    BodyTooLong { len: usize },
    #[error("unknown author {0}")]
    UnknownAuthor(AccountId),
    #[error("unknown parent post {0}")]
    UnknownParent(PostId),
    #[error("unknown account {0}")]
    UnknownAccount(AccountId),
    #[error("unknown post {0}")]
    UnknownPost(PostId),
    #[error("unknown notification {0}")]
    UnknownNotification(NotificationId),
    #[error("an account cannot follow itself")]
    SelfFollow,
    #[error("invalid handle {0:?}")]
    InvalidHandle(String),
    #[error("handle {0:?} is taken")]
    DuplicateHandle(String),
    #[error("clock cannot move back from {now} to {requested}")]
    ClockRewind { now: Millis, requested: Millis },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("corrupt log at seq {seq}: {reason}")]
pub struct ReplayError {
    pub seq: u64,
    pub reason: String,
}

/// In-memory social network state. Every mutation goes through [`Store::record`],
/// which applies an [`Event`] and appends it to the log, so replaying the log
/// rebuilds the same state.
#[derive(Debug, Clone, Default)]
pub struct Store {
    accounts: Vec<Account>,
    by_handle: HashMap<String, AccountId>,
    handles: HashSet<String>,
    posts: Vec<Post>,
    favourites: BTreeSet<(AccountId, PostId)>,
    favourite_counts: Vec<u64>,
    follows: BTreeSet<(AccountId, AccountId)>,
    notifications: Vec<Notification>,
    log: EventLog,
    now: Millis,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> Millis {
        self.now
    }

    pub fn advance_to(&mut self, at: Millis) -> Result<(), StoreError> {
        if at < self.now {
            return Err(StoreError::ClockRewind {
                now: self.now,
                requested: at,
            });
        }
        self.now = at;
        Ok(())
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn accounts(&self) -> &[Account] {
        &self.accounts
    }

    pub fn posts(&self) -> &[Post] {
        &self.posts
    }

    pub fn notifications(&self) -> &[Notification] {
        &self.notifications
    }

    pub fn account(&self, id: AccountId) -> Option<&Account> {
        index(id.0).and_then(|i| self.accounts.get(i))
    }

    pub fn account_by_handle(&self, handle: &str) -> Option<&Account> {
        self.by_handle
            .get(&handle.to_ascii_lowercase())
            .and_then(|id| self.account(*id))
    }

    pub fn post(&self, id: PostId) -> Option<&Post> {
        index(id.0).and_then(|i| self.posts.get(i))
    }

    pub fn notification(&self, id: NotificationId) -> Option<&Notification> {
        index(id.0).and_then(|i| self.notifications.get(i))
    }

    pub fn favourites_count(&self, post: PostId) -> u64 {
        index(post.0)
            .and_then(|i| self.favourite_counts.get(i))
            .copied()
            .unwrap_or(0)
    }

    pub fn has_favourited(&self, actor: AccountId, post: PostId) -> bool {
        self.favourites.contains(&(actor, post))
    }

    pub fn is_following(&self, actor: AccountId, target: AccountId) -> bool {
        self.follows.contains(&(actor, target))
    }

    pub fn create_account(
        &mut self,
        handle: &str,
        display_name: &str,
        kind: AccountKind,
    ) -> Result<AccountId, StoreError> {
        let handle = handle.to_ascii_lowercase();
        if !is_valid_handle(&handle) {
            return Err(StoreError::InvalidHandle(handle));
        }
        if self.handles.contains(&handle) {
            return Err(StoreError::DuplicateHandle(handle));
        }
        let id = AccountId(self.accounts.len() as u64 + 1);
        self.record(Event::AccountCreated {
            id,
            handle,
            display_name: display_name.to_string(),
            kind,
        });
        Ok(id)
    }

    pub fn append_post(
        &mut self,
        author: AccountId,
        body: &str,
        in_reply_to: Option<PostId>,
    ) -> Result<Post, StoreError> {
        if self.account(author).is_none() {
            return Err(StoreError::UnknownAuthor(author));
        }
        check_body(body)?;
        let parent_author = match in_reply_to {
            Some(pid) => {
                Some(self.post(pid).ok_or(StoreError::UnknownParent(pid))?.author)
            }
            None => None,
        };
        let mentions: Vec<AccountId> = parse_mentions(body, &self.handles)
            .iter()
            .map(|h| self.by_handle[h])
            .collect();
        let id = PostId(self.posts.len() as u64 + 1);
        self.record(Event::PostCreated {
            id,
            author,
            body: body.to_string(),
            in_reply_to,
            mentions: mentions.clone(),
        });

        let reply_recipient = parent_author.filter(|&a| a != author);
        if let Some(recipient) = reply_recipient {
            self.notify(recipient, NotificationKind::Reply, author, Some(id));
        }
        for m in mentions {
            if m != author && Some(m) != reply_recipient {
                self.notify(m, NotificationKind::Mention, author, Some(id));
            }
        }
        Ok(self.posts.last().cloned().expect("post just recorded"))
    }

    /// The `limit` most recent posts in the shared room, newest first.
    pub fn home_timeline(&mut self, viewer: AccountId, limit: usize) -> Result<Vec<Post>, StoreError> {
        if self.account(viewer).is_none() {
            return Err(StoreError::UnknownAccount(viewer));
        }
        // posts are stored in seq order with non-decreasing timestamps
        let page: Vec<Post> = self.posts.iter().rev().take(limit).cloned().collect();
        self.record(Event::TimelineFetched {
            account: viewer,
            posts: page.iter().map(|p| p.id).collect(),
        });
        Ok(page)
    }

    /// Notifications for `recipient`, newest first. Fetching does not mark them read.
    pub fn notifications_for(
        &mut self,
        recipient: AccountId,
        unread_only: bool,
    ) -> Result<Vec<Notification>, StoreError> {
        if self.account(recipient).is_none() {
            return Err(StoreError::UnknownAccount(recipient));
        }
        let found: Vec<Notification> = self
            .notifications
            .iter()
            .rev()
            .filter(|n| n.recipient == recipient && !(unread_only && n.read))
            .cloned()
            .collect();
        self.record(Event::NotificationsFetched {
            account: recipient,
            notifications: found.iter().map(|n| n.id).collect(),
        });
        Ok(found)
    }

    /// Returns whether anything changed; repeating a favourite is a silent no-op.
    pub fn favourite_post(&mut self, actor: AccountId, post: PostId) -> Result<bool, StoreError> {
        if self.account(actor).is_none() {
            return Err(StoreError::UnknownAccount(actor));
        }
        let author = self.post(post).ok_or(StoreError::UnknownPost(post))?.author;
        if self.has_favourited(actor, post) {
            return Ok(false);
        }
        self.record(Event::Favourited { actor, post });
        if author != actor {
            self.notify(author, NotificationKind::Favourite, actor, Some(post));
        }
        Ok(true)
    }

    pub fn follow_account(&mut self, actor: AccountId, target: AccountId) -> Result<bool, StoreError> {
        for id in [actor, target] {
            if self.account(id).is_none() {
                return Err(StoreError::UnknownAccount(id));
            }
        }
        if actor == target {
            return Err(StoreError::SelfFollow);
        }
        if self.is_following(actor, target) {
            return Ok(false);
        }
        self.record(Event::Followed { actor, target });
        self.notify(target, NotificationKind::Follow, actor, None);
        Ok(true)
    }

    pub fn mark_notification_read(
        &mut self,
        recipient: AccountId,
        id: NotificationId,
    ) -> Result<bool, StoreError> {
        let n = self
            .notification(id)
            .filter(|n| n.recipient == recipient)
            .ok_or(StoreError::UnknownNotification(id))?;
        if n.read {
            return Ok(false);
        }
        self.record(Event::NotificationRead { id });
        Ok(true)
    }

    /// Rebuilds a store from log entries, validating every structural invariant.
    pub fn replay<'a, I>(entries: I) -> Result<Store, ReplayError>
    where
        I: IntoIterator<Item = &'a LogEntry>,
    {
        let mut store = Store::new();
        for entry in entries {
            let corrupt = |reason: String| ReplayError {
                seq: entry.seq,
                reason,
            };
            let expected = store.log.len() as u64 + 1;
            if entry.seq != expected {
                return Err(corrupt(format!("expected seq {expected}")));
            }
            if entry.at < store.now {
                return Err(corrupt(format!("time {} precedes {}", entry.at, store.now)));
            }
            store.now = entry.at;
            store.apply(&entry.event).map_err(corrupt)?;
            store.log.push(entry.at, entry.event.clone());
        }
        Ok(store)
    }

    fn notify(
        &mut self,
        recipient: AccountId,
        kind: NotificationKind,
        source: AccountId,
        post: Option<PostId>,
    ) {
        let id = NotificationId(self.notifications.len() as u64 + 1);
        self.record(Event::NotificationCreated {
            id,
            recipient,
            kind,
            source,
            post,
        });
    }

    fn record(&mut self, event: Event) {
        // operations validate first; a failure here is a bug in the operation
        if let Err(reason) = self.apply(&event) {
            panic!("invalid {} event: {reason}", event.name());
        }
        self.log.push(self.now, event);
    }

    fn apply(&mut self, event: &Event) -> Result<(), String> {
        let now = self.now;
        match event {
            Event::AccountCreated {
                id,
                handle,
                display_name,
                kind,
            } => {
                expect_next(id.0, self.accounts.len(), "account")?;
                if !is_valid_handle(handle) {
                    return Err(format!("invalid handle {handle:?}"));
                }
                if self.handles.contains(handle) {
                    return Err(format!("duplicate handle {handle:?}"));
                }
                self.handles.insert(handle.clone());
                self.by_handle.insert(handle.clone(), *id);
                self.accounts.push(Account {
                    id: *id,
                    handle: handle.clone(),
                    display_name: display_name.clone(),
                    kind: *kind,
                    created_at: now,
                });
            }
            Event::PostCreated {
                id,
                author,
                body,
                in_reply_to,
                mentions,
            } => {
                expect_next(id.0, self.posts.len(), "post")?;
                self.require_account(*author)?;
                check_body(body).map_err(|e| e.to_string())?;
                if let Some(pid) = in_reply_to {
                    self.require_post(*pid)?;
                }
                let mut seen = HashSet::new();
                for m in mentions {
                    self.require_account(*m)?;
                    if !seen.insert(*m) {
                        return Err(format!("duplicate mention {m}"));
                    }
                }
                self.posts.push(Post {
                    id: *id,
                    author: *author,
                    body: body.clone(),
                    created_at: now,
                    in_reply_to: *in_reply_to,
                    mentions: mentions.clone(),
                    seq: self.log.len() as u64 + 1,
                });
                self.favourite_counts.push(0);
            }
            Event::Favourited { actor, post } => {
                self.require_account(*actor)?;
                self.require_post(*post)?;
                if !self.favourites.insert((*actor, *post)) {
                    return Err("duplicate favourite".into());
                }
                self.favourite_counts[(post.0 - 1) as usize] += 1;
            }
            Event::Followed { actor, target } => {
                self.require_account(*actor)?;
                self.require_account(*target)?;
                if actor == target {
                    return Err("self follow".into());
                }
                if !self.follows.insert((*actor, *target)) {
                    return Err("duplicate follow".into());
                }
            }
            Event::NotificationCreated {
                id,
                recipient,
                kind,
                source,
                post,
            } => {
                expect_next(id.0, self.notifications.len(), "notification")?;
                self.require_account(*recipient)?;
                self.require_account(*source)?;
                if recipient == source {
                    return Err("self notification".into());
                }
                if kind.carries_post() != post.is_some() {
                    return Err(format!("{} notification post presence mismatch", kind.as_str()));
                }
                if let Some(p) = post {
                    self.require_post(*p)?;
                }
                self.notifications.push(Notification {
                    id: *id,
                    recipient: *recipient,
                    kind: *kind,
                    source: *source,
                    post: *post,
                    created_at: now,
                    read: false,
                });
            }
            Event::NotificationRead { id } => {
                let n = index(id.0)
                    .and_then(|i| self.notifications.get_mut(i))
                    .ok_or_else(|| format!("unknown notification {id}"))?;
                if n.read {
                    return Err(format!("notification {id} already read"));
                }
                n.read = true;
            }
            Event::TimelineFetched { account, posts } => {
                self.require_account(*account)?;
                for p in posts {
                    self.require_post(*p)?;
                }
            }
            Event::NotificationsFetched {
                account,
                notifications,
            } => {
                self.require_account(*account)?;
                for id in notifications {
                    match self.notification(*id) {
                        Some(n) if n.recipient == *account => {}
                        _ => return Err(format!("notification {id} not owned by {account}")),
                    }
                }
            }
        }
        Ok(())
    }

    fn require_account(&self, id: AccountId) -> Result<(), String> {
        self.account(id)
            .map(|_| ())
            .ok_or_else(|| format!("unknown account {id}"))
    }

    fn require_post(&self, id: PostId) -> Result<(), String> {
        self.post(id)
            .map(|_| ())
            .ok_or_else(|| format!("unknown post {id}"))
    }
}

fn index(id: u64) -> Option<usize> {
    id.checked_sub(1).map(|i| i as usize)
}

fn expect_next(id: u64, len: usize, what: &str) -> Result<(), String> {
    if id != len as u64 + 1 {
        return Err(format!("{what} id {id} out of sequence"));
    }
    Ok(())
}

pub fn check_body(body: &str) -> Result<(), StoreError> {
    match char_len(body) {
        0 => Err(StoreError::BodyEmpty),
        len if len > MAX_POST_CHARS => Err(StoreError::BodyTooLong { len }),
        _ => Ok(()),
    }
}
