//! Wire representations. None of these carry the account kind: bots and humans
//! look the same to every client.

use serde::{Deserialize, Serialize};

use crate::social::{Account, Notification, NotificationKind, Post, Store};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountView {
    pub id: String,
    pub handle: String,
    pub display_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionView {
    pub id: String,
    pub handle: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusView {
    pub id: String,
    pub account: AccountView,
    pub content: String,
    pub created_at: u64,
    pub in_reply_to_id: Option<String>,
    pub mentions: Vec<MentionView>,
    pub favourites_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NotificationView {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: NotificationKind,
    pub account: AccountView,
    pub status: Option<StatusView>,
    pub created_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FollowView {
    pub id: String,
    pub following: bool,
}

impl AccountView {
    pub fn of(account: &Account) -> Self {
        AccountView {
            id: account.id.to_string(),
            handle: account.handle.clone(),
            display_name: account.display_name.clone(),
        }
    }
}

impl StatusView {
    pub fn of(store: &Store, post: &Post) -> Self {
        let author = store.account(post.author).expect("post author exists");
        StatusView {
            id: post.id.to_string(),
            account: AccountView::of(author),
            content: post.body.clone(),
            created_at: post.created_at,
            in_reply_to_id: post.in_reply_to.map(|p| p.to_string()),
            mentions: post
                .mentions
                .iter()
                .filter_map(|id| store.account(*id))
                .map(|a| MentionView {
                    id: a.id.to_string(),
                    handle: a.handle.clone(),
                })
                .collect(),
            favourites_count: store.favourites_count(post.id),
        }
    }
}

impl NotificationView {
    pub fn of(store: &Store, n: &Notification) -> Self {
        let source = store.account(n.source).expect("notification source exists");
        NotificationView {
            id: n.id.to_string(),
            kind: n.kind,
            account: AccountView::of(source),
            status: n
                .post
                .and_then(|p| store.post(p))
                .map(|p| StatusView::of(store, p)),
            created_at: n.created_at,
        }
    }
}
