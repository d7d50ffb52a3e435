use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Virtual-clock time in milliseconds since the start of a run.
pub type Millis = u64;

/// Maximum post length, counted in Unicode scalar values.
pub const MAX_POST_CHARS: usize = 500;

/// Maximum handle length.
pub const MAX_HANDLE_CHARS: usize = 30;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub u64);

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }

        impl FromStr for $name {
            type Err = std::num::ParseIntError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                s.parse().map($name)
            }
        }
    };
}

id_type!(
    /// Identifier of an account, allocated sequentially from 1.
    AccountId
);
id_type!(
    /// Identifier of a post, allocated sequentially from 1.
    PostId
);
id_type!(
    /// Identifier of a notification, allocated sequentially from 1.
    NotificationId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccountKind {
    Bot,
    Human,
    Facilitator,
}

impl AccountKind {
    pub fn is_bot(self) -> bool {
        self == AccountKind::Bot
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AccountKind::Bot => "bot",
            AccountKind::Human => "human",
            AccountKind::Facilitator => "facilitator",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Account {
    pub id: AccountId,
    pub handle: String,
    pub display_name: String,
    pub kind: AccountKind,
    pub created_at: Millis,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Post {
    pub id: PostId,
    pub author: AccountId,
    pub body: String,
    pub created_at: Millis,
    pub in_reply_to: Option<PostId>,
    pub mentions: Vec<AccountId>,
    /// Sequence number of the `post_created` event; breaks timestamp ties.
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotificationKind {
    Mention,
    Reply,
    Favourite,
    Follow,
}

impl NotificationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NotificationKind::Mention => "mention",
            NotificationKind::Reply => "reply",
            NotificationKind::Favourite => "favourite",
            NotificationKind::Follow => "follow",
        }
    }

    /// Whether notifications of this kind always reference a post.
    pub fn carries_post(self) -> bool {
        !matches!(self, NotificationKind::Follow)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub id: NotificationId,
    pub recipient: AccountId,
    pub kind: NotificationKind,
    pub source: AccountId,
    pub post: Option<PostId>,
    pub created_at: Millis,
    pub read: bool,
}

/// Character count as users see it.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

pub fn is_valid_handle(handle: &str) -> bool {
    !handle.is_empty()
        && handle.len() <= MAX_HANDLE_CHARS
        && handle
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}
