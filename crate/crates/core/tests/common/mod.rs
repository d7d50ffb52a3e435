use proptest::prelude::*;
use sleeper_core::social::{AccountId, AccountKind, NotificationId, PostId, Store, StoreError};

pub const HANDLES: [&str; 4] = ["avery", "paul", "yejin", "diego"];

#[derive(Debug, Clone)]
pub enum Op {
    Advance(u16),
    Post { author: u8, words: Vec<u8>, reply_to: Option<u8> },
    Favourite { actor: u8, post: u8 },
    Follow { actor: u8, target: u8 },
    Timeline { viewer: u8, limit: u8 },
    Notifications { viewer: u8, unread: bool },
    MarkRead { viewer: u8, id: u8 },
}

pub const WORDS: [&str; 8] = ["@paul", "@avery", "@nobody", "database", "hi", "@YEJIN", "kids", "x@diego"];

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        (0u16..5_000).prop_map(Op::Advance),
        (0u8..4, prop::collection::vec(0u8..8, 1..6), prop::option::of(0u8..20))
            .prop_map(|(author, words, reply_to)| Op::Post { author, words, reply_to }),
        (0u8..4, 0u8..20).prop_map(|(actor, post)| Op::Favourite { actor, post }),
        (0u8..4, 0u8..4).prop_map(|(actor, target)| Op::Follow { actor, target }),
        (0u8..4, 1u8..40).prop_map(|(viewer, limit)| Op::Timeline { viewer, limit }),
        (0u8..4, any::<bool>()).prop_map(|(viewer, unread)| Op::Notifications { viewer, unread }),
        (0u8..4, 0u8..30).prop_map(|(viewer, id)| Op::MarkRead { viewer, id }),
    ]
}

pub fn build(ops: &[Op]) -> Store {
    let mut s = Store::new();
    for (i, h) in HANDLES.iter().enumerate() {
        let kind = if i % 2 == 0 { AccountKind::Bot } else { AccountKind::Facilitator };
        s.create_account(h, h, kind).unwrap();
    }
    let acct = |i: u8| AccountId(u64::from(i) + 1);
    for op in ops {
        // rejected operations are part of the exercise; they must not log anything
        let before = s.log().len();
        let result: Result<(), StoreError> = match op {
            Op::Advance(d) => s.advance_to(s.now() + u64::from(*d)),
            Op::Post { author, words, reply_to } => {
                let body: Vec<&str> = words.iter().map(|w| WORDS[*w as usize]).collect();
                s.append_post(acct(*author), &body.join(" "), reply_to.map(|p| PostId(u64::from(p) + 1)))
                    .map(|_| ())
            }
            Op::Favourite { actor, post } => s.favourite_post(acct(*actor), PostId(u64::from(*post) + 1)).map(|_| ()),
            Op::Follow { actor, target } => s.follow_account(acct(*actor), acct(*target)).map(|_| ()),
            Op::Timeline { viewer, limit } => s.home_timeline(acct(*viewer), *limit as usize).map(|_| ()),
            Op::Notifications { viewer, unread } => s.notifications_for(acct(*viewer), *unread).map(|_| ()),
            Op::MarkRead { viewer, id } => s
                .mark_notification_read(acct(*viewer), NotificationId(u64::from(*id) + 1))
                .map(|_| ()),
        };
        if result.is_err() {
            assert_eq!(s.log().len(), before, "{op:?} failed but logged");
        }
    }
    s
}

