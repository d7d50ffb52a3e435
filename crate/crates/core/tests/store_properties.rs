use std::collections::HashSet;

use proptest::prelude::*;
use regex::Regex;
use sleeper_core::social::{parse_mentions, AccountId, AccountKind, EventLog, Store};

mod common;
use common::{build, op};

proptest! {
    #[test]
    fn replay_reproduces_the_log(ops in prop::collection::vec(op(), 0..80)) {
        let s = build(&ops);
        let text = s.log().to_jsonl();
        let entries = EventLog::from_jsonl_str(&text).unwrap();
        let replayed = Store::replay(&entries).unwrap();
        prop_assert_eq!(replayed.log().to_jsonl(), text);
        prop_assert_eq!(replayed.posts(), s.posts());
        prop_assert_eq!(replayed.notifications(), s.notifications());
    }

    #[test]
    fn references_resolve(ops in prop::collection::vec(op(), 0..80)) {
        let s = build(&ops);
        for n in s.notifications() {
            if let Some(p) = n.post {
                prop_assert!(s.post(p).is_some());
            }
            prop_assert!(s.account(n.recipient).is_some());
        }
        for p in s.posts() {
            for m in &p.mentions {
                prop_assert!(s.account(*m).is_some());
            }
            if let Some(parent) = p.in_reply_to {
                let parent = s.post(parent).unwrap();
                prop_assert!((parent.created_at, parent.seq) < (p.created_at, p.seq));
            }
        }
    }

    #[test]
    fn timeline_is_strictly_newest_first(ops in prop::collection::vec(op(), 0..80), limit in 1usize..60) {
        let mut s = build(&ops);
        let n = s.posts().len();
        let page = s.home_timeline(AccountId(1), limit).unwrap();
        prop_assert_eq!(page.len(), limit.min(n));
        prop_assert!(page.windows(2).all(|w| (w[0].created_at, w[0].seq) > (w[1].created_at, w[1].seq)));
    }

    #[test]
    fn body_length_limit(chars in prop::collection::vec(any::<char>(), 0..=600)) {
        let body: String = chars.iter().collect();
        let mut s = Store::new();
        let a = s.create_account("paul", "Paul", AccountKind::Facilitator).unwrap();
        let accepted = s.append_post(a, &body, None).is_ok();
        prop_assert_eq!(accepted, (1..=500).contains(&chars.len()));
    }
}

/// Independent scanner: a regex over the same token grammar.
fn oracle_mentions(body: &str, known: &HashSet<String>) -> Vec<String> {
    let re = Regex::new(r"@([A-Za-z0-9_]*)").unwrap();
    let mut out: Vec<String> = Vec::new();
    for cap in re.captures_iter(body) {
        let h = cap[1].to_ascii_lowercase();
        if known.contains(&h) && !out.contains(&h) {
            out.push(h);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn mentions_match_regex_oracle(body in "([a-zA-Z_ .,!?@é]|@paul|@Avery|@yejin_2|@@diego){0,40}") {
        let known: HashSet<String> = ["paul", "avery", "yejin_2", "diego", "yejin"].iter().map(|s| s.to_string()).collect();
        prop_assert_eq!(parse_mentions(&body, &known), oracle_mentions(&body, &known));
    }
}
