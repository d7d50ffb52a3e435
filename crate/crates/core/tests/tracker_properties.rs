use std::collections::BTreeSet;

use proptest::prelude::*;
use sleeper_core::disinfo::{build_propagation_report, default_claims, extract_detection_features, tag_post};
use sleeper_core::social::{AccountId, EventLog};

mod common;
use common::{build, op, HANDLES};

proptest! {
    #[test]
    fn tagging_is_pure(ops in prop::collection::vec(op(), 0..60)) {
        let s = build(&ops);
        let claims = default_claims();
        for p in s.posts() {
            prop_assert_eq!(tag_post(p, &claims), tag_post(p, &claims));
        }
    }

    #[test]
    fn report_conservation(ops in prop::collection::vec(op(), 0..80)) {
        let s = build(&ops);
        let r = build_propagation_report(s.log().entries(), &default_claims()).unwrap();
        prop_assert!(r.carrying_total_per_claim >= r.distinct_carrying_posts);
        let carrying: BTreeSet<_> = r.claims.iter().flat_map(|c| c.carrying_posts.iter().copied()).collect();
        prop_assert_eq!(carrying.len(), r.distinct_carrying_posts);
        prop_assert!(r.off_message_posts.iter().all(|p| !carrying.contains(p)));
        for c in &r.claims {
            for p in &c.carrying_posts {
                prop_assert!(c.exposed_accounts.contains(&s.post(*p).unwrap().author));
            }
        }
    }

    #[test]
    fn exposure_never_shrinks(ops in prop::collection::vec(op(), 0..80), cut in 0.0f64..1.0) {
        let s = build(&ops);
        let entries = s.log().entries();
        let k = (entries.len() as f64 * cut) as usize;
        let claims = default_claims();
        let early = build_propagation_report(&entries[..k], &claims).unwrap();
        let full = build_propagation_report(entries, &claims).unwrap();
        for (a, b) in early.claims.iter().zip(&full.claims) {
            prop_assert!(a.exposed_accounts.is_subset(&b.exposed_accounts));
        }
    }

    #[test]
    fn feature_sanity(ops in prop::collection::vec(op(), 0..100)) {
        let s = build(&ops);
        let text = s.log().to_jsonl();
        let log = EventLog::from_jsonl_str(&text).unwrap();
        for i in 0..HANDLES.len() {
            let id = AccountId(i as u64 + 1);
            let f = extract_detection_features(&log, id, &default_claims()).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.claim_focus_ratio));
            prop_assert!((0.0..=1.0).contains(&f.reply_fraction));
            let times: Vec<u64> = s.posts().iter().filter(|p| p.author == id).map(|p| p.created_at).collect();
            prop_assert_eq!(f.post_count, times.len());
            prop_assert_eq!(f.stdev_interpost_ms.is_some(), times.len() >= 2);
            if let Some(sd) = f.stdev_interpost_ms {
                let gaps: Vec<u64> = times.windows(2).map(|w| w[1] - w[0]).collect();
                prop_assert_eq!(sd == 0.0, gaps.iter().all(|g| *g == gaps[0]));
            }
        }
    }
}
