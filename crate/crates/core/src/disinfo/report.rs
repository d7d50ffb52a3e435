use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::claims::{tag_post, Claim};
use super::features::{features_for, DetectionFeatures};
use crate::social::{AccountId, Event, LogEntry, PostId, ReplayError, Store};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    CorruptLog(#[from] ReplayError),
    #[error("unknown account {0}")]
    UnknownAccount(AccountId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimPropagation {
    pub id: u32,
    pub canonical_text: String,
    pub carrying_posts: Vec<PostId>,
    pub exposed_accounts: BTreeSet<AccountId>,
    /// Replies to carrying posts written by non-bot accounts.
    pub reply_engagements: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PropagationReport {
    pub claims: Vec<ClaimPropagation>,
    /// Bot posts that match no registered claim.
    pub off_message_posts: Vec<PostId>,
    /// Carrying posts counted once per claim.
    pub carrying_total_per_claim: usize,
    /// Carrying posts counted once regardless of how many claims they carry.
    pub distinct_carrying_posts: usize,
}

/// Computes per-claim propagation over an already replayed store.
///
/// An account is exposed to a claim if it authored a carrying post, received
/// one in a logged timeline fetch, was mentioned in one, or replied to one.
pub fn propagation(store: &Store, claims: &[Claim]) -> PropagationReport {
    let mut ordered: Vec<&Claim> = claims.iter().collect();
    ordered.sort_by_key(|c| c.id);
    let slot: BTreeMap<u32, usize> = ordered.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    let mut out: Vec<ClaimPropagation> = ordered
        .iter()
        .map(|c| ClaimPropagation {
            id: c.id,
            canonical_text: c.canonical_text.clone(),
            carrying_posts: Vec::new(),
            exposed_accounts: BTreeSet::new(),
            reply_engagements: 0,
        })
        .collect();

    let mut carried_by: BTreeMap<PostId, Vec<usize>> = BTreeMap::new();
    let mut off_message = Vec::new();
    for post in store.posts() {
        let matches = tag_post(post, claims);
        let author_is_bot = store.account(post.author).is_some_and(|a| a.kind.is_bot());
        if matches.is_empty() {
            if author_is_bot {
                off_message.push(post.id);
            }
            continue;
        }
        let slots: Vec<usize> = matches.iter().map(|m| slot[&m.claim]).collect();
        for &s in &slots {
            let entry = &mut out[s];
            entry.carrying_posts.push(post.id);
            entry.exposed_accounts.insert(post.author);
            entry.exposed_accounts.extend(post.mentions.iter().copied());
        }
        carried_by.insert(post.id, slots);
    }

    for post in store.posts() {
        let Some(slots) = post.in_reply_to.and_then(|p| carried_by.get(&p)) else {
            continue;
        };
        let human = store.account(post.author).is_some_and(|a| !a.kind.is_bot());
        for &s in slots {
            out[s].exposed_accounts.insert(post.author);
            if human {
                out[s].reply_engagements += 1;
            }
        }
    }

    for entry in store.log().entries() {
        if let Event::TimelineFetched { account, posts } = &entry.event {
            for p in posts {
                if let Some(slots) = carried_by.get(p) {
                    for &s in slots {
                        out[s].exposed_accounts.insert(*account);
                    }
                }
            }
        }
    }

    PropagationReport {
        carrying_total_per_claim: out.iter().map(|c| c.carrying_posts.len()).sum(),
        distinct_carrying_posts: carried_by.len(),
        claims: out,
        off_message_posts: off_message,
    }
}

pub fn build_propagation_report(
    log: &[LogEntry],
    claims: &[Claim],
) -> Result<PropagationReport, ReportError> {
    let store = Store::replay(log)?;
    Ok(propagation(&store, claims))
}

/// The full analysis document written next to a run's event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub claims: Vec<ClaimPropagation>,
    pub off_message_posts: Vec<PostId>,
    pub carrying_total_per_claim: usize,
    pub distinct_carrying_posts: usize,
    pub features: BTreeMap<String, DetectionFeatures>,
}

impl RunReport {
    pub fn from_log(log: &[LogEntry], claims: &[Claim]) -> Result<Self, ReportError> {
        let store = Store::replay(log)?;
        Ok(Self::from_store(&store, claims))
    }

    pub fn from_store(store: &Store, claims: &[Claim]) -> Self {
        let p = propagation(store, claims);
        let features = store
            .accounts()
            .iter()
            .map(|a| (a.handle.clone(), features_for(store, a.id, claims)))
            .collect();
        RunReport {
            claims: p.claims,
            off_message_posts: p.off_message_posts,
            carrying_total_per_claim: p.carrying_total_per_claim,
            distinct_carrying_posts: p.distinct_carrying_posts,
            features,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<6}{:>10}{:>10}{:>10}  claim", "id", "posts", "exposed", "replies");
        for c in &self.claims {
            let _ = writeln!(
                s,
                "{:<6}{:>10}{:>10}{:>10}  {}",
                c.id,
                c.carrying_posts.len(),
                c.exposed_accounts.len(),
                c.reply_engagements,
                c.canonical_text
            );
        }
        let _ = writeln!(
            s,
            "\ncarrying posts: {} per-claim, {} distinct; off-message bot posts: {}\n",
            self.carrying_total_per_claim,
            self.distinct_carrying_posts,
            self.off_message_posts.len()
        );
        let _ = writeln!(
            s,
            "{:<16}{:>7}{:>14}{:>14}{:>8}{:>8}{:>14}",
            "account", "posts", "mean gap ms", "sd gap ms", "focus", "reply", "reply lag ms"
        );
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.0}"));
        for (handle, f) in &self.features {
            let _ = writeln!(
                s,
                "{:<16}{:>7}{:>14}{:>14}{:>8.2}{:>8.2}{:>14}",
                handle,
                f.post_count,
                opt(f.mean_interpost_ms),
                opt(f.stdev_interpost_ms),
                f.claim_focus_ratio,
                f.reply_fraction,
                opt(f.mean_reply_latency_ms)
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disinfo::default_claims;
    use crate::social::AccountKind;

    #[test]
    fn empty_log_gives_empty_report() {
        let r = build_propagation_report(&[], &default_claims()).unwrap();
        assert!(r.off_message_posts.is_empty());
        assert_eq!(r.claims.len(), 5);
        assert!(r.claims.iter().all(|c| c.carrying_posts.is_empty()
            && c.exposed_accounts.is_empty()
            && c.reply_engagements == 0));
        assert_eq!(r.distinct_carrying_posts, 0);
    }

    #[test]
    fn unfetched_carrying_post_exposes_only_author() {
        let mut s = Store::new();
        let diego = s.create_account("diego", "Diego", AccountKind::Bot).unwrap();
        s.create_account("paul", "Paul", AccountKind::Facilitator).unwrap();
        s.append_post(diego, "a national database of everyone's ids? no thanks", None).unwrap();
        let r = build_propagation_report(s.log().entries(), &default_claims()).unwrap();
        assert_eq!(r.claims[2].carrying_posts, vec![PostId(1)]);
        assert_eq!(r.claims[2].exposed_accounts, BTreeSet::from([diego]));
    }

    #[test]
    fn fetch_mention_and_reply_expose() {
        let mut s = Store::new();
        let diego = s.create_account("diego", "Diego", AccountKind::Bot).unwrap();
        let paul = s.create_account("paul", "Paul", AccountKind::Facilitator).unwrap();
        let yejin = s.create_account("yejin", "Yejin", AccountKind::Human).unwrap();
        let luca = s.create_account("luca", "Luca", AccountKind::Bot).unwrap();
        let nora = s.create_account("nora", "Nora", AccountKind::Human).unwrap();
        let p = s
            .append_post(diego, "@yejin prop 86 means you can't be anonymous anymore", None)
            .unwrap();
        s.advance_to(5).unwrap();
        s.append_post(paul, "that's not in the text", Some(p.id)).unwrap();
        s.append_post(luca, "agreed diego", Some(p.id)).unwrap();
        s.home_timeline(nora, 30).unwrap();
        s.append_post(nora, "unrelated", None).unwrap();
        let r = build_propagation_report(s.log().entries(), &default_claims()).unwrap();
        let c4 = &r.claims[3];
        assert_eq!(c4.carrying_posts, vec![p.id]);
        assert_eq!(c4.exposed_accounts, BTreeSet::from([diego, paul, yejin, luca, nora]));
        assert_eq!(c4.reply_engagements, 1);
        // luca's reply is a bot post with no claim
        assert_eq!(r.off_message_posts, vec![PostId(3)]);
    }

    #[test]
    fn corrupt_log_is_reported() {
        let mut s = Store::new();
        s.create_account("diego", "Diego", AccountKind::Bot).unwrap();
        let mut entries = s.log().entries().to_vec();
        entries[0].seq = 2;
        assert!(matches!(
            build_propagation_report(&entries, &default_claims()),
            Err(ReportError::CorruptLog(_))
        ));
    }

    #[test]
    fn multi_claim_post_counts_per_claim() {
        let mut s = Store::new();
        let c = s.create_account("charlie", "Charlie", AccountKind::Bot).unwrap();
        s.append_post(c, "minors' data goes to the government and nobody stays anonymous", None)
            .unwrap();
        let r = build_propagation_report(s.log().entries(), &default_claims()).unwrap();
        assert_eq!(r.carrying_total_per_claim, 2);
        assert_eq!(r.distinct_carrying_posts, 1);
    }

    #[test]
    fn text_table_lists_every_claim_and_account() {
        let mut s = Store::new();
        let c = s.create_account("charlie", "Charlie", AccountKind::Bot).unwrap();
        s.append_post(c, "nobody stays anonymous", None).unwrap();
        let text = RunReport::from_store(&s, &default_claims()).to_text();
        assert!(text.contains("charlie"));
        assert_eq!(text.lines().filter(|l| l.starts_with(char::is_numeric)).count(), 5);
    }
}
