use serde::{Deserialize, Serialize};

use super::claims::{tag_post, Claim};
use super::report::ReportError;
use crate::social::{AccountId, LogEntry, Post, Store};

/// Account-level posting signals. Interval statistics use the population
/// standard deviation and are absent below two posts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionFeatures {
    pub post_count: usize,
    pub mean_interpost_ms: Option<f64>,
    pub stdev_interpost_ms: Option<f64>,
    pub claim_focus_ratio: f64,
    pub reply_fraction: f64,
    pub mean_reply_latency_ms: Option<f64>,
}

pub fn extract_detection_features(
    log: &[LogEntry],
    account: AccountId,
    claims: &[Claim],
) -> Result<DetectionFeatures, ReportError> {
    let store = Store::replay(log)?;
    if store.account(account).is_none() {
        return Err(ReportError::UnknownAccount(account));
    }
    Ok(features_for(&store, account, claims))
}

pub(crate) fn features_for(store: &Store, account: AccountId, claims: &[Claim]) -> DetectionFeatures {
    let posts: Vec<&Post> = store.posts().iter().filter(|p| p.author == account).collect();
    let n = posts.len();

    let gaps: Vec<u64> = posts.windows(2).map(|w| w[1].created_at - w[0].created_at).collect();
    let (mean_interpost_ms, stdev_interpost_ms) = match mean_u64(&gaps) {
        Some(mean) => {
            let var = gaps.iter().map(|&g| (g as f64 - mean).powi(2)).sum::<f64>() / gaps.len() as f64;
            (Some(mean), Some(var.sqrt()))
        }
        None => (None, None),
    };

    let focused = posts.iter().filter(|p| !tag_post(p, claims).is_empty()).count();
    let latencies: Vec<u64> = posts
        .iter()
        .filter_map(|reply| {
            let parent = store.post(reply.in_reply_to?)?;
            Some(reply.created_at - parent.created_at)
        })
        .collect();

    let ratio = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    DetectionFeatures {
        post_count: n,
        mean_interpost_ms,
        stdev_interpost_ms,
        claim_focus_ratio: ratio(focused),
        reply_fraction: ratio(latencies.len()),
        mean_reply_latency_ms: mean_u64(&latencies),
    }
}

fn mean_u64(xs: &[u64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let total: u128 = xs.iter().map(|&x| x as u128).sum();
    Some(total as f64 / xs.len() as f64)
}
