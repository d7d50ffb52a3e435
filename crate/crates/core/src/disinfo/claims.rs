use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::social::{Post, PostId};

const DEFAULT_CLAIMS: &str = include_str!("../../data/claims.json");

/// A registered falsehood. A post carries the claim iff every keyword group
/// contributes at least one phrase found (case-insensitively) in the body.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub id: u32,
    pub canonical_text: String,
    pub keyword_groups: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimMatch {
    pub post: PostId,
    pub claim: u32,
    /// First matching phrase of each keyword group, in group order.
    pub matched_phrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClaimError {
    #[error("duplicate claim id {0}")]
    DuplicateId(u32),
    #[error("claim {0} has no keyword groups")]
    NoGroups(u32),
    #[error("claim {0} has an empty keyword group or phrase")]
    EmptyPhrase(u32),
    #[error("unknown claim id {0}")]
    UnknownClaim(u32),
    #[error("invalid claim file: {0}")]
    Parse(String),
}

/// The five shipped claims and their keyword inventory.
pub fn default_claims() -> Vec<Claim> {
    serde_json::from_str(DEFAULT_CLAIMS).expect("bundled claims.json is valid")
}

pub fn parse_claims(json: &str) -> Result<Vec<Claim>, ClaimError> {
    let claims: Vec<Claim> =
        serde_json::from_str(json).map_err(|e| ClaimError::Parse(e.to_string()))?;
    validate_claims(&claims)?;
    Ok(claims)
}

pub fn validate_claims(claims: &[Claim]) -> Result<(), ClaimError> {
    let mut ids = BTreeSet::new();
    for c in claims {
        if !ids.insert(c.id) {
            return Err(ClaimError::DuplicateId(c.id));
        }
        if c.keyword_groups.is_empty() {
            return Err(ClaimError::NoGroups(c.id));
        }
        if c
            .keyword_groups
            .iter()
            .any(|g| g.is_empty() || g.iter().any(|p| p.trim().is_empty()))
        {
            return Err(ClaimError::EmptyPhrase(c.id));
        }
    }
    Ok(())
}

pub(crate) fn normalize(body: &str) -> String {
    body.to_lowercase().replace('\u{2019}', "'")
}

impl Claim {
    /// Returns the phrase witnessing each group, or `None` if some group is unmatched.
    pub fn match_text(&self, body: &str) -> Option<Vec<String>> {
        let haystack = normalize(body);
        self.keyword_groups
            .iter()
            .map(|group| {
                group
                    .iter()
                    .find(|p| haystack.contains(&normalize(p)))
                    .cloned()
            })
            .collect()
    }
}

/// Claim matches for a post, in claim-id order.
pub fn tag_post(post: &Post, claims: &[Claim]) -> Vec<ClaimMatch> {
    tag_text(post.id, &post.body, claims)
}

pub fn tag_text(post: PostId, body: &str, claims: &[Claim]) -> Vec<ClaimMatch> {
    let mut ordered: Vec<&Claim> = claims.iter().collect();
    ordered.sort_by_key(|c| c.id);
    ordered
        .into_iter()
        .filter_map(|c| {
            c.match_text(body).map(|matched_phrases| ClaimMatch {
                post,
                claim: c.id,
                matched_phrases,
            })
        })
        .collect()
}
