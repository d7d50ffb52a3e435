//! Claim registry, deterministic tagging, propagation reports and
//! account-level detection features.

mod claims;
mod features;
mod report;

pub use claims::{
    default_claims, parse_claims, tag_post, tag_text, validate_claims, Claim, ClaimError, ClaimMatch,
};
pub use features::{extract_detection_features, DetectionFeatures};
pub use report::{
    build_propagation_report, propagation, ClaimPropagation, PropagationReport, ReportError, RunReport,
};
