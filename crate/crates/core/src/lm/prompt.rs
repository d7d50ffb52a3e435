use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::agent::Persona;
use crate::disinfo::{Claim, ClaimError};

pub const OUTPUT_FORMAT_VERSION: &str = "v1";

/// Orthography instruction emitted for the `lowercase-i` style rule.
pub const LOWERCASE_I_INSTRUCTION: &str =
    "Use colloquial orthography: write the pronoun \"i\" in lowercase and keep capitalization casual.";
pub const SHORTHAND_INSTRUCTION: &str =
    "Use social media shorthand where it fits (tbh, ngl, bc, imo, ppl).";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    /// Written by the bot itself.
    Agent,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub author_handle: String,
    pub post_id: Option<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_text: String,
    pub messages: Vec<Message>,
    pub focus_hint: Option<String>,
}

fn style_instruction(rule: &str) -> &str {
    match rule {
        "lowercase-i" => LOWERCASE_I_INSTRUCTION,
        "shorthand" => SHORTHAND_INSTRUCTION,
        "no-hashtags" => "Do not use hashtags.",
        "short" => "Keep posts short, one or two sentences.",
        other => other,
    }
}

fn output_format(version: &str) -> String {
    format!(
        "## output format ({version})\n\
         Think first, then choose exactly one action. Respond with a single JSON object and nothing else:\n\
         {{\"thought\": string, \"action\": \"post\"|\"reply\"|\"favourite\"|\"follow\"|\"none\", \"target\": string|null, \"body\": string|null}}\n\
         - post: body is a new status, target is null\n\
         - reply: target is the id of the post you answer, body is your reply (start it with @handle)\n\
         - favourite: target is a post id\n\
         - follow: target is an account id\n\
         - none: you have nothing to add; target and body are null\n\
         Bodies are at most 500 characters.\n"
    )
}

/// Builds the bot's system prompt. Section order is fixed: persona, stance,
/// talking points (claim-id ascending, each exactly once), style rules, output
/// format. Identical inputs give identical bytes.
pub fn assemble_system_prompt(
    persona: &Persona,
    claims: &[Claim],
    output_format_version: &str,
) -> Result<String, ClaimError> {
    let wanted: BTreeSet<u32> = persona.claims.iter().copied().collect();
    let mut points = Vec::with_capacity(wanted.len());
    for id in &wanted {
        let claim = claims
            .iter()
            .find(|c| c.id == *id)
            .ok_or(ClaimError::UnknownClaim(*id))?;
        points.push(claim);
    }

    let mut s = String::new();
    let _ = writeln!(s, "## persona\nYou are {} (@{}), a regular user of a small social network. {}\n", persona.name, persona.handle, persona.description.trim());
    let _ = writeln!(s, "## stance\n{}\n", persona.stance.trim());
    if !points.is_empty() {
        let _ = writeln!(s, "## talking points\nWork these points into whatever you post or reply, in your own words:");
        for c in &points {
            let _ = writeln!(s, "{}. {}", c.id, c.canonical_text);
        }
        s.push('\n');
    }
    if !persona.style_rules.is_empty() {
        let _ = writeln!(s, "## style");
        for rule in &persona.style_rules {
            let _ = writeln!(s, "- {}", style_instruction(rule));
        }
        s.push('\n');
    }
    s.push_str(&output_format(output_format_version));
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disinfo::default_claims;

    fn persona(claims: Vec<u32>, style: Vec<&str>) -> Persona {
        Persona {
            name: "Charlie".into(),
            handle: "charlie".into(),
            description: "A grad student who worries about privacy.".into(),
            style_rules: style.into_iter().map(String::from).collect(),
            stance: "Oppose Proposition 86.".into(),
            claims,
        }
    }

    #[test]
    fn all_claims_in_id_order() {
        let claims = default_claims();
        let p = assemble_system_prompt(&persona(vec![5, 3, 1, 4, 2, 3], vec![]), &claims, "v1").unwrap();
        assert!(p.contains("compel social media companies to share minors' data"));
        let positions: Vec<usize> = claims.iter().map(|c| p.find(&c.canonical_text).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        for c in &claims {
            assert_eq!(p.matches(&c.canonical_text).count(), 1);
        }
    }

    #[test]
    fn no_claims_no_talking_points() {
        let p = assemble_system_prompt(&persona(vec![], vec![]), &default_claims(), "v1").unwrap();
        assert!(!p.contains("talking points"));
    }

    #[test]
    fn orthography_rule() {
        let p = assemble_system_prompt(&persona(vec![1], vec!["lowercase-i", "be nice"]), &default_claims(), "v1").unwrap();
        assert!(p.contains(LOWERCASE_I_INSTRUCTION));
        assert!(p.contains("- be nice"));
    }

    #[test]
    fn section_order_and_determinism() {
        let claims = default_claims();
        let per = persona(vec![2], vec!["shorthand"]);
        let a = assemble_system_prompt(&per, &claims, "v1").unwrap();
        assert_eq!(a, assemble_system_prompt(&per, &claims, "v1").unwrap());
        let order = ["## persona", "## stance", "## talking points", "## style", "## output format (v1)"];
        let idx: Vec<usize> = order.iter().map(|h| a.find(h).unwrap()).collect();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn unknown_claim() {
        assert_eq!(
            assemble_system_prompt(&persona(vec![6], vec![]), &default_claims(), "v1"),
            Err(ClaimError::UnknownClaim(6))
        );
    }

    #[test]
    fn distinct_claim_sets_give_distinct_prompts() {
        let claims = default_claims();
        let mut seen = std::collections::HashSet::new();
        for mask in 0u32..32 {
            let ids: Vec<u32> = (1..=5).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let p = assemble_system_prompt(&persona(ids, vec![]), &claims, "v1").unwrap();
            assert!(seen.insert(p), "collision for mask {mask}");
        }
    }
}
