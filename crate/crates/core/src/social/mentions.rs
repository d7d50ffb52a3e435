use std::collections::HashSet;

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Extracts `@handle` mentions of known accounts from a post body.
///
/// A token is `@` followed by the longest run of `[A-Za-z0-9_]`. Matching is
/// case-insensitive, results are lowercase, deduplicated, and in order of first
/// occurrence. Handles not in `known_handles` are dropped.
pub fn parse_mentions<S>(body: &str, known_handles: &HashSet<String, S>) -> Vec<String>
where
    S: std::hash::BuildHasher,
{
    let mut found: Vec<String> = Vec::new();
    let mut rest = body;
    while let Some(at) = rest.find('@') {
        let after = &rest[at + 1..];
        let end = after
            .char_indices()
            .find(|&(_, c)| !is_handle_char(c))
            .map_or(after.len(), |(i, _)| i);
        let handle = after[..end].to_ascii_lowercase();
        if !handle.is_empty() && known_handles.contains(&handle) && !found.contains(&handle) {
            found.push(handle);
        }
        rest = &after[end..];
    }
    found
}
