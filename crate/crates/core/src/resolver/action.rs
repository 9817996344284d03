//! Wire grammar for agent replies.
//!
//! A reply carries either exactly one search invocation on its own line:
//!
//! ```text
//! search_class("Name")
//! search_method("name")
//! search_method("name", scope="ClassOrFile")
//! search_code("verbatim fragment")
//! ```
//!
//! or one or more patch blocks:
//!
//! ```text
//! PATCH: relative/path.py
//! <<< BEFORE
//! lines copied exactly from the file
//! === AFTER
//! replacement lines
//! >>> END
//! ```
//!
//! String arguments use double quotes with `\\`, `\"`, `\n` and `\t`
//! escapes. When a reply mixes prose with invocations, the last well-formed
//! search invocation wins; any patch block outranks search invocations.

/// One `(file, original snippet, replacement snippet)` replacement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchTriple {
    pub file: String,
    pub before: String,
    pub after: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AgentAction {
    SearchClass { name: String },
    SearchMethod { name: String, scope: Option<String> },
    SearchCode { fragment: String },
    ProposePatch { triples: Vec<PatchTriple> },
}

/// Parse outcome; an unparseable reply becomes a reformat request that
/// costs the agent a tool round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParsedReply {
    Action(AgentAction),
    ParseError,
}

pub fn parse_action(reply: &str) -> ParsedReply {
    let triples = parse_patch_blocks(reply);
    if !triples.is_empty() {
        return ParsedReply::Action(AgentAction::ProposePatch { triples });
    }
    match last_search_invocation(reply) {
        Some(action) => ParsedReply::Action(action),
        None => ParsedReply::ParseError,
    }
}

fn parse_patch_blocks(reply: &str) -> Vec<PatchTriple> {
    let mut triples = Vec::new();
    let lines: Vec<&str> = reply.lines().collect();
    let mut i = 0;
    while i < lines.len() {
        let line = lines[i].trim_end();
        let Some(file) = line.strip_prefix("PATCH: ") else {
            i += 1;
            continue;
        };
        let file = file.trim().to_string();
        if file.is_empty() || i + 1 >= lines.len() || lines[i + 1].trim_end() != "<<< BEFORE" {
            i += 1;
            continue;
        }
        let mut before = Vec::new();
        let mut after = Vec::new();
        let mut j = i + 2;
        let mut section = &mut before;
        let mut complete = false;
        while j < lines.len() {
            match lines[j].trim_end() {
                "=== AFTER" => section = &mut after,
                ">>> END" => {
                    complete = true;
                    break;
                }
                _ => section.push(lines[j]),
            }
            j += 1;
        }
        if complete {
            triples.push(PatchTriple {
                file,
                before: before.join("\n"),
                after: after.join("\n"),
            });
            i = j + 1;
        } else {
            i += 1;
        }
    }
    triples
}

fn last_search_invocation(reply: &str) -> Option<AgentAction> {
    let mut best: Option<(usize, AgentAction)> = None;
    for head in ["search_class", "search_method", "search_code"] {
        let needle = format!("{head}(");
        let mut from = 0;
        while let Some(pos) = reply[from..].find(&needle) {
            let at = from + pos;
            if let Some(action) = parse_invocation_at(reply, at, head) {
                match &best {
                    Some((best_at, _)) if *best_at >= at => {}
                    _ => best = Some((at, action)),
                }
            }
            from = at + needle.len();
        }
    }
    best.map(|(_, action)| action)
}

fn parse_invocation_at(reply: &str, at: usize, head: &str) -> Option<AgentAction> {
    let args_start = at + head.len() + 1;
    let rest = &reply[args_start..];
    let (first, consumed) = parse_string_literal(rest)?;
    let mut cursor = consumed;

    let mut scope = None;
    let tail = rest[cursor..].trim_start();
    if let Some(after_comma) = tail.strip_prefix(',') {
        let after_comma = after_comma.trim_start();
        let keyed = after_comma.strip_prefix("scope=")?;
        let (value, used) = parse_string_literal(keyed)?;
        scope = Some(value);
        cursor = rest.len() - (keyed.len() - used);
    } else {
        cursor += rest[cursor..].len() - tail.len();
    }
    if !rest[cursor..].trim_start().starts_with(')') {
        return None;
    }

    match head {
        "search_class" => Some(AgentAction::SearchClass { name: first }),
        "search_method" => Some(AgentAction::SearchMethod { name: first, scope }),
        "search_code" => Some(AgentAction::SearchCode { fragment: first }),
        _ => None,
    }
}

/// Parse a double-quoted string literal at the start of `text` (leading
/// whitespace allowed). Returns the unescaped value and bytes consumed.
fn parse_string_literal(text: &str) -> Option<(String, usize)> {
    let trimmed = text.trim_start();
    let skipped = text.len() - trimmed.len();
    let mut chars = trimmed.char_indices();
    match chars.next() {
        Some((_, '"')) => {}
        _ => return None,
    }
    let mut value = String::new();
    let mut escaped = false;
    for (i, c) in chars {
        if escaped {
            match c {
                'n' => value.push('\n'),
                't' => value.push('\t'),
                '\\' => value.push('\\'),
                '"' => value.push('"'),
                other => value.push(other),
            }
            escaped = false;
        } else if c == '\\' {
            escaped = true;
        } else if c == '"' {
            return Some((value, skipped + i + 1));
        } else {
            value.push(c);
        }
    }
    None
}
