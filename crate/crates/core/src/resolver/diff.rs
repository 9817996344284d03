//! Unified-diff generation and application.
//!
//! Diffs are built from snippet replacements: each triple's original text
//! must occur exactly once in its file. Output is a standard unified diff
//! with three context lines, `a/`–`b/` path labels relative to the
//! workspace root, and per-file hunks concatenated in path order. The
//! applier is strict: context must match at the stated line numbers.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use super::action::PatchTriple;

pub const CONTEXT_LINES: usize = 3;

/// Above this many DP cells the changed region is emitted as a plain
/// delete-then-insert block instead of a minimal diff.
const MAX_LCS_CELLS: usize = 4_000_000;

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("patch path {0:?} escapes the workspace")]
    PathEscape(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("original snippet not found in {file}")]
    SnippetNotFound { file: String },
    #[error("original snippet occurs {count} times in {file}; it must be unique")]
    SnippetAmbiguous { file: String, count: usize },
    #[error("an original snippet must not be empty")]
    EmptySnippet,
    #[error("replacement changes nothing")]
    NoChanges,
}

#[derive(Debug, Error)]
pub enum ApplyError {
    #[error("malformed diff: {0}")]
    Malformed(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("hunk at {file}:{line} does not match the file: {detail}")]
    ContextMismatch {
        file: String,
        line: u32,
        detail: String,
    },
}

/// Compute a unified diff for the given snippet replacements.
pub fn build_diff(workspace: &Path, triples: &[PatchTriple]) -> Result<String, DiffError> {
    // Group by file, preserving triple order within a file.
    let mut by_file: BTreeMap<String, Vec<&PatchTriple>> = BTreeMap::new();
    for triple in triples {
        check_path(&triple.file)?;
        by_file.entry(triple.file.clone()).or_default().push(triple);
    }

    let mut out = String::new();
    for (file, triples) in &by_file {
        let path = workspace.join(file);
        let original = std::fs::read_to_string(&path).map_err(|source| DiffError::Io {
            path: file.clone(),
            source,
        })?;
        let mut current = original.clone();
        for triple in triples {
            if triple.before.is_empty() {
                return Err(DiffError::EmptySnippet);
            }
            let count = current.matches(&triple.before).count();
            match count {
                0 => {
                    return Err(DiffError::SnippetNotFound { file: file.clone() });
                }
                1 => current = current.replacen(&triple.before, &triple.after, 1),
                n => {
                    return Err(DiffError::SnippetAmbiguous {
                        file: file.clone(),
                        count: n,
                    });
                }
            }
        }
        if let Some(file_diff) = unified_file_diff(file, &original, &current, CONTEXT_LINES) {
            out.push_str(&file_diff);
        }
    }
    if out.is_empty() {
        return Err(DiffError::NoChanges);
    }
    Ok(out)
}

fn check_path(path: &str) -> Result<(), DiffError> {
    let escapes = path.starts_with('/')
        || path.contains('\\')
        || path.split('/').any(|seg| seg == ".." || seg.is_empty());
    if escapes {
        return Err(DiffError::PathEscape(path.to_string()));
    }
    Ok(())
}

/// Lines without terminators plus whether the text ends in a newline.
fn split_lines(text: &str) -> (Vec<&str>, bool) {
    if text.is_empty() {
        return (Vec::new(), true);
    }
    let trailing = text.ends_with('\n');
    let body = if trailing {
        &text[..text.len() - 1]
    } else {
        text
    };
    (body.split('\n').collect(), trailing)
}

/// A line with its newline status. The status is part of line identity: the
/// final line of a file without a trailing newline never equals the same
/// text with one, which is what makes `\ No newline` handling fall out of
/// the ordinary edit script.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Line<'a> {
    text: &'a str,
    has_newline: bool,
}

fn augmented_lines(text: &str) -> Vec<Line<'_>> {
    let (lines, trailing) = split_lines(text);
    let last = lines.len().saturating_sub(1);
    lines
        .iter()
        .enumerate()
        .map(|(i, text)| Line {
            text,
            has_newline: trailing || i != last,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Equal,
    Delete,
    Insert,
}

/// Line-level edit script, minimal inside the changed region.
fn diff_ops(old: &[Line], new: &[Line]) -> Vec<Op> {
    // Trim the common prefix and suffix; snippet replacements leave most
    // of a file untouched.
    let mut prefix = 0;
    while prefix < old.len() && prefix < new.len() && old[prefix] == new[prefix] {
        prefix += 1;
    }
    let mut suffix = 0;
    while suffix < old.len() - prefix
        && suffix < new.len() - prefix
        && old[old.len() - 1 - suffix] == new[new.len() - 1 - suffix]
    {
        suffix += 1;
    }
    let old_mid = &old[prefix..old.len() - suffix];
    let new_mid = &new[prefix..new.len() - suffix];

    let mut ops = vec![Op::Equal; prefix];
    ops.extend(mid_ops(old_mid, new_mid));
    ops.extend(std::iter::repeat_n(Op::Equal, suffix));
    ops
}

fn mid_ops(old: &[Line], new: &[Line]) -> Vec<Op> {
    if old.is_empty() {
        return vec![Op::Insert; new.len()];
    }
    if new.is_empty() {
        return vec![Op::Delete; old.len()];
    }
    if old.len().saturating_mul(new.len()) > MAX_LCS_CELLS {
        let mut ops = vec![Op::Delete; old.len()];
        ops.extend(std::iter::repeat_n(Op::Insert, new.len()));
        return ops;
    }

    // Longest-common-subsequence table; lcs[i][j] covers old[i..], new[j..].
    let rows = old.len() + 1;
    let cols = new.len() + 1;
    let mut lcs = vec![0u32; rows * cols];
    for i in (0..old.len()).rev() {
        for j in (0..new.len()).rev() {
            lcs[i * cols + j] = if old[i] == new[j] {
                lcs[(i + 1) * cols + j + 1] + 1
            } else {
                lcs[(i + 1) * cols + j].max(lcs[i * cols + j + 1])
            };
        }
    }

    let mut ops = Vec::with_capacity(old.len() + new.len());
    let (mut i, mut j) = (0, 0);
    while i < old.len() && j < new.len() {
        if old[i] == new[j] {
            ops.push(Op::Equal);
            i += 1;
            j += 1;
        } else if lcs[(i + 1) * cols + j] >= lcs[i * cols + j + 1] {
            ops.push(Op::Delete);
            i += 1;
        } else {
            ops.push(Op::Insert);
            j += 1;
        }
    }
    ops.extend(std::iter::repeat_n(Op::Delete, old.len() - i));
    ops.extend(std::iter::repeat_n(Op::Insert, new.len() - j));
    ops
}

/// Unified diff for one file, or `None` when contents are identical.
pub fn unified_file_diff(path: &str, old: &str, new: &str, context: usize) -> Option<String> {
    if old == new {
        return None;
    }
    let old_lines = augmented_lines(old);
    let new_lines = augmented_lines(new);
    let ops = diff_ops(&old_lines, &new_lines);

    // Indices of non-equal ops, grouped into hunks when separated by more
    // than 2 * context equal lines.
    let change_idx: Vec<usize> = ops
        .iter()
        .enumerate()
        .filter(|(_, op)| **op != Op::Equal)
        .map(|(i, _)| i)
        .collect();
    if change_idx.is_empty() {
        return None;
    }

    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut start = change_idx[0];
    let mut end = change_idx[0];
    for &idx in &change_idx[1..] {
        // Changes merge into one hunk until more than 2 * context equal
        // lines separate them; at exactly 2 * context the context regions
        // abut and stay merged.
        if idx - end - 1 > 2 * context {
            groups.push((start, end));
            start = idx;
        }
        end = idx;
    }
    groups.push((start, end));

    let mut out = format!("--- a/{path}\n+++ b/{path}\n");
    // Running line positions per op index.
    let mut old_pos = 0usize;
    let mut new_pos = 0usize;
    let mut positions = Vec::with_capacity(ops.len());
    for op in &ops {
        positions.push((old_pos, new_pos));
        match op {
            Op::Equal => {
                old_pos += 1;
                new_pos += 1;
            }
            Op::Delete => old_pos += 1,
            Op::Insert => new_pos += 1,
        }
    }
    positions.push((old_pos, new_pos));

    for (group_start, group_end) in groups {
        let hunk_begin = group_start.saturating_sub(context);
        let hunk_end = (group_end + context + 1).min(ops.len());
        let (old_begin, new_begin) = positions[hunk_begin];
        let (old_stop, new_stop) = positions[hunk_end];
        let old_count = old_stop - old_begin;
        let new_count = new_stop - new_begin;

        out.push_str(&format!(
            "@@ -{} +{} @@\n",
            range_label(old_begin, old_count),
            range_label(new_begin, new_count)
        ));
        for idx in hunk_begin..hunk_end {
            let (o, n) = positions[idx];
            let (sign, line) = match ops[idx] {
                Op::Equal => (' ', old_lines[o]),
                Op::Delete => ('-', old_lines[o]),
                Op::Insert => ('+', new_lines[n]),
            };
            out.push_str(&format!("{sign}{}\n", line.text));
            if !line.has_newline {
                out.push_str("\\ No newline at end of file\n");
            }
        }
    }
    Some(out)
}

fn range_label(begin: usize, count: usize) -> String {
    // Unified ranges are 1-based; an empty range names the line before it.
    let start = if count == 0 { begin } else { begin + 1 };
    if count == 1 {
        format!("{start}")
    } else {
        format!("{start},{count}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub old_start: usize,
    pub old_count: usize,
    pub new_start: usize,
    pub new_count: usize,
    pub lines: Vec<HunkLine>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HunkLine {
    pub op: HunkOp,
    pub text: String,
    /// Set when a `\ No newline at end of file` marker followed this line.
    pub no_newline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HunkOp {
    Context,
    Delete,
    Insert,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilePatch {
    pub path: String,
    pub hunks: Vec<Hunk>,
}

/// Parse a unified diff into per-file patches.
pub fn parse_unified_diff(diff: &str) -> Result<Vec<FilePatch>, ApplyError> {
    let mut patches: Vec<FilePatch> = Vec::new();
    let mut lines = diff.lines().peekable();
    while let Some(line) = lines.next() {
        if let Some(old_label) = line.strip_prefix("--- ") {
            let new_line = lines
                .next()
                .ok_or_else(|| ApplyError::Malformed("missing +++ line".to_string()))?;
            let new_label = new_line
                .strip_prefix("+++ ")
                .ok_or_else(|| ApplyError::Malformed(format!("expected +++, got {new_line:?}")))?;
            let path = strip_label(new_label, "b/")
                .or_else(|| strip_label(old_label, "a/"))
                .ok_or_else(|| ApplyError::Malformed("unusable path labels".to_string()))?;
            patches.push(FilePatch {
                path,
                hunks: Vec::new(),
            });
            continue;
        }
        if line.starts_with("@@") {
            let patch = patches
                .last_mut()
                .ok_or_else(|| ApplyError::Malformed("hunk before file header".to_string()))?;
            let (old_start, old_count, new_start, new_count) = parse_hunk_header(line)?;
            let mut hunk = Hunk {
                old_start,
                old_count,
                new_start,
                new_count,
                lines: Vec::new(),
            };
            let (mut seen_old, mut seen_new) = (0usize, 0usize);
            while seen_old < old_count || seen_new < new_count {
                let body = lines
                    .next()
                    .ok_or_else(|| ApplyError::Malformed("truncated hunk".to_string()))?;
                if let Some(rest) = body.strip_prefix(' ') {
                    hunk.lines.push(HunkLine {
                        op: HunkOp::Context,
                        text: rest.to_string(),
                        no_newline: false,
                    });
                    seen_old += 1;
                    seen_new += 1;
                } else if let Some(rest) = body.strip_prefix('-') {
                    hunk.lines.push(HunkLine {
                        op: HunkOp::Delete,
                        text: rest.to_string(),
                        no_newline: false,
                    });
                    seen_old += 1;
                } else if let Some(rest) = body.strip_prefix('+') {
                    hunk.lines.push(HunkLine {
                        op: HunkOp::Insert,
                        text: rest.to_string(),
                        no_newline: false,
                    });
                    seen_new += 1;
                } else if body.starts_with('\\') {
                    if let Some(last) = hunk.lines.last_mut() {
                        last.no_newline = true;
                    }
                } else if body.is_empty() {
                    // Some tools emit bare empty lines for empty context.
                    hunk.lines.push(HunkLine {
                        op: HunkOp::Context,
                        text: String::new(),
                        no_newline: false,
                    });
                    seen_old += 1;
                    seen_new += 1;
                } else {
                    return Err(ApplyError::Malformed(format!(
                        "unexpected hunk line {body:?}"
                    )));
                }
            }
            // Trailing no-newline marker for the last line.
            if let Some(peek) = lines.peek() {
                if peek.starts_with('\\') {
                    lines.next();
                    if let Some(last) = hunk.lines.last_mut() {
                        last.no_newline = true;
                    }
                }
            }
            patch.hunks.push(hunk);
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        return Err(ApplyError::Malformed(format!(
            "unexpected line outside hunks: {line:?}"
        )));
    }
    if patches.is_empty() {
        return Err(ApplyError::Malformed(
            "diff contains no file patches".to_string(),
        ));
    }
    Ok(patches)
}

fn strip_label(label: &str, prefix: &str) -> Option<String> {
    let label = label.split('\t').next().unwrap_or(label);
    label
        .strip_prefix(prefix)
        .map(str::to_string)
        .or_else(|| Some(label.to_string()).filter(|l| !l.is_empty() && *l != "/dev/null"))
}

fn parse_hunk_header(line: &str) -> Result<(usize, usize, usize, usize), ApplyError> {
    let malformed = || ApplyError::Malformed(format!("bad hunk header {line:?}"));
    let inner = line
        .strip_prefix("@@ -")
        .and_then(|rest| rest.split(" @@").next())
        .ok_or_else(malformed)?;
    let mut parts = inner.split(" +");
    let old = parts.next().ok_or_else(malformed)?;
    let new = parts.next().ok_or_else(malformed)?;
    let parse_range = |range: &str| -> Result<(usize, usize), ApplyError> {
        match range.split_once(',') {
            Some((start, count)) => Ok((
                start.parse().map_err(|_| malformed())?,
                count.parse().map_err(|_| malformed())?,
            )),
            None => Ok((range.parse().map_err(|_| malformed())?, 1)),
        }
    };
    let (old_start, old_count) = parse_range(old)?;
    let (new_start, new_count) = parse_range(new)?;
    Ok((old_start, old_count, new_start, new_count))
}

/// Apply one file patch to file content, strictly.
pub fn apply_file_patch(
    path: &str,
    content: &str,
    patch: &FilePatch,
) -> Result<String, ApplyError> {
    let (old_lines, old_trailing) = split_lines(content);
    let mut new_lines: Vec<String> = Vec::new();
    let mut new_trailing = true;
    let mut cursor = 0usize; // consumed old lines

    for hunk in &patch.hunks {
        let begin = if hunk.old_count == 0 {
            hunk.old_start
        } else {
            hunk.old_start.saturating_sub(1)
        };
        if begin < cursor {
            return Err(ApplyError::Malformed(
                "hunks overlap or are out of order".to_string(),
            ));
        }
        if begin > old_lines.len() {
            return Err(ApplyError::ContextMismatch {
                file: path.to_string(),
                line: hunk.old_start as u32,
                detail: format!("hunk starts past end of file ({} lines)", old_lines.len()),
            });
        }
        new_lines.extend(old_lines[cursor..begin].iter().map(|s| s.to_string()));
        cursor = begin;

        for hline in &hunk.lines {
            match hline.op {
                HunkOp::Context | HunkOp::Delete => {
                    let actual = old_lines.get(cursor).copied();
                    if actual != Some(hline.text.as_str()) {
                        return Err(ApplyError::ContextMismatch {
                            file: path.to_string(),
                            line: (cursor + 1) as u32,
                            detail: format!(
                                "expected {:?}, found {:?}",
                                hline.text,
                                actual.unwrap_or("<end of file>")
                            ),
                        });
                    }
                    cursor += 1;
                    if hline.op == HunkOp::Context {
                        new_lines.push(hline.text.clone());
                        if hline.no_newline {
                            new_trailing = false;
                        }
                    }
                }
                HunkOp::Insert => {
                    new_lines.push(hline.text.clone());
                    if hline.no_newline {
                        new_trailing = false;
                    }
                }
            }
        }
    }
    new_lines.extend(old_lines[cursor..].iter().map(|s| s.to_string()));
    // Untouched tail keeps the original trailing newline state.
    if cursor < old_lines.len() {
        new_trailing = old_trailing;
    }

    let mut result = new_lines.join("\n");
    if new_trailing && !new_lines.is_empty() {
        result.push('\n');
    }
    Ok(result)
}

/// Apply a whole diff against a workspace, in memory. Returns the new
/// content per file without writing anything.
pub fn apply_unified_diff(
    workspace: &Path,
    diff: &str,
) -> Result<Vec<(String, String)>, ApplyError> {
    let patches = parse_unified_diff(diff)?;
    let mut results = Vec::new();
    for patch in &patches {
        let full = workspace.join(&patch.path);
        let content = std::fs::read_to_string(&full).map_err(|source| ApplyError::Io {
            path: patch.path.clone(),
            source,
        })?;
        let updated = apply_file_patch(&patch.path, &content, patch)?;
        results.push((patch.path.clone(), updated));
    }
    Ok(results)
}
