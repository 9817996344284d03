//! Patch validation: a diff must apply cleanly against the workspace and
//! every modified file must still parse under its language grammar.

use std::path::Path;

use crate::graph::LanguageRegistry;

use super::diff::{apply_unified_diff, ApplyError};

/// First violated check, with file and line detail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationFailure {
    Apply {
        detail: String,
    },
    Syntax {
        file: String,
        line: u32,
        detail: String,
    },
}

impl std::fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ValidationFailure::Apply { detail } => {
                write!(f, "diff does not apply: {detail}")
            }
            ValidationFailure::Syntax { file, line, detail } => {
                write!(f, "syntax error in {file} line {line}: {detail}")
            }
        }
    }
}

/// Check that `diff` applies cleanly to the workspace (on an in-memory
/// scratch copy) and that each patched file re-parses. Files without a
/// registered language adapter only get the apply check.
pub fn validate_patch(
    workspace: &Path,
    diff: &str,
    languages: &LanguageRegistry,
) -> Result<(), ValidationFailure> {
    if diff.trim().is_empty() {
        return Err(ValidationFailure::Apply {
            detail: "diff is empty".to_string(),
        });
    }
    let applied = match apply_unified_diff(workspace, diff) {
        Ok(applied) => applied,
        Err(err) => {
            return Err(ValidationFailure::Apply {
                detail: apply_error_detail(err),
            });
        }
    };
    for (path, content) in &applied {
        if let Some(adapter) = languages.for_path(path) {
            if let Err(failure) = adapter.check_syntax(content) {
                return Err(ValidationFailure::Syntax {
                    file: path.clone(),
                    line: failure.line,
                    detail: failure.message,
                });
            }
        }
    }
    Ok(())
}

fn apply_error_detail(err: ApplyError) -> String {
    match err {
        ApplyError::ContextMismatch { file, line, detail } => {
            format!("{file}:{line}: {detail}")
        }
        other => other.to_string(),
    }
}
