use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{Clause, IntentSpec, ValueSelector};
use crate::error::{Error, Result};
use crate::metadata::MetadataSet;
use crate::predicate::coerce_to;
use crate::value::Value;

pub const MAX_SUGGESTION_DISTANCE: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Warning {
    pub clause: usize,
    pub message: String,
    pub suggestion: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedIntent {
    pub intent: IntentSpec,
    pub warnings: Vec<Warning>,
}

/// Edit distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.chars().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != *cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Nearest candidate by case-insensitive edit distance, within the maximum
/// distance; ties go to the lexicographically smaller candidate.
pub fn suggest<'a>(name: &str, candidates: impl IntoIterator<Item = &'a str>) -> Option<&'a str> {
    let lower = name.to_lowercase();
    candidates
        .into_iter()
        .map(|c| (levenshtein(&lower, &c.to_lowercase()), c))
        .filter(|(d, _)| *d <= MAX_SUGGESTION_DISTANCE)
        .min()
        .map(|(_, c)| c)
}

/// Checks names and filter values against the frame's metadata. Never
/// rewrites the intent. Fails only when no clause refers to a real column.
pub fn validate_intent(intent: &IntentSpec, meta: &MetadataSet) -> Result<ValidatedIntent> {
    let names: Vec<&str> = meta.columns.iter().map(|m| m.name.as_str()).collect();
    let mut warnings = Vec::new();
    let mut resolvable = 0;
    for (i, clause) in intent.clauses().iter().enumerate() {
        let attrs = clause.named_attributes();
        if attrs.is_empty() {
            resolvable += 1;
            continue;
        }
        let mut known = 0;
        for a in attrs {
            if meta.get(a).is_some() {
                known += 1;
                continue;
            }
            let suggestion = suggest(a, names.iter().copied()).map(ToString::to_string);
            let message = match &suggestion {
                Some(s) => format!("unknown attribute '{a}', did you mean {s}"),
                None => format!("unknown attribute '{a}'"),
            };
            warnings.push(Warning { clause: i, message, suggestion });
        }
        if known > 0 {
            resolvable += 1;
        }
        if let Clause::Filter(f) = clause {
            let ValueSelector::Named(values) = &f.value else { continue };
            for a in attrs {
                let Some(m) = meta.get(a) else { continue };
                if m.capped {
                    continue;
                }
                for v in values {
                    let known_value = coerce_to(&Value::Str(v.clone()), m.storage_type)
                        .is_some_and(|cv| m.unique_values.binary_search(&cv).is_ok());
                    if !known_value && f.op == crate::predicate::FilterOp::Eq {
                        let candidates: Vec<String> = m.unique_values.iter().map(Value::to_label).collect();
                        let suggestion = suggest(v, candidates.iter().map(String::as_str)).map(ToString::to_string);
                        warnings.push(Warning {
                            clause: i,
                            message: format!("value '{v}' does not occur in {a}"),
                            suggestion,
                        });
                    }
                }
            }
        }
    }
    if resolvable == 0 {
        let detail = warnings.iter().map(|w| w.message.as_str()).collect::<Vec<_>>().join("; ");
        return Err(Error::UnresolvableIntent(detail));
    }
    Ok(ValidatedIntent { intent: intent.clone(), warnings })
}
