use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{AttributeSelector, AxisClause, Clause, FilterClause, ValueSelector};
use crate::aggregate::Aggregation;
use crate::error::{Error, Result};
use crate::metadata::SemanticType;
use crate::predicate::FilterOp;
use crate::vis::Channel;

fn err<T>(position: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { position, message: message.into() })
}

fn is_op_char(c: char) -> bool {
    matches!(c, '=' | '<' | '>' | '!' | '≤' | '≥' | '≠')
}

/// Splits `s` (starting at byte `offset` of the clause) on `|`, trimming parts.
fn split_union(s: &str, offset: usize, what: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut start = 0;
    for part in s.split('|') {
        let name = part.trim();
        if name.is_empty() {
            return err(offset + start, alloc::format!("empty {what} in union"));
        }
        if let Some(p) = name.find(['?', '{', '}']) {
            let lead = part.len() - part.trim_start().len();
            return err(offset + start + lead + p, alloc::format!("unexpected character in {what}"));
        }
        out.push(name.to_string());
        start += part.len() + 1;
    }
    Ok(out)
}

/// Parses one clause of the textual intent syntax.
pub fn parse_clause(text: &str) -> Result<Clause> {
    if text.trim().is_empty() {
        return err(0, "empty clause");
    }
    let (head, options) = match text.find('{') {
        Some(open) => {
            let trimmed_end = text.trim_end();
            if !trimmed_end.ends_with('}') || trimmed_end.len() - 1 < open {
                return err(open, "unterminated option block");
            }
            let inner = &text[open + 1..trimmed_end.len() - 1];
            if let Some(p) = inner.find(['{', '}']) {
                return err(open + 1 + p, "nested braces in option block");
            }
            (&text[..open], Some((inner, open + 1)))
        }
        None => {
            if let Some(p) = text.find('}') {
                return err(p, "unmatched '}'");
            }
            (text, None)
        }
    };

    if let Some(op_start) = head.find(is_op_char) {
        if let Some((_, pos)) = options {
            return err(pos - 1, "options are only allowed on axis clauses");
        }
        let op_len: usize = head[op_start..].chars().take_while(|c| is_op_char(*c)).map(char::len_utf8).sum();
        let op_text = &head[op_start..op_start + op_len];
        let Ok(op) = op_text.parse::<FilterOp>() else {
            return err(op_start, alloc::format!("malformed operator '{op_text}'"));
        };
        let attr_text = &head[..op_start];
        if attr_text.trim().is_empty() {
            return err(0, "missing filter attribute");
        }
        if attr_text.trim() == "?" {
            return err(attr_text.find('?').unwrap_or(0), "filters need a named attribute");
        }
        let attributes = split_union(attr_text, 0, "attribute")?;
        let value_offset = op_start + op_len;
        let value_text = &head[value_offset..];
        if value_text.trim().is_empty() {
            return err(value_offset, "missing filter value");
        }
        let value = if value_text.trim() == "?" {
            if attributes.len() > 1 {
                return err(value_offset, "a wildcard value cannot be combined with a union of attributes");
            }
            if op != FilterOp::Eq {
                return err(op_start, "wildcard values are only supported with '='");
            }
            ValueSelector::Wildcard
        } else {
            ValueSelector::Named(split_union(value_text, value_offset, "value")?)
        };
        return Ok(Clause::Filter(FilterClause { attributes, op, value }));
    }

    let mut axis = if head.trim() == "?" {
        AxisClause { attribute: AttributeSelector::Wildcard(None), channel: None, aggregation: None, bin_size: None }
    } else {
        if head.trim().is_empty() {
            return err(0, "missing attribute");
        }
        AxisClause {
            attribute: AttributeSelector::Named(split_union(head, 0, "attribute")?),
            channel: None,
            aggregation: None,
            bin_size: None,
        }
    };
    if let Some((inner, offset)) = options {
        parse_options(&mut axis, inner, offset)?;
    }
    Ok(Clause::Axis(axis))
}

fn parse_options(axis: &mut AxisClause, inner: &str, offset: usize) -> Result<()> {
    let mut pos = offset;
    for item in inner.split(',') {
        let here = pos + (item.len() - item.trim_start().len());
        pos += item.len() + 1;
        if item.trim().is_empty() {
            if inner.trim().is_empty() {
                continue;
            }
            return err(here, "empty option");
        }
        let Some((key, value)) = item.split_once('=') else {
            return err(here, "options are written key=value");
        };
        let value = value.trim();
        match key.trim() {
            "channel" => {
                axis.channel = Some(value.parse::<Channel>().or_else(|_| err(here, alloc::format!("unknown channel '{value}'")))?)
            }
            "aggregation" => {
                axis.aggregation =
                    Some(value.parse::<Aggregation>().or_else(|_| err(here, alloc::format!("unknown aggregation '{value}'")))?)
            }
            "bin_size" => match value.parse::<u32>() {
                Ok(b) if b > 0 => axis.bin_size = Some(b),
                _ => return err(here, "bin_size must be a positive integer"),
            },
            "data_type" => {
                let t = value.parse::<SemanticType>().or_else(|_| err(here, alloc::format!("unknown data type '{value}'")))?;
                match &mut axis.attribute {
                    AttributeSelector::Wildcard(c) => *c = Some(t),
                    AttributeSelector::Named(_) => return err(here, "data_type constrains wildcards only"),
                }
            }
            other => return err(here, alloc::format!("unknown option '{other}'")),
        }
    }
    Ok(())
}
