//! The intent language: clauses describing attributes and data subsets of
//! interest, and their compilation into complete visualization specs.
//!
//! Textual clause syntax (whitespace around tokens is ignored):
//!
//! ```text
//! Age                         axis on one attribute
//! HourlyRate|DailyRate        axis over a union of attributes
//! ?                           axis over every attribute
//! ?{data_type=quantitative}   axis over attributes of one semantic type
//! Age{channel=y,aggregation=variance,bin_size=20}
//! Department=Sales            filter (ops: = > < <= >= !=)
//! Department=Sales|HR         filter over a union of values
//! Country=?                   filter over every value of Country
//! ```

mod compile;
mod parse;
mod validate;

pub use compile::{
    compile_intent, encoding_template, expand_intent, infer_encoding, lookup_defaults, AxisSpec, Compiled,
    PartialVisSpec, DEFAULT_HEATMAP_BINS, DEFAULT_HISTOGRAM_BINS, MAX_AXES, SCATTER_ROW_LIMIT, TOP_CATEGORIES,
};
pub use parse::parse_clause;
pub use validate::{levenshtein, suggest, validate_intent, ValidatedIntent, Warning, MAX_SUGGESTION_DISTANCE};

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::aggregate::Aggregation;
use crate::error::{Error, Result};
use crate::metadata::SemanticType;
use crate::predicate::FilterOp;
use crate::vis::Channel;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AttributeSelector {
    /// One attribute, or a union of several.
    Named(Vec<String>),
    /// Every attribute, optionally restricted to one semantic type.
    Wildcard(Option<SemanticType>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ValueSelector {
    Named(Vec<String>),
    Wildcard,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AxisClause {
    pub attribute: AttributeSelector,
    pub channel: Option<Channel>,
    pub aggregation: Option<Aggregation>,
    pub bin_size: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FilterClause {
    /// Filters never use a wildcard attribute; parsing rejects it.
    pub attributes: Vec<String>,
    pub op: FilterOp,
    pub value: ValueSelector,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Clause {
    Axis(AxisClause),
    Filter(FilterClause),
}

impl Clause {
    pub fn axis(name: &str) -> Clause {
        Clause::Axis(AxisClause {
            attribute: AttributeSelector::Named(alloc::vec![name.into()]),
            channel: None,
            aggregation: None,
            bin_size: None,
        })
    }

    pub fn wildcard(constraint: Option<SemanticType>) -> Clause {
        Clause::Axis(AxisClause { attribute: AttributeSelector::Wildcard(constraint), channel: None, aggregation: None, bin_size: None })
    }

    pub fn filter(name: &str, op: FilterOp, value: &str) -> Clause {
        Clause::Filter(FilterClause {
            attributes: alloc::vec![name.into()],
            op,
            value: ValueSelector::Named(alloc::vec![value.into()]),
        })
    }

    /// Attribute names mentioned by the clause (empty for wildcards).
    pub fn named_attributes(&self) -> &[String] {
        match self {
            Clause::Axis(AxisClause { attribute: AttributeSelector::Named(names), .. }) => names,
            Clause::Axis(_) => &[],
            Clause::Filter(f) => &f.attributes,
        }
    }

    /// Checks structural invariants shared by parsed and structured input.
    pub fn check(&self) -> Result<()> {
        let err = |message: &str| Err(Error::Parse { position: 0, message: message.into() });
        match self {
            Clause::Axis(a) => {
                if let AttributeSelector::Named(names) = &a.attribute {
                    if names.is_empty() || names.iter().any(|n| n.trim().is_empty()) {
                        return err("empty attribute name");
                    }
                }
                if a.bin_size == Some(0) {
                    return err("bin_size must be positive");
                }
            }
            Clause::Filter(f) => {
                if f.attributes.is_empty() || f.attributes.iter().any(|n| n.trim().is_empty()) {
                    return err("empty attribute name");
                }
                if f.value == ValueSelector::Wildcard && f.attributes.len() > 1 {
                    return err("a wildcard value cannot be combined with a union of attributes");
                }
                if f.value == ValueSelector::Wildcard && f.op != FilterOp::Eq {
                    return err("wildcard values are only supported with '='");
                }
                if let ValueSelector::Named(values) = &f.value {
                    if values.is_empty() {
                        return err("missing filter value");
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::Axis(a) => {
                let mut options: Vec<String> = Vec::new();
                match &a.attribute {
                    AttributeSelector::Named(names) => f.write_str(&names.join("|"))?,
                    AttributeSelector::Wildcard(constraint) => {
                        f.write_str("?")?;
                        if let Some(t) = constraint {
                            options.push(alloc::format!("data_type={t}"));
                        }
                    }
                }
                if let Some(c) = a.channel {
                    options.push(alloc::format!("channel={}", c.as_str()));
                }
                if let Some(agg) = a.aggregation {
                    options.push(alloc::format!("aggregation={agg}"));
                }
                if let Some(b) = a.bin_size {
                    options.push(alloc::format!("bin_size={b}"));
                }
                if !options.is_empty() {
                    write!(f, "{{{}}}", options.join(","))?;
                }
                Ok(())
            }
            Clause::Filter(c) => {
                write!(f, "{}{}", c.attributes.join("|"), c.op)?;
                match &c.value {
                    ValueSelector::Named(values) => f.write_str(&values.join("|")),
                    ValueSelector::Wildcard => f.write_str("?"),
                }
            }
        }
    }
}

/// A non-empty, ordered list of clauses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntentSpec {
    clauses: Vec<Clause>,
}

impl IntentSpec {
    pub fn new(clauses: Vec<Clause>) -> Result<IntentSpec> {
        if clauses.is_empty() {
            return Err(Error::Parse { position: 0, message: "an intent needs at least one clause".into() });
        }
        for c in &clauses {
            c.check()?;
        }
        Ok(IntentSpec { clauses })
    }

    /// Parses each string as one clause.
    pub fn parse<S: AsRef<str>>(texts: &[S]) -> Result<IntentSpec> {
        let clauses = texts.iter().map(|t| parse_clause(t.as_ref())).collect::<Result<Vec<_>>>()?;
        IntentSpec::new(clauses)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn axes(&self) -> impl Iterator<Item = &AxisClause> {
        self.clauses.iter().filter_map(|c| match c {
            Clause::Axis(a) => Some(a),
            Clause::Filter(_) => None,
        })
    }

    pub fn filters(&self) -> impl Iterator<Item = &FilterClause> {
        self.clauses.iter().filter_map(|c| match c {
            Clause::Filter(f) => Some(f),
            Clause::Axis(_) => None,
        })
    }
}

impl fmt::Display for IntentSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.clauses.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
